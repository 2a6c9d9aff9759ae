//! Exact transportation problem via successive shortest paths.

const INF: f64 = f64::INFINITY;

struct Edge {
    to: usize,
    cap: u64,
    cost: f64,
}

struct Graph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Graph { edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add(&mut self, from: usize, to: usize, cap: u64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
    }
}

/// Minimum total cost of shipping integer `supply` to integer `demand` over a
/// complete bipartite network with nonnegative unit `cost[i][j]`.
///
/// Returns the optimal cost and the flow matrix. Panics if the totals differ.
pub fn min_cost_transport(supply: &[u64], demand: &[u64], cost: &[Vec<f64>]) -> (f64, Vec<Vec<u64>>) {
    let total: u64 = supply.iter().sum();
    assert_eq!(total, demand.iter().sum::<u64>(), "unbalanced transport problem");
    let (n, m) = (supply.len(), demand.len());
    let src = n + m;
    let sink = src + 1;
    let nodes = sink + 1;
    let mut g = Graph::new(nodes);
    for (i, &s) in supply.iter().enumerate() {
        g.add(src, i, s, 0.0);
    }
    for i in 0..n {
        for j in 0..m {
            g.add(i, n + j, u64::MAX, cost[i][j]);
        }
    }
    for (j, &d) in demand.iter().enumerate() {
        g.add(n + j, sink, d, 0.0);
    }

    let mut potential = vec![0.0; nodes];
    let mut shipped = 0u64;
    let mut total_cost = 0.0;
    while shipped < total {
        // dense Dijkstra on reduced costs
        let mut dist = vec![INF; nodes];
        let mut prev_edge = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        dist[src] = 0.0;
        loop {
            let mut u = usize::MAX;
            for v in 0..nodes {
                if !done[v] && dist[v] < INF && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &e in &g.adj[u] {
                let edge = &g.edges[e];
                if edge.cap == 0 || done[edge.to] {
                    continue;
                }
                let reduced = (edge.cost + potential[u] - potential[edge.to]).max(0.0);
                let nd = dist[u] + reduced;
                if nd < dist[edge.to] {
                    dist[edge.to] = nd;
                    prev_edge[edge.to] = e;
                }
            }
        }
        assert!(dist[sink] < INF, "no augmenting path in a balanced transport problem");
        for v in 0..nodes {
            if dist[v] < INF {
                potential[v] += dist[v];
            }
        }
        let mut push = total - shipped;
        let mut v = sink;
        while v != src {
            let e = prev_edge[v];
            push = push.min(g.edges[e].cap);
            v = g.edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != src {
            let e = prev_edge[v];
            g.edges[e].cap -= push;
            g.edges[e ^ 1].cap += push;
            total_cost += push as f64 * g.edges[e].cost;
            v = g.edges[e ^ 1].to;
        }
        shipped += push;
    }

    let mut flow = vec![vec![0u64; m]; n];
    for i in 0..n {
        for &e in &g.adj[i] {
            let to = g.edges[e].to;
            if e % 2 == 0 && (n..n + m).contains(&to) {
                flow[i][to - n] = g.edges[e ^ 1].cap;
            }
        }
    }
    (total_cost, flow)
}
