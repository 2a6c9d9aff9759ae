//! Independent reference implementations used as test oracles.

use citespan::embed::EmbeddingTable;
use citespan::preprocess::TokenSequence;

/// TFIDF cosine scores from a dense term × sentence matrix: raw counts times
/// ln(N/df), then explicit dot products and norms.
pub fn dense_tfidf_scores(sentences: &[Vec<usize>], query: &[usize], n_terms: usize) -> Vec<f64> {
    let n = sentences.len() as f64;
    let mut df = vec![0.0; n_terms];
    for s in sentences {
        for (t, d) in df.iter_mut().enumerate() {
            if s.contains(&t) {
                *d += 1.0;
            }
        }
    }
    let weigh = |toks: &[usize]| -> Vec<f64> {
        (0..n_terms)
            .map(|t| {
                let tf = toks.iter().filter(|&&x| x == t).count() as f64;
                if df[t] == 0.0 {
                    0.0
                } else {
                    tf * (n / df[t]).ln()
                }
            })
            .collect()
    };
    let q = weigh(query);
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    sentences
        .iter()
        .map(|s| {
            let v = weigh(s);
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if qn == 0.0 || vn == 0.0 {
                0.0
            } else {
                q.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / (qn * vn)
            }
        })
        .collect()
}

pub fn id_tokens(ids: &[usize]) -> TokenSequence {
    ids.iter().map(|i| format!("t{i}")).collect()
}

pub const WMD_TERMS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
pub const WMD_COORDS: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 1.0], [-1.0, -1.5], [2.5, -0.5]];

/// Six terms placed in the plane.
pub fn wmd_table() -> EmbeddingTable {
    EmbeddingTable::from_rows(WMD_TERMS.iter().zip(WMD_COORDS).map(|(t, c)| (*t, c.to_vec())).collect()).unwrap()
}

pub fn wmd_sentences() -> Vec<TokenSequence> {
    ["a b c", "a a d", "e f", "b c d e", "f", "c c c a", "d e f a", "b"]
        .iter()
        .map(|s| s.split_whitespace().collect())
        .collect()
}

/// Normalized bag of fixture terms as (term index, weight).
pub fn wmd_weights(tokens: &TokenSequence) -> Vec<(usize, f64)> {
    let mut c = [0.0; 6];
    for t in tokens.iter() {
        if let Some(i) = WMD_TERMS.iter().position(|x| x == t) {
            c[i] += 1.0;
        }
    }
    let total: f64 = c.iter().sum();
    c.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, &x)| (i, x / total)).collect()
}

fn wmd_dist(i: usize, j: usize) -> f64 {
    let (p, q) = (WMD_COORDS[i], WMD_COORDS[j]);
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Minimum over every basic feasible solution of the transportation polytope.
/// A basis is a set of n+m-1 cells forming a spanning tree of the bipartite
/// graph; its flows are found by repeatedly settling a leaf row or column.
pub fn transport_lp(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let size = n + m - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << cells.len()) {
        if mask.count_ones() as usize != size {
            continue;
        }
        let mut open: Vec<(usize, usize)> = (0..cells.len()).filter(|k| mask >> k & 1 == 1).map(|k| cells[k]).collect();
        let mut supply: Vec<f64> = a.iter().map(|x| x.1).collect();
        let mut demand: Vec<f64> = b.iter().map(|x| x.1).collect();
        let mut flows = Vec::new();
        let mut stuck = false;
        while !open.is_empty() {
            let row_leaf = open.iter().position(|&(i, _)| open.iter().filter(|c| c.0 == i).count() == 1);
            let leaf = row_leaf.map(|p| (p, true)).or_else(|| {
                open.iter().position(|&(_, j)| open.iter().filter(|c| c.1 == j).count() == 1).map(|p| (p, false))
            });
            let Some((p, is_row)) = leaf else {
                stuck = true;
                break;
            };
            let (i, j) = open.remove(p);
            let f = if is_row { supply[i] } else { demand[j] };
            supply[i] -= f;
            demand[j] -= f;
            flows.push((i, j, f));
        }
        let balanced = supply.iter().chain(&demand).all(|r| r.abs() < 1e-9);
        if stuck || !balanced || flows.iter().any(|f| f.2 < -1e-12) {
            continue;
        }
        best = best.min(flows.iter().map(|&(i, j, f)| f * wmd_dist(a[i].0, b[j].0)).sum());
    }
    best
}
