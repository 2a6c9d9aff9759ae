//! Character-frequency profiles and K-means, used to separate badly converted
//! documents (symbol-heavy text) from clean ones in a background corpus.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// 94 printable non-space ASCII characters plus one bucket for everything else.
pub const ALPHABET_SIZE: usize = 95;
const OTHER: usize = 94;
const MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFreqVector {
    pub doc_id: String,
    pub freqs: Vec<f64>,
}

pub fn char_freq_vector(doc_id: &str, text: &str) -> CharFreqVector {
    let mut counts = [0u64; ALPHABET_SIZE];
    let mut total = 0u64;
    for ch in text.chars() {
        let bucket = match ch {
            '!'..='~' => ch as usize - '!' as usize,
            _ => OTHER,
        };
        counts[bucket] += 1;
        total += 1;
    }
    let freqs =
        if total == 0 { vec![0.0; ALPHABET_SIZE] } else { counts.iter().map(|&c| c as f64 / total as f64).collect() };
    CharFreqVector { doc_id: doc_id.to_string(), freqs }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid, after every assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().enumerate().filter(|(i, _)| !chosen[*i]).map(|(_, d)| d).sum();
        let idx = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if chosen[i] || d <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if r < d {
                    break;
                }
                r -= d;
            }
            pick.expect("positive mass implies a candidate")
        } else {
            (0..n).find(|&i| !chosen[i]).expect("k <= n")
        };
        chosen[idx] = true;
        centroids.push(points[idx].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[idx]));
        }
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding. Stops when an assignment step
/// changes nothing or after 300 iterations. Deterministic for a fixed seed.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansFit, CorpusError> {
    let n = points.len();
    if k < 1 || k > n {
        return Err(CorpusError::BadK { k, n_docs: n });
    }
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut objective = Vec::new();
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(p, &centroids);
            if assignments[i] != j {
                assignments[i] = j;
                changed = true;
            }
            dists[i] = d;
        }

        // refill empty clusters with the point farthest from its centroid
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        for j in 0..k {
            if sizes[j] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| sizes[assignments[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                sizes[assignments[i]] -= 1;
                assignments[i] = j;
                sizes[j] = 1;
                dists[i] = 0.0;
                centroids[j] = points[i].clone();
                changed = true;
            }
        }
        objective.push(dists.iter().sum());
        if !changed {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &a) in points.iter().zip(&assignments) {
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for (j, sum) in sums.into_iter().enumerate() {
            centroids[j] = sum.into_iter().map(|s| s / sizes[j] as f64).collect();
        }
    }
    Ok(KMeansFit { assignments, centroids, objective, iterations })
}

/// Clusters documents by character-frequency profile.
pub fn char_freq_cluster(docs: &[CharFreqVector], k: usize, seed: u64) -> Result<BTreeMap<String, usize>, CorpusError> {
    let points: Vec<Vec<f64>> = docs.iter().map(|d| d.freqs.clone()).collect();
    let fit = kmeans(&points, k, seed)?;
    Ok(docs.iter().map(|d| d.doc_id.clone()).zip(fit.assignments).collect())
}
