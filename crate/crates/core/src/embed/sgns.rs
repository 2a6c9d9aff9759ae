//! Skip-gram with negative sampling, single worker.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbedConfig, EmbedError, EmbeddingTable};
use crate::preprocess::TokenSequence;

const PROBE_PAIRS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean negative-sampling loss on a fixed probe set after each epoch.
    pub epoch_losses: Vec<f64>,
    pub vocab_size: usize,
    pub tokens_per_epoch: usize,
}

/// Frequency-sorted vocabulary (ties by term) of terms seen `min_count` times.
fn count_vocab(corpus: &[TokenSequence], min_count: usize) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in corpus {
        for t in s.iter() {
            *counts.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, u64)> =
        counts.into_iter().filter(|&(_, c)| c >= min_count as u64).map(|(t, c)| (t.to_string(), c)).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    kept
}

struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Probe {
    center: usize,
    context: usize,
    negatives: Vec<usize>,
}

fn probe_loss(probes: &[Probe], syn0: &[f64], syn1: &[f64], dim: usize) -> f64 {
    let row = |m: &'_ [f64], i: usize| -> Vec<f64> { m[i * dim..(i + 1) * dim].to_vec() };
    let total: f64 = probes
        .iter()
        .map(|p| {
            let v = row(syn0, p.center);
            let mut l = -sigmoid(dot(&v, &row(syn1, p.context))).max(1e-12).ln();
            for &n in &p.negatives {
                l -= sigmoid(-dot(&v, &row(syn1, n))).max(1e-12).ln();
            }
            l
        })
        .sum();
    total / probes.len().max(1) as f64
}

pub fn train_sgns(corpus: &[TokenSequence], config: &EmbedConfig) -> Result<(EmbeddingTable, TrainReport), EmbedError> {
    config.validate()?;
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(EmbedError::EmptyCorpus);
    }
    let vocab_list = count_vocab(corpus, config.min_count);
    if vocab_list.len() < 2 {
        return Err(EmbedError::VocabTooSmall(vocab_list.len()));
    }
    let index: HashMap<&str, usize> = vocab_list.iter().enumerate().map(|(i, (t, _))| (t.as_str(), i)).collect();
    let sentences: Vec<Vec<usize>> =
        corpus.iter().map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect()).collect();
    let tokens_per_epoch: usize = sentences.iter().map(Vec::len).sum();
    let counts: Vec<u64> = vocab_list.iter().map(|(_, c)| *c).collect();
    let noise = NoiseTable::new(&counts);

    let dim = config.dim;
    let v = vocab_list.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut syn0: Vec<f64> = (0..v * dim).map(|_| (rng.random::<f64>() - 0.5) / dim as f64).collect();
    let mut syn1 = vec![0.0; v * dim];

    let mut probe_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let flat: Vec<(usize, usize)> =
        sentences.iter().enumerate().flat_map(|(si, s)| (0..s.len()).map(move |p| (si, p))).collect();
    let mut probes = Vec::new();
    for _ in 0..PROBE_PAIRS.min(flat.len() * 4) {
        let (si, p) = flat[probe_rng.random_range(0..flat.len())];
        let s = &sentences[si];
        if s.len() < 2 {
            continue;
        }
        let mut q = probe_rng.random_range(0..s.len() - 1);
        if q >= p {
            q += 1;
        }
        if (q as isize - p as isize).unsigned_abs() > config.window {
            continue;
        }
        let negatives = (0..config.negatives).map(|_| noise.sample(&mut probe_rng)).collect();
        probes.push(Probe { center: s[p], context: s[q], negatives });
    }

    let total_steps = (tokens_per_epoch * config.epochs).max(1) as f64;
    let min_lr = config.initial_lr / 100.0;
    let mut processed = 0usize;
    let mut grad = vec![0.0; dim];
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        for s in &sentences {
            for (pos, &center) in s.iter().enumerate() {
                let lr = config.initial_lr - (config.initial_lr - min_lr) * (processed as f64 / total_steps);
                processed += 1;
                let reach = rng.random_range(1..=config.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(s.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    // the context word's input vector predicts the center word, as in word2vec
                    let input = s[ctx_pos];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let in_row = input * dim..(input + 1) * dim;
                    for d in 0..=config.negatives {
                        let (target, label) = if d == 0 {
                            (center, 1.0)
                        } else {
                            let n = noise.sample(&mut rng);
                            if n == center {
                                continue;
                            }
                            (n, 0.0)
                        };
                        let out_row = target * dim..(target + 1) * dim;
                        let f = dot(&syn0[in_row.clone()], &syn1[out_row.clone()]);
                        let g = (label - sigmoid(f)) * lr;
                        for k in 0..dim {
                            grad[k] += g * syn1[out_row.start + k];
                            syn1[out_row.start + k] += g * syn0[in_row.start + k];
                        }
                    }
                    for k in 0..dim {
                        syn0[in_row.start + k] += grad[k];
                    }
                }
            }
        }
        epoch_losses.push(probe_loss(&probes, &syn0, &syn1, dim));
    }

    let vocab: BTreeMap<String, usize> = vocab_list.into_iter().enumerate().map(|(i, (t, _))| (t, i)).collect();
    let table = EmbeddingTable::new(vocab, syn0, config.clone())?;
    Ok((table, TrainReport { epoch_losses, vocab_size: v, tokens_per_epoch }))
}
