//! Retrieval metrics at k, the bootstrap paired t-test and the annotator
//! title rule.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::corpus::{Dataset, Sid};
use crate::ranker::RankedList;

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const ANNOTATOR_THRESHOLD: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no gold annotation for citance {0}")]
    MissingGold(String),
    #[error("paired samples differ in length ({0} vs {1})")]
    Misaligned(usize, usize),
    #[error("no citance with gold annotations to resample")]
    EmptySample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Micro,
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub recall_at_k: f64,
    pub precision_at_k: f64,
    pub f1: f64,
    pub n_citances: usize,
    pub n_gold: usize,
    pub n_correct: usize,
    pub n_retrieved: usize,
    pub averaging: Averaging,
}

/// Retrieval counts for one citance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitanceHits {
    pub hits: usize,
    pub retrieved: usize,
    pub gold: usize,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-citance counts in run order. Citances whose gold set is empty are left out.
pub fn citance_hits(
    runs: &[RankedList],
    gold: &BTreeMap<String, BTreeSet<Sid>>,
) -> Result<Vec<(String, CitanceHits)>, EvalError> {
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        let g = gold.get(&run.citance_id).ok_or_else(|| EvalError::MissingGold(run.citance_id.clone()))?;
        if g.is_empty() {
            continue;
        }
        let hits = run.ranked.iter().filter(|(sid, _)| g.contains(sid)).count();
        out.push((run.citance_id.clone(), CitanceHits { hits, retrieved: run.ranked.len(), gold: g.len() }));
    }
    Ok(out)
}

pub fn aggregate(hits: &[CitanceHits], averaging: Averaging) -> EvalResult {
    let n_correct = hits.iter().map(|h| h.hits).sum();
    let n_retrieved = hits.iter().map(|h| h.retrieved).sum();
    let n_gold = hits.iter().map(|h| h.gold).sum();
    let (precision, recall) = match averaging {
        Averaging::Micro => (ratio(n_correct, n_retrieved), ratio(n_correct, n_gold)),
        Averaging::Macro => {
            let n = hits.len().max(1) as f64;
            (
                hits.iter().map(|h| ratio(h.hits, h.retrieved)).sum::<f64>() / n,
                hits.iter().map(|h| ratio(h.hits, h.gold)).sum::<f64>() / n,
            )
        }
    };
    EvalResult {
        recall_at_k: recall,
        precision_at_k: precision,
        f1: f1_score(precision, recall),
        n_citances: hits.len(),
        n_gold,
        n_correct,
        n_retrieved,
        averaging,
    }
}

pub fn evaluate(runs: &[RankedList], gold: &BTreeMap<String, BTreeSet<Sid>>) -> Result<EvalResult, EvalError> {
    evaluate_with(runs, gold, Averaging::Micro)
}

pub fn evaluate_with(
    runs: &[RankedList],
    gold: &BTreeMap<String, BTreeSet<Sid>>,
    averaging: Averaging,
) -> Result<EvalResult, EvalError> {
    let hits: Vec<CitanceHits> = citance_hits(runs, gold)?.into_iter().map(|(_, h)| h).collect();
    Ok(aggregate(&hits, averaging))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mean_diff: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub n_resamples: usize,
    /// Every resample gave the same difference, so no t statistic exists.
    pub degenerate: bool,
    pub mean_f1_a: f64,
    pub mean_f1_b: f64,
}

fn micro_f1(hits: &[CitanceHits], idx: &[usize]) -> f64 {
    let (mut c, mut r, mut g) = (0, 0, 0);
    for &i in idx {
        c += hits[i].hits;
        r += hits[i].retrieved;
        g += hits[i].gold;
    }
    f1_score(ratio(c, r), ratio(c, g))
}

/// Paired bootstrap over citances.
///
/// Resample `r` draws its citance indices from a ChaCha8 stream seeded with
/// `seed + r`, so results do not depend on thread count. Both systems are
/// scored on the same indices. The t statistic is computed over the `n`
/// per-resample F1 differences (A − B) and the two-sided p-value uses n − 1
/// degrees of freedom.
pub fn bootstrap_paired_test(
    a: &[CitanceHits],
    b: &[CitanceHits],
    n: usize,
    seed: u64,
) -> Result<BootstrapResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::Misaligned(a.len(), b.len()));
    }
    if a.is_empty() || n == 0 {
        return Err(EvalError::EmptySample);
    }
    let m = a.len();
    let pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let idx: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
            (micro_f1(a, &idx), micro_f1(b, &idx))
        })
        .collect();
    let diffs: Vec<f64> = pairs.iter().map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean_diff = diffs.iter().sum::<f64>() / nf;
    let mean_f1_a = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_f1_b = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let constant = diffs.iter().all(|&d| d == diffs[0]);
    let var = if n > 1 { diffs.iter().map(|d| (d - mean_diff).powi(2)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
    if constant || var == 0.0 {
        let zero = diffs[0] == 0.0;
        return Ok(BootstrapResult {
            mean_diff,
            t_statistic: 0.0,
            p_value: if zero { 1.0 } else { 0.0 },
            n_resamples: n,
            degenerate: true,
            mean_f1_a,
            mean_f1_b,
        });
    }
    let t = mean_diff / (var / nf).sqrt();
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).expect("n > 1 here");
    let p_value = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(BootstrapResult { mean_diff, t_statistic: t, p_value, n_resamples: n, degenerate: false, mean_f1_a, mean_f1_b })
}

/// Selections larger than `threshold` collapse to `{title_sid}`.
pub fn adjust_annotator(
    selections: &BTreeMap<String, BTreeSet<Sid>>,
    title_sid: Sid,
    threshold: usize,
) -> BTreeMap<String, BTreeSet<Sid>> {
    selections
        .iter()
        .map(|(id, sel)| {
            let adjusted = if sel.len() > threshold { BTreeSet::from([title_sid]) } else { sel.clone() };
            (id.clone(), adjusted)
        })
        .collect()
}

/// Applies the title rule to every citance of `dataset`, using the title
/// sentence of each citance's own reference document.
pub fn adjust_dataset_annotations(dataset: &mut Dataset, threshold: usize) -> usize {
    let mut changed = 0;
    for c in &mut dataset.citances {
        if c.gold_sids.len() <= threshold {
            continue;
        }
        let title = dataset.documents.get(&c.reference_doc_id).and_then(|d| d.title_sid());
        if let Some(t) = title {
            c.gold_sids = BTreeSet::from([t]);
            changed += 1;
        }
    }
    changed
}

pub const TSV_HEADER: &str = "config\tR@3\tP@3\tF1";

/// One table row with metrics as percentages to two decimals.
pub fn tsv_row(config: &str, r: &EvalResult) -> String {
    format!("{config}\t{:.2}\t{:.2}\t{:.2}", 100.0 * r.recall_at_k, 100.0 * r.precision_at_k, 100.0 * r.f1)
}

pub fn write_tsv<W: Write>(mut out: W, rows: &[(String, EvalResult)]) -> io::Result<()> {
    writeln!(out, "{TSV_HEADER}")?;
    for (c, r) in rows {
        writeln!(out, "{}", tsv_row(c, r))?;
    }
    Ok(())
}
