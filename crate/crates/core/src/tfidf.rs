//! Sentence-level TFIDF. Each sentence of the reference document is a
//! "document" and the reference document is the corpus:
//!
//! ```text
//! w(t, s) = tf(t, s) · ln(N / df(t))
//! ```
//!
//! with raw counts for tf and no idf smoothing.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sid;
use crate::preprocess::TokenSequence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TfidfError {
    #[error("cannot fit TFIDF on zero sentences")]
    EmptyCorpus,
}

/// Sparse term → weight map. Zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    weights: BTreeMap<String, f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: impl Into<String>, weight: f64) {
        let term = term.into();
        if weight == 0.0 {
            self.weights.remove(&term);
        } else {
            self.weights.insert(term, weight);
        }
    }

    pub fn get(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().map(|(t, w)| w * large.get(t)).sum()
    }

    pub fn scaled(&self, c: f64) -> SparseVector {
        let mut out = SparseVector::new();
        for (t, w) in self.iter() {
            out.insert(t, w * c);
        }
        out
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for SparseVector {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        let mut v = SparseVector::new();
        for (t, w) in iter {
            v.insert(t, w);
        }
        v
    }
}

/// Cosine of the angle between two vectors; 0 when either is empty.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (a.dot(b) / denom).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    doc_freq: HashMap<String, u32>,
    n_sentences: u32,
}

impl TfidfModel {
    pub fn fit(sentences: &[TokenSequence]) -> Result<TfidfModel, TfidfError> {
        if sentences.is_empty() {
            return Err(TfidfError::EmptyCorpus);
        }
        let mut doc_freq: HashMap<String, u32> = HashMap::new();
        for s in sentences {
            let mut seen: Vec<&String> = s.iter().collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *doc_freq.entry(t.clone()).or_default() += 1;
            }
        }
        Ok(TfidfModel { doc_freq, n_sentences: sentences.len() as u32 })
    }

    pub fn n_sentences(&self) -> u32 {
        self.n_sentences
    }

    pub fn df(&self, term: &str) -> Option<u32> {
        self.doc_freq.get(term).copied()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.df(term).map(|df| (self.n_sentences as f64 / df as f64).ln())
    }

    /// Terms unknown to the model are skipped; terms present in every
    /// sentence get weight 0 and are therefore absent from the result.
    pub fn vectorize(&self, tokens: &TokenSequence) -> SparseVector {
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_default() += 1;
        }
        tf.into_iter().filter_map(|(t, c)| self.idf(t).map(|idf| (t, c as f64 * idf))).collect()
    }

    /// Writes `term\tdf\tidf` rows sorted by term.
    pub fn write_idf_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut terms: Vec<_> = self.doc_freq.iter().collect();
        terms.sort();
        for (t, df) in terms {
            writeln!(out, "{t}\t{df}\t{}", (self.n_sentences as f64 / *df as f64).ln())?;
        }
        Ok(())
    }
}

/// Sorts descending by score, ties by ascending sid.
pub fn sort_scored(scored: &mut [(Sid, f64)]) {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// Cosine between the citance and every candidate, best first.
pub fn score_citance(
    citance_tokens: &TokenSequence,
    candidates: &[(Sid, TokenSequence)],
    model: &TfidfModel,
) -> Vec<(Sid, f64)> {
    let q = model.vectorize(citance_tokens);
    let mut scored: Vec<(Sid, f64)> =
        candidates.iter().map(|(sid, toks)| (*sid, cosine(&q, &model.vectorize(toks)))).collect();
    sort_scored(&mut scored);
    scored
}
