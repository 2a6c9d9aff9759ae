//! Word embeddings and Word Mover's Distance.

mod sgns;
pub mod transport;

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::TokenSequence;

pub use sgns::{train_sgns, TrainReport};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("training corpus has no tokens")]
    EmptyCorpus,
    #[error("only {0} term(s) reach min_count; need at least 2")]
    VocabTooSmall(usize),
    #[error("one side has no token in the embedding vocabulary")]
    NoVocabOverlapWithTable,
    #[error("term not in vocabulary: {0}")]
    UnknownTerm(String),
    #[error("invalid embedding configuration: {0}")]
    BadConfig(String),
    #[error("embedding file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub dim: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub min_count: usize,
    pub window: usize,
    pub initial_lr: f64,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig { dim: 200, epochs: 5, negatives: 5, min_count: 5, window: 5, initial_lr: 0.025, seed: 1 }
    }
}

impl EmbedConfig {
    /// Named presets: `we1` (15 epochs, 5 negatives, min_count 40) and
    /// `we2` (13 epochs, 4 negatives, min_count 60).
    pub fn preset(name: &str) -> Option<EmbedConfig> {
        let base = EmbedConfig::default();
        match name {
            "we1" | "WE-1" => Some(EmbedConfig { epochs: 15, negatives: 5, min_count: 40, ..base }),
            "we2" | "WE-2" => Some(EmbedConfig { epochs: 13, negatives: 4, min_count: 60, ..base }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dim < 1 || self.epochs < 1 || self.negatives < 1 || self.min_count < 1 || self.window < 1 {
            return Err(EmbedError::BadConfig("dim, epochs, negatives, min_count and window must be >= 1".into()));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(EmbedError::BadConfig("initial_lr must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub vocab: BTreeMap<String, usize>,
    vectors: Vec<f64>,
    pub config: EmbedConfig,
}

impl EmbeddingTable {
    /// `vectors` is row-major, one row of `config.dim` per vocabulary index.
    pub fn new(vocab: BTreeMap<String, usize>, vectors: Vec<f64>, config: EmbedConfig) -> Result<Self, EmbedError> {
        if vectors.len() != vocab.len() * config.dim {
            return Err(EmbedError::Format(format!(
                "{} values for {} terms of dimension {}",
                vectors.len(),
                vocab.len(),
                config.dim
            )));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Format("non-finite vector entry".into()));
        }
        let mut idx: Vec<usize> = vocab.values().copied().collect();
        idx.sort_unstable();
        if idx.iter().enumerate().any(|(i, &j)| i != j) {
            return Err(EmbedError::Format("vocabulary indices are not 0..n".into()));
        }
        Ok(EmbeddingTable { vocab, vectors, config })
    }

    /// Builds a table from `(term, vector)` pairs; rows keep the given order.
    pub fn from_rows<S: Into<String>>(rows: Vec<(S, Vec<f64>)>) -> Result<Self, EmbedError> {
        let dim = rows.first().map_or(0, |r| r.1.len());
        let mut vocab = BTreeMap::new();
        let mut vectors = Vec::with_capacity(rows.len() * dim);
        for (i, (t, v)) in rows.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EmbedError::Format("rows differ in dimension".into()));
            }
            if vocab.insert(t.into(), i).is_some() {
                return Err(EmbedError::Format("duplicate term".into()));
            }
            vectors.extend(v);
        }
        let config = EmbedConfig { dim, ..EmbedConfig::default() };
        EmbeddingTable::new(vocab, vectors, config)
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.vectors[index * self.dim()..(index + 1) * self.dim()]
    }

    pub fn vector(&self, term: &str) -> Option<&[f64]> {
        self.vocab.get(term).map(|&i| self.row(i))
    }

    fn terms_by_index(&self) -> Vec<&str> {
        let mut terms = vec![""; self.len()];
        for (t, &i) in &self.vocab {
            terms[i] = t;
        }
        terms
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64, EmbedError> {
        let va = self.vector(a).ok_or_else(|| EmbedError::UnknownTerm(a.into()))?;
        let vb = self.vector(b).ok_or_else(|| EmbedError::UnknownTerm(b.into()))?;
        Ok(cosine(va, vb))
    }

    /// The `n` terms closest to `term` by cosine, excluding the term itself.
    pub fn nearest(&self, term: &str, n: usize) -> Result<Vec<(String, f64)>, EmbedError> {
        let q = self.vector(term).ok_or_else(|| EmbedError::UnknownTerm(term.into()))?;
        let mut scored: Vec<(String, f64)> = self
            .vocab
            .iter()
            .filter(|(t, _)| t.as_str() != term)
            .map(|(t, &i)| (t.clone(), cosine(q, self.row(i))))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(n);
        Ok(scored)
    }

    /// `|V| dim` header, then `term v1 … v_dim` per line in index order.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<(), EmbedError> {
        writeln!(out, "{} {}", self.len(), self.dim())?;
        for (i, t) in self.terms_by_index().into_iter().enumerate() {
            write!(out, "{t}")?;
            for x in self.row(i) {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self, EmbedError> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| EmbedError::Format("empty file".into()))??;
        let mut h = header.split_whitespace().map(str::parse::<usize>);
        let (Some(Ok(n)), Some(Ok(dim)), None) = (h.next(), h.next(), h.next()) else {
            return Err(EmbedError::Format(format!("bad header: {header}")));
        };
        let mut rows = Vec::with_capacity(n);
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let term = parts.next().unwrap_or_default().to_string();
            let v: Vec<f64> = parts
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| EmbedError::Format(format!("line {}: {e}", ln + 2)))?;
            if v.len() != dim {
                return Err(EmbedError::Format(format!("line {}: expected {dim} values, got {}", ln + 2, v.len())));
            }
            rows.push((term, v));
        }
        if rows.len() != n {
            return Err(EmbedError::Format(format!("header says {n} rows, found {}", rows.len())));
        }
        let mut t = EmbeddingTable::from_rows(rows)?;
        t.config.dim = dim;
        Ok(t)
    }

    /// `magic[8] version:u32 config_len:u32 config_json n:u32 dim:u32`, then
    /// per term `len:u32 utf8`, then `n × dim` little-endian f64.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<(), EmbedError> {
        let cfg = serde_json::to_vec(&self.config).map_err(|e| EmbedError::Format(e.to_string()))?;
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(cfg.len() as u32).to_le_bytes())?;
        out.write_all(&cfg)?;
        out.write_all(&(self.len() as u32).to_le_bytes())?;
        out.write_all(&(self.dim() as u32).to_le_bytes())?;
        for t in self.terms_by_index() {
            out.write_all(&(t.len() as u32).to_le_bytes())?;
            out.write_all(t.as_bytes())?;
        }
        for x in &self.vectors {
            out.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self, EmbedError> {
        let mut buf = Vec::new();
        input.read_to_end(&mut buf)?;
        let mut cur = Cursor { buf: &buf, pos: 0 };
        if cur.take(8)? != MAGIC {
            return Err(EmbedError::Format("not an embedding file".into()));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(EmbedError::Format(format!("unsupported version {version}")));
        }
        let cfg_len = cur.u32()? as usize;
        let config: EmbedConfig =
            serde_json::from_slice(cur.take(cfg_len)?).map_err(|e| EmbedError::Format(format!("config: {e}")))?;
        let n = cur.u32()? as usize;
        let dim = cur.u32()? as usize;
        if dim != config.dim {
            return Err(EmbedError::Format("dimension disagrees with config".into()));
        }
        let mut vocab = BTreeMap::new();
        for i in 0..n {
            let len = cur.u32()? as usize;
            let t = std::str::from_utf8(cur.take(len)?).map_err(|_| EmbedError::Format("term is not UTF-8".into()))?;
            vocab.insert(t.to_string(), i);
        }
        let raw = cur.take(n * dim * 8)?;
        let vectors = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        EmbeddingTable::new(vocab, vectors, config)
    }

    /// Normalized bag of in-vocabulary words: (row index, weight) plus the raw counts.
    fn nbow(&self, tokens: &TokenSequence) -> Vec<(usize, u64)> {
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for t in tokens {
            if let Some(&i) = self.vocab.get(t.as_str()) {
                *counts.entry(i).or_default() += 1;
            }
        }
        counts.into_iter().collect()
    }
}

const MAGIC: &[u8; 8] = b"CSPNEMB\0";
const VERSION: u32 = 1;

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbedError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| EmbedError::Format("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, EmbedError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Word Mover's Distance: the exact earth mover's distance between the two
/// normalized bags of in-vocabulary words, with Euclidean ground cost.
///
/// Mass is scaled to integers (side a by |b|, side b by |a|) so the
/// transport problem is solved without rounding.
pub fn wmd(a: &TokenSequence, b: &TokenSequence, table: &EmbeddingTable) -> Result<f64, EmbedError> {
    let ba = table.nbow(a);
    let bb = table.nbow(b);
    if ba.is_empty() || bb.is_empty() {
        return Err(EmbedError::NoVocabOverlapWithTable);
    }
    let total_a: u64 = ba.iter().map(|x| x.1).sum();
    let total_b: u64 = bb.iter().map(|x| x.1).sum();
    if ba == bb {
        return Ok(0.0);
    }
    let supply: Vec<u64> = ba.iter().map(|&(_, c)| c * total_b).collect();
    let demand: Vec<u64> = bb.iter().map(|&(_, c)| c * total_a).collect();
    let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
    let cost: Vec<Vec<f64>> = ba
        .iter()
        .map(|&(i, _)| {
            bb.iter()
                .map(|&(j, _)| {
                    *cache.entry((i.min(j), i.max(j))).or_insert_with(|| euclidean(table.row(i), table.row(j)))
                })
                .collect()
        })
        .collect();
    let (c, _) = transport::min_cost_transport(&supply, &demand, &cost);
    Ok((c / (total_a * total_b) as f64).max(0.0))
}

/// `1 / (1 + wmd)`, or 0 when either side has no in-vocabulary token.
pub fn wmd_similarity(a: &TokenSequence, b: &TokenSequence, table: &EmbeddingTable) -> f64 {
    match wmd(a, b, table) {
        Ok(d) => distance_to_similarity(d),
        Err(_) => 0.0,
    }
}

pub fn distance_to_similarity(d: f64) -> f64 {
    1.0 / (1.0 + d)
}
