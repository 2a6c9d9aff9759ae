use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use super::{RankedList, SweepPoint};

/// Record of one ranking run; the input to evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_string: String,
    pub top_k: usize,
    pub seed: u64,
    pub split: String,
    /// SHA-256 of the canonical dataset dump.
    pub dataset_hash: String,
    /// Model id (e.g. `lda:lda4`, `wordnet`) → SHA-256 of its files.
    pub model_hashes: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub runs: Vec<RankedList>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub config_template: String,
    pub seed: u64,
    pub split: String,
    pub dataset_hash: String,
    pub model_hashes: BTreeMap<String, String>,
    pub points: Vec<SweepPoint>,
}

fn write_pretty<T: Serialize, W: Write>(value: &T, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
}

impl RunManifest {
    pub fn write_json<W: Write>(&self, out: W) -> io::Result<()> {
        write_pretty(self, out)
    }

    pub fn read_json<R: Read>(input: R) -> serde_json::Result<Self> {
        serde_json::from_reader(input)
    }
}

impl SweepManifest {
    pub fn write_json<W: Write>(&self, out: W) -> io::Result<()> {
        write_pretty(self, out)
    }

    pub fn read_json<R: Read>(input: R) -> serde_json::Result<Self> {
        serde_json::from_reader(input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram over [0, 1]; values outside are clamped into the end bins.
pub fn score_histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &v in values.iter().filter(|v| v.is_finite()) {
        let i = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin { lo: i as f64 / bins as f64, hi: (i + 1) as f64 / bins as f64, count })
        .collect()
}
