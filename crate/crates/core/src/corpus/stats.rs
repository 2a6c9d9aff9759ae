use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use super::{CorpusError, Dataset, Sid};
use crate::preprocess::TokenSequence;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionFrequency {
    pub title: String,
    /// Share of (citance, gold sentence) pairs falling in this section.
    pub percent: f64,
    pub pairs: usize,
    /// Distinct gold sentences in this section, counted once however often cited.
    pub distinct_sentences: usize,
}

/// Lowercases and drops one trailing `s`, so "Results" and "result" merge.
pub fn normalize_section_title(title: &str) -> String {
    let t = title.trim().to_lowercase();
    match t.strip_suffix('s') {
        Some(stem) if !stem.is_empty() => stem.to_string(),
        _ => t,
    }
}

/// Tallies the section of every gold-cited sentence, most frequent first.
pub fn section_frequency_report(dataset: &Dataset) -> Result<Vec<SectionFrequency>, CorpusError> {
    let mut pairs: BTreeMap<String, usize> = BTreeMap::new();
    let mut distinct: BTreeMap<String, BTreeSet<(&str, Sid)>> = BTreeMap::new();
    let mut total = 0usize;
    for c in &dataset.citances {
        let Some(doc) = dataset.document(&c.reference_doc_id) else { continue };
        for &sid in &c.gold_sids {
            let Some(s) = doc.sentence(sid) else { continue };
            let title = normalize_section_title(&s.section_title);
            *pairs.entry(title.clone()).or_default() += 1;
            distinct.entry(title).or_default().insert((doc.doc_id.as_str(), sid));
            total += 1;
        }
    }
    if total == 0 {
        return Err(CorpusError::NoAnnotations);
    }
    let mut rows: Vec<SectionFrequency> = pairs
        .into_iter()
        .map(|(title, n)| SectionFrequency {
            percent: 100.0 * n as f64 / total as f64,
            pairs: n,
            distinct_sentences: distinct[&title].len(),
            title,
        })
        .collect();
    rows.sort_by(|a, b| b.pairs.cmp(&a.pairs).then_with(|| a.title.cmp(&b.title)));
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparsityPoint {
    pub percent_sentences: f64,
    pub percent_vocabulary: f64,
}

/// For each x = i/n (i = 1..n), the largest vocabulary share y such that x of
/// the sentences each contain at least y·|V| unique words.
pub fn sparsity_report(sentences: &[TokenSequence]) -> Vec<SparsityPoint> {
    let vocab: HashSet<&str> = sentences.iter().flat_map(|s| s.iter().map(String::as_str)).collect();
    let n = sentences.len();
    if n == 0 {
        return Vec::new();
    }
    let v = vocab.len().max(1) as f64;
    let mut shares: Vec<f64> = sentences.iter().map(|s| s.iter().collect::<HashSet<_>>().len() as f64 / v).collect();
    shares.sort_by(|a, b| b.total_cmp(a));
    shares
        .into_iter()
        .enumerate()
        .map(|(i, share)| SparsityPoint {
            percent_sentences: 100.0 * (i + 1) as f64 / n as f64,
            percent_vocabulary: 100.0 * share,
        })
        .collect()
}
