//! Per-citance sentence ranking with TFIDF, LDA, embeddings or a blend:
//!
//! ```text
//! score = λ · tfidf + (1 − λ) · other
//! ```

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Citance, Dataset, Document, Sid};
use crate::embed::{wmd_similarity, EmbeddingTable};
use crate::eval::{aggregate, citance_hits, Averaging, CitanceHits, EvalError, EvalResult};
use crate::lda::TopicModel;
use crate::preprocess::{ConfigError, TokenSequence};
use crate::tfidf::{cosine, sort_scored, TfidfModel};
use crate::wordnet::{expand_tokens, Lexicon};

pub use config::{OtherKind, RankerConfig, ScorerKind, DEFAULT_TOP_K};
pub use manifest::{score_histogram, HistogramBin, RunManifest, SweepManifest};

#[derive(Debug, Error)]
pub enum RankerError {
    #[error(transparent)]
    BadConfigString(#[from] ConfigError),
    #[error("lambda {0} outside [0, 1]")]
    BadLambda(f64),
    #[error("model not loaded: {0}")]
    MissingModel(String),
    #[error("reference document not in dataset: {0}")]
    MissingDocument(String),
    #[error("reference document {0} has no sentences")]
    EmptyDocument(String),
    #[error("a lambda sweep needs a hybrid scorer")]
    NotHybrid,
    #[error("top_k must be >= 1")]
    BadTopK,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn hybrid_score(tfidf_score: f64, other_score: f64, lambda: f64) -> Result<f64, RankerError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(RankerError::BadLambda(lambda));
    }
    Ok(lambda * tfidf_score + (1.0 - lambda) * other_score)
}

/// The 30 blend weights 0.70, 0.71, …, 0.99.
pub fn default_lambda_grid() -> Vec<f64> {
    (70..=99).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub citance_id: String,
    pub ranked: Vec<(Sid, f64)>,
}

/// A similarity model usable as the non-TFIDF scorer.
pub trait SimilarityScorer: Send + Sync {
    fn similarity(&self, citance: &TokenSequence, sentence: &TokenSequence) -> f64;

    /// Whether inputs should include WordNet expansion.
    fn wants_expansion(&self) -> bool;
}

impl SimilarityScorer for TopicModel {
    fn similarity(&self, citance: &TokenSequence, sentence: &TokenSequence) -> f64 {
        TopicModel::similarity(self, citance, sentence)
    }

    fn wants_expansion(&self) -> bool {
        false
    }
}

impl SimilarityScorer for EmbeddingTable {
    fn similarity(&self, citance: &TokenSequence, sentence: &TokenSequence) -> f64 {
        wmd_similarity(citance, sentence, self)
    }

    fn wants_expansion(&self) -> bool {
        true
    }
}

/// Loaded models, keyed by kind and id. Read-only while ranking.
#[derive(Clone, Default)]
pub struct ModelRegistry {
    models: BTreeMap<(OtherKind, String), Arc<dyn SimilarityScorer>>,
    lexicon: Option<Arc<Lexicon>>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kind: OtherKind, id: impl Into<String>, model: Arc<dyn SimilarityScorer>) {
        self.models.insert((kind, id.into()), model);
    }

    pub fn set_lexicon(&mut self, lexicon: Arc<Lexicon>) {
        self.lexicon = Some(lexicon);
    }

    fn model(&self, kind: OtherKind, id: &str) -> Result<&Arc<dyn SimilarityScorer>, RankerError> {
        self.models
            .get(&(kind, id.to_string()))
            .ok_or_else(|| RankerError::MissingModel(format!("{}:{id}", kind.prefix())))
    }

    fn lexicon_for(&self, config: &RankerConfig) -> Result<Option<&Lexicon>, RankerError> {
        if !(config.expansion.expands_citances() || config.expansion.expands_references()) {
            return Ok(None);
        }
        self.lexicon.as_deref().map(Some).ok_or_else(|| RankerError::MissingModel("wordnet".into()))
    }
}

/// Token views of one text under a ranking configuration.
#[derive(Debug, Clone)]
struct TextView {
    /// Possibly expanded; feeds TFIDF and expansion-aware scorers.
    expanded: TokenSequence,
    plain: TokenSequence,
    raw_len: usize,
}

fn text_view(text: &str, config: &RankerConfig, lexicon: Option<&Lexicon>, expand: bool) -> TextView {
    let pre = &config.preprocess;
    match lexicon.filter(|_| expand) {
        Some(lex) => {
            let dup = config.expansion.duplicate_original;
            let e = pre.run_with(text, |t| expand_tokens(&t, lex, dup));
            let p = pre.run_with(text, |t| t);
            TextView { expanded: e.tokens, plain: p.tokens, raw_len: e.raw_len }
        }
        None => {
            let p = pre.run_with(text, |t| t);
            TextView { expanded: p.tokens.clone(), plain: p.tokens, raw_len: p.raw_len }
        }
    }
}

/// A reference document preprocessed once for many citances.
pub struct PreparedDocument {
    pub doc_id: String,
    tfidf: TfidfModel,
    /// Sentences that pass the length filter, in sid order.
    candidates: Vec<(Sid, TextView)>,
}

impl PreparedDocument {
    pub fn candidate_sids(&self) -> Vec<Sid> {
        self.candidates.iter().map(|(s, _)| *s).collect()
    }
}

/// The TFIDF model is fit on every sentence of the document; the length
/// filter only removes candidates.
pub fn prepare_document(
    document: &Document,
    config: &RankerConfig,
    registry: &ModelRegistry,
) -> Result<PreparedDocument, RankerError> {
    let lexicon = registry.lexicon_for(config)?;
    let views: Vec<(Sid, TextView)> = document
        .sentences
        .iter()
        .map(|s| (s.sid, text_view(&s.text, config, lexicon, config.expansion.expands_references())))
        .collect();
    let all: Vec<TokenSequence> = views.iter().map(|(_, v)| v.expanded.clone()).collect();
    let tfidf = TfidfModel::fit(&all).map_err(|_| RankerError::EmptyDocument(document.doc_id.clone()))?;
    let candidates = views
        .into_iter()
        .filter(|(_, v)| config.preprocess.length_bounds.is_none_or(|b| b.admits(v.raw_len)))
        .collect();
    Ok(PreparedDocument { doc_id: document.doc_id.clone(), tfidf, candidates })
}

/// Unblended scores of one candidate sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub sid: Sid,
    pub tfidf: f64,
    pub other: f64,
}

/// Scores every candidate with TFIDF and with the configured other model.
/// Components the scorer does not use are 0.
pub fn component_scores(
    citance_text: &str,
    doc: &PreparedDocument,
    config: &RankerConfig,
    registry: &ModelRegistry,
) -> Result<Vec<ScoreRow>, RankerError> {
    let lexicon = registry.lexicon_for(config)?;
    let cit = text_view(citance_text, config, lexicon, config.expansion.expands_citances());
    let other = match config.scorer.model_key() {
        Some((kind, id)) => Some(registry.model(kind, id)?),
        None => None,
    };
    let needs_tfidf = matches!(config.scorer, ScorerKind::Tfidf | ScorerKind::Hybrid { .. });
    let q = needs_tfidf.then(|| doc.tfidf.vectorize(&cit.expanded));
    Ok(doc
        .candidates
        .iter()
        .map(|(sid, view)| {
            let tfidf = q.as_ref().map_or(0.0, |q| cosine(q, &doc.tfidf.vectorize(&view.expanded)));
            let other = other.map_or(0.0, |m| {
                let s = if m.wants_expansion() {
                    m.similarity(&cit.expanded, &view.expanded)
                } else {
                    m.similarity(&cit.plain, &view.plain)
                };
                if s.is_finite() {
                    s
                } else {
                    0.0
                }
            });
            ScoreRow { sid: *sid, tfidf, other }
        })
        .collect())
}

/// Applies the configured scorer to cached component scores.
pub fn blend(
    citance_id: &str,
    rows: &[ScoreRow],
    scorer: &ScorerKind,
    top_k: usize,
) -> Result<RankedList, RankerError> {
    if top_k == 0 {
        return Err(RankerError::BadTopK);
    }
    let mut scored: Vec<(Sid, f64)> = rows
        .iter()
        .map(|r| {
            let s = match scorer {
                ScorerKind::Tfidf => r.tfidf,
                ScorerKind::Lda { .. } | ScorerKind::We { .. } => r.other,
                ScorerKind::Hybrid { lambda, .. } => hybrid_score(r.tfidf, r.other, *lambda)?,
            };
            Ok((r.sid, s))
        })
        .collect::<Result<_, RankerError>>()?;
    sort_scored(&mut scored);
    scored.truncate(top_k);
    Ok(RankedList { citance_id: citance_id.to_string(), ranked: scored })
}

pub fn rank_citance(
    citance: &Citance,
    document: &Document,
    config: &RankerConfig,
    registry: &ModelRegistry,
) -> Result<RankedList, RankerError> {
    let doc = prepare_document(document, config, registry)?;
    let rows = component_scores(&citance.text, &doc, config, registry)?;
    blend(&citance.citance_id, &rows, &config.scorer, config.top_k)
}

fn prepare_all(
    dataset: &Dataset,
    config: &RankerConfig,
    registry: &ModelRegistry,
) -> Result<BTreeMap<String, PreparedDocument>, RankerError> {
    let mut ids: Vec<&str> = dataset.citances.iter().map(|c| c.reference_doc_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.par_iter()
        .map(|id| {
            let doc = dataset.document(id).ok_or_else(|| RankerError::MissingDocument(id.to_string()))?;
            Ok((id.to_string(), prepare_document(doc, config, registry)?))
        })
        .collect()
}

/// Component scores for every citance of the dataset, in citance order.
pub fn score_dataset(
    dataset: &Dataset,
    config: &RankerConfig,
    registry: &ModelRegistry,
) -> Result<Vec<(String, Vec<ScoreRow>)>, RankerError> {
    let docs = prepare_all(dataset, config, registry)?;
    dataset
        .citances
        .par_iter()
        .map(|c| {
            let doc = &docs[&c.reference_doc_id];
            Ok((c.citance_id.clone(), component_scores(&c.text, doc, config, registry)?))
        })
        .collect()
}

pub fn rank_dataset(
    dataset: &Dataset,
    config: &RankerConfig,
    registry: &ModelRegistry,
) -> Result<Vec<RankedList>, RankerError> {
    score_dataset(dataset, config, registry)?
        .iter()
        .map(|(id, rows)| blend(id, rows, &config.scorer, config.top_k))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub result: EvalResult,
}

/// Evaluates the hybrid `template` at each λ. Component scores are computed
/// once and re-blended per λ.
pub fn lambda_sweep(
    dataset: &Dataset,
    template: &RankerConfig,
    lambdas: &[f64],
    registry: &ModelRegistry,
) -> Result<Vec<SweepPoint>, RankerError> {
    if let Some(&bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(RankerError::BadLambda(bad));
    }
    if template.with_lambda(1.0).is_none() {
        return Err(RankerError::NotHybrid);
    }
    let scores = score_dataset(dataset, template, registry)?;
    let gold = dataset.gold();
    lambdas
        .iter()
        .map(|&lambda| {
            let cfg = template.with_lambda(lambda).expect("hybrid checked above");
            let runs: Vec<RankedList> =
                scores.iter().map(|(id, rows)| blend(id, rows, &cfg.scorer, cfg.top_k)).collect::<Result<_, _>>()?;
            let hits: Vec<CitanceHits> = citance_hits(&runs, &gold)?.into_iter().map(|(_, h)| h).collect();
            Ok(SweepPoint { lambda, result: aggregate(&hits, Averaging::Micro) })
        })
        .collect()
}
