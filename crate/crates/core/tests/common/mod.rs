#![allow(dead_code)]

pub mod fixtures;
pub mod oracles;

use std::path::PathBuf;
use std::sync::Arc;

use citespan::corpus::{load_dataset, Dataset, Split};
use citespan::embed::{train_sgns, EmbedConfig, EmbeddingTable};
use citespan::lda::{fit_online, LdaConfig, TopicModel};
use citespan::preprocess::{preprocess_sentence, PreprocessConfig, TokenSequence};
use citespan::ranker::{ModelRegistry, OtherKind};
use citespan::wordnet::{load_lexicon, Lexicon};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn mini() -> Dataset {
    load_dataset(&data_dir().join("mini"), Split::Dev).unwrap()
}

pub fn fixture_lexicon() -> Lexicon {
    load_lexicon(&data_dir().join("wordnet-fixture")).unwrap()
}

/// Every sentence of every document, plus the citance texts, preprocessed.
pub fn background(ds: &Dataset, cfg: &PreprocessConfig) -> Vec<TokenSequence> {
    let mut out: Vec<TokenSequence> =
        ds.documents.values().flat_map(|d| d.sentences.iter().map(|s| preprocess_sentence(&s.text, cfg))).collect();
    out.extend(ds.citances.iter().map(|c| preprocess_sentence(&c.text, cfg)));
    out
}

pub fn mini_lda(ds: &Dataset, cfg: &PreprocessConfig) -> TopicModel {
    let lda_cfg = LdaConfig { n_topics: 4, passes: 10, batch_size: 8, seed: 2, ..Default::default() };
    fit_online(&background(ds, cfg), &lda_cfg).unwrap()
}

pub fn mini_embedding(ds: &Dataset, cfg: &PreprocessConfig) -> EmbeddingTable {
    let ecfg = EmbedConfig { dim: 8, epochs: 5, min_count: 1, seed: 3, ..Default::default() };
    train_sgns(&background(ds, cfg), &ecfg).unwrap().0
}

pub fn mini_registry(ds: &Dataset, cfg: &PreprocessConfig) -> ModelRegistry {
    let mut reg = ModelRegistry::new();
    reg.insert(OtherKind::Lda, "mini", Arc::new(mini_lda(ds, cfg)));
    reg.insert(OtherKind::We, "mini", Arc::new(mini_embedding(ds, cfg)));
    reg.set_lexicon(Arc::new(fixture_lexicon()));
    reg
}
