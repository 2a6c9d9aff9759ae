//! Reference-span retrieval for citances.
//!
//! Given a sentence-segmented reference paper and the citances that cite it,
//! the crate ranks the paper's sentences by relevance to each citance and
//! evaluates those rankings against gold annotations.
//!
//! Scorers:
//! - [`tfidf`]: sentence-level TFIDF with cosine similarity, the reference
//!   document acting as the corpus.
//! - [`lda`]: online variational Bayes LDA; sentences are compared in topic space.
//! - [`embed`]: skip-gram negative-sampling embeddings compared with the exact
//!   Word Mover's Distance.
//! - [`ranker`]: any of the above, or a λ-blend of TFIDF with one of the others.
//!
//! [`eval`] computes micro-averaged R@k / P@k / F1 and a paired bootstrap test.

pub mod corpus;
pub mod embed;
pub mod eval;
pub mod hash;
pub mod lda;
pub mod preprocess;
pub mod ranker;
pub mod tfidf;
pub mod wordnet;

pub use corpus::{Citance, Dataset, Document, SectionKind, Sentence, Sid, Split};
pub use embed::{EmbedConfig, EmbeddingTable};
pub use eval::{BootstrapResult, EvalResult};
pub use lda::{LdaConfig, TopicModel, TopicVector};
pub use preprocess::{PreprocessConfig, StopwordList, TokenSequence, Tokenizer};
pub use ranker::{RankedList, RankerConfig, ScorerKind};
pub use tfidf::{SparseVector, TfidfModel};
pub use wordnet::{ExpansionMode, Lexicon};
