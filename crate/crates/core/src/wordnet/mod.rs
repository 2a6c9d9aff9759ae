//! WordNet lookup, Lesk disambiguation and synonym expansion.

mod lexicon;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::preprocess::TokenSequence;

pub use lexicon::{normalize_lemma, Lexicon, LexiconError, Pos, Synset, SynsetId};

pub fn load_lexicon(dir: &Path) -> Result<Lexicon, LexiconError> {
    Lexicon::load(dir)
}

/// Which side of the comparison gets synonym expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordNetSide {
    #[default]
    None,
    RefOnly,
    CitOnly,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ExpansionMode {
    pub side: WordNetSide,
    /// Re-append the original token once when a synset is found.
    pub duplicate_original: bool,
}

impl ExpansionMode {
    pub fn expands_citances(&self) -> bool {
        matches!(self.side, WordNetSide::CitOnly | WordNetSide::Both)
    }

    pub fn expands_references(&self) -> bool {
        matches!(self.side, WordNetSide::RefOnly | WordNetSide::Both)
    }
}

fn counts<'a>(tokens: impl IntoIterator<Item = &'a String>) -> HashMap<&'a str, usize> {
    let mut m = HashMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

/// Simplified Lesk: the candidate synset (any part of speech) whose definition
/// shares the most tokens with `context`, counted as multiset intersection.
/// Ties go to the lowest synset id.
pub fn lesk_disambiguate(token: &str, context: &TokenSequence, lexicon: &Lexicon) -> Option<SynsetId> {
    let candidates = lexicon.lookup_all(token);
    let ctx = counts(context.iter());
    let mut best: Option<(usize, SynsetId)> = None;
    for id in candidates {
        let Some(syn) = lexicon.synset(id) else { continue };
        let overlap: usize =
            counts(syn.gloss_tokens.iter()).into_iter().map(|(t, n)| n.min(ctx.get(t).copied().unwrap_or(0))).sum();
        // candidates arrive in ascending id order, so strict > keeps the lowest on ties
        if best.is_none_or(|(b, _)| overlap > b) {
            best = Some((overlap, id));
        }
    }
    best.map(|(_, id)| id)
}

/// Appends the lemmas of each token's disambiguated synset.
///
/// A lemma is appended only if it is not already in the output, so a term
/// shared by several synsets contributes once. Multiword lemmas are split on
/// `_`. With `duplicate_original`, a token whose synset was found is appended
/// once more after its lemmas. The Lesk context is the input sequence.
pub fn expand_tokens(tokens: &TokenSequence, lexicon: &Lexicon, duplicate_original: bool) -> TokenSequence {
    let mut out: Vec<String> = tokens.to_vec();
    let mut present: HashSet<String> = tokens.iter().cloned().collect();
    for token in tokens {
        let Some(id) = lesk_disambiguate(token, tokens, lexicon) else { continue };
        let Some(syn) = lexicon.synset(id) else { continue };
        for lemma in &syn.lemmas {
            for part in lemma.to_lowercase().split('_').filter(|p| !p.is_empty()) {
                if present.insert(part.to_string()) {
                    out.push(part.to_string());
                }
            }
        }
        if duplicate_original {
            out.push(token.clone());
        }
    }
    TokenSequence::from(out)
}
