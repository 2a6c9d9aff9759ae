use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::TokenSequence;

const LIST_A: &str = include_str!("../../data/stopwords_list_a.txt");
const LIST_B: &str = include_str!("../../data/stopwords_list_b.txt");

/// Bundled stopword snapshots. `ListA` is the 179-word list shipped with NLTK
/// (config name `nltk_stop`); `ListB` the 318-word scikit-learn list (`sk_stop`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopwordList {
    ListA,
    ListB,
}

fn parse(data: &'static str) -> HashSet<&'static str> {
    data.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

impl StopwordList {
    pub fn words(self) -> &'static HashSet<&'static str> {
        static A: OnceLock<HashSet<&'static str>> = OnceLock::new();
        static B: OnceLock<HashSet<&'static str>> = OnceLock::new();
        match self {
            StopwordList::ListA => A.get_or_init(|| parse(LIST_A)),
            StopwordList::ListB => B.get_or_init(|| parse(LIST_B)),
        }
    }

    pub fn contains(self, token: &str) -> bool {
        self.words().contains(token)
    }
}

pub fn remove_stopwords(tokens: TokenSequence, list: StopwordList) -> TokenSequence {
    let words = list.words();
    TokenSequence::from_iter(tokens.into_inner().into_iter().filter(|t| !words.contains(t.as_str())))
}
