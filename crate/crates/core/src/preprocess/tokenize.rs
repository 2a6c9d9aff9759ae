use serde::{Deserialize, Serialize};

use super::TokenSequence;

/// The two tokenizers selectable in a configuration string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Maximal runs of word characters, or maximal runs of other non-space
    /// characters (`\w+|[^\w\s]+`). Config name `nltk_tok`.
    WordPunct,
    /// Runs of two or more word characters (`\b\w\w+\b`). Config name `sk_tok`.
    Pattern,
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

#[derive(PartialEq, Clone, Copy)]
enum Class {
    Word,
    Space,
    Punct,
}

fn class(c: char) -> Class {
    if is_word(c) {
        Class::Word
    } else if c.is_whitespace() {
        Class::Space
    } else {
        Class::Punct
    }
}

/// Splits `text` into (class, run) pairs.
fn runs(text: &str) -> impl Iterator<Item = (Class, &str)> {
    let mut rest = text;
    std::iter::from_fn(move || {
        let first = rest.chars().next()?;
        let cls = class(first);
        let end = rest.char_indices().find(|&(_, c)| class(c) != cls).map_or(rest.len(), |(i, _)| i);
        let (run, tail) = rest.split_at(end);
        rest = tail;
        Some((cls, run))
    })
}

pub fn tokenize(text: &str, tokenizer: Tokenizer) -> TokenSequence {
    let tokens = runs(text).filter_map(|(cls, run)| match (tokenizer, cls) {
        (_, Class::Space) => None,
        (Tokenizer::WordPunct, _) => Some(run.to_lowercase()),
        (Tokenizer::Pattern, Class::Word) if run.chars().count() >= 2 => Some(run.to_lowercase()),
        (Tokenizer::Pattern, _) => None,
    });
    TokenSequence::from_iter(tokens)
}
