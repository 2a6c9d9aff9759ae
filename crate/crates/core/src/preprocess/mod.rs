//! Text → token pipeline: bracket stripping, tokenization, stopword removal,
//! optional synonym expansion and optional Porter2 stemming.

mod stopwords;
mod tokenize;

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sid;

pub use stopwords::{remove_stopwords, StopwordList};
pub use tokenize::{tokenize, Tokenizer};

/// Ordered lowercase tokens of one sentence or citance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn push(&mut self, token: String) {
        if !token.is_empty() {
            self.0.push(token);
        }
    }
}

impl FromIterator<String> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        TokenSequence(iter.into_iter().filter(|t| !t.is_empty()).collect())
    }
}

impl<'a> FromIterator<&'a str> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        iter.into_iter().map(String::from).collect()
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(v: Vec<String>) -> Self {
        v.into_iter().collect()
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Removes every bracketed span, brackets included. Nested spans go with their
/// enclosing span; an unclosed opener removes everything after it. A closer
/// with no opener is kept.
pub fn strip_brackets(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut stack: Vec<char> = Vec::new();
    for ch in text.chars() {
        match ch {
            '(' | '[' | '{' => stack.push(ch),
            ')' | ']' | '}' if !stack.is_empty() => {
                let open = match ch {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                if stack.last() == Some(&open) {
                    stack.pop();
                }
            }
            _ if stack.is_empty() => out.push(ch),
            _ => {}
        }
    }
    out
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Snowball English (Porter2) stem of one token.
pub fn stem_token(token: &str) -> String {
    stemmer().stem(token).into_owned()
}

pub fn stem(tokens: TokenSequence) -> TokenSequence {
    tokens.into_inner().iter().map(|t| stem_token(t)).collect()
}

/// Inclusive bounds on raw token count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LengthBounds {
    pub lower: usize,
    pub upper: usize,
}

impl LengthBounds {
    pub fn new(lower: usize, upper: usize) -> Result<Self, ConfigError> {
        if lower < 1 || lower > upper {
            return Err(ConfigError::new(0, format!("length bounds need 1 <= l <= u, got ({lower},{upper})")));
        }
        Ok(LengthBounds { lower, upper })
    }

    pub fn admits(&self, n_tokens: usize) -> bool {
        (self.lower..=self.upper).contains(&n_tokens)
    }
}

/// Keeps the sids whose token count lies within `bounds`. Callers pass
/// tokenized text before stopword removal.
pub fn length_filter(sentences: &[(Sid, TokenSequence)], bounds: LengthBounds) -> Vec<Sid> {
    sentences.iter().filter(|(_, t)| bounds.admits(t.len())).map(|(sid, _)| *sid).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad config string at position {position}: {message}")]
pub struct ConfigError {
    pub position: usize,
    pub message: String,
}

impl ConfigError {
    pub fn new(position: usize, message: impl Into<String>) -> Self {
        ConfigError { position, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub tokenizer: Tokenizer,
    pub stopwords: StopwordList,
    pub stem: bool,
    pub strip_brackets: bool,
    pub length_bounds: Option<LengthBounds>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            tokenizer: Tokenizer::WordPunct,
            stopwords: StopwordList::ListA,
            stem: false,
            strip_brackets: true,
            length_bounds: None,
        }
    }
}

/// Output of the preprocessing pipeline for one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    pub tokens: TokenSequence,
    /// Token count after tokenization, before stopword removal.
    pub raw_len: usize,
}

impl PreprocessConfig {
    /// Applies one `+`-separated token of the configuration grammar.
    /// Returns `Ok(false)` when the token is not a preprocessing token.
    pub(crate) fn apply_token(&mut self, token: &str, position: usize) -> Result<bool, ConfigError> {
        match token {
            "nltk_tok" => self.tokenizer = Tokenizer::WordPunct,
            "sk_tok" => self.tokenizer = Tokenizer::Pattern,
            "nltk_stop" => self.stopwords = StopwordList::ListA,
            "sk_stop" => self.stopwords = StopwordList::ListB,
            "st" => self.stem = true,
            "keep_brackets" => self.strip_brackets = false,
            t if t.starts_with('(') => {
                let inner = t
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| ConfigError::new(position, format!("unterminated bounds {t:?}")))?;
                let (l, u) = inner
                    .split_once(',')
                    .ok_or_else(|| ConfigError::new(position, format!("bounds need two values: {t:?}")))?;
                let parse = |s: &str, off: usize| {
                    s.trim().parse::<usize>().map_err(|_| ConfigError::new(position + off, format!("bad bound {s:?}")))
                };
                let lower = parse(l, 1)?;
                let upper = parse(u, 2 + l.len())?;
                self.length_bounds =
                    Some(LengthBounds::new(lower, upper).map_err(|e| ConfigError::new(position, e.message))?);
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub(crate) fn tokens(&self) -> Vec<String> {
        let mut out = vec![
            match self.stopwords {
                StopwordList::ListA => "nltk_stop",
                StopwordList::ListB => "sk_stop",
            }
            .to_string(),
            match self.tokenizer {
                Tokenizer::WordPunct => "nltk_tok",
                Tokenizer::Pattern => "sk_tok",
            }
            .to_string(),
        ];
        if self.stem {
            out.push("st".into());
        }
        if !self.strip_brackets {
            out.push("keep_brackets".into());
        }
        if let Some(b) = self.length_bounds {
            out.push(format!("({},{})", b.lower, b.upper));
        }
        out
    }

    /// strip_brackets → tokenize, keeping the raw token count.
    pub fn raw_tokens(&self, text: &str) -> TokenSequence {
        if self.strip_brackets {
            tokenize(&strip_brackets(text), self.tokenizer)
        } else {
            tokenize(text, self.tokenizer)
        }
    }

    /// Full pipeline with an expansion hook run after stopword removal and
    /// before stemming.
    pub fn run_with<F>(&self, text: &str, expand: F) -> Preprocessed
    where
        F: FnOnce(TokenSequence) -> TokenSequence,
    {
        let raw = self.raw_tokens(text);
        let raw_len = raw.len();
        let mut tokens = expand(remove_stopwords(raw, self.stopwords));
        if self.stem {
            tokens = stem(tokens);
        }
        Preprocessed { tokens, raw_len }
    }
}

/// strip_brackets → tokenize → remove_stopwords → stem (when enabled).
pub fn preprocess_sentence(text: &str, config: &PreprocessConfig) -> TokenSequence {
    config.run_with(text, |t| t).tokens
}

impl fmt::Display for PreprocessConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens().join("+"))
    }
}

impl FromStr for PreprocessConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = PreprocessConfig::default();
        let mut pos = 0;
        for tok in s.split('+') {
            if !cfg.apply_token(tok.trim(), pos)? {
                return Err(ConfigError::new(pos, format!("unknown token {tok:?}")));
            }
            pos += tok.len() + 1;
        }
        Ok(cfg)
    }
}
