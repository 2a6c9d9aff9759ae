use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::preprocess::{ConfigError, PreprocessConfig};
use crate::wordnet::{ExpansionMode, WordNetSide};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OtherKind {
    Lda,
    We,
}

impl OtherKind {
    pub fn prefix(&self) -> &'static str {
        match self {
            OtherKind::Lda => "lda",
            OtherKind::We => "we",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScorerKind {
    Tfidf,
    Lda { id: String },
    We { id: String },
    Hybrid { other: OtherKind, id: String, lambda: f64 },
}

impl ScorerKind {
    /// Registry key of the non-TFIDF model, if any.
    pub fn model_key(&self) -> Option<(OtherKind, &str)> {
        match self {
            ScorerKind::Tfidf => None,
            ScorerKind::Lda { id } => Some((OtherKind::Lda, id)),
            ScorerKind::We { id } => Some((OtherKind::We, id)),
            ScorerKind::Hybrid { other, id, .. } => Some((*other, id)),
        }
    }
}

pub const DEFAULT_TOP_K: usize = 3;

/// Parsed form of a configuration string such as
/// `tfidf+nltk_stop+nltk_tok+cit_wn+(8,70)` or `tfidf+sk_tok+st+lda:lda4@0.93`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerConfig {
    pub preprocess: PreprocessConfig,
    pub expansion: ExpansionMode,
    pub scorer: ScorerKind,
    pub top_k: usize,
}

impl RankerConfig {
    pub fn tfidf(preprocess: PreprocessConfig) -> Self {
        RankerConfig {
            preprocess,
            expansion: ExpansionMode::default(),
            scorer: ScorerKind::Tfidf,
            top_k: DEFAULT_TOP_K,
        }
    }

    /// Same configuration with the hybrid blend weight replaced.
    pub fn with_lambda(&self, lambda: f64) -> Option<RankerConfig> {
        match &self.scorer {
            ScorerKind::Hybrid { other, id, .. } => Some(RankerConfig {
                scorer: ScorerKind::Hybrid { other: *other, id: id.clone(), lambda },
                ..self.clone()
            }),
            _ => None,
        }
    }
}

fn parse_model_ref(tok: &str, pos: usize) -> Result<Option<(OtherKind, String, Option<f64>)>, ConfigError> {
    let (kind, rest) = if let Some(r) = tok.strip_prefix("lda:") {
        (OtherKind::Lda, r)
    } else if let Some(r) = tok.strip_prefix("we:") {
        (OtherKind::We, r)
    } else {
        return Ok(None);
    };
    let id_pos = pos + kind.prefix().len() + 1;
    let (id, lambda) = match rest.split_once('@') {
        Some((id, l)) => {
            let lpos = id_pos + id.len() + 1;
            let v: f64 = l.parse().map_err(|_| ConfigError::new(lpos, format!("bad lambda {l:?}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::new(lpos, format!("lambda {v} outside [0, 1]")));
            }
            (id, Some(v))
        }
        None => (rest, None),
    };
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
        return Err(ConfigError::new(id_pos, format!("bad model id {id:?}")));
    }
    Ok(Some((kind, id.to_string(), lambda)))
}

impl FromStr for RankerConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut preprocess = PreprocessConfig::default();
        let mut side: Option<WordNetSide> = None;
        let mut duplicate_original = false;
        let mut tfidf = false;
        let mut other: Option<(usize, OtherKind, String, Option<f64>)> = None;
        let mut pos = 0;
        for raw in s.split('+') {
            let tok = raw.trim();
            let tpos = pos + (raw.len() - raw.trim_start().len());
            pos += raw.len() + 1;
            if tok.is_empty() {
                return Err(ConfigError::new(tpos, "empty token"));
            }
            if preprocess.apply_token(tok, tpos)? {
                continue;
            }
            let wn = match tok {
                "cit_wn" | "wn_cit" => Some(WordNetSide::CitOnly),
                "ref_wn" | "wn_ref" => Some(WordNetSide::RefOnly),
                "both_wn" | "wn_both" => Some(WordNetSide::Both),
                _ => None,
            };
            if let Some(w) = wn {
                if side.is_some_and(|prev| prev != w) {
                    return Err(ConfigError::new(tpos, "conflicting WordNet modes"));
                }
                side = Some(w);
                continue;
            }
            match tok {
                "dup_wn" => duplicate_original = true,
                "tfidf" => tfidf = true,
                _ => match parse_model_ref(tok, tpos)? {
                    Some((k, id, l)) => {
                        if other.is_some() {
                            return Err(ConfigError::new(tpos, "only one lda/we scorer allowed"));
                        }
                        other = Some((tpos, k, id, l));
                    }
                    None => return Err(ConfigError::new(tpos, format!("unknown token {tok:?}"))),
                },
            }
        }
        if duplicate_original && side.is_none() {
            return Err(ConfigError::new(0, "dup_wn needs a WordNet mode"));
        }
        let scorer = match (tfidf, other) {
            (true, None) => ScorerKind::Tfidf,
            (false, None) => return Err(ConfigError::new(0, "no scorer (expected tfidf, lda:<id> or we:<id>)")),
            (true, Some((_, k, id, Some(lambda)))) => ScorerKind::Hybrid { other: k, id, lambda },
            (true, Some((p, _, _, None))) => return Err(ConfigError::new(p, "hybrid needs @lambda")),
            (false, Some((p, _, _, Some(_)))) => return Err(ConfigError::new(p, "@lambda needs tfidf in the config")),
            (false, Some((_, OtherKind::Lda, id, None))) => ScorerKind::Lda { id },
            (false, Some((_, OtherKind::We, id, None))) => ScorerKind::We { id },
        };
        Ok(RankerConfig {
            preprocess,
            expansion: ExpansionMode { side: side.unwrap_or_default(), duplicate_original },
            scorer,
            top_k: DEFAULT_TOP_K,
        })
    }
}

impl fmt::Display for RankerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if matches!(self.scorer, ScorerKind::Tfidf | ScorerKind::Hybrid { .. }) {
            parts.push("tfidf".into());
        }
        let mut pre = self.preprocess.tokens();
        let bounds = if self.preprocess.length_bounds.is_some() { pre.pop() } else { None };
        parts.extend(pre);
        match self.expansion.side {
            WordNetSide::None => {}
            WordNetSide::CitOnly => parts.push("cit_wn".into()),
            WordNetSide::RefOnly => parts.push("ref_wn".into()),
            WordNetSide::Both => parts.push("both_wn".into()),
        }
        if self.expansion.duplicate_original {
            parts.push("dup_wn".into());
        }
        parts.extend(bounds);
        match &self.scorer {
            ScorerKind::Tfidf => {}
            ScorerKind::Lda { id } => parts.push(format!("lda:{id}")),
            ScorerKind::We { id } => parts.push(format!("we:{id}")),
            ScorerKind::Hybrid { other, id, lambda } => parts.push(format!("{}:{id}@{lambda}", other.prefix())),
        }
        f.write_str(&parts.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{LengthBounds, StopwordList, Tokenizer};

    #[test]
    fn table_rows_parse() {
        let c: RankerConfig = "tfidf+nltk_stop+nltk_tok+cit_wn+(8,70)".parse().unwrap();
        assert_eq!(c.scorer, ScorerKind::Tfidf);
        assert_eq!(c.expansion.side, WordNetSide::CitOnly);
        assert_eq!(c.preprocess.length_bounds, Some(LengthBounds { lower: 8, upper: 70 }));
        assert_eq!(c.to_string(), "tfidf+nltk_stop+nltk_tok+cit_wn+(8,70)");

        let c: RankerConfig = "tfidf+sk_stop+sk_tok+st+lda:lda4@0.93".parse().unwrap();
        assert_eq!(c.preprocess.stopwords, StopwordList::ListB);
        assert_eq!(c.preprocess.tokenizer, Tokenizer::Pattern);
        assert!(c.preprocess.stem);
        assert_eq!(c.scorer, ScorerKind::Hybrid { other: OtherKind::Lda, id: "lda4".into(), lambda: 0.93 });
        assert_eq!(c.to_string(), "tfidf+sk_stop+sk_tok+st+lda:lda4@0.93");
    }

    #[test]
    fn pure_other_scorers() {
        let c: RankerConfig = "we:we1+nltk_stop".parse().unwrap();
        assert_eq!(c.scorer, ScorerKind::We { id: "we1".into() });
        assert_eq!(c.to_string(), "nltk_stop+nltk_tok+we:we1");
    }

    #[test]
    fn errors_carry_positions() {
        let e = "tfidf+(70,8)".parse::<RankerConfig>().unwrap_err();
        assert_eq!(e.position, 6);
        let e = "tfidf+bogus".parse::<RankerConfig>().unwrap_err();
        assert_eq!(e.position, 6);
        let e = "tfidf+lda:m@1.5".parse::<RankerConfig>().unwrap_err();
        assert_eq!(e.position, 12);
        assert!("tfidf+lda:m".parse::<RankerConfig>().is_err());
        assert!("lda:m@0.5".parse::<RankerConfig>().is_err());
        assert!("nltk_stop".parse::<RankerConfig>().is_err());
        assert!("tfidf+cit_wn+ref_wn".parse::<RankerConfig>().is_err());
        assert!("tfidf++st".parse::<RankerConfig>().is_err());
        assert!("tfidf+dup_wn".parse::<RankerConfig>().is_err());
    }

    #[test]
    fn aliases_and_lambda_replacement() {
        let c: RankerConfig = "tfidf+wn_both+dup_wn+we:w@0.5".parse().unwrap();
        assert_eq!(c.expansion, ExpansionMode { side: WordNetSide::Both, duplicate_original: true });
        let c2 = c.with_lambda(0.7).unwrap();
        assert_eq!(c2.to_string(), "tfidf+nltk_stop+nltk_tok+both_wn+dup_wn+we:w@0.7");
        assert!(RankerConfig::tfidf(PreprocessConfig::default()).with_lambda(0.5).is_none());
    }
}
