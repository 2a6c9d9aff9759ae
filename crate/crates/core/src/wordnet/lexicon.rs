//! Reader for the WordNet 3.0 database files (`data.<pos>` / `index.<pos>`).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::preprocess::{remove_stopwords, tokenize, StopwordList, TokenSequence, Tokenizer};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("malformed lexicon {}: {reason}", file.display())]
    MalformedLexicon { file: PathBuf, reason: String },
    #[error("no WordNet database files found in {}", .0.display())]
    NoDatabase(PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Part of speech, ordered by its one-letter database code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Adj,
    Noun,
    Adv,
    AdjSat,
    Verb,
}

impl Pos {
    pub fn code(self) -> char {
        match self {
            Pos::Adj => 'a',
            Pos::Noun => 'n',
            Pos::Adv => 'r',
            Pos::AdjSat => 's',
            Pos::Verb => 'v',
        }
    }

    fn from_code(c: &str) -> Option<Pos> {
        Some(match c {
            "a" => Pos::Adj,
            "n" => Pos::Noun,
            "r" => Pos::Adv,
            "s" => Pos::AdjSat,
            "v" => Pos::Verb,
            _ => return None,
        })
    }

    /// Index files list satellites under `a`.
    fn index_pos(self) -> Pos {
        if self == Pos::AdjSat {
            Pos::Adj
        } else {
            self
        }
    }
}

const FILES: [(&str, Pos); 4] = [("noun", Pos::Noun), ("verb", Pos::Verb), ("adj", Pos::Adj), ("adv", Pos::Adv)];

/// Byte offset of a synset in its data file plus the data file's part of speech.
/// Orders as the zero-padded `offset-pos` string would.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId {
    pub offset: u64,
    pub pos: Pos,
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}-{}", self.offset, self.pos.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synset {
    pub id: SynsetId,
    /// Lemmas as written in the database (underscores join multiword lemmas).
    pub lemmas: Vec<String>,
    pub gloss: String,
    /// Definition tokens used for Lesk overlap.
    pub(crate) gloss_tokens: TokenSequence,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    synsets: BTreeMap<SynsetId, Synset>,
    index: HashMap<(String, Pos), Vec<SynsetId>>,
}

/// Lowercase, underscores as spaces.
pub fn normalize_lemma(lemma: &str) -> String {
    lemma.trim().to_lowercase().replace('_', " ")
}

/// Definition part of a gloss (examples after `; "` are dropped), tokenized
/// with stopwords removed.
fn gloss_tokens(gloss: &str) -> TokenSequence {
    let definition = gloss.split("; \"").next().unwrap_or(gloss);
    let toks = tokenize(definition, Tokenizer::WordPunct)
        .into_inner()
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .collect();
    remove_stopwords(toks, StopwordList::ListA)
}

fn strip_adj_marker(word: &str) -> &str {
    // adjective lemmas may carry a syntactic marker such as "galore(ip)"
    match word.find('(') {
        Some(i) if word.ends_with(')') => &word[..i],
        _ => word,
    }
}

fn parse_data_line(line: &str, file_pos: Pos) -> Result<Synset, String> {
    let (head, gloss) = line.split_once(" | ").unwrap_or((line, ""));
    let mut fields = head.split_ascii_whitespace();
    let offset: u64 = fields.next().and_then(|f| f.parse().ok()).ok_or("bad offset field")?;
    let _lex_filenum = fields.next().ok_or("missing lex_filenum")?;
    let ss_type = fields.next().and_then(Pos::from_code).ok_or("bad ss_type")?;
    let w_cnt = fields.next().and_then(|f| usize::from_str_radix(f, 16).ok()).ok_or("bad w_cnt")?;
    let mut lemmas = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        let word = fields.next().ok_or("truncated word list")?;
        fields.next().ok_or("missing lex_id")?;
        lemmas.push(strip_adj_marker(word).to_string());
    }
    if lemmas.is_empty() {
        return Err("synset without lemmas".into());
    }
    let gloss = gloss.trim().to_string();
    if gloss.is_empty() {
        return Err("synset without gloss".into());
    }
    let pos = if file_pos == Pos::Adj { ss_type } else { file_pos };
    Ok(Synset { id: SynsetId { offset, pos }, gloss_tokens: gloss_tokens(&gloss), lemmas, gloss })
}

impl Lexicon {
    /// Loads every `data.<pos>`/`index.<pos>` pair present in `dir`.
    pub fn load(dir: &Path) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        let mut found = false;
        for (name, pos) in FILES {
            let data_path = dir.join(format!("data.{name}"));
            let index_path = dir.join(format!("index.{name}"));
            if !data_path.is_file() || !index_path.is_file() {
                continue;
            }
            found = true;
            let data = fs::read_to_string(&data_path)?;
            let index = fs::read_to_string(&index_path)?;
            lex.add_database(pos, &data, &index).map_err(|(in_index, reason)| {
                let file = if in_index { index_path.clone() } else { data_path.clone() };
                LexiconError::MalformedLexicon { file, reason }
            })?;
        }
        if !found {
            return Err(LexiconError::NoDatabase(dir.to_path_buf()));
        }
        Ok(lex)
    }

    /// Adds one part of speech from in-memory file contents. On failure returns
    /// whether the index file (true) or the data file (false) is at fault.
    pub fn add_database(&mut self, pos: Pos, data: &str, index: &str) -> Result<(), (bool, String)> {
        let mut by_offset: HashMap<u64, SynsetId> = HashMap::new();
        let mut offset = 0u64;
        for line in data.split_inclusive('\n') {
            let start = offset;
            offset += line.len() as u64;
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let syn = parse_data_line(line.trim_end(), pos).map_err(|r| (false, format!("byte {start}: {r}")))?;
            if syn.id.offset != start {
                return Err((false, format!("record at byte {start} claims offset {}", syn.id.offset)));
            }
            by_offset.insert(start, syn.id);
            self.synsets.insert(syn.id, syn);
        }

        for (lineno, line) in index.lines().enumerate() {
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let bad = |r: &str| (true, format!("line {}: {r}", lineno + 1));
            let mut f = line.split_ascii_whitespace();
            let lemma = f.next().ok_or_else(|| bad("empty"))?;
            let ipos = f.next().and_then(Pos::from_code).ok_or_else(|| bad("bad pos"))?;
            let synset_cnt: usize = f.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad("bad synset_cnt"))?;
            let p_cnt: usize = f.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad("bad p_cnt"))?;
            for _ in 0..p_cnt {
                f.next().ok_or_else(|| bad("truncated pointer list"))?;
            }
            f.next().ok_or_else(|| bad("missing sense_cnt"))?;
            f.next().ok_or_else(|| bad("missing tagsense_cnt"))?;
            let mut ids = Vec::with_capacity(synset_cnt);
            for _ in 0..synset_cnt {
                let off: u64 = f.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad("bad synset offset"))?;
                let id = by_offset.get(&off).ok_or_else(|| bad(&format!("offset {off:08} resolves to no record")))?;
                ids.push(*id);
            }
            self.index.entry((normalize_lemma(lemma), ipos.index_pos())).or_default().extend(ids);
        }
        Ok(())
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.synsets.get(&id)
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// Synsets of `lemma` for one part of speech, in index order.
    pub fn lookup(&self, lemma: &str, pos: Pos) -> &[SynsetId] {
        self.index.get(&(normalize_lemma(lemma), pos.index_pos())).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Synsets of `lemma` across all parts of speech, ascending by id.
    pub fn lookup_all(&self, lemma: &str) -> Vec<SynsetId> {
        let mut ids: Vec<SynsetId> = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv]
            .into_iter()
            .flat_map(|p| self.lookup(lemma, p).iter().copied())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    /// All (normalized lemma, pos) → synset entries, sorted.
    pub fn index_entries(&self) -> Vec<(String, Pos, Vec<SynsetId>)> {
        let mut out: Vec<_> = self.index.iter().map(|((l, p), ids)| (l.clone(), *p, ids.clone())).collect();
        out.sort();
        out
    }
}
