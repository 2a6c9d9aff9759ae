//! Reference documents, citances and datasets.
//!
//! On-disk layout read by [`load_dataset`]:
//!
//! ```text
//! <root>/<split>/<doc_id>/Reference_XML/<doc_id>.xml
//! <root>/<split>/<doc_id>/annotation/<doc_id>.ann.txt   (optional)
//! ```

mod annotation;
mod cluster;
mod stats;
mod xml;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotation::parse_annotations;
pub use cluster::{char_freq_cluster, char_freq_vector, kmeans, CharFreqVector, KMeansFit, ALPHABET_SIZE};
pub use stats::{section_frequency_report, sparsity_report, SectionFrequency, SparsityPoint};
pub use xml::parse_document_xml;

/// Sentence identifier within one reference document.
pub type Sid = u32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("document contains no sentences")]
    EmptyDocument,
    #[error("malformed annotation record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("annotation at line {line} references unknown document {doc_id:?}")]
    UnknownDocument { line: usize, doc_id: String },
    #[error("no gold annotations in dataset")]
    NoAnnotations,
    #[error("k must be in 1..={n_docs}, got {k}")]
    BadK { k: usize, n_docs: usize },
    #[error("missing file or directory: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("malformed dataset dump at line {line}: {reason}")]
    BadDump { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CorpusError {
    fn in_file(self, path: &Path) -> Self {
        CorpusError::InFile { path: path.to_path_buf(), source: Box::new(self) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionKind {
    Title,
    Abstract,
    Section,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub sid: Sid,
    pub text: String,
    pub section_title: String,
    pub section_kind: SectionKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn sentence(&self, sid: Sid) -> Option<&Sentence> {
        self.sentences.binary_search_by_key(&sid, |s| s.sid).ok().map(|i| &self.sentences[i])
    }

    pub fn title_sid(&self) -> Option<Sid> {
        self.sentences.iter().find(|s| s.section_kind == SectionKind::Title).map(|s| s.sid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citance {
    pub citance_id: String,
    pub citing_doc_id: String,
    pub reference_doc_id: String,
    pub text: String,
    pub gold_sids: BTreeSet<Sid>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
    Custom(String),
}

impl Split {
    pub fn dir_name(&self) -> &str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
            Split::Custom(name) => name,
        }
    }
}

impl FromStr for Split {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "train" => Split::Train,
            "dev" => Split::Dev,
            "test" => Split::Test,
            other => Split::Custom(other.to_string()),
        })
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub documents: BTreeMap<String, Document>,
    pub citances: Vec<Citance>,
    pub split: Split,
}

impl Dataset {
    pub fn new(split: Split) -> Self {
        Dataset { documents: BTreeMap::new(), citances: Vec::new(), split }
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.get(doc_id)
    }

    /// Gold sentence sets keyed by citance id.
    pub fn gold(&self) -> BTreeMap<String, BTreeSet<Sid>> {
        self.citances.iter().map(|c| (c.citance_id.clone(), c.gold_sids.clone())).collect()
    }

    /// Writes the canonical line-delimited JSON dump: every sentence of every
    /// document (documents in id order), then every citance in load order.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for doc in self.documents.values() {
            for s in &doc.sentences {
                let rec = DumpRecord::Sentence {
                    doc_id: doc.doc_id.clone(),
                    sid: s.sid,
                    section_kind: s.section_kind,
                    section_title: s.section_title.clone(),
                    text: s.text.clone(),
                };
                serde_json::to_writer(&mut out, &rec)?;
                out.write_all(b"\n")?;
            }
        }
        for c in &self.citances {
            serde_json::to_writer(&mut out, &DumpRecord::Citance(c.clone()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(input: R, split: Split) -> Result<Dataset, CorpusError> {
        let mut ds = Dataset::new(split);
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: DumpRecord =
                serde_json::from_str(&line).map_err(|e| CorpusError::BadDump { line: i + 1, reason: e.to_string() })?;
            match rec {
                DumpRecord::Sentence { doc_id, sid, section_kind, section_title, text } => {
                    let doc = ds
                        .documents
                        .entry(doc_id.clone())
                        .or_insert_with(|| Document { doc_id, sentences: Vec::new() });
                    if doc.sentences.last().is_some_and(|prev| prev.sid >= sid) {
                        return Err(CorpusError::BadDump { line: i + 1, reason: format!("sid {sid} out of order") });
                    }
                    doc.sentences.push(Sentence { sid, text, section_title, section_kind });
                }
                DumpRecord::Citance(c) => ds.citances.push(c),
            }
        }
        Ok(ds)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum DumpRecord {
    Sentence { doc_id: String, sid: Sid, section_kind: SectionKind, section_title: String, text: String },
    Citance(Citance),
}

/// Removes every non-ASCII character.
pub fn strip_non_ascii(text: &str) -> String {
    text.chars().filter(char::is_ascii).collect()
}

/// Loads all documents and annotations of one split.
pub fn load_dataset(root: &Path, split: Split) -> Result<Dataset, CorpusError> {
    let split_dir = root.join(split.dir_name());
    if !split_dir.is_dir() {
        return Err(CorpusError::MissingFile(split_dir));
    }
    let mut doc_dirs: Vec<PathBuf> =
        fs::read_dir(&split_dir)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    doc_dirs.sort();
    if doc_dirs.is_empty() {
        return Err(CorpusError::MissingFile(split_dir.join("<doc_id>")));
    }

    let mut ds = Dataset::new(split);
    let mut ann_files = Vec::new();
    for dir in &doc_dirs {
        let doc_id = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let xml_path = dir.join("Reference_XML").join(format!("{doc_id}.xml"));
        if !xml_path.is_file() {
            return Err(CorpusError::MissingFile(xml_path));
        }
        let bytes = fs::read(&xml_path)?;
        let mut doc = parse_document_xml(&bytes).map_err(|e| e.in_file(&xml_path))?;
        doc.doc_id = doc_id.clone();
        ds.documents.insert(doc_id.clone(), doc);
        let ann_path = dir.join("annotation").join(format!("{doc_id}.ann.txt"));
        if ann_path.is_file() {
            ann_files.push(ann_path);
        }
    }
    for path in ann_files {
        let bytes = fs::read(&path)?;
        let citances = parse_annotations(&bytes, &ds).map_err(|e| e.in_file(&path))?;
        ds.citances.extend(citances);
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> Document {
        Document {
            doc_id: "D1".into(),
            sentences: vec![
                Sentence {
                    sid: 1,
                    text: "A title".into(),
                    section_title: "title".into(),
                    section_kind: SectionKind::Title,
                },
                Sentence {
                    sid: 2,
                    text: "Body \"quoted\" text.".into(),
                    section_title: "introduction".into(),
                    section_kind: SectionKind::Section,
                },
            ],
        }
    }

    #[test]
    fn dump_round_trip() {
        let mut ds = Dataset::new(Split::Dev);
        ds.documents.insert("D1".into(), doc());
        ds.citances.push(Citance {
            citance_id: "D1:1".into(),
            citing_doc_id: "C1".into(),
            reference_doc_id: "D1".into(),
            text: "as shown by X".into(),
            gold_sids: [2].into_iter().collect(),
        });
        let mut buf = Vec::new();
        ds.write_dump(&mut buf).unwrap();
        let back = Dataset::read_dump(buf.as_slice(), Split::Dev).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn lookup_by_sid() {
        let d = doc();
        assert_eq!(d.sentence(2).unwrap().text, "Body \"quoted\" text.");
        assert!(d.sentence(3).is_none());
        assert_eq!(d.title_sid(), Some(1));
    }

    #[test]
    fn missing_split_dir() {
        let tmp = tempfile::tempdir().unwrap();
        let err = load_dataset(tmp.path(), Split::Dev).unwrap_err();
        assert!(matches!(err, CorpusError::MissingFile(_)));
    }

    #[test]
    fn empty_split_dir() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir(tmp.path().join("dev")).unwrap();
        assert!(matches!(load_dataset(tmp.path(), Split::Dev), Err(CorpusError::MissingFile(_))));
    }

    #[test]
    fn doc_without_annotations() {
        let tmp = tempfile::tempdir().unwrap();
        let xml_dir = tmp.path().join("test/X01-0001/Reference_XML");
        fs::create_dir_all(&xml_dir).unwrap();
        fs::write(xml_dir.join("X01-0001.xml"), r#"<PAPER><S sid="1">Only sentence.</S></PAPER>"#).unwrap();
        let ds = load_dataset(tmp.path(), Split::Test).unwrap();
        assert_eq!(ds.documents.len(), 1);
        assert!(ds.citances.is_empty());
    }

    #[test]
    fn split_names() {
        assert_eq!("dev".parse::<Split>().unwrap(), Split::Dev);
        assert_eq!("mini".parse::<Split>().unwrap(), Split::Custom("mini".into()));
        assert_eq!(Split::Custom("mini".into()).to_string(), "mini");
    }
}
