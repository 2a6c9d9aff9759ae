//! Loading datasets and models, and hashing them for manifests.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use citespan::corpus::{load_dataset, Dataset, Split};
use citespan::embed::EmbeddingTable;
use citespan::eval::adjust_dataset_annotations;
use citespan::hash::{file_sha256, files_sha256, sha256_hex};
use citespan::lda::read_model;
use citespan::ranker::{ModelRegistry, OtherKind, RankerConfig};
use citespan::wordnet::load_lexicon;

use crate::{usage, DataArgs};

pub fn load(args: &DataArgs) -> Result<Dataset> {
    let split: Split = args.split.parse().expect("infallible");
    let dir = args.data.join(split.dir_name());
    if !dir.is_dir() {
        return Err(usage(format!("dataset directory not found: {}", dir.display())));
    }
    let mut ds = load_dataset(&args.data, split).with_context(|| format!("loading {}", dir.display()))?;
    if let Some(t) = args.annotator_threshold {
        let n = adjust_dataset_annotations(&mut ds, t);
        log::info!("collapsed {n} oversized gold selections");
    }
    Ok(ds)
}

/// SHA-256 of the canonical dump, independent of file layout and line endings.
pub fn dataset_hash(ds: &Dataset) -> String {
    let mut buf = Vec::new();
    ds.write_dump(&mut buf).expect("writing to memory");
    sha256_hex(&buf)
}

/// Parses `id=path` model arguments.
pub fn parse_model_arg(s: &str) -> Result<(String, PathBuf), String> {
    let (id, path) = s.split_once('=').ok_or_else(|| format!("expected ID=PATH, got {s:?}"))?;
    if id.is_empty() {
        return Err("empty model id".into());
    }
    Ok((id.to_string(), PathBuf::from(path)))
}

#[derive(clap::Args, Clone, Default)]
pub struct ModelArgs {
    /// Topic model as ID=PATH; referenced as `lda:ID` in configs.
    #[arg(long = "lda", value_parser = parse_model_arg)]
    pub lda: Vec<(String, PathBuf)>,
    /// Embedding table as ID=PATH (binary or text format); referenced as `we:ID`.
    #[arg(long = "we", value_parser = parse_model_arg)]
    pub we: Vec<(String, PathBuf)>,
    /// Directory with WordNet `data.*` and `index.*` files.
    #[arg(long, env = "WNSEARCHDIR")]
    pub wordnet: Option<PathBuf>,
}

fn wordnet_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("data.") || n.starts_with("index."))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn read_embedding(path: &Path) -> Result<EmbeddingTable> {
    let mut head = [0u8; 8];
    let n = File::open(path)?.read(&mut head)?;
    let reader = BufReader::new(File::open(path)?);
    let table = if n == 8 && &head == b"CSPNEMB\0" {
        EmbeddingTable::read_binary(reader)?
    } else {
        EmbeddingTable::read_text(reader)?
    };
    Ok(table)
}

pub fn write_embedding(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(create(path)?);
    if path.extension().is_some_and(|e| e == "bin") {
        table.write_binary(&mut out)?;
    } else {
        table.write_text(&mut out)?;
    }
    out.flush()?;
    Ok(())
}

/// Loads the models a config refers to and hashes their files.
pub fn registry(config: &RankerConfig, models: &ModelArgs) -> Result<(ModelRegistry, BTreeMap<String, String>)> {
    let mut reg = ModelRegistry::new();
    let mut hashes = BTreeMap::new();
    if let Some((kind, id)) = config.scorer.model_key() {
        let list = match kind {
            OtherKind::Lda => &models.lda,
            OtherKind::We => &models.we,
        };
        let key = format!("{}:{id}", kind.prefix());
        let Some((_, path)) = list.iter().find(|(i, _)| i == id) else {
            return Err(usage(format!("config uses {key} but no --{} {id}=PATH was given", kind.prefix())));
        };
        let path = existing(path)?;
        match kind {
            OtherKind::Lda => {
                let m = read_model(BufReader::new(File::open(&path)?)).with_context(|| path.display().to_string())?;
                reg.insert(kind, id, Arc::new(m));
            }
            OtherKind::We => {
                let t = read_embedding(&path).with_context(|| path.display().to_string())?;
                reg.insert(kind, id, Arc::new(t));
            }
        }
        hashes.insert(key, file_sha256(&path)?);
    }
    if config.expansion.expands_citances() || config.expansion.expands_references() {
        let Some(dir) = &models.wordnet else {
            return Err(usage("config uses WordNet expansion but no --wordnet directory was given"));
        };
        let dir = existing(dir)?;
        let lex = load_lexicon(&dir).with_context(|| dir.display().to_string())?;
        reg.set_lexicon(Arc::new(lex));
        hashes.insert("wordnet".into(), files_sha256(&wordnet_files(&dir)?)?);
    }
    Ok((reg, hashes))
}

/// Recomputes model hashes after a run and fails if any input changed.
pub fn verify_models(config: &RankerConfig, models: &ModelArgs, before: &BTreeMap<String, String>) -> Result<()> {
    for (key, hash) in before {
        let now = if key == "wordnet" {
            files_sha256(&wordnet_files(models.wordnet.as_deref().expect("recorded"))?)?
        } else {
            let (kind, id) = config.scorer.model_key().expect("recorded");
            let list = if kind == OtherKind::Lda { &models.lda } else { &models.we };
            file_sha256(&list.iter().find(|(i, _)| i == id).expect("recorded").1)?
        };
        if &now != hash {
            bail!("{key} changed on disk during the run");
        }
    }
    Ok(())
}

pub fn verify_dataset(args: &DataArgs, before: &str) -> Result<()> {
    if dataset_hash(&load(args)?) != before {
        bail!("dataset changed on disk during the run");
    }
    Ok(())
}

pub fn existing(path: &Path) -> Result<PathBuf> {
    if !path.exists() {
        return Err(usage(format!("not found: {}", path.display())));
    }
    Ok(path.to_path_buf())
}

pub fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

/// Opens `path` for writing, or stdout when absent.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Non-empty lines of the given text files, in order.
pub fn read_lines(paths: &[PathBuf]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for p in paths {
        let text = fs::read_to_string(existing(p)?).with_context(|| p.display().to_string())?;
        out.extend(text.lines().filter(|l| !l.trim().is_empty()).map(String::from));
    }
    Ok(out)
}
