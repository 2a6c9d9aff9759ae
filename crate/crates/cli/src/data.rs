use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use citespan::corpus::{
    char_freq_cluster, char_freq_vector, section_frequency_report, sparsity_report, strip_non_ascii,
};
use citespan::preprocess::{preprocess_sentence, PreprocessConfig, TokenSequence};
use serde_json::json;

use crate::inputs::{self, create, existing, output};
use crate::{usage, DataArgs};

#[derive(clap::Args)]
pub struct IngestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Dump destination (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn ingest(a: IngestArgs) -> Result<()> {
    let ds = inputs::load(&a.data)?;
    let mut out = output(a.out.as_deref())?;
    ds.write_dump(&mut out)?;
    out.flush()?;
    eprintln!("{} docs, {} citances", ds.documents.len(), ds.citances.len());
    Ok(())
}

#[derive(clap::Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Preprocessing part of a config string, e.g. `sk_stop+sk_tok+st+(8,70)`.
    #[arg(long, default_value = "nltk_stop+nltk_tok")]
    config: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_preprocess(s: &str) -> Result<PreprocessConfig> {
    Ok(s.parse::<PreprocessConfig>()?)
}

pub fn preprocess(a: PreprocessArgs) -> Result<()> {
    let cfg = parse_preprocess(&a.config)?;
    let ds = inputs::load(&a.data)?;
    let mut out = output(a.out.as_deref())?;
    for doc in ds.documents.values() {
        for s in &doc.sentences {
            let p = cfg.run_with(&s.text, |t| t);
            let admitted = cfg.length_bounds.is_none_or(|b| b.admits(p.raw_len));
            let rec = json!({"doc_id": doc.doc_id, "sid": s.sid, "tokens": p.tokens.to_vec(), "admitted": admitted});
            writeln!(out, "{rec}")?;
        }
    }
    for c in &ds.citances {
        let rec = json!({"citance_id": c.citance_id, "tokens": preprocess_sentence(&c.text, &cfg).to_vec()});
        writeln!(out, "{rec}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(clap::Args)]
pub struct StatsArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Preprocessing used for the sparsity curves.
    #[arg(long, default_value = "nltk_stop+nltk_tok")]
    config: String,
    /// Directory for `summary.tsv`, `sections.tsv` and `sparsity.tsv`.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn dataset_stats(a: StatsArgs) -> Result<()> {
    let cfg = parse_preprocess(&a.config)?;
    let ds = inputs::load(&a.data)?;
    fs::create_dir_all(&a.out_dir)?;

    let n_sentences: usize = ds.documents.values().map(|d| d.sentences.len()).sum();
    let n_pairs: usize = ds.citances.iter().map(|c| c.gold_sids.len()).sum();
    let mut out = create(&a.out_dir.join("summary.tsv"))?;
    writeln!(out, "documents\tsentences\tcitances\tgold_pairs")?;
    writeln!(out, "{}\t{}\t{}\t{}", ds.documents.len(), n_sentences, ds.citances.len(), n_pairs)?;

    let mut out = create(&a.out_dir.join("sections.tsv"))?;
    writeln!(out, "section\tpercent\tpairs\tdistinct_sentences")?;
    match section_frequency_report(&ds) {
        Ok(rows) => {
            for r in rows {
                writeln!(out, "{}\t{:.2}\t{}\t{}", r.title, r.percent, r.pairs, r.distinct_sentences)?;
            }
        }
        Err(e) => log::warn!("no section report: {e}"),
    }

    let cited: BTreeSet<&str> = ds.citances.iter().map(|c| c.reference_doc_id.as_str()).collect();
    let refs: Vec<TokenSequence> = ds
        .documents
        .values()
        .filter(|d| cited.contains(d.doc_id.as_str()))
        .flat_map(|d| d.sentences.iter().map(|s| preprocess_sentence(&s.text, &cfg)))
        .collect();
    let cits: Vec<TokenSequence> = ds.citances.iter().map(|c| preprocess_sentence(&c.text, &cfg)).collect();
    let mut out = create(&a.out_dir.join("sparsity.tsv"))?;
    writeln!(out, "corpus\tpercent_sentences\tpercent_vocabulary")?;
    for (name, sents) in [("citances", &cits), ("references", &refs)] {
        for p in sparsity_report(sents) {
            writeln!(out, "{name}\t{:.4}\t{:.4}", p.percent_sentences, p.percent_vocabulary)?;
        }
    }
    Ok(())
}

#[derive(clap::Args)]
pub struct CleanArgs {
    /// Directory of `.txt` documents.
    #[arg(long)]
    input: PathBuf,
    /// Receives cleaned documents and `clusters.tsv`.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 12)]
    clusters: usize,
    /// Cluster indices whose documents are left out of the cleaned output.
    #[arg(long, value_delimiter = ',')]
    drop: Vec<usize>,
}

pub fn corpus_clean(a: CleanArgs, seed: u64) -> Result<()> {
    let dir = existing(&a.input)?;
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    if a.clusters == 0 || a.clusters > files.len() {
        return Err(usage(format!("--clusters must be in 1..={} for this corpus", files.len())));
    }
    let mut texts = Vec::with_capacity(files.len());
    for f in &files {
        let bytes = fs::read(f)?;
        let id = f.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?.to_string();
        texts.push((id, String::from_utf8_lossy(&bytes).into_owned()));
    }
    let vectors: Vec<_> = texts.iter().map(|(id, t)| char_freq_vector(id, t)).collect();
    let assignment = char_freq_cluster(&vectors, a.clusters, seed)?;
    fs::create_dir_all(&a.out_dir)?;
    let mut table = create(&a.out_dir.join("clusters.tsv"))?;
    writeln!(table, "doc_id\tcluster\tkept")?;
    let mut kept = 0;
    for (id, text) in &texts {
        let cluster = assignment[id];
        let keep = !a.drop.contains(&cluster);
        writeln!(table, "{id}\t{cluster}\t{keep}")?;
        if keep {
            fs::write(a.out_dir.join(format!("{id}.txt")), strip_non_ascii(text))?;
            kept += 1;
        }
    }
    eprintln!("{kept} of {} documents kept", texts.len());
    Ok(())
}
