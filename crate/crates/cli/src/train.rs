use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use citespan::embed::{train_sgns, EmbedConfig, EmbedError};
use citespan::lda::{fit_online, parse_config_file, write_model, LdaConfig, LdaError};
use citespan::preprocess::{preprocess_sentence, PreprocessConfig, TokenSequence};
use serde_json::json;

use crate::inputs::{self, create, existing, read_lines, write_embedding};
use crate::{usage, DataArgs};

/// Where training text comes from: plain-text files, a dataset split, or both.
#[derive(clap::Args)]
pub struct CorpusArgs {
    /// Text file with one training unit per line; repeatable.
    #[arg(long)]
    corpus: Vec<PathBuf>,
    /// Also train on every sentence and citance of this dataset root.
    #[arg(long)]
    from_data: Option<PathBuf>,
    #[arg(long, default_value = "dev")]
    split: String,
    /// Preprocessing applied to every unit.
    #[arg(long, default_value = "nltk_stop+nltk_tok")]
    preprocess: String,
}

impl CorpusArgs {
    fn config(&self) -> Result<PreprocessConfig> {
        Ok(self.preprocess.parse::<PreprocessConfig>()?)
    }

    fn units(&self) -> Result<Vec<TokenSequence>> {
        let cfg = self.config()?;
        let mut texts = read_lines(&self.corpus)?;
        if let Some(root) = &self.from_data {
            let ds =
                inputs::load(&DataArgs { data: root.clone(), split: self.split.clone(), annotator_threshold: None })?;
            texts.extend(ds.documents.values().flat_map(|d| d.sentences.iter().map(|s| s.text.clone())));
            texts.extend(ds.citances.iter().map(|c| c.text.clone()));
        }
        if texts.is_empty() {
            return Err(usage("no training text: pass --corpus or --from-data"));
        }
        Ok(texts.iter().map(|t| preprocess_sentence(t, &cfg)).filter(|t| !t.is_empty()).collect())
    }
}

#[derive(clap::Args)]
pub struct TrainLdaArgs {
    #[command(flatten)]
    input: CorpusArgs,
    /// `key = value` file of LDA settings; flags below override it.
    #[arg(long)]
    model_config: Option<PathBuf>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    passes: Option<usize>,
    /// Held-out text (one unit per line) for the per-word bound.
    #[arg(long)]
    heldout: Vec<PathBuf>,
    /// Fit once per kappa and write a `kappa<TAB>bound` table to --out instead of a model.
    #[arg(long, value_delimiter = ',')]
    kappa_grid: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn lda_error(e: LdaError) -> anyhow::Error {
    match e {
        LdaError::BadConfig(m) => usage(m),
        other => other.into(),
    }
}

pub fn train_lda(a: TrainLdaArgs, seed: u64) -> Result<()> {
    let mut cfg = match &a.model_config {
        Some(p) => parse_config_file(&fs::read_to_string(existing(p)?)?).map_err(lda_error)?,
        None => LdaConfig::default(),
    };
    cfg.seed = seed;
    if let Some(v) = a.topics {
        cfg.n_topics = v;
    }
    if let Some(v) = a.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = a.tau0 {
        cfg.tau0 = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.passes {
        cfg.passes = v;
    }
    cfg.validate().map_err(lda_error)?;
    let docs = a.input.units()?;
    let pre = a.input.config()?;
    let heldout: Vec<TokenSequence> = read_lines(&a.heldout)?.iter().map(|t| preprocess_sentence(t, &pre)).collect();

    if !a.kappa_grid.is_empty() {
        if heldout.is_empty() {
            return Err(usage("--kappa-grid needs --heldout"));
        }
        let mut out = BufWriter::new(create(&a.out)?);
        writeln!(out, "kappa\theldout_bound")?;
        for &kappa in &a.kappa_grid {
            let c = LdaConfig { kappa, ..cfg.clone() };
            c.validate().map_err(lda_error)?;
            let model = fit_online(&docs, &c).map_err(lda_error)?;
            writeln!(out, "{kappa}\t{}", model.heldout_bound(&heldout)?)?;
        }
        out.flush()?;
        return Ok(());
    }

    let model = fit_online(&docs, &cfg).map_err(lda_error)?;
    let mut out = BufWriter::new(create(&a.out)?);
    write_model(&model, &mut out)?;
    out.flush()?;
    let bound = if heldout.is_empty() { None } else { Some(model.heldout_bound(&heldout)?) };
    let summary = json!({
        "documents": docs.len(),
        "n_topics": model.n_topics(),
        "n_terms": model.n_terms(),
        "kappa": cfg.kappa,
        "tau0": cfg.tau0,
        "heldout_bound": bound,
    });
    println!("{summary}");
    Ok(())
}

#[derive(clap::Args)]
pub struct TrainEmbedArgs {
    #[command(flatten)]
    input: CorpusArgs,
    /// Named settings: `we1` or `we2`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    min_count: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Output table; a `.bin` extension selects the binary format.
    #[arg(long)]
    out: PathBuf,
}

pub fn train_embed(a: TrainEmbedArgs, seed: u64) -> Result<()> {
    let mut cfg = match &a.preset {
        Some(name) => EmbedConfig::preset(name).ok_or_else(|| usage(format!("unknown preset {name:?}")))?,
        None => EmbedConfig::default(),
    };
    cfg.seed = seed;
    for (slot, v) in [
        (&mut cfg.dim, a.dim),
        (&mut cfg.epochs, a.epochs),
        (&mut cfg.negatives, a.negatives),
        (&mut cfg.min_count, a.min_count),
        (&mut cfg.window, a.window),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(lr) = a.lr {
        cfg.initial_lr = lr;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let corpus = a.input.units()?;
    let (table, report) = train_sgns(&corpus, &cfg).map_err(|e| match e {
        EmbedError::VocabTooSmall(_) | EmbedError::EmptyCorpus => usage(e.to_string()),
        other => other.into(),
    })?;
    write_embedding(&table, &a.out).with_context(|| a.out.display().to_string())?;
    let summary = json!({
        "vocab_size": report.vocab_size,
        "tokens_per_epoch": report.tokens_per_epoch,
        "epoch_losses": report.epoch_losses,
    });
    println!("{summary}");
    Ok(())
}
