//! `citespan`: command-line driver for the citance span retrieval pipeline.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod data;
mod inputs;
mod runs;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "citespan", version, about = "Find the reference sentences a citance refers to")]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

/// Dataset location shared by most subcommands.
#[derive(clap::Args, Clone)]
pub struct DataArgs {
    /// Dataset root holding `<split>/<doc_id>/...`.
    #[arg(long, env = "CITESPAN_DATA")]
    pub data: PathBuf,
    #[arg(long, default_value = "dev")]
    pub split: String,
    /// Collapse gold selections larger than this to the title sentence.
    #[arg(long)]
    pub annotator_threshold: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset split and write its canonical JSONL dump.
    Ingest(data::IngestArgs),
    /// Write the token sequences a preprocessing config produces.
    Preprocess(data::PreprocessArgs),
    /// Rank reference sentences for every citance.
    Rank(runs::RankArgs),
    /// Evaluate a hybrid config over a grid of blend weights.
    Sweep(runs::SweepArgs),
    /// Train an online LDA topic model.
    TrainLda(train::TrainLdaArgs),
    /// Train skip-gram word embeddings.
    TrainEmbed(train::TrainEmbedArgs),
    /// Score run manifests against the gold annotations.
    Evaluate(runs::EvaluateArgs),
    /// Paired bootstrap test between two runs.
    Significance(runs::SignificanceArgs),
    /// Comparison tables and plot series from manifests.
    Report(runs::ReportArgs),
    /// Section frequencies and sparsity curves of a dataset.
    DatasetStats(data::StatsArgs),
    /// Strip non-ASCII text and cluster a background corpus by character profile.
    CorpusClean(data::CleanArgs),
}

/// Marks errors that come from bad invocations rather than runtime failures.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.is::<UsageError>()
            || c.is::<citespan::preprocess::ConfigError>()
            || matches!(
                c.downcast_ref::<citespan::ranker::RankerError>(),
                Some(citespan::ranker::RankerError::BadConfigString(_))
            )
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            log::warn!("could not size thread pool: {e}");
        }
    }
    let seed = cli.seed;
    let result = match cli.command {
        Command::Ingest(a) => data::ingest(a),
        Command::Preprocess(a) => data::preprocess(a),
        Command::Rank(a) => runs::rank(a, seed),
        Command::Sweep(a) => runs::sweep(a, seed),
        Command::TrainLda(a) => train::train_lda(a, seed),
        Command::TrainEmbed(a) => train::train_embed(a, seed),
        Command::Evaluate(a) => runs::evaluate(a),
        Command::Significance(a) => runs::significance(a, seed),
        Command::Report(a) => runs::report(a, seed),
        Command::DatasetStats(a) => data::dataset_stats(a),
        Command::CorpusClean(a) => data::corpus_clean(a, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
