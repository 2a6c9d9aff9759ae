use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use citespan::corpus::Dataset;
use citespan::eval::{
    bootstrap_paired_test, citance_hits, evaluate_with, write_tsv, Averaging, CitanceHits, EvalResult,
    DEFAULT_RESAMPLES,
};
use citespan::ranker::{
    default_lambda_grid, lambda_sweep, rank_dataset, score_histogram, RankerConfig, RunManifest, SweepManifest,
};

use crate::inputs::{self, create, existing, output, ModelArgs};
use crate::{usage, DataArgs};

const RUN_TSV: &str = "run.tsv";
const MANIFEST: &str = "manifest.json";

fn parse_config(s: &str, top_k: usize) -> Result<RankerConfig> {
    let mut cfg: RankerConfig = s.parse()?;
    if top_k == 0 {
        return Err(usage("--top-k must be >= 1"));
    }
    cfg.top_k = top_k;
    Ok(cfg)
}

#[derive(clap::Args)]
pub struct RankArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Config string, e.g. `tfidf+nltk_stop+nltk_tok+cit_wn+(8,70)`.
    #[arg(long)]
    config: String,
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long, default_value_t = citespan::ranker::DEFAULT_TOP_K)]
    top_k: usize,
    /// Receives `manifest.json` and `run.tsv`.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn rank(a: RankArgs, seed: u64) -> Result<()> {
    let cfg = parse_config(&a.config, a.top_k)?;
    let ds = inputs::load(&a.data)?;
    let dataset_hash = inputs::dataset_hash(&ds);
    let (registry, model_hashes) = inputs::registry(&cfg, &a.models)?;
    let runs = rank_dataset(&ds, &cfg, &registry)?;

    fs::create_dir_all(&a.out_dir)?;
    let mut tsv = BufWriter::new(create(&a.out_dir.join(RUN_TSV))?);
    writeln!(tsv, "citance_id\trank\tsid\tscore")?;
    for run in &runs {
        for (i, (sid, score)) in run.ranked.iter().enumerate() {
            writeln!(tsv, "{}\t{}\t{sid}\t{score}", run.citance_id, i + 1)?;
        }
    }
    tsv.flush()?;
    let manifest = RunManifest {
        config_string: cfg.to_string(),
        top_k: cfg.top_k,
        seed,
        split: ds.split.to_string(),
        dataset_hash: dataset_hash.clone(),
        model_hashes: model_hashes.clone(),
        outputs: vec![RUN_TSV.into()],
        runs,
    };
    let mut out = BufWriter::new(create(&a.out_dir.join(MANIFEST))?);
    manifest.write_json(&mut out)?;
    out.flush()?;

    inputs::verify_dataset(&a.data, &dataset_hash)?;
    inputs::verify_models(&cfg, &a.models, &model_hashes)?;
    eprintln!("ranked {} citances with {}", manifest.runs.len(), manifest.config_string);
    Ok(())
}

#[derive(clap::Args)]
pub struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Hybrid config; its own lambda is replaced by each grid value.
    #[arg(long)]
    config: String,
    #[command(flatten)]
    models: ModelArgs,
    /// Blend weights to evaluate (default 0.70, 0.71, ..., 0.99).
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = citespan::ranker::DEFAULT_TOP_K)]
    top_k: usize,
    /// Receives `sweep.json` and `sweep.tsv`.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn sweep(a: SweepArgs, seed: u64) -> Result<()> {
    let cfg = parse_config(&a.config, a.top_k)?;
    if cfg.with_lambda(1.0).is_none() {
        return Err(usage("sweep needs a hybrid config such as tfidf+lda:ID@0.9"));
    }
    let lambdas = if a.lambdas.is_empty() { default_lambda_grid() } else { a.lambdas.clone() };
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(usage(format!("lambda {l} outside [0, 1]")));
    }
    let ds = inputs::load(&a.data)?;
    let dataset_hash = inputs::dataset_hash(&ds);
    let (registry, model_hashes) = inputs::registry(&cfg, &a.models)?;
    let points = lambda_sweep(&ds, &cfg, &lambdas, &registry)?;

    fs::create_dir_all(&a.out_dir)?;
    let mut tsv = BufWriter::new(create(&a.out_dir.join("sweep.tsv"))?);
    writeln!(tsv, "lambda\tR@{k}\tP@{k}\tF1", k = cfg.top_k)?;
    for p in &points {
        let r = &p.result;
        writeln!(
            tsv,
            "{:.2}\t{:.2}\t{:.2}\t{:.2}",
            p.lambda,
            100.0 * r.recall_at_k,
            100.0 * r.precision_at_k,
            100.0 * r.f1
        )?;
    }
    tsv.flush()?;
    let manifest = SweepManifest {
        config_template: cfg.to_string(),
        seed,
        split: ds.split.to_string(),
        dataset_hash: dataset_hash.clone(),
        model_hashes: model_hashes.clone(),
        points,
    };
    let mut out = BufWriter::new(create(&a.out_dir.join("sweep.json"))?);
    manifest.write_json(&mut out)?;
    out.flush()?;

    inputs::verify_dataset(&a.data, &dataset_hash)?;
    inputs::verify_models(&cfg, &a.models, &model_hashes)?;
    if let Some(best) = manifest.points.iter().max_by(|x, y| x.result.f1.total_cmp(&y.result.f1)) {
        eprintln!("best lambda {:.2}: F1 {:.2}%", best.lambda, 100.0 * best.result.f1);
    }
    Ok(())
}

fn read_run(path: &Path) -> Result<RunManifest> {
    let f = File::open(existing(path)?)?;
    RunManifest::read_json(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn read_sweep(path: &Path) -> Result<SweepManifest> {
    let f = File::open(existing(path)?)?;
    SweepManifest::read_json(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

/// Loads the dataset and checks that it is the one the manifests were made from.
fn gold_dataset(args: &DataArgs, manifests: &[(&Path, &str)]) -> Result<Dataset> {
    let ds = inputs::load(args)?;
    let hash = inputs::dataset_hash(&ds);
    for (path, h) in manifests {
        if *h != hash {
            bail!("{} was produced from a different dataset", path.display());
        }
    }
    Ok(ds)
}

#[derive(clap::Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Run manifest; repeatable.
    #[arg(long, required = true)]
    manifest: Vec<PathBuf>,
    /// Average per citance instead of pooling counts.
    #[arg(long = "macro")]
    macro_avg: bool,
    /// Metrics TSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let manifests: Vec<RunManifest> = a.manifest.iter().map(|p| read_run(p)).collect::<Result<_>>()?;
    let refs: Vec<(&Path, &str)> =
        a.manifest.iter().zip(&manifests).map(|(p, m)| (p.as_path(), m.dataset_hash.as_str())).collect();
    let ds = gold_dataset(&a.data, &refs)?;
    let averaging = if a.macro_avg { Averaging::Macro } else { Averaging::Micro };
    let gold = ds.gold();
    let rows: Vec<(String, EvalResult)> = manifests
        .iter()
        .map(|m| Ok((m.config_string.clone(), evaluate_with(&m.runs, &gold, averaging)?)))
        .collect::<Result<_>>()?;
    let mut out = output(a.out.as_deref())?;
    write_tsv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

/// Per-citance counts of two runs over their shared citances, in the order of `a`.
fn paired_hits(a: &RunManifest, b: &RunManifest, ds: &Dataset) -> Result<(Vec<CitanceHits>, Vec<CitanceHits>)> {
    let gold = ds.gold();
    let ha = citance_hits(&a.runs, &gold)?;
    let hb: BTreeMap<String, CitanceHits> = citance_hits(&b.runs, &gold)?.into_iter().collect();
    if ha.len() != hb.len() {
        bail!("runs cover different citances ({} vs {})", ha.len(), hb.len());
    }
    let mut xs = Vec::with_capacity(ha.len());
    let mut ys = Vec::with_capacity(ha.len());
    for (id, h) in ha {
        let other = hb.get(&id).with_context(|| format!("citance {id} missing from the second run"))?;
        xs.push(h);
        ys.push(*other);
    }
    Ok((xs, ys))
}

#[derive(clap::Args)]
pub struct SignificanceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn significance(a: SignificanceArgs, seed: u64) -> Result<()> {
    if a.resamples == 0 {
        return Err(usage("--resamples must be >= 1"));
    }
    let (ma, mb) = (read_run(&a.a)?, read_run(&a.b)?);
    let ds = gold_dataset(&a.data, &[(&a.a, &ma.dataset_hash), (&a.b, &mb.dataset_hash)])?;
    let (xs, ys) = paired_hits(&ma, &mb, &ds)?;
    let r = bootstrap_paired_test(&xs, &ys, a.resamples, seed)?;
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "config_a\tconfig_b\tmean_F1_a\tmean_F1_b\tmean_diff\tt\tp\tdegenerate")?;
    writeln!(
        out,
        "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.6}\t{}",
        ma.config_string,
        mb.config_string,
        100.0 * r.mean_f1_a,
        100.0 * r.mean_f1_b,
        100.0 * r.mean_diff,
        r.t_statistic,
        r.p_value,
        r.degenerate
    )?;
    out.flush()?;
    Ok(())
}

#[derive(clap::Args)]
pub struct ReportArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Run manifests; the first is the baseline for the significance column.
    #[arg(long)]
    manifest: Vec<PathBuf>,
    /// Sweep manifests, emitted as lambda/F1 series.
    #[arg(long)]
    sweep: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Receives `comparison.tsv`, `lambda_f1.tsv` and `scores.tsv`.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn report(a: ReportArgs, seed: u64) -> Result<()> {
    if a.manifest.is_empty() && a.sweep.is_empty() {
        return Err(usage("nothing to report: pass --manifest or --sweep"));
    }
    let runs: Vec<RunManifest> = a.manifest.iter().map(|p| read_run(p)).collect::<Result<_>>()?;
    let sweeps: Vec<SweepManifest> = a.sweep.iter().map(|p| read_sweep(p)).collect::<Result<_>>()?;
    let mut refs: Vec<(&Path, &str)> =
        a.manifest.iter().zip(&runs).map(|(p, m)| (p.as_path(), m.dataset_hash.as_str())).collect();
    refs.extend(a.sweep.iter().zip(&sweeps).map(|(p, m)| (p.as_path(), m.dataset_hash.as_str())));
    let ds = gold_dataset(&a.data, &refs)?;
    fs::create_dir_all(&a.out_dir)?;

    if !runs.is_empty() {
        let gold = ds.gold();
        let mut out = BufWriter::new(create(&a.out_dir.join("comparison.tsv"))?);
        writeln!(out, "config\tR@k\tP@k\tF1\tp_vs_first")?;
        for (i, m) in runs.iter().enumerate() {
            let r = evaluate_with(&m.runs, &gold, Averaging::Micro)?;
            let p = if i == 0 {
                "-".to_string()
            } else {
                let (xs, ys) = paired_hits(&runs[0], m, &ds)?;
                format!("{:.6}", bootstrap_paired_test(&xs, &ys, a.resamples, seed)?.p_value)
            };
            let (rr, pp, f) = (100.0 * r.recall_at_k, 100.0 * r.precision_at_k, 100.0 * r.f1);
            writeln!(out, "{}\t{rr:.2}\t{pp:.2}\t{f:.2}\t{p}", m.config_string)?;
        }
        out.flush()?;

        let mut out = BufWriter::new(create(&a.out_dir.join("scores.tsv"))?);
        writeln!(out, "config\tlo\thi\tcount")?;
        for m in &runs {
            let top: Vec<f64> = m.runs.iter().filter_map(|r| r.ranked.first().map(|x| x.1)).collect();
            for b in score_histogram(&top, a.bins) {
                writeln!(out, "{}\t{:.2}\t{:.2}\t{}", m.config_string, b.lo, b.hi, b.count)?;
            }
        }
        out.flush()?;
    }

    if !sweeps.is_empty() {
        let mut out = BufWriter::new(create(&a.out_dir.join("lambda_f1.tsv"))?);
        writeln!(out, "config\tlambda\tF1")?;
        for s in &sweeps {
            for p in &s.points {
                writeln!(out, "{}\t{:.2}\t{:.2}", s.config_template, p.lambda, 100.0 * p.result.f1)?;
            }
        }
        out.flush()?;
    }
    Ok(())
}
