//! Online variational Bayes for LDA.
//!
//! Training follows the stochastic natural-gradient scheme: for minibatch t
//! the local E-step fits per-document variational Dirichlets γ, and the global
//! topic-term parameters are blended as
//!
//! ```text
//! λ ← (1 − ρ_t)·λ + ρ_t·(η + D/|B| · sstats),   ρ_t = (τ₀ + t)^(−κ)
//! ```
//!
//! where D is the corpus size and sstats the expected word counts of the batch.

mod persist;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};
use thiserror::Error;

use crate::preprocess::TokenSequence;

pub use persist::{parse_config_file, read_model, write_model};

#[derive(Debug, Error)]
pub enum LdaError {
    #[error("no term survives the document-frequency bounds")]
    EmptyVocabulary,
    #[error("held-out set is empty")]
    EmptyHeldout,
    #[error("topic index {index} out of range for {n_topics} topics")]
    BadTopicIndex { index: usize, n_topics: usize },
    #[error("invalid LDA configuration: {0}")]
    BadConfig(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub n_topics: usize,
    pub kappa: f64,
    pub tau0: f64,
    /// Absolute minimum document frequency.
    pub min_df: usize,
    /// Maximum document frequency as a fraction of the corpus.
    pub max_df: f64,
    pub batch_size: usize,
    /// Symmetric document-topic prior; `None` means 1/K.
    pub alpha: Option<f64>,
    /// Symmetric topic-term prior; `None` means 1/K.
    pub eta: Option<f64>,
    pub seed: u64,
    pub passes: usize,
    pub e_step_tol: f64,
    pub e_step_max_iter: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            n_topics: 10,
            kappa: 0.7,
            tau0: 1.0,
            min_df: 1,
            max_df: 1.0,
            batch_size: 128,
            alpha: None,
            eta: None,
            seed: 0,
            passes: 1,
            e_step_tol: 1e-3,
            e_step_max_iter: 100,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<(), LdaError> {
        let bad = |m: &str| Err(LdaError::BadConfig(m.to_string()));
        if self.n_topics < 2 {
            return bad("n_topics must be >= 2");
        }
        if !(0.5..=1.0).contains(&self.kappa) {
            return bad("kappa must lie in [0.5, 1]");
        }
        if self.tau0.is_nan() || self.tau0 < 0.0 {
            return bad("tau0 must be >= 0");
        }
        if self.min_df < 1 {
            return bad("min_df must be >= 1");
        }
        if !(self.max_df > 0.0 && self.max_df <= 1.0) {
            return bad("max_df must lie in (0, 1]");
        }
        if self.batch_size < 1 || self.passes < 1 || self.e_step_max_iter < 1 {
            return bad("batch_size, passes and e_step_max_iter must be >= 1");
        }
        let bad_prior = |p: f64| p.is_nan() || p <= 0.0;
        if self.alpha.is_some_and(bad_prior) || self.eta.is_some_and(bad_prior) {
            return bad("priors must be positive");
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1.0 / self.n_topics as f64)
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(1.0 / self.n_topics as f64)
    }

    /// Learning rate for the update that follows `t` earlier updates, capped at 1.
    pub fn rho(&self, t: u64) -> f64 {
        (self.tau0 + t as f64).powf(-self.kappa).min(1.0)
    }
}

/// Keeps terms with `min_df <= df <= max_df·|docs|`; indices follow term order.
pub fn build_vocabulary(
    docs: &[TokenSequence],
    min_df: usize,
    max_df: f64,
) -> Result<BTreeMap<String, usize>, LdaError> {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        let mut seen: Vec<&str> = d.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let cap = max_df * docs.len() as f64;
    let vocab: BTreeMap<String, usize> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df && n as f64 <= cap)
        .enumerate()
        .map(|(i, (t, _))| (t.to_string(), i))
        .collect();
    if vocab.is_empty() {
        return Err(LdaError::EmptyVocabulary);
    }
    Ok(vocab)
}

/// Sparse word counts of one document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bag {
    pub ids: Vec<usize>,
    pub counts: Vec<f64>,
}

impl Bag {
    pub fn from_tokens(tokens: &TokenSequence, vocab: &BTreeMap<String, usize>) -> Bag {
        let mut m: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(&id) = vocab.get(t.as_str()) {
                *m.entry(id).or_default() += 1.0;
            }
        }
        let (ids, counts) = m.into_iter().unzip();
        Bag { ids, counts }
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicVector {
    pub probs: Vec<f64>,
    /// No in-vocabulary token: the vector is the uniform prior.
    pub uninformative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub vocab: BTreeMap<String, usize>,
    pub config: LdaConfig,
    pub updates_seen: u64,
    lambda: Vec<f64>,
    exp_elog_beta: Vec<f64>,
}

fn dirichlet_expectation_row(row: &[f64]) -> Vec<f64> {
    let psi_sum = digamma(row.iter().sum());
    row.iter().map(|&x| digamma(x) - psi_sum).collect()
}

fn exp_dirichlet_expectation_rows(lambda: &[f64], n_terms: usize) -> Vec<f64> {
    lambda.chunks(n_terms).flat_map(|row| dirichlet_expectation_row(row).into_iter().map(f64::exp)).collect()
}

/// Result of the local E-step for one document.
struct LocalFit {
    gamma: Vec<f64>,
    exp_elog_theta: Vec<f64>,
    /// count_w / phinorm_w for the bag's words.
    weight: Vec<f64>,
}

impl TopicModel {
    pub(crate) fn from_parts(
        vocab: BTreeMap<String, usize>,
        config: LdaConfig,
        updates_seen: u64,
        lambda: Vec<f64>,
    ) -> TopicModel {
        let exp_elog_beta = exp_dirichlet_expectation_rows(&lambda, vocab.len());
        TopicModel { vocab, config, updates_seen, lambda, exp_elog_beta }
    }

    pub fn n_topics(&self) -> usize {
        self.config.n_topics
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    /// Row-major K × |V| variational parameters.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Topic-term distribution of topic `k` (row of λ normalized to sum 1).
    pub fn topic_distribution(&self, k: usize) -> Vec<f64> {
        let v = self.n_terms();
        let row = &self.lambda[k * v..(k + 1) * v];
        let s: f64 = row.iter().sum();
        row.iter().map(|x| x / s).collect()
    }

    pub fn bag(&self, tokens: &TokenSequence) -> Bag {
        Bag::from_tokens(tokens, &self.vocab)
    }

    fn local_fit(&self, bag: &Bag) -> LocalFit {
        let k = self.n_topics();
        let v = self.n_terms();
        let alpha = self.config.alpha();
        let eeb = &self.exp_elog_beta;
        let phinorm = |eet: &[f64], out: &mut Vec<f64>| {
            out.clear();
            for (&w, &c) in bag.ids.iter().zip(&bag.counts) {
                let mut s = 1e-100;
                for (t, e) in eet.iter().enumerate() {
                    s += e * eeb[t * v + w];
                }
                out.push(c / s);
            }
        };

        let mut gamma = vec![1.0; k];
        let mut eet: Vec<f64> = dirichlet_expectation_row(&gamma).into_iter().map(f64::exp).collect();
        let mut weight = Vec::with_capacity(bag.ids.len());
        for _ in 0..self.config.e_step_max_iter {
            phinorm(&eet, &mut weight);
            let mut change = 0.0;
            for t in 0..k {
                let dot: f64 = bag.ids.iter().zip(&weight).map(|(&w, &r)| r * eeb[t * v + w]).sum();
                let g = alpha + eet[t] * dot;
                change += (g - gamma[t]).abs();
                gamma[t] = g;
            }
            eet = dirichlet_expectation_row(&gamma).into_iter().map(f64::exp).collect();
            if change / (k as f64) < self.config.e_step_tol {
                break;
            }
        }
        phinorm(&eet, &mut weight);
        LocalFit { gamma, exp_elog_theta: eet, weight }
    }

    /// Topic proportions of one sentence with λ held fixed. Tokens outside the
    /// vocabulary are ignored; with none left the uniform vector is returned.
    pub fn infer_topics(&self, tokens: &TokenSequence) -> TopicVector {
        self.infer_bag(&self.bag(tokens))
    }

    pub fn infer_bag(&self, bag: &Bag) -> TopicVector {
        let k = self.n_topics();
        if bag.is_empty() {
            return TopicVector { probs: vec![1.0 / k as f64; k], uninformative: true };
        }
        let fit = self.local_fit(bag);
        let s: f64 = fit.gamma.iter().sum();
        TopicVector { probs: fit.gamma.iter().map(|g| g / s).collect(), uninformative: false }
    }

    /// Cosine similarity of the two token sequences' topic vectors.
    pub fn similarity(&self, a: &TokenSequence, b: &TokenSequence) -> f64 {
        topic_cosine(&self.infer_topics(a), &self.infer_topics(b))
    }

    /// Variational lower bound on the log likelihood of `docs`, not
    /// normalized by token count. Higher is better; only comparable between
    /// models with the same number of topics.
    pub fn heldout_bound(&self, docs: &[TokenSequence]) -> Result<f64, LdaError> {
        if docs.is_empty() {
            return Err(LdaError::EmptyHeldout);
        }
        let k = self.n_topics();
        let v = self.n_terms();
        let alpha = self.config.alpha();
        let eta = self.config.eta();
        let elog_beta: Vec<f64> = self.exp_elog_beta.iter().map(|x| x.ln()).collect();

        let per_doc: Vec<f64> = docs
            .par_iter()
            .map(|d| {
                let bag = self.bag(d);
                let gamma = if bag.is_empty() { vec![alpha; k] } else { self.local_fit(&bag).gamma };
                let elog_theta = dirichlet_expectation_row(&gamma);
                let mut score = 0.0;
                for (&w, &c) in bag.ids.iter().zip(&bag.counts) {
                    let terms: Vec<f64> = (0..k).map(|t| elog_theta[t] + elog_beta[t * v + w]).collect();
                    score += c * log_sum_exp(&terms);
                }
                for t in 0..k {
                    score += (alpha - gamma[t]) * elog_theta[t] + ln_gamma(gamma[t]) - ln_gamma(alpha);
                }
                score + ln_gamma(alpha * k as f64) - ln_gamma(gamma.iter().sum())
            })
            .collect();
        let mut score: f64 = per_doc.iter().sum();

        for t in 0..k {
            let row = &self.lambda[t * v..(t + 1) * v];
            for (w, &l) in row.iter().enumerate() {
                score += (eta - l) * elog_beta[t * v + w] + ln_gamma(l) - ln_gamma(eta);
            }
            score += ln_gamma(eta * v as f64) - ln_gamma(row.iter().sum());
        }
        Ok(score)
    }

    /// The `n` most probable terms of topic `k`, ties broken by term.
    pub fn top_words(&self, k: usize, n: usize) -> Result<Vec<String>, LdaError> {
        if k >= self.n_topics() {
            return Err(LdaError::BadTopicIndex { index: k, n_topics: self.n_topics() });
        }
        let dist = self.topic_distribution(k);
        let mut terms: Vec<(&String, f64)> = self.vocab.iter().map(|(t, &i)| (t, dist[i])).collect();
        terms.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(terms.into_iter().take(n).map(|(t, _)| t.clone()).collect())
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn topic_cosine(a: &TopicVector, b: &TopicVector) -> f64 {
    let dot: f64 = a.probs.iter().zip(&b.probs).map(|(x, y)| x * y).sum();
    let na: f64 = a.probs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.probs.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).min(1.0)
    }
}

/// Streaming trainer. Feed minibatches with [`OnlineLda::update`].
pub struct OnlineLda {
    model: TopicModel,
    corpus_size: usize,
}

impl OnlineLda {
    /// `corpus_size` is the total number of documents D the stream represents.
    pub fn new(vocab: BTreeMap<String, usize>, config: LdaConfig, corpus_size: usize) -> Result<Self, LdaError> {
        config.validate()?;
        if vocab.is_empty() {
            return Err(LdaError::EmptyVocabulary);
        }
        let k = config.n_topics;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let init = Gamma::new(100.0, 0.01).expect("valid gamma parameters");
        let lambda: Vec<f64> = (0..k * vocab.len()).map(|_| init.sample(&mut rng)).collect();
        Ok(OnlineLda { model: TopicModel::from_parts(vocab, config, 0, lambda), corpus_size: corpus_size.max(1) })
    }

    pub fn model(&self) -> &TopicModel {
        &self.model
    }

    pub fn into_model(self) -> TopicModel {
        self.model
    }

    /// One E-step over the batch followed by the blended M-step.
    pub fn update(&mut self, batch: &[Bag]) {
        if batch.is_empty() {
            return;
        }
        let k = self.model.n_topics();
        let v = self.model.n_terms();
        let fits: Vec<LocalFit> = batch.par_iter().map(|b| self.model.local_fit(b)).collect();
        let mut sstats = vec![0.0; k * v];
        for (bag, fit) in batch.iter().zip(&fits) {
            for t in 0..k {
                let e = fit.exp_elog_theta[t];
                for (&w, &r) in bag.ids.iter().zip(&fit.weight) {
                    sstats[t * v + w] += e * r;
                }
            }
        }
        let rho = self.model.config.rho(self.model.updates_seen);
        let eta = self.model.config.eta();
        let scale = self.corpus_size as f64 / batch.len() as f64;
        for (i, l) in self.model.lambda.iter_mut().enumerate() {
            let target = eta + scale * sstats[i] * self.model.exp_elog_beta[i];
            *l = (1.0 - rho) * *l + rho * target;
        }
        self.model.exp_elog_beta = exp_dirichlet_expectation_rows(&self.model.lambda, v);
        self.model.updates_seen += 1;
    }

    /// One pass over `bags` in order, `batch_size` documents at a time.
    pub fn pass(&mut self, bags: &[Bag]) {
        let bs = self.model.config.batch_size;
        for chunk in bags.chunks(bs) {
            self.update(chunk);
        }
    }
}

/// Builds the vocabulary from `docs` and trains for `config.passes` passes
/// in input order.
pub fn fit_online(docs: &[TokenSequence], config: &LdaConfig) -> Result<TopicModel, LdaError> {
    config.validate()?;
    let vocab = build_vocabulary(docs, config.min_df, config.max_df)?;
    let bags: Vec<Bag> = docs.iter().map(|d| Bag::from_tokens(d, &vocab)).collect();
    let mut trainer = OnlineLda::new(vocab, config.clone(), docs.len())?;
    for _ in 0..config.passes {
        trainer.pass(&bags);
    }
    Ok(trainer.into_model())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> TokenSequence {
        s.split_whitespace().collect()
    }

    #[test]
    fn max_df_threshold() {
        let mut docs: Vec<TokenSequence> = (0..9).map(|_| seq("common")).collect();
        docs.push(seq("rare"));
        let v = build_vocabulary(&docs, 1, 0.87).unwrap();
        assert!(!v.contains_key("common"));
        assert!(v.contains_key("rare"));
        let v = build_vocabulary(&docs, 1, 1.0).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v["common"], 0);
        assert!(matches!(build_vocabulary(&docs, 11, 1.0), Err(LdaError::EmptyVocabulary)));
    }

    #[test]
    fn rho_schedule() {
        let cfg = LdaConfig { tau0: 1.0, kappa: 0.5, ..Default::default() };
        assert!((cfg.rho(1) - 0.5f64.sqrt()).abs() < 1e-15);
        let cfg = LdaConfig { tau0: 0.0, kappa: 0.7, ..Default::default() };
        assert_eq!(cfg.rho(0), 1.0);
        let cfg = LdaConfig { tau0: 0.5, kappa: 0.7, ..Default::default() };
        assert_eq!(cfg.rho(0), 1.0);
        assert!(cfg.rho(1) < 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(LdaConfig::default().validate().is_ok());
        assert!(LdaConfig { n_topics: 1, ..Default::default() }.validate().is_err());
        assert!(LdaConfig { kappa: 1.2, ..Default::default() }.validate().is_err());
        assert!(LdaConfig { max_df: 0.0, ..Default::default() }.validate().is_err());
        assert!(LdaConfig { min_df: 0, ..Default::default() }.validate().is_err());
        let wide_setting =
            LdaConfig { n_topics: 95, min_df: 10, max_df: 0.99, kappa: 0.5, tau0: 768.0, ..Default::default() };
        assert!(wide_setting.validate().is_ok());
    }

    fn tiny_model() -> TopicModel {
        let docs: Vec<TokenSequence> = (0..40)
            .map(|i| if i % 2 == 0 { seq("apple banana apple cherry") } else { seq("engine wheel engine brake") })
            .collect();
        let cfg = LdaConfig { n_topics: 2, passes: 20, batch_size: 10, seed: 3, ..Default::default() };
        fit_online(&docs, &cfg).unwrap()
    }

    #[test]
    fn empty_input_is_uniform() {
        let m = tiny_model();
        let tv = m.infer_topics(&seq(""));
        assert!(tv.uninformative);
        assert_eq!(tv.probs, vec![0.5, 0.5]);
        let tv = m.infer_topics(&seq("zzz qqq"));
        assert!(tv.uninformative);
    }

    #[test]
    fn inference_is_deterministic_and_normalized() {
        let m = tiny_model();
        let a = m.infer_topics(&seq("apple cherry"));
        assert_eq!(a, m.infer_topics(&seq("apple cherry")));
        assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(a.probs.iter().all(|&p| p > 0.0));
        let fruit = seq("apple banana apple cherry apple banana apple cherry");
        let cars = seq("engine wheel engine brake engine wheel engine brake");
        assert!(m.similarity(&fruit, &cars) < 0.3);
        assert!((m.similarity(&seq("apple"), &seq("apple")) - 1.0).abs() < 1e-12);
        assert!(m.similarity(&seq(""), &seq("apple")) > 0.0);
    }

    #[test]
    fn top_words_and_bad_index() {
        let m = tiny_model();
        let apple_topic = (0..2).find(|&k| m.top_words(k, 1).unwrap() == vec!["apple"]).unwrap();
        assert_eq!(m.top_words(apple_topic, 3).unwrap()[0], "apple");
        assert_eq!(m.top_words(apple_topic, 100).unwrap().len(), m.n_terms());
        assert!(matches!(m.top_words(2, 1), Err(LdaError::BadTopicIndex { .. })));
    }

    #[test]
    fn heldout_requires_docs() {
        let m = tiny_model();
        assert!(matches!(m.heldout_bound(&[]), Err(LdaError::EmptyHeldout)));
        let b1 = m.heldout_bound(&[seq("apple banana")]).unwrap();
        assert_eq!(b1, m.heldout_bound(&[seq("apple banana")]).unwrap());
    }

    #[test]
    fn lambda_rows_are_distributions() {
        let m = tiny_model();
        assert!(m.lambda().iter().all(|&x| x > 0.0));
        for k in 0..2 {
            assert!((m.topic_distribution(k).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
