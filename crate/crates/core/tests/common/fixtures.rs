//! Synthetic corpora and stub models shared by several test targets.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use citespan::corpus::{Citance, Dataset, Document, SectionKind, Sentence, Split};
use citespan::lda::TopicModel;
use citespan::preprocess::TokenSequence;
use citespan::ranker::{ModelRegistry, OtherKind, RankerConfig, SimilarityScorer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two topics over disjoint halves of a vocabulary `w00, w01, ...`, whose
/// lexicographic order matches the index order.
pub struct TwoTopics {
    pub words: Vec<String>,
    pub topics: [Vec<f64>; 2],
}

impl TwoTopics {
    /// `half` gives the term probabilities within each topic's support.
    pub fn new(half: &[f64]) -> Self {
        let h = half.len();
        let words = (0..2 * h).map(|i| format!("w{i:02}")).collect();
        let mut t0 = vec![0.0; 2 * h];
        let mut t1 = vec![0.0; 2 * h];
        t0[..h].copy_from_slice(half);
        t1[h..].copy_from_slice(half);
        TwoTopics { words, topics: [t0, t1] }
    }

    fn draw(rng: &mut ChaCha8Rng, dist: &[f64]) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        dist.len() - 1
    }

    /// Documents leaning towards one topic, with a per-document mixing weight.
    pub fn corpus(&self, n_docs: usize, len: usize, seed: u64) -> Vec<TokenSequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_docs)
            .map(|_| {
                let w: f64 = if rng.random::<bool>() { rng.random_range(0.8..1.0) } else { rng.random_range(0.0..0.2) };
                (0..len)
                    .map(|_| {
                        let k = usize::from(rng.random::<f64>() >= w);
                        self.words[Self::draw(&mut rng, &self.topics[k])].clone()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn pure_doc(&self, topic: usize, len: usize, seed: u64) -> TokenSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| self.words[Self::draw(&mut rng, &self.topics[topic])].clone()).collect()
    }

    pub fn learned(&self, m: &TopicModel) -> Vec<Vec<f64>> {
        (0..m.n_topics())
            .map(|k| {
                let d = m.topic_distribution(k);
                self.words.iter().map(|w| d[m.vocab[w]]).collect()
            })
            .collect()
    }

    /// Largest per-term absolute error under the better of the two topic matchings.
    pub fn max_term_error(&self, learned: &[Vec<f64>]) -> f64 {
        let err = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let t = &self.topics;
        let straight = err(&learned[0], &t[0]).max(err(&learned[1], &t[1]));
        let swapped = err(&learned[0], &t[1]).max(err(&learned[1], &t[0]));
        straight.min(swapped)
    }
}

/// Colour words share contexts; the finance sentences do not.
pub fn colour_corpus() -> Vec<TokenSequence> {
    let seq = |s: String| s.split_whitespace().collect::<TokenSequence>();
    let mut out = Vec::new();
    for _ in 0..30 {
        for colour in ["red", "blue"] {
            out.push(seq(format!("the {colour} car drives fast on the road")));
            out.push(seq(format!("a {colour} ball rolls down the hill")));
            out.push(seq(format!("she painted the fence {colour} yesterday")));
        }
        out.push(seq("stock prices fell sharply after the quarterly report".into()));
        out.push(seq("investors sold shares as prices fell".into()));
    }
    out
}

/// Scores a sentence by its first preprocessed token.
pub struct FirstTokenScorer(pub HashMap<&'static str, f64>);

impl SimilarityScorer for FirstTokenScorer {
    fn similarity(&self, _: &TokenSequence, sentence: &TokenSequence) -> f64 {
        sentence.first().and_then(|t| self.0.get(t.as_str()).copied()).unwrap_or(0.1)
    }

    fn wants_expansion(&self) -> bool {
        false
    }
}

pub const CROSSOVER_TEXTS: [&str; 7] = [
    "parsing trees are built bottom up",
    "the corpus contains news articles",
    "lattice segmentation uses a lexicon",
    "results are reported on the test data",
    "names cause most errors",
    "lexicon entries were collected manually",
    "segmentation errors involve unknown words",
];
pub const CROSSOVER_CITANCE: &str = "lattice segmentation with lexicon errors";

// cosine scores of sentences 3 and 7 against the citance, computed by hand
// from raw counts and ln(N/df) over the seven sentences
pub const T3: f64 = 0.725_994_347_107_808;
pub const T7: f64 = 0.282_832_274_643_727_6;
pub const O3: f64 = 0.1;
pub const O7: f64 = 0.9;

/// The blend weight at which sentences 3 and 7 tie.
pub fn crossover_lambda() -> f64 {
    (O7 - O3) / ((T3 - T7) + (O7 - O3))
}

/// One document, one citance whose gold sentence is 3, and a stub `lda:stub`
/// that prefers sentence 7.
pub fn crossover_fixture() -> (Dataset, ModelRegistry) {
    let sentences = CROSSOVER_TEXTS
        .iter()
        .enumerate()
        .map(|(i, t)| Sentence {
            sid: i as u32 + 1,
            text: t.to_string(),
            section_title: "body".into(),
            section_kind: SectionKind::Section,
        })
        .collect();
    let mut ds = Dataset::new(Split::Dev);
    ds.documents.insert("D".into(), Document { doc_id: "D".into(), sentences });
    ds.citances.push(Citance {
        citance_id: "D:1".into(),
        citing_doc_id: "C".into(),
        reference_doc_id: "D".into(),
        text: CROSSOVER_CITANCE.into(),
        gold_sids: BTreeSet::from([3]),
    });
    let mut reg = ModelRegistry::new();
    reg.insert(
        OtherKind::Lda,
        "stub",
        Arc::new(FirstTokenScorer(HashMap::from([("lattice", O3), ("segmentation", O7)]))),
    );
    (ds, reg)
}

pub fn crossover_top1(lambda: f64) -> RankerConfig {
    let mut cfg: RankerConfig = format!("tfidf+nltk_stop+nltk_tok+lda:stub@{lambda}").parse().unwrap();
    cfg.top_k = 1;
    cfg
}

/// Records the token sequences it is asked to compare.
#[derive(Default)]
pub struct Recorder(pub Mutex<Vec<(Vec<String>, Vec<String>)>>);

impl SimilarityScorer for Recorder {
    fn similarity(&self, c: &TokenSequence, s: &TokenSequence) -> f64 {
        self.0.lock().unwrap().push((c.to_vec(), s.to_vec()));
        0.0
    }

    fn wants_expansion(&self) -> bool {
        true
    }
}

/// 200 citances; system A finds the gold sentence for 90% of them and
/// system B only for the other 10%.
pub fn dominance_hits() -> (Vec<citespan::eval::CitanceHits>, Vec<citespan::eval::CitanceHits>) {
    use citespan::eval::CitanceHits;
    let hit = CitanceHits { hits: 1, retrieved: 3, gold: 1 };
    let miss = CitanceHits { hits: 0, retrieved: 3, gold: 1 };
    let a = (0..200).map(|i| if i % 10 == 0 { miss } else { hit }).collect();
    let b = (0..200).map(|i| if i % 10 == 0 { hit } else { miss }).collect();
    (a, b)
}
