//! Seeded synthetic inputs for the benchmarks.

use std::collections::BTreeSet;

use citespan::corpus::{Citance, Dataset, Document, SectionKind, Sentence, Split};
use citespan::preprocess::TokenSequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Zipf-ish vocabulary draw: low indices are much more frequent.
fn word(rng: &mut ChaCha8Rng, vocab: usize) -> String {
    let u: f64 = rng.random();
    format!("w{}", ((vocab as f64).powf(u) as usize).min(vocab) - 1)
}

pub fn sentences(n: usize, len: usize, vocab: usize, seed: u64) -> Vec<TokenSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..len).map(|_| word(&mut rng, vocab)).collect()).collect()
}

fn text(rng: &mut ChaCha8Rng, len: usize, vocab: usize) -> String {
    (0..len).map(|_| word(rng, vocab)).collect::<Vec<_>>().join(" ")
}

/// `docs` reference documents of `sents` sentences, each cited `cites` times.
pub fn dataset(docs: usize, sents: usize, cites: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = Dataset::new(Split::Dev);
    for d in 0..docs {
        let doc_id = format!("D{d:03}");
        let sentences = (1..=sents as u32)
            .map(|sid| Sentence {
                sid,
                text: text(&mut rng, 20, 2000),
                section_title: "body".into(),
                section_kind: SectionKind::Section,
            })
            .collect();
        ds.documents.insert(doc_id.clone(), Document { doc_id: doc_id.clone(), sentences });
        for c in 0..cites {
            ds.citances.push(Citance {
                citance_id: format!("{doc_id}:{c}"),
                citing_doc_id: format!("C{c}"),
                reference_doc_id: doc_id.clone(),
                text: text(&mut rng, 25, 2000),
                gold_sids: BTreeSet::from([rng.random_range(1..=sents as u32)]),
            });
        }
    }
    ds
}
