use citespan::preprocess::TokenSequence;
use citespan::tfidf::{cosine, score_citance, TfidfModel};
use proptest::prelude::*;

mod common;

use common::oracles::{dense_tfidf_scores as dense_scores, id_tokens as to_seq};

fn corpus() -> impl Strategy<Value = (Vec<Vec<usize>>, Vec<usize>)> {
    (prop::collection::vec(prop::collection::vec(0usize..20, 0..8), 1..=10), prop::collection::vec(0usize..24, 0..8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn matches_dense_oracle((sents, query) in corpus()) {
        let seqs: Vec<TokenSequence> = sents.iter().map(|s| to_seq(s)).collect();
        let model = TfidfModel::fit(&seqs).unwrap();
        let cands: Vec<(u32, TokenSequence)> = seqs.iter().cloned().enumerate().map(|(i, s)| (i as u32 + 1, s)).collect();
        let got = score_citance(&to_seq(&query), &cands, &model);
        let want = dense_scores(&sents, &query, 24);
        for (sid, score) in got {
            prop_assert!((score - want[sid as usize - 1]).abs() <= 1e-9);
        }
    }

    #[test]
    fn ranking_is_scale_invariant((sents, query) in corpus(), c in 0.01f64..100.0) {
        let seqs: Vec<TokenSequence> = sents.iter().map(|s| to_seq(s)).collect();
        let model = TfidfModel::fit(&seqs).unwrap();
        let q = model.vectorize(&to_seq(&query));
        let qs = q.scaled(c);
        let order = |v: &citespan::tfidf::SparseVector| {
            let mut s: Vec<(u32, f64)> = seqs.iter().enumerate().map(|(i, x)| (i as u32, cosine(v, &model.vectorize(x)))).collect();
            citespan::tfidf::sort_scored(&mut s);
            s.into_iter().map(|x| x.0).collect::<Vec<_>>()
        };
        // cosine is scale free up to rounding; compare orders only where scores are distinct
        let a = order(&q);
        let b = order(&qs);
        let sa: Vec<f64> = a.iter().map(|&i| cosine(&q, &model.vectorize(&seqs[i as usize]))).collect();
        for w in 0..a.len() {
            if a[w] != b[w] {
                let pos = a.iter().position(|&x| x == b[w]).unwrap();
                prop_assert!((sa[w] - sa[pos]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights_nonnegative_and_cosine_symmetric((sents, query) in corpus()) {
        let seqs: Vec<TokenSequence> = sents.iter().map(|s| to_seq(s)).collect();
        let model = TfidfModel::fit(&seqs).unwrap();
        let q = model.vectorize(&to_seq(&query));
        for s in &seqs {
            let v = model.vectorize(s);
            prop_assert!(v.iter().all(|(_, w)| w > 0.0));
            prop_assert!((cosine(&q, &v) - cosine(&v, &q)).abs() <= 1e-12);
            for t in s.iter() {
                let df = model.df(t).unwrap();
                prop_assert!(df >= 1 && df <= model.n_sentences());
            }
        }
    }
}

#[test]
fn four_sentence_toy_document() {
    // idf is ln 4 or ln 2 everywhere, so the cosines reduce to 1/√3, 1/√10, 1/2, 0
    let sents = vec![vec![0, 1, 2], vec![1, 3], vec![2, 2, 4], vec![5]];
    let query = vec![1, 2, 6];
    let want = dense_scores(&sents, &query, 7);
    let seqs: Vec<TokenSequence> = sents.iter().map(|s| to_seq(s)).collect();
    let model = TfidfModel::fit(&seqs).unwrap();
    let cands: Vec<(u32, TokenSequence)> = seqs.iter().cloned().enumerate().map(|(i, s)| (i as u32 + 1, s)).collect();
    let got = score_citance(&to_seq(&query), &cands, &model);
    assert_eq!(got.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 3, 2, 4]);
    for (sid, s) in &got {
        assert!((s - want[*sid as usize - 1]).abs() < 1e-12);
    }
    let frozen = [1.0 / 3f64.sqrt(), 1.0 / 10f64.sqrt(), 0.5, 0.0];
    for (w, f) in want.iter().zip(frozen) {
        assert!((w - f).abs() < 1e-12, "{want:?}");
    }
}
