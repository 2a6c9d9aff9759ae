mod common;

use std::collections::{BTreeMap, BTreeSet};

use citespan::eval::{bootstrap_paired_test, evaluate, f1_score, CitanceHits};
use citespan::ranker::RankedList;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::fixtures::dominance_hits;

type Gold = BTreeMap<String, BTreeSet<u32>>;

fn fixture() -> impl Strategy<Value = (Vec<RankedList>, Gold)> {
    prop::collection::vec(
        (prop::collection::btree_set(1u32..15, 0..5), prop::collection::btree_set(1u32..15, 0..4)),
        1..12,
    )
    .prop_map(|items| {
        let mut runs = Vec::new();
        let mut gold = Gold::new();
        for (i, (g, r)) in items.into_iter().enumerate() {
            let id = format!("c{i}");
            runs.push(RankedList { citance_id: id.clone(), ranked: r.into_iter().map(|s| (s, 0.5)).collect() });
            gold.insert(id, g);
        }
        (runs, gold)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn duplication_invariance((runs, gold) in fixture()) {
        let once = evaluate(&runs, &gold).unwrap();
        let mut runs2 = runs.clone();
        let mut gold2 = gold.clone();
        for r in &runs {
            let id = format!("{}-dup", r.citance_id);
            runs2.push(RankedList { citance_id: id.clone(), ranked: r.ranked.clone() });
            gold2.insert(id, gold[&r.citance_id].clone());
        }
        let twice = evaluate(&runs2, &gold2).unwrap();
        prop_assert_eq!(once.precision_at_k, twice.precision_at_k);
        prop_assert_eq!(once.recall_at_k, twice.recall_at_k);
        prop_assert_eq!(once.f1, twice.f1);
    }

    #[test]
    fn permutation_invariance((runs, gold) in fixture(), seed in any::<u64>()) {
        let mut shuffled = runs.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(evaluate(&runs, &gold).unwrap(), evaluate(&shuffled, &gold).unwrap());
    }

    #[test]
    fn f1_from_counts((runs, gold) in fixture()) {
        let r = evaluate(&runs, &gold).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.f1));
        let p = if r.n_retrieved == 0 { 0.0 } else { r.n_correct as f64 / r.n_retrieved as f64 };
        let rec = if r.n_gold == 0 { 0.0 } else { r.n_correct as f64 / r.n_gold as f64 };
        let f = if p + rec > 0.0 { 2.0 * p * rec / (p + rec) } else { 0.0 };
        prop_assert_eq!(r.f1, f);
    }
}

#[test]
fn dominant_system_is_significant() {
    let (a, b) = dominance_hits();
    let r = bootstrap_paired_test(&a, &b, 10_000, 42).unwrap();
    assert!(r.p_value < 0.01, "{r:?}");
    assert!(r.mean_diff > 0.0);
    assert!(!r.degenerate);
}

#[test]
fn bootstrap_is_reproducible() {
    let (a, b) = dominance_hits();
    let r1 = bootstrap_paired_test(&a, &b, 2000, 9).unwrap();
    let r2 = bootstrap_paired_test(&a, &b, 2000, 9).unwrap();
    assert_eq!(r1.mean_diff.to_bits(), r2.mean_diff.to_bits());
    assert_eq!(r1.p_value.to_bits(), r2.p_value.to_bits());
}

/// Resampler written out separately: same seeding rule, sequential loop.
fn reference_mean_diff(a: &[CitanceHits], b: &[CitanceHits], n: usize, seed: u64) -> f64 {
    let f1 = |h: &[CitanceHits], idx: &[usize]| {
        let c: usize = idx.iter().map(|&i| h[i].hits).sum();
        let r: usize = idx.iter().map(|&i| h[i].retrieved).sum();
        let g: usize = idx.iter().map(|&i| h[i].gold).sum();
        f1_score(c as f64 / r as f64, c as f64 / g as f64)
    };
    let mut total = 0.0;
    for k in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + k as u64);
        let idx: Vec<usize> = (0..a.len()).map(|_| rng.random_range(0..a.len())).collect();
        total += f1(a, &idx) - f1(b, &idx);
    }
    total / n as f64
}

#[test]
fn resampler_matches_reference() {
    let (mut a, b) = dominance_hits();
    a[3] = CitanceHits { hits: 2, retrieved: 3, gold: 4 };
    let r = bootstrap_paired_test(&a, &b, 1000, 5).unwrap();
    let want = reference_mean_diff(&a, &b, 1000, 5);
    assert!((r.mean_diff - want).abs() < 1e-12, "{} vs {want}", r.mean_diff);
}

#[test]
fn identical_systems_are_degenerate() {
    let (a, _) = dominance_hits();
    let r = bootstrap_paired_test(&a, &a, 1000, 1).unwrap();
    assert!(r.degenerate);
    assert_eq!(r.p_value, 1.0);
}
