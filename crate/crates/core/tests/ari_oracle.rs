//! Adjusted Rand index against a pair-counting oracle.

use nanophase::seeding::rng_from;
use nanophase::stats::adjusted_rand;
use proptest::prelude::*;
use rand::Rng;

#[path = "support/pair_counting.rs"]
mod pair_counting;

use pair_counting::{pair_counting_ari, partitions};

#[test]
fn bell_numbers() {
    let counts: Vec<usize> = (1..=7).map(|n| partitions(n).len()).collect();
    assert_eq!(counts, [1, 2, 5, 15, 52, 203, 877]);
}

#[test]
fn exhaustive_small_partitions() {
    // Both sides reduce to a ratio of the same integers and one rounding, so
    // agreement is bit-exact.
    for n in 2..=6 {
        let all = partitions(n);
        for a in &all {
            for b in &all {
                assert_eq!(adjusted_rand(a, b).unwrap(), pair_counting_ari(a, b), "{a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn independent_labelings_average_zero() {
    let mut rng = rng_from(2024);
    let mean = (0..100)
        .map(|_| {
            let a: Vec<usize> = (0..1000).map(|_| rng.random_range(0..3)).collect();
            let b: Vec<usize> = (0..1000).map(|_| rng.random_range(0..3)).collect();
            adjusted_rand(&a, &b).unwrap()
        })
        .sum::<f64>()
        / 100.0;
    assert!(mean.abs() < 0.02, "mean ARI {mean}");
}

fn arb_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2usize..60, 1usize..6, 1usize..6).prop_flat_map(|(n, ka, kb)| {
        (prop::collection::vec(0..ka, n), prop::collection::vec(0..kb, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_oracle_symmetric_and_relabel_invariant(
        (a, b) in arb_pair(),
        shift in 0usize..1000,
        mult in prop::sample::select(vec![1usize, 3, 7, 11]),
    ) {
        let ari = adjusted_rand(&a, &b).unwrap();
        prop_assert_eq!(ari, pair_counting_ari(&a, &b));
        prop_assert_eq!(ari, adjusted_rand(&b, &a).unwrap());
        // An injective map of label ids is a relabeling.
        let relabeled: Vec<usize> = a.iter().map(|&l| l * mult + shift).collect();
        prop_assert_eq!(ari, adjusted_rand(&relabeled, &b).unwrap());
        prop_assert!((-1.0..=1.0).contains(&ari));
    }
}
