//! Partition refinement against exhaustive search, and n-step event
//! probabilities against a direct path-summing oracle.

use fdbisim_core::lmp::{random_lmp, random_structured_lmp, FiniteLmp};
use fdbisim_core::rng::rng_from_seed;
use fdbisim_core::space::Obs;
use rand::Rng as _;

/// Direct oracle: probability of landing in `sets[0]`, then `sets[1]`, …
/// by explicit summation over all state paths.
fn n_step_oracle(lmp: &FiniteLmp, x: usize, sets: &[Vec<bool>]) -> f64 {
    match sets.split_first() {
        None => 1.0,
        Some((first, rest)) => (0..lmp.n_states())
            .filter(|&y| first[y])
            .map(|y| lmp.tau(x, y) * n_step_oracle(lmp, y, rest))
            .sum(),
    }
}

/// Direct oracle for observation-word probabilities.
fn word_oracle(lmp: &FiniteLmp, x: usize, word: &[Obs]) -> f64 {
    match word.split_first() {
        None => 1.0,
        Some((first, rest)) => {
            let direct: f64 = (0..lmp.n_states())
                .filter(|&y| Obs::Bits(lmp.label(y)) == *first)
                .map(|y| lmp.tau(x, y) * word_oracle(lmp, y, rest))
                .sum();
            let dead = if *first == Obs::Dead {
                lmp.death_mass(x) * if rest.iter().all(|o| *o == Obs::Dead) { 1.0 } else { 0.0 }
            } else {
                0.0
            };
            direct + dead
        }
    }
}

#[test]
fn refinement_matches_brute_force_on_two_hundred_random_systems() {
    let mut rng = rng_from_seed(60_601);
    for case in 0..200 {
        let n = rng.gen_range(2..=6);
        let q = rng.gen_range(1..=n);
        let (lmp, planted) = random_structured_lmp(&mut rng, n, q, 2);
        let fast = lmp.refine();
        let slow = lmp.brute_force_max_bisim();
        assert_eq!(fast, slow, "case {case}: n {n} q {q}");
        assert!(lmp.verify_partition(&fast).is_ok(), "case {case}");
        // The planted block structure is itself a bisimulation, so it
        // refines the greatest one.
        assert!(lmp.verify_partition(&planted).is_ok(), "case {case}");
        assert!(planted.refines(&fast), "case {case}");
    }
}

#[test]
fn refinement_matches_brute_force_on_unstructured_systems() {
    // Generic random kernels almost surely have a discrete greatest
    // bisimulation; both engines must agree on that too.
    let mut rng = rng_from_seed(60_602);
    for case in 0..50 {
        let n = rng.gen_range(2..=6);
        let lmp = random_lmp(&mut rng, n, 2);
        assert_eq!(lmp.refine(), lmp.brute_force_max_bisim(), "case {case}");
    }
}

#[test]
fn n_step_products_match_the_path_summing_oracle() {
    let mut rng = rng_from_seed(60_603);
    for case in 0..60 {
        let n = rng.gen_range(2..=4);
        let lmp = random_lmp(&mut rng, n, 2);
        // All set sequences of length <= 3 drawn from subsets of states.
        let subsets: Vec<Vec<bool>> =
            (0..(1usize << n)).map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect();
        for &len in &[1usize, 2, 3] {
            for _ in 0..8 {
                let sets: Vec<Vec<bool>> = (0..len)
                    .map(|_| subsets[rng.gen_range(0..subsets.len())].clone())
                    .collect();
                for x in 0..n {
                    let got = lmp.n_step_product(x, &sets);
                    let want = n_step_oracle(&lmp, x, &sets);
                    assert!((got - want).abs() < 1e-9, "case {case} x {x}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn word_probabilities_match_the_oracle_and_respect_bisimilarity() {
    let mut rng = rng_from_seed(60_604);
    for _ in 0..40 {
        let n = rng.gen_range(2..=5);
        let q = rng.gen_range(1..=n);
        let (lmp, _) = random_structured_lmp(&mut rng, n, q, 2);
        let p = lmp.refine();
        let words: Vec<Vec<Obs>> = vec![
            vec![Obs::Bits(0)],
            vec![Obs::Bits(1), Obs::Bits(0)],
            vec![Obs::Bits(0), Obs::Dead],
            vec![Obs::Bits(1), Obs::Bits(1), Obs::Bits(0)],
        ];
        for word in &words {
            for x in 0..n {
                let got = lmp.obs_word_prob(x, word);
                let want = word_oracle(&lmp, x, word);
                assert!((got - want).abs() < 1e-9, "{word:?} at {x}: {got} vs {want}");
                // Bisimilar states assign every word the same probability.
                for y in x + 1..n {
                    if p.same_block(x, y) {
                        let other = lmp.obs_word_prob(y, word);
                        assert!((got - other).abs() < 1e-9, "{word:?}: {x} ~ {y}");
                    }
                }
            }
        }
    }
}

#[test]
fn tau_powers_are_stochastic_and_match_manual_squaring() {
    let mut rng = rng_from_seed(60_605);
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let lmp = random_lmp(&mut rng, n, 2);
        let t2 = lmp.tau_power(2);
        for x in 0..n {
            for y in 0..n {
                let manual: f64 = (0..n).map(|k| lmp.tau(x, k) * lmp.tau(k, y)).sum();
                assert!((t2[x * n + y] - manual).abs() < 1e-12);
            }
            let row: f64 = (0..n).map(|y| t2[x * n + y]).sum();
            assert!(row <= 1.0 + 1e-9);
        }
    }
}
