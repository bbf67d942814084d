//! Round trips between discrete-time bisimulations and their
//! continuous-time images under the clock embedding, and the
//! distinguisher biconditional.

use fdbisim_core::embed::{
    ct_greatest, distinguish_dt, lift_dt_partition, project_ct_witness, time_coherent_closure,
    verify_ct_witness, DtDistinguisher,
};
use fdbisim_core::lmp::{random_structured_lmp, MASS_TOL};
use fdbisim_core::partition::Partition;
use fdbisim_core::relation::TimedPartition;
use fdbisim_core::rng::rng_from_seed;
use rand::Rng as _;

#[test]
fn one_hundred_round_trips() {
    let mut rng = rng_from_seed(70_701);
    for case in 0..100 {
        let n = rng.gen_range(2..=5);
        let q = rng.gen_range(1..=n);
        let (lmp, _) = random_structured_lmp(&mut rng, n, q, 2);
        let p = lmp.refine();

        // Lift the greatest discrete bisimulation: the uniform timed
        // witness must verify against the embedded process.
        let tp = lift_dt_partition(&p);
        assert!(verify_ct_witness(&lmp, &tp).is_ok(), "case {case}: {:?}", p);

        // Projecting recovers exactly the partition we lifted.
        assert_eq!(project_ct_witness(&tp), p, "case {case}");

        // The canonical greatest witness is the same object.
        let greatest = ct_greatest(&lmp);
        assert!(greatest.is_uniform());
        assert_eq!(project_ct_witness(&greatest), p, "case {case}");
    }
}

#[test]
fn distinguishers_decide_bisimilarity_both_ways() {
    let mut rng = rng_from_seed(70_702);
    for case in 0..100 {
        let n = rng.gen_range(2..=5);
        let q = rng.gen_range(1..=n);
        let (lmp, _) = random_structured_lmp(&mut rng, n, q, 2);
        let p = lmp.refine();
        for x in 0..n {
            for y in x + 1..n {
                let d = distinguish_dt(&lmp, x, y);
                assert_eq!(
                    d.is_none(),
                    p.same_block(x, y),
                    "case {case}: pair ({x},{y}) vs {d:?}"
                );
                match d {
                    None => {}
                    Some(DtDistinguisher::Labels { label_x, label_y }) => {
                        assert_eq!(label_x, lmp.label(x));
                        assert_eq!(label_y, lmp.label(y));
                        assert_ne!(label_x, label_y, "case {case}");
                    }
                    Some(DtDistinguisher::BlockMass { block, mass_x, mass_y }) => {
                        // The cited masses are single-step kernel masses
                        // into a block of the greatest bisimulation —
                        // exactly a one-transition experiment.
                        assert!(block < p.n_blocks(), "case {case}");
                        let mx = lmp.mass_to_block(x, &p, block);
                        let my = lmp.mass_to_block(y, &p, block);
                        assert!((mx - mass_x).abs() < 1e-12);
                        assert!((my - mass_y).abs() < 1e-12);
                        assert!((mass_x - mass_y).abs() > MASS_TOL, "case {case}");
                    }
                }
            }
        }
    }
}

#[test]
fn bisimilar_pairs_agree_on_iterated_kernels() {
    // Lifted witnesses verify against powers 1..=n; spot-check that the
    // agreement genuinely extends beyond the verified range (8 steps).
    let mut rng = rng_from_seed(70_703);
    for _ in 0..40 {
        let n = rng.gen_range(2..=5);
        let q = rng.gen_range(1..=n);
        let (lmp, _) = random_structured_lmp(&mut rng, n, q, 2);
        let p = lmp.refine();
        for k in 1..=8usize {
            let tk = lmp.tau_power(k);
            for x in 0..n {
                for y in x + 1..n {
                    if !p.same_block(x, y) {
                        continue;
                    }
                    for b in 0..p.n_blocks() {
                        let mass = |s: usize| -> f64 {
                            (0..n)
                                .filter(|&z| p.block_of(z) == b)
                                .map(|z| tk[s * n + z])
                                .sum()
                        };
                        assert!(
                            (mass(x) - mass(y)).abs() < 1e-9,
                            "k {k} pair ({x},{y}) block {b}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn non_uniform_witnesses_close_to_uniform_ones() {
    // A timed partition that refines over time can only verify if every
    // segment's relation already holds uniformly; its time-coherent
    // closure always verifies and projects to a discrete bisimulation.
    let mut rng = rng_from_seed(70_704);
    for _ in 0..40 {
        let n = rng.gen_range(2..=5);
        let q = rng.gen_range(1..=n);
        let (lmp, _) = random_structured_lmp(&mut rng, n, q, 2);
        let p = lmp.refine();
        // Interleave the greatest bisimulation with the discrete partition
        // on a two-segment clock: fine first, coarse later is monotone.
        let tp = TimedPartition::new(
            vec![0.0, 0.5],
            vec![Partition::discrete(n), p.clone()],
        )
        .unwrap();
        let closure = time_coherent_closure(&tp);
        assert!(closure.is_uniform());
        assert!(verify_ct_witness(&lmp, &closure).is_ok());
        let projected = project_ct_witness(&closure);
        assert!(lmp.verify_partition(&projected).is_ok());
        // Joining the discrete partition with p gives p back.
        assert_eq!(projected, p);
    }
}
