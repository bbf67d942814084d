//! Property-based invariants for the numeric helpers, partitions, and
//! the refinement engine.

use fdbisim_core::lmp::random_lmp;
use fdbisim_core::math;
use fdbisim_core::partition::Partition;
use fdbisim_core::rng::rng_from_seed;
use fdbisim_core::space::wrap_angle;
use fdbisim_core::stats::RunningMoments;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn frac_is_a_unit_interval_period(x in -1e6f64..1e6) {
        let f = math::frac(x);
        prop_assert!((0.0..1.0).contains(&f));
        prop_assert!((math::frac(x + 1.0) - f).abs() < 1e-6);
    }

    #[test]
    fn dist_to_int_is_even_and_periodic(x in -1e4f64..1e4) {
        let d = math::dist_to_int(x);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((math::dist_to_int(-x) - d).abs() < 1e-9);
        prop_assert!((math::dist_to_int(x + 1.0) - d).abs() < 1e-9);
    }

    #[test]
    fn fold_lands_inside_and_is_periodic(x in -1e4f64..1e4, lo in -3.0f64..0.0, len in 0.5f64..4.0) {
        let hi = lo + len;
        let f = math::fold(lo, hi, x);
        prop_assert!(f >= lo - 1e-12 && f <= hi + 1e-12);
        let period = 2.0 * len;
        prop_assert!((math::fold(lo, hi, x + period) - f).abs() < 1e-8);
        // Reflection about lo is also a symmetry of the fold.
        prop_assert!((math::fold(lo, hi, 2.0 * lo - x) - f).abs() < 1e-8);
    }

    #[test]
    fn wrap_angle_is_canonical(theta in -50.0f64..50.0) {
        let w = wrap_angle(theta);
        prop_assert!(w > -math::PI - 1e-12 && w <= math::PI + 1e-12);
        prop_assert!((wrap_angle(theta + 2.0 * math::PI) - w).abs() < 1e-9);
        // sin/cos agree, so the representative is the same point.
        prop_assert!((math::sin(w) - math::sin(theta)).abs() < 1e-9);
    }

    #[test]
    fn cosh_and_sinh_ratios_stay_finite_and_ordered(z in 0.0f64..0.999, k in 0.01f64..500.0) {
        // cosh(zk)/cosh(k) and sinh(zk)/sinh(k) for z in [0,1): both in
        // (0, 1], monotone in z, no overflow even for huge k.
        let c = math::cosh_ratio(z * k, k);
        let s = math::sinh_ratio(z * k, k);
        prop_assert!(c.is_finite() && s.is_finite());
        prop_assert!(c > 0.0 && c <= 1.0 + 1e-12, "{c}");
        prop_assert!(s >= 0.0 && s <= 1.0 + 1e-12, "{s}");
        let c2 = math::cosh_ratio((z * 0.5) * k, k);
        prop_assert!(c2 <= c + 1e-12);
    }

    #[test]
    fn partition_join_meet_laws(assign_a in prop::collection::vec(0usize..4, 1..10)) {
        let n = assign_a.len();
        let a = Partition::from_assignment(&assign_a);
        let rev: Vec<usize> = assign_a.iter().rev().copied().collect();
        let b = Partition::from_assignment(&rev);
        let j = a.join(&b);
        let m = a.meet(&b);
        prop_assert!(a.refines(&j) && b.refines(&j));
        prop_assert!(m.refines(&a) && m.refines(&b));
        // Absorption against the bounds of the lattice.
        prop_assert_eq!(a.join(&Partition::discrete(n)), a.clone());
        prop_assert_eq!(a.meet(&Partition::trivial(n)), a.clone());
        prop_assert_eq!(a.join(&Partition::trivial(n)), Partition::trivial(n));
        prop_assert_eq!(a.meet(&Partition::discrete(n)), Partition::discrete(n));
        // Join and meet are commutative.
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert_eq!(a.meet(&b), b.meet(&a));
    }

    #[test]
    fn running_moments_merge_is_order_independent(xs in prop::collection::vec(-5.0f64..5.0, 2..40), split in 1usize..39) {
        prop_assume!(split < xs.len());
        let mut all = RunningMoments::default();
        for &x in &xs { all.push(x); }
        let mut left = RunningMoments::default();
        let mut right = RunningMoments::default();
        for &x in &xs[..split] { left.push(x); }
        for &x in &xs[split..] { right.push(x); }
        let merged = left.merge(&right);
        prop_assert!((all.mean() - merged.mean()).abs() < 1e-10);
        prop_assert!((all.variance() - merged.variance()).abs() < 1e-9);
        prop_assert_eq!(all.count, merged.count);
    }

    #[test]
    fn refinement_is_sound_and_idempotent(seed in 0u64..5000, n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let lmp = random_lmp(&mut rng, n, 2);
        let p = lmp.refine();
        prop_assert!(lmp.verify_partition(&p).is_ok());
        // Quotienting by the greatest bisimulation and refining again
        // yields the discrete partition: no residual collapsing.
        let (q, _) = fdbisim_core::cospan::quotient_lmp(&lmp, &p).unwrap();
        prop_assert_eq!(q.refine(), Partition::discrete(q.n_states()));
    }

    #[test]
    fn tau_powers_never_create_mass(seed in 0u64..5000, n in 2usize..6, k in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let lmp = random_lmp(&mut rng, n, 2);
        let tk = lmp.tau_power(k);
        for x in 0..n {
            let row: f64 = (0..n).map(|y| tk[x * n + y]).sum();
            prop_assert!(row <= 1.0 + 1e-9, "{row}");
            prop_assert!(row >= -1e-12);
        }
    }
}
