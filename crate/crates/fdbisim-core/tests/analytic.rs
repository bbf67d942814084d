//! Closed-form checks against independently derived values, a third-party
//! normal CDF, quadrature identities, and Monte-Carlo agreement.

use fdbisim_core::analytic::{
    absorbed_bm_death_cdf, absorbed_bm_reach_laplace, bm_hit_zero_cdf, bm_interval_exit_laplace,
    drifted_interval_exit_laplace, drifted_one_sided_hit_laplace, drifted_two_barrier_laplace,
    integrate, laplace_of_density,
};
use fdbisim_core::math;
use fdbisim_core::mc::{
    estimate_event, estimate_laplace_death, estimate_laplace_first_hit, estimate_laplace_reach,
    EventSpec, McOpts,
};
use fdbisim_core::process::{ProcessKind, ProcessModel};
use fdbisim_core::space::{ObsKind, ObservationMap, State};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn model(kind: ProcessKind, obs: ObsKind, horizon: f64, dt: f64) -> ProcessModel {
    ProcessModel::new(kind, ObservationMap::from_kind(obs), horizon, dt).unwrap()
}

#[test]
fn normal_functions_match_statrs() {
    // statrs' own erf carries a few units of 1e-11 absolute error, so the
    // cross-library tolerance is set by that library; the frozen spot
    // values below pin our implementation several orders tighter.
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut z = -6.0;
    while z <= 6.0 {
        assert!((math::normal_cdf(z) - n.cdf(z)).abs() < 1e-10, "cdf at {z}");
        assert!((math::normal_sf(z) - n.sf(z)).abs() < 1e-10, "sf at {z}");
        assert!((math::normal_pdf(z) - n.pdf(z)).abs() < 1e-12, "pdf at {z}");
        z += 0.125;
    }
    // Hand-checked spot values.
    assert!((math::normal_cdf(0.0) - 0.5).abs() < 1e-16);
    assert!((math::normal_cdf(0.5) - 0.6914624612740131).abs() < 1e-15);
    assert!((math::normal_cdf(1.0) - 0.84134474606854295).abs() < 1e-15);
    assert!((math::normal_cdf(-1.3) - 0.096800484585610326).abs() < 1e-15);
    assert!((math::normal_cdf(2.7) - 0.99653302619695933).abs() < 1e-15);
}

#[test]
fn hitting_and_death_cdfs_match_reference_values() {
    // Reflection-principle CDF, values frozen from high-precision evaluation.
    assert!((bm_hit_zero_cdf(1.0, 1.0) - 0.3173105078629141).abs() < 1e-15);
    assert!((bm_hit_zero_cdf(2.0, 1.0) - 0.045500263896358414).abs() < 1e-15);
    assert!((bm_hit_zero_cdf(0.5, 2.0) - 0.72367360983176307).abs() < 1e-15);
    assert!((bm_hit_zero_cdf(1.7, 0.3) - 0.0019107751373644402).abs() < 1e-15);
    assert!((bm_hit_zero_cdf(-1.0, 1.0) - bm_hit_zero_cdf(1.0, 1.0)).abs() < 1e-16);

    assert!((absorbed_bm_death_cdf(1.0, 2.0) - 0.47950012218695346).abs() < 1e-15);
    assert!((absorbed_bm_death_cdf(0.3, 0.5) - 0.67137324054087258).abs() < 1e-15);
}

#[test]
fn interval_exit_laplace_matches_reference_values() {
    assert!((bm_interval_exit_laplace(0.3, 0.0, 1.0, 2.0) - 0.70059357070986367).abs() < 1e-15);
    assert!((bm_interval_exit_laplace(0.9, 0.0, 1.0, 0.5) - 0.95871539428465926).abs() < 1e-15);
    assert!((bm_interval_exit_laplace(0.6, -1.0, 1.0, 4.0) - 0.33225946303802435).abs() < 1e-15);
    assert!((bm_interval_exit_laplace(1.2, 0.0, 2.0, 1.0) - 0.47758480943371428).abs() < 1e-15);
    // Boundary values are 1, symmetry about the midpoint holds.
    assert!((bm_interval_exit_laplace(0.0, 0.0, 1.0, 3.0) - 1.0).abs() < 1e-14);
    let (a, b) = (
        bm_interval_exit_laplace(0.25, 0.0, 1.0, 3.0),
        bm_interval_exit_laplace(0.75, 0.0, 1.0, 3.0),
    );
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn drifted_hit_laplace_matches_quadrature_of_first_passage_density() {
    // Values frozen from quadrature of the inverse-Gaussian first-passage
    // density, independent of the closed form implemented here.
    assert!((drifted_one_sided_hit_laplace(1.5, 0.0, 1.0, 2.0) - 0.0077963315794065).abs() < 1e-13);
    assert!((drifted_one_sided_hit_laplace(0.7, 0.0, -0.5, 1.0) - 0.49658530379141).abs() < 1e-13);
    assert!(
        (drifted_one_sided_hit_laplace(2.0, 0.0, 1.0, 0.5) - 0.00799909295187379).abs() < 1e-13
    );
    // Plain Brownian limit: exp(-z sqrt(2 lambda)).
    assert!((drifted_one_sided_hit_laplace(1.0, 0.0, 0.0, 0.5) - 0.36787944117144232).abs() < 1e-15);
    assert!((drifted_one_sided_hit_laplace(0.4, 0.0, 0.0, 2.0) - 0.44932896411722157).abs() < 1e-15);
    // Small-drift continuity.
    for &(z, l) in &[(0.8, 0.5), (1.6, 2.0)] {
        let lim = drifted_one_sided_hit_laplace(z, 0.0, 1e-6, l);
        let bm = drifted_one_sided_hit_laplace(z, 0.0, 0.0, l);
        assert!((lim - bm).abs() < 1e-4, "z {z} l {l}");
    }
}

#[test]
fn drifted_two_barrier_laplace_matches_ode_solve() {
    // Frozen from a direct 2x2 solve of u''/2 + a u' = lambda u with
    // boundary values 1.
    assert!((drifted_two_barrier_laplace(0.3, 1.0, 2.0) - 0.68090396479186934).abs() < 1e-14);
    assert!((drifted_two_barrier_laplace(0.5, 1.0, 1.0) - 0.80600478658780236).abs() < 1e-14);
    assert!((drifted_two_barrier_laplace(0.8, 2.0, 0.5) - 0.95812705042993859).abs() < 1e-14);

    assert!((drifted_interval_exit_laplace(0.4, 1.0, 3.0) - 0.37812713219460336).abs() < 1e-14);
    assert!((drifted_interval_exit_laplace(-0.6, 1.0, 1.0) - 0.56693844748527769).abs() < 1e-14);
    assert!((drifted_interval_exit_laplace(0.0, 0.5, 2.0) - 0.28242124609759177).abs() < 1e-14);

    // Zero-drift limit agrees with the symmetric interval transform.
    for &(z, l) in &[(0.2, 1.0), (0.7, 3.0)] {
        let a = drifted_two_barrier_laplace(z, 1e-6, l);
        let b = bm_interval_exit_laplace(z, 0.0, 1.0, l);
        assert!((a - b).abs() < 1e-4, "z {z} l {l}");
    }
}

#[test]
fn reach_laplace_matches_reference_and_gambler_limit() {
    assert!(
        (absorbed_bm_reach_laplace(0.5, 1.0, 0.0, 2.0, 2.0) - 0.3240271368319427).abs() < 1e-14
    );
    assert!(
        (absorbed_bm_reach_laplace(1.5, 1.0, 0.0, 2.0, 2.0) - 0.3240271368319427).abs() < 1e-14
    );
    assert!(
        (absorbed_bm_reach_laplace(3.0, 1.0, 0.0, 4.0, 0.5) - 0.11731042782619836).abs() < 1e-14
    );
    // The lambda -> 0 limit is the gambler's-ruin reach probability.
    assert!((absorbed_bm_reach_laplace(0.5, 1.0, 0.0, 2.0, 0.0) - 0.5).abs() < 1e-15);
    assert!(
        (absorbed_bm_reach_laplace(3.0, 1.0, 0.0, 4.0, 0.0) - 1.0 / 3.0).abs() < 1e-15
    );
    for &z in &[0.3, 0.9, 1.4, 1.8] {
        let lim = absorbed_bm_reach_laplace(z, 1.0, 0.0, 2.0, 1e-9);
        let ruin = absorbed_bm_reach_laplace(z, 1.0, 0.0, 2.0, 0.0);
        assert!((lim - ruin).abs() < 1e-6, "z {z}");
    }
    // At the mark the transform is 1 for every lambda.
    assert!((absorbed_bm_reach_laplace(1.0, 1.0, 0.0, 4.0, 3.0) - 1.0).abs() < 1e-15);
}

#[test]
fn quadrature_recovers_known_integrals_and_transforms() {
    assert!((integrate(|x: f64| x * x, 0.0, 1.0, 1e-12) - 1.0 / 3.0).abs() < 1e-12);
    assert!((integrate(|x: f64| math::exp(-x * x / 2.0), -8.0, 8.0, 1e-12)
        - math::sqrt(2.0 * math::PI))
    .abs()
        < 1e-10);
    // Laplace transform of the hit-zero density equals exp(-z sqrt(2 l)).
    for &(z, l) in &[(1.0, 0.5), (0.4, 2.0)] {
        let lt = laplace_of_density(
            |s| z / math::sqrt(2.0 * math::PI * s * s * s) * math::exp(-z * z / (2.0 * s)),
            l,
            64.0,
        );
        let closed = math::exp(-z * math::sqrt(2.0 * l));
        assert!((lt - closed).abs() < 1e-8, "z {z} l {l}");
    }
}

#[test]
fn chapman_kolmogorov_by_quadrature() {
    // P_{t+s}(x, (-inf, c]) = integral of p_t(x, y) P_s(y, (-inf, c]) dy
    // for the free Brownian kernel, evaluated by adaptive quadrature.
    let (t, s) = (0.7, 1.3);
    for &(x, c) in &[(0.0, 0.5), (-1.2, 0.0), (0.8, 2.0)] {
        let inner = integrate(
            |y: f64| {
                math::normal_pdf((y - x) / math::sqrt(t)) / math::sqrt(t)
                    * math::normal_cdf((c - y) / math::sqrt(s))
            },
            x - 12.0,
            x + 12.0,
            1e-10,
        );
        let direct = math::normal_cdf((c - x) / math::sqrt(t + s));
        assert!((inner - direct).abs() < 1e-6, "x {x} c {c}");
    }
}

#[test]
fn monte_carlo_agrees_with_closed_forms() {
    let opts = McOpts { n_paths: 100_000, seed: 271_828 };
    let band = 3.29; // two-sided 0.1% per comparison

    // Hit-zero probability on the Brownian line.
    let bm = model(ProcessKind::BrownianMotion, ObsKind::Point(0.0), 4.0, 0.005);
    let ev = EventSpec::HitBy { barriers: vec![0.0], t: 1.0 };
    let est = estimate_event(&bm, &State::Real(1.0), &ev, &opts).unwrap();
    assert!(est.z_against(bm_hit_zero_cdf(1.0, 1.0)) < band, "{est:?}");

    // Drifted hitting-time transform.
    let dr = model(ProcessKind::DriftedBm { a: 1.0 }, ObsKind::Point(0.0), 16.0, 0.005);
    let est = estimate_laplace_first_hit(&dr, &State::Real(1.5), &[0.0], 2.0, &opts).unwrap();
    assert!(est.z_against(drifted_one_sided_hit_laplace(1.5, 0.0, 1.0, 2.0)) < band, "{est:?}");

    // Reach-the-mark transform under double absorption.
    let ab = model(ProcessKind::AbsorbedBm { lo: 0.0, hi: 2.0 }, ObsKind::Point(1.0), 24.0, 0.005);
    let est = estimate_laplace_reach(&ab, &State::Real(0.5), 1.0, 2.0, &opts).unwrap();
    assert!(est.z_against(absorbed_bm_reach_laplace(0.5, 1.0, 0.0, 2.0, 2.0)) < band, "{est:?}");

    // Death-time transform on the absorbed half line.
    let hl = model(
        ProcessKind::AbsorbedBm { lo: 0.0, hi: f64::INFINITY },
        ObsKind::None,
        24.0,
        0.005,
    );
    let est = estimate_laplace_death(&hl, &State::Real(1.0), 0.5, &opts).unwrap();
    assert!(est.z_against(0.36787944117144232) < band, "{est:?}");
}
