//! Closed-form hitting laws for Brownian motion and its variants, plus the
//! adaptive quadrature used to cross-check them.
//!
//! These are the exact references the Monte Carlo estimators are validated
//! against, and the separating-event evaluators used to refute coarser
//! candidate relations. Conventions: `lambda ≥ 0` is a Laplace-transform
//! parameter, `a` a drift, and all hitting times are of the canonical
//! process started at the stated point.

use crate::math;

/// `ℙ^z(T_0 ≤ t)` for standard Brownian motion: the reflection principle
/// gives `2(1 − Φ(|z|/√t))`.
pub fn bm_hit_zero_cdf(z: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if z == 0.0 { 1.0 } else { 0.0 };
    }
    if z == 0.0 {
        return 1.0;
    }
    2.0 * math::normal_sf(math::abs(z) / math::sqrt(t))
}

/// First-passage density of `T_0` at `s > 0` for Brownian motion with drift
/// `a` started at `z ≠ 0`: `|z|/√(2πs³) · exp(−(z+as)²/(2s))`.
pub fn drifted_bm_hit_zero_density(z: f64, a: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let arg = z + a * s;
    math::abs(z) / math::sqrt(2.0 * math::PI * s * s * s) * math::exp(-arg * arg / (2.0 * s))
}

/// `E^z[e^{−λ T_ℓ}]` for Brownian motion with drift `a`, one-sided hit of a
/// single level `ℓ`: `exp(−|z−ℓ|(√(a²+2λ) + sign(z−ℓ)·a))`.
///
/// At `λ = 0` this is the probability of ever reaching `ℓ` (1 with the
/// drift, `e^{−2a·dist}` against it).
pub fn drifted_one_sided_hit_laplace(z: f64, level: f64, a: f64, lambda: f64) -> f64 {
    let dist = math::abs(z - level);
    if dist == 0.0 {
        return 1.0;
    }
    let root = math::sqrt(a * a + 2.0 * lambda);
    let sign = if z > level { 1.0 } else { -1.0 };
    math::exp(-dist * (root + sign * a))
}

/// `E^z[e^{−λ T_{lo,hi}}]` for driftless Brownian motion on `[lo, hi]`:
/// `cosh((z−m)√(2λ)) / cosh((L/2)√(2λ))` with midpoint `m` and width `L`.
pub fn bm_interval_exit_laplace(z: f64, lo: f64, hi: f64, lambda: f64) -> f64 {
    debug_assert!(lo < hi && z >= lo && z <= hi);
    let root = math::sqrt(2.0 * lambda);
    let m = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    math::cosh_ratio((z - m) * root, half * root)
}

/// `E^z[e^{−λ T_{0,1}}]` for driftless Brownian motion on `[0, 1]` — the
/// two-barrier transform used for the integer-observation examples.
pub fn bm_two_barrier_laplace(z: f64, lambda: f64) -> f64 {
    bm_interval_exit_laplace(z, 0.0, 1.0, lambda)
}

/// `E^z[e^{−λ T_{0,1}}]` for Brownian motion with drift `a` on `[0, 1]`:
/// `[sinh((1−z)k)e^{−az} + sinh(zk)e^{a(1−z)}] / sinh(k)`, `k = √(2λ+a²)`.
pub fn drifted_two_barrier_laplace(z: f64, a: f64, lambda: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&z));
    let k = math::sqrt(2.0 * lambda + a * a);
    if k == 0.0 {
        return 1.0;
    }
    math::sinh_ratio((1.0 - z) * k, k) * math::exp(-a * z)
        + math::sinh_ratio(z * k, k) * math::exp(a * (1.0 - z))
}

/// The auxiliary function `g_z(k) = sinh((1−z)k)e^{−az} + sinh(zk)e^{a(1−z)}`
/// whose injectivity in `z` (as a function of `k > |a|`) underpins the
/// drifted integer-observation example.
pub fn drifted_g_aux(z: f64, a: f64, k: f64) -> f64 {
    math::sinh((1.0 - z) * k) * math::exp(-a * z)
        + math::sinh(z * k) * math::exp(a * (1.0 - z))
}

/// `E^z[e^{−λ T_{−1,1}}]` for Brownian motion with drift `a` on `[−1, 1]`:
/// `[sinh((z+1)k)e^{a(1−z)} + sinh((1−z)k)e^{−a(1+z)}] / sinh(2k)`.
pub fn drifted_interval_exit_laplace(z: f64, a: f64, lambda: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&z));
    let k = math::sqrt(2.0 * lambda + a * a);
    if k == 0.0 {
        return 1.0;
    }
    math::sinh_ratio((z + 1.0) * k, 2.0 * k) * math::exp(a * (1.0 - z))
        + math::sinh_ratio((1.0 - z) * k, 2.0 * k) * math::exp(-a * (1.0 + z))
}

/// The auxiliary `h_z(k) = sinh((z+1)k)e^{a(1−z)} + sinh((1−z)k)e^{−a(1+z)}`
/// for the drifted interval-observation example.
pub fn drifted_h_aux(z: f64, a: f64, k: f64) -> f64 {
    math::sinh((z + 1.0) * k) * math::exp(a * (1.0 - z))
        + math::sinh((1.0 - z) * k) * math::exp(-a * (1.0 + z))
}

/// Death-time CDF of Brownian motion on `(0, ∞)` absorbed at 0:
/// `ℙ^x(ζ ≤ t) = 2(1 − Φ(x/√t))`.
pub fn absorbed_bm_death_cdf(x: f64, t: f64) -> f64 {
    debug_assert!(x > 0.0);
    bm_hit_zero_cdf(x, t)
}

/// `E^z[e^{−λ T_b}; T_b before absorption]` for Brownian motion on
/// `(lo, hi)` absorbed at both ends, reaching an interior target `b`.
/// Only the barrier on the same side of `b` as `z` matters:
/// `sinh((z−lo)√(2λ)) / sinh((b−lo)√(2λ))` for `z ≤ b`, mirrored above.
/// At `λ = 0` this degenerates to the gambler's-ruin probability.
pub fn absorbed_bm_reach_laplace(z: f64, b: f64, lo: f64, hi: f64, lambda: f64) -> f64 {
    debug_assert!(lo < b && b < hi && z > lo && z < hi);
    let root = math::sqrt(2.0 * lambda);
    if z <= b {
        if root == 0.0 {
            (z - lo) / (b - lo)
        } else {
            math::sinh_ratio((z - lo) * root, (b - lo) * root)
        }
    } else if root == 0.0 {
        (hi - z) / (hi - b)
    } else {
        math::sinh_ratio((hi - z) * root, (hi - b) * root)
    }
}

// --- Gauss–Kronrod quadrature -------------------------------------------

// 15-point Kronrod abscissae on [−1, 1] (positive half) and weights; the
// embedded 7-point Gauss rule lives on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One Gauss–Kronrod 15(7) panel over `[a, b]`; returns the K15 value and
/// `|K15 − G7|` as the error estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, math::abs((kronrod - gauss) * h))
}

/// Adaptive quadrature of `f` over `[a, b]` to the requested absolute
/// tolerance: bisect any panel whose Kronrod error estimate exceeds its
/// share of the budget. Panel counts are capped, so pathological
/// integrands degrade to a best-effort value rather than hanging.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    let mut stack: alloc::vec::Vec<(f64, f64, f64)> = alloc::vec![(a, b, abs_tol)];
    let mut total = 0.0;
    let mut panels = 0usize;
    while let Some((a, b, tol)) = stack.pop() {
        let (val, err) = gk15(&f, a, b);
        panels += 1;
        if err <= tol || panels > 20_000 || (b - a) < 1e-13 {
            total += val;
        } else {
            let m = 0.5 * (a + b);
            stack.push((a, m, 0.5 * tol));
            stack.push((m, b, 0.5 * tol));
        }
    }
    total
}

/// `∫_0^T e^{−λs} dens(s) ds` — numeric Laplace transform of a hitting
/// density, used to cross-check the closed forms above.
pub fn laplace_of_density<F: Fn(f64) -> f64>(dens: F, lambda: f64, horizon: f64) -> f64 {
    integrate(|s| math::exp(-lambda * s) * dens(s), 0.0, horizon, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomials_and_transcendentals() {
        // K15 integrates low-degree polynomials exactly.
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-9);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        // ∫_0^π sin = 2.
        let s = integrate(math::sin, 0.0, math::PI, 1e-9);
        assert!((s - 2.0).abs() < 1e-12);
        // Normal mass on [−5, 5] against the erfc-based CDF.
        let m = integrate(math::normal_pdf, -5.0, 5.0, 1e-10);
        let want = math::normal_cdf(5.0) - math::normal_cdf(-5.0);
        assert!((m - want).abs() < 1e-12);
    }

    #[test]
    fn hit_zero_cdf_reference_value() {
        // 2(1 − Φ(1)) = 0.31731050786291415 (z = 1, t = 1).
        let p = bm_hit_zero_cdf(1.0, 1.0);
        assert!((p - 0.317_310_507_862_914_15).abs() < 1e-15);
        // Symmetric in z, monotone in t, correct limits.
        assert_eq!(bm_hit_zero_cdf(-1.0, 1.0), p);
        assert!(bm_hit_zero_cdf(1.0, 2.0) > p);
        assert_eq!(bm_hit_zero_cdf(1.0, 0.0), 0.0);
        assert_eq!(bm_hit_zero_cdf(0.0, 0.5), 1.0);
        assert!(bm_hit_zero_cdf(1.0, 1e8) > 0.9999);
    }

    #[test]
    fn hit_zero_cdf_matches_density_integral() {
        // CDF at t must equal ∫_0^t of the first-passage density (a = 0).
        for &(z, t) in &[(0.7, 0.5), (1.0, 1.0), (2.0, 3.0)] {
            let cdf = bm_hit_zero_cdf(z, t);
            let int = integrate(|s| drifted_bm_hit_zero_density(z, 0.0, s), 0.0, t, 1e-10);
            assert!((cdf - int).abs() < 1e-9, "z={z} t={t}: {cdf} vs {int}");
        }
    }

    #[test]
    fn drifted_laplace_matches_density_integral() {
        // Closed form vs numeric Laplace transform of the density.
        for &(z, a, lambda) in &[(1.0, 1.0, 0.5), (0.5, 2.0, 1.0), (2.0, 0.5, 2.0)] {
            let closed = drifted_one_sided_hit_laplace(z, 0.0, a, lambda);
            let numeric =
                laplace_of_density(|s| drifted_bm_hit_zero_density(z, a, s), lambda, 400.0);
            assert!((closed - numeric).abs() < 1e-8, "closed {closed} numeric {numeric}");
        }
    }

    #[test]
    fn drifted_one_sided_limits() {
        // λ → 0 against the drift: total hit mass e^{−2az}.
        let p = drifted_one_sided_hit_laplace(1.5, 0.0, 1.0, 0.0);
        assert!((p - math::exp(-3.0)).abs() < 1e-15);
        // λ → 0 with the drift: certain hit.
        assert_eq!(drifted_one_sided_hit_laplace(-1.5, 0.0, 1.0, 0.0), 1.0);
        // Upward hit from below the level, drift up.
        let up = drifted_one_sided_hit_laplace(0.0, 1.0, 2.0, 0.5);
        let root = math::sqrt(4.0 + 1.0);
        assert!((up - math::exp(-(root - 2.0))).abs() < 1e-15);
    }

    #[test]
    fn two_barrier_boundary_and_symmetry() {
        for &lambda in &[0.5, 1.0, 4.0] {
            assert!((bm_two_barrier_laplace(0.0, lambda) - 1.0).abs() < 1e-14);
            assert!((bm_two_barrier_laplace(1.0, lambda) - 1.0).abs() < 1e-14);
            let u = bm_two_barrier_laplace(0.3, lambda);
            let v = bm_two_barrier_laplace(0.7, lambda);
            assert!((u - v).abs() < 1e-14);
            assert!(u < 1.0 && u > 0.0);
        }
    }

    #[test]
    fn drifted_two_barrier_reduces_to_driftless() {
        // At a = 0 the sinh form collapses to the cosh ratio via
        // sinh A + sinh B = 2 sinh((A+B)/2) cosh((A−B)/2).
        for z in [0.1, 0.25, 0.5, 0.9] {
            for lambda in [0.25, 1.0, 8.0] {
                let sinh_form = drifted_two_barrier_laplace(z, 0.0, lambda);
                let cosh_form = bm_two_barrier_laplace(z, lambda);
                assert!((sinh_form - cosh_form).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn drifted_two_barrier_boundaries_and_ode() {
        let a = 1.5;
        for &lambda in &[0.5, 2.0] {
            assert!((drifted_two_barrier_laplace(0.0, a, lambda) - 1.0).abs() < 1e-13);
            assert!((drifted_two_barrier_laplace(1.0, a, lambda) - 1.0).abs() < 1e-13);
            // ½u″ + au′ = λu checked by central differences.
            let h = 1e-5;
            let z = 0.37;
            let u = |z: f64| drifted_two_barrier_laplace(z, a, lambda);
            let upp = (u(z + h) - 2.0 * u(z) + u(z - h)) / (h * h);
            let up = (u(z + h) - u(z - h)) / (2.0 * h);
            let residual = 0.5 * upp + a * up - lambda * u(z);
            assert!(residual.abs() < 1e-5, "ODE residual {residual}");
        }
    }

    #[test]
    fn drifted_interval_boundaries_and_ode() {
        let a = 1.0;
        for &lambda in &[0.5, 2.0] {
            assert!((drifted_interval_exit_laplace(-1.0, a, lambda) - 1.0).abs() < 1e-13);
            assert!((drifted_interval_exit_laplace(1.0, a, lambda) - 1.0).abs() < 1e-13);
            let h = 1e-5;
            let z = -0.4;
            let u = |z: f64| drifted_interval_exit_laplace(z, a, lambda);
            let upp = (u(z + h) - 2.0 * u(z) + u(z - h)) / (h * h);
            let up = (u(z + h) - u(z - h)) / (2.0 * h);
            let residual = 0.5 * upp + a * up - lambda * u(z);
            assert!(residual.abs() < 1e-5, "ODE residual {residual}");
        }
    }

    #[test]
    fn interval_exit_matches_recentred_two_barrier() {
        // Driftless exit from [−1, 1] equals the [0, 1] formula after the
        // affine change of variables z ↦ (z+1)/2, λ ↦ 4λ (time scaling).
        for z in [-0.8, -0.3, 0.0, 0.55] {
            for lambda in [0.5, 1.0, 2.0] {
                let direct = bm_interval_exit_laplace(z, -1.0, 1.0, lambda);
                let scaled = bm_two_barrier_laplace((z + 1.0) / 2.0, 4.0 * lambda);
                assert!((direct - scaled).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn reach_laplace_gambler_limit_and_monotonicity() {
        // λ = 0 is the gambler's-ruin probability, and small λ approaches it.
        let b = 1.0;
        let hi = 4.0;
        for z in [0.25, 0.5, 0.75] {
            let p0 = absorbed_bm_reach_laplace(z, b, 0.0, hi, 0.0);
            assert!((p0 - z / b).abs() < 1e-14);
            let p_small = absorbed_bm_reach_laplace(z, b, 0.0, hi, 1e-12);
            assert!((p_small - p0).abs() < 1e-6);
        }
        for z in [1.5, 2.0, 3.9] {
            let p0 = absorbed_bm_reach_laplace(z, b, 0.0, hi, 0.0);
            assert!((p0 - (hi - z) / (hi - b)).abs() < 1e-14);
        }
        // Strictly decreasing in z above the target for λ > 0.
        let mut prev = f64::INFINITY;
        let mut z = 1.05;
        while z < hi {
            let v = absorbed_bm_reach_laplace(z, b, 0.0, hi, 1.0);
            assert!(v < prev);
            prev = v;
            z += 0.05;
        }
        // Boundary value at the target itself.
        assert!((absorbed_bm_reach_laplace(b, b, 0.0, hi, 2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn aux_functions_match_laplace_numerators() {
        let a = 1.0;
        let z = 0.3;
        let lambda = 1.5;
        let k = math::sqrt(2.0 * lambda + a * a);
        let g = drifted_g_aux(z, a, k);
        let u = drifted_two_barrier_laplace(z, a, lambda);
        assert!((g / math::sinh(k) - u).abs() < 1e-13);
        let h = drifted_h_aux(-0.2, a, k);
        let v = drifted_interval_exit_laplace(-0.2, a, lambda);
        assert!((h / math::sinh(2.0 * k) - v).abs() < 1e-13);
    }
}
