//! Thin `no_std` math layer over `libm`, plus the normal CDF and log-space
//! hyperbolic ratios used by the Laplace-transform formulas.

pub use core::f64::consts::PI;

pub const SQRT_2: f64 = core::f64::consts::SQRT_2;

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}
#[inline]
pub fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}
#[inline]
pub fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// Standard normal CDF Φ(x), computed through `erfc` for accuracy in the
/// tails (relative error stays small down to Φ(x) ~ 1e-300).
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal survival function 1 − Φ(x).
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal density φ(x).
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x) / sqrt(2.0 * PI)
}

/// Fractional part in `[0, 1)` (the representative of `x mod 1`).
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - floor(x);
    // Guard against `frac(-1e-17) == 1.0` after rounding.
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    let f = frac(x);
    f.min(1.0 - f)
}

/// Fold `x` into `[lo, hi]` by repeated reflection at both ends (the
/// period-`2(hi−lo)` tent map).
#[inline]
pub fn fold(lo: f64, hi: f64, x: f64) -> f64 {
    let period = 2.0 * (hi - lo);
    let mut u = (x - lo) - period * floor((x - lo) / period);
    if u < 0.0 {
        u += period;
    }
    lo + u.min(period - u)
}

/// log cosh(x), stable for large |x|: |x| + log((1 + e^{−2|x|})/2).
#[inline]
pub fn log_cosh(x: f64) -> f64 {
    let a = abs(x);
    a + ln_1p(exp(-2.0 * a)) - core::f64::consts::LN_2
}

/// log sinh(x) for x > 0, stable for large x: x + log((1 − e^{−2x})/2).
#[inline]
pub fn log_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x + ln_1p(-exp(-2.0 * x)) - core::f64::consts::LN_2
}

/// cosh(num)/cosh(den), switching to log space once either argument is large
/// enough for `cosh` to overflow-risk territory (arguments beyond ~30 appear
/// in Laplace-transform injectivity scans).
#[inline]
pub fn cosh_ratio(num: f64, den: f64) -> f64 {
    if abs(num) > 30.0 || abs(den) > 30.0 {
        exp(log_cosh(num) - log_cosh(den))
    } else {
        cosh(num) / cosh(den)
    }
}

/// sinh(num)/sinh(den) for num ≥ 0, den > 0, stable for large arguments.
#[inline]
pub fn sinh_ratio(num: f64, den: f64) -> f64 {
    debug_assert!(num >= 0.0 && den > 0.0);
    if num == 0.0 {
        return 0.0;
    }
    if num > 30.0 || den > 30.0 {
        exp(log_sinh(num) - log_sinh(den))
    } else {
        sinh(num) / sinh(den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_basics() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-15);
        assert!((normal_cdf(-1.0) + normal_cdf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_space_ratios_match_direct_evaluation() {
        for &(n, d) in &[(0.3, 0.7), (2.0, 5.0), (10.0, 12.0), (29.0, 29.5)] {
            assert!((cosh_ratio(n, d) - cosh(n) / cosh(d)).abs() < 1e-12);
            assert!((sinh_ratio(n, d) - sinh(n) / sinh(d)).abs() < 1e-12);
        }
        // Large arguments: compare against the exact limit e^{n−d}·(1+o(1)).
        let r = sinh_ratio(80.0, 100.0);
        assert!((r - exp(-20.0)).abs() < 1e-24);
        let c = cosh_ratio(120.0, 100.0);
        assert!((c - exp(20.0)).abs() < 1e-6 * exp(20.0));
    }

    #[test]
    fn frac_and_dist_to_int() {
        assert_eq!(frac(3.25), 0.25);
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(frac(-2.0), 0.0);
        assert_eq!(dist_to_int(0.25), 0.25);
        assert_eq!(dist_to_int(1.75), 0.25);
        assert_eq!(dist_to_int(-0.5), 0.5);
        assert_eq!(dist_to_int(frac(-1e-17)), frac(-1e-17).min(1.0));
    }
}
