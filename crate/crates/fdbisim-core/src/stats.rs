//! Streaming moments and two-sample tests used by the Monte Carlo checks.
//!
//! Comparisons between empirical laws use a pooled-quantile-binned two-sample
//! chi-square statistic mapped through the Wilson–Hilferty transform to an
//! approximate z-score; single events use the exact binomial two-sample z.
//! Differences are flagged at `|z| > Z_CRIT`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Rejection threshold for all statistical two-sample checks. With the
/// sample sizes we run, |z| above this is overwhelming evidence of a real
/// difference (two-sided p ≈ 6e-5) while staying essentially immune to
/// false alarms across the few hundred tests in a full gallery run.
pub const Z_CRIT: f64 = 4.0;

/// Count / sum / sum-of-squares accumulator. `merge` is exact-associative,
/// so chunked estimates combine to the same result regardless of how the
/// work was split.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    pub count: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn merge(&self, other: &Self) -> Self {
        RunningMoments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sumsq: self.sumsq + other.sumsq,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum / self.count as f64
    }

    /// Unbiased sample variance, clamped at zero against cancellation.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let v = (self.sumsq - self.sum * self.sum / n) / (n - 1.0);
        if v > 0.0 {
            v
        } else {
            0.0
        }
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        math::sqrt(self.variance() / self.count as f64)
    }
}

/// A Monte Carlo estimate: point value, standard error, and the sample
/// count that produced it (0 for exactly-evaluated quantities).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, std_err: 0.0, n_samples: 0 }
    }

    pub fn from_moments(m: &RunningMoments) -> Self {
        Estimate { value: m.mean(), std_err: m.std_err(), n_samples: m.count }
    }

    /// |this − reference| in units of this estimate's standard error.
    /// Returns infinity on a nonzero discrepancy with zero standard error.
    pub fn z_against(&self, reference: f64) -> f64 {
        let diff = math::abs(self.value - reference);
        if self.std_err > 0.0 {
            diff / self.std_err
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Two-sample z for binomial counts `k1/n1` vs `k2/n2` with pooled variance.
/// Degenerate pools (all successes or all failures) compare exactly.
pub fn binomial_two_sample_z(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    assert!(n1 > 0 && n2 > 0 && k1 <= n1 && k2 <= n2);
    let p1 = k1 as f64 / n1 as f64;
    let p2 = k2 as f64 / n2 as f64;
    let pool = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = math::sqrt(pool * (1.0 - pool) * (1.0 / n1 as f64 + 1.0 / n2 as f64));
    if se > 0.0 {
        (p1 - p2) / se
    } else if p1 == p2 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Wilson–Hilferty: map a chi-square statistic with `dof` degrees of
/// freedom to an approximate standard-normal z via the cube-root transform.
pub fn chi2_wilson_hilferty_z(chi2: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 0.0;
    }
    let k = dof as f64;
    let var = 2.0 / (9.0 * k);
    (math::cbrt(chi2 / k) - (1.0 - var)) / math::sqrt(var)
}

/// One sampled checkpoint vector: up to three live coordinates, or a path
/// that was already dead by checkpoint `live` (absorption makes death
/// monotone across checkpoints, so a prefix length captures the pattern).
#[derive(Debug, Clone, Copy)]
pub struct CkSample {
    vals: [f64; 3],
    live: u8,
}

impl CkSample {
    /// All checkpoints live. `vals.len()` must be 1..=3.
    pub fn live(vals: &[f64]) -> Self {
        let mut v = [0.0; 3];
        v[..vals.len()].copy_from_slice(vals);
        CkSample { vals: v, live: vals.len() as u8 }
    }

    /// Path dead from checkpoint `vals.len()` onward.
    pub fn dead_after(vals: &[f64]) -> Self {
        Self::live(vals)
    }

    pub fn n_live(&self) -> usize {
        self.live as usize
    }

    pub fn val(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_live());
        self.vals[i]
    }
}

/// Bins per axis for each live-checkpoint class; chosen so every class has
/// a comparable total cell count (20, 36, 64).
fn bins_per_axis(class: usize) -> usize {
    match class {
        1 => 20,
        2 => 6,
        _ => 4,
    }
}

fn class_offset(class: usize) -> usize {
    // class 0 (dead at the first checkpoint) occupies cell 0.
    match class {
        0 => 0,
        1 => 1,
        2 => 1 + 20,
        _ => 1 + 20 + 36,
    }
}

const N_CELLS: usize = 1 + 20 + 36 + 64;

/// Result of a two-sample law comparison.
#[derive(Debug, Clone, Copy)]
pub struct TwoSampleResult {
    pub z: f64,
    pub chi2: f64,
    pub dof: usize,
}

/// Compare two samples of checkpoint vectors. Bin edges are pooled
/// quantiles (computed per live-class and axis from both samples together),
/// the `∂`-classes are their own cells, and the binned counts feed a
/// two-sample chi-square.
pub fn two_sample_marginal(a: &[CkSample], b: &[CkSample]) -> TwoSampleResult {
    assert!(!a.is_empty() && !b.is_empty());
    let max_class = a.iter().chain(b).map(|s| s.n_live()).max().unwrap_or(0);
    assert!(max_class <= 3);

    // Pooled quantile thresholds per (class, axis).
    let mut thresholds: Vec<Vec<Vec<f64>>> = vec![Vec::new(); max_class + 1];
    let mut scratch: Vec<f64> = Vec::new();
    for class in 1..=max_class {
        let nb = bins_per_axis(class);
        let mut axes = Vec::with_capacity(class);
        for axis in 0..class {
            scratch.clear();
            scratch.extend(
                a.iter().chain(b).filter(|s| s.n_live() == class).map(|s| s.val(axis)),
            );
            scratch.sort_unstable_by(f64::total_cmp);
            let n = scratch.len();
            let mut edges = Vec::with_capacity(nb.saturating_sub(1));
            for j in 1..nb {
                if n == 0 {
                    break;
                }
                let idx = (j * n / nb).min(n - 1);
                edges.push(scratch[idx]);
            }
            axes.push(edges);
        }
        thresholds[class] = axes;
    }

    let cell_of = |s: &CkSample| -> usize {
        let class = s.n_live();
        if class == 0 {
            return 0;
        }
        let nb = bins_per_axis(class);
        let mut cell = 0usize;
        for axis in 0..class {
            let edges = &thresholds[class][axis];
            let x = s.val(axis);
            let bin = edges.partition_point(|e| *e <= x).min(nb - 1);
            cell = cell * nb + bin;
        }
        class_offset(class) + cell
    };

    let mut ca = [0u64; N_CELLS];
    let mut cb = [0u64; N_CELLS];
    for s in a {
        ca[cell_of(s)] += 1;
    }
    for s in b {
        cb[cell_of(s)] += 1;
    }

    let (n, m) = (a.len() as f64, b.len() as f64);
    let (wa, wb) = (math::sqrt(m / n), math::sqrt(n / m));
    let mut chi2 = 0.0;
    let mut occupied = 0usize;
    for i in 0..N_CELLS {
        let (x, y) = (ca[i] as f64, cb[i] as f64);
        if x + y == 0.0 {
            continue;
        }
        occupied += 1;
        let d = x * wa - y * wb;
        chi2 += d * d / (x + y);
    }
    let dof = occupied.saturating_sub(1);
    TwoSampleResult { z: chi2_wilson_hilferty_z(chi2, dof), chi2, dof }
}
