//! Checking and refuting candidate bisimulations on process models.
//!
//! Relatedness itself is decided by a [`RelationWitness`]; this module
//! supplies the checkers that tie a witness to an actual process law:
//!
//! - exact observation agreement across related pairs (the initiation
//!   condition on states);
//! - law preservation of the symmetry generators backing a witness —
//!   compared exactly for deterministic models, and through checkpoint
//!   marginals for diffusions (a generator that preserves the law and the
//!   observations maps every observation-closed trajectory set to itself
//!   with equal probability, which is the trajectory condition);
//! - kernel-mass agreement over a supplied family of closed state sets
//!   (the induction condition on states, used both to *pass* candidates
//!   and to exhibit their failures);
//! - separation drivers that certify unrelated pairs from closed-form
//!   statistics of distinguishing trajectory events, and the injectivity
//!   scans behind "only the diagonal survives" claims.
//!
//! Everything returns structured violations rather than panicking, so the
//! same machinery powers both the test suite and the CLI reports.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::mc::{self, DetOutcome};
use crate::process::ProcessModel;
use crate::relation::{RelationWitness, SymmetryGroup, SymmetryMap};
use crate::rng::derive_seed;
use crate::space::{Obs, State};
use crate::stats::{self, Z_CRIT};
use crate::{Error, Result};

/// Positions agree within this tolerance in exact deterministic-path
/// comparisons (isometries reassociate float additions).
pub const PATH_TOL: f64 = 1e-12;

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn grid_1d(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Split all unordered pairs of distinct states from `xs` into related and
/// unrelated under the witness.
pub fn split_pairs(
    w: &RelationWitness,
    xs: &[State],
) -> Result<(Vec<(State, State)>, Vec<(State, State)>)> {
    let mut related = Vec::new();
    let mut unrelated = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if w.related(&xs[i], &xs[j])? {
                related.push((xs[i], xs[j]));
            } else {
                unrelated.push((xs[i], xs[j]));
            }
        }
    }
    Ok((related, unrelated))
}

/// A related pair that disagrees on its observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Init1Violation {
    pub x: State,
    pub y: State,
    pub obs_x: Obs,
    pub obs_y: Obs,
}

/// Initiation on states: related states observe the same bit-vector.
pub fn check_initiation1(
    model: &ProcessModel,
    pairs: &[(State, State)],
) -> core::result::Result<(), Init1Violation> {
    for (x, y) in pairs {
        let (ox, oy) = (model.obs_of(x), model.obs_of(y));
        if ox != oy {
            return Err(Init1Violation { x: *x, y: *y, obs_x: ox, obs_y: oy });
        }
    }
    Ok(())
}

/// `obs ∘ g = obs` pointwise over `states` (skipping points outside the
/// domain of `g`): the pairs `(x, g(x))` are fed through
/// [`check_initiation1`].
pub fn check_obs_commutes(
    model: &ProcessModel,
    g: &SymmetryMap,
    states: &[State],
) -> core::result::Result<(), Init1Violation> {
    let pairs: Vec<(State, State)> =
        states.iter().filter_map(|x| g.apply(x).map(|gx| (*x, gx))).collect();
    check_initiation1(model, &pairs)
}

/// Options for the statistical law-preservation checks.
#[derive(Debug, Clone)]
pub struct LawCheckOpts {
    /// Checkpoint times (ascending, up to three, all positive).
    pub times: Vec<f64>,
    /// Walk resolution for processes that need a grid to die on.
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
}

impl Default for LawCheckOpts {
    fn default() -> Self {
        LawCheckOpts { times: alloc::vec![0.5, 1.0, 2.0], dt: 0.01, n_paths: 20_000, seed: 7 }
    }
}

/// One generator-at-one-start law comparison.
#[derive(Debug, Clone)]
pub struct LawCheck {
    pub generator: String,
    pub start: State,
    /// Normal-scale discrepancy score; `0` for an exact match, `∞` for an
    /// exact mismatch.
    pub z: f64,
    /// Whether the comparison was exact (deterministic model) rather than
    /// statistical.
    pub exact: bool,
}

/// All law comparisons for a witness's generators over a start set.
#[derive(Debug, Clone, Default)]
pub struct LawReport {
    pub checks: Vec<LawCheck>,
}

impl LawReport {
    pub fn max_z(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| if c.z > m { c.z } else { m })
    }

    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.max_z() < Z_CRIT
    }
}

/// Check every generator of `group` for law preservation from each start
/// where it is defined and acts non-trivially: the pushforward of the law
/// from `x` through `g` must equal the law from `g(x)`.
///
/// Deterministic models are compared exactly outcome-by-outcome; diffusions
/// by the marginal two-sample test on checkpoint vectors. Observation
/// agreement is *not* checked here — pair it with [`check_obs_commutes`].
pub fn check_symmetry_laws(
    model: &ProcessModel,
    group: &SymmetryGroup,
    starts: &[State],
    opts: &LawCheckOpts,
) -> Result<LawReport> {
    let mut report = LawReport::default();
    let mut stream = 0u64;
    for g in &group.generators {
        for x in starts {
            let Some(gx) = g.apply(x) else { continue };
            if gx == *x {
                continue;
            }
            let check = if model.exactly_evaluable() {
                let ok = det_laws_match(model, x, &gx, Some(g))?;
                LawCheck {
                    generator: g.name(),
                    start: *x,
                    z: if ok { 0.0 } else { f64::INFINITY },
                    exact: true,
                }
            } else {
                let map = |s: &State| g.apply(s).expect("generator domain is forward-invariant");
                let pushed = mc::sample_checkpoints(
                    model,
                    x,
                    &opts.times,
                    opts.dt,
                    Some(&map),
                    opts.n_paths,
                    derive_seed(opts.seed, stream),
                )?;
                let direct = mc::sample_checkpoints(
                    model,
                    &gx,
                    &opts.times,
                    opts.dt,
                    None,
                    opts.n_paths,
                    derive_seed(opts.seed, stream + 1),
                )?;
                stream += 2;
                let r = stats::two_sample_marginal(&pushed, &direct);
                LawCheck { generator: g.name(), start: *x, z: r.z, exact: false }
            };
            report.checks.push(check);
        }
    }
    Ok(report)
}

fn states_close(a: &State, b: &State) -> bool {
    match (a, b) {
        (State::Dead, State::Dead) => true,
        (State::Real(x), State::Real(y)) => (x - y).abs() <= PATH_TOL,
        (State::Index(i), State::Index(j)) => i == j,
        (State::Branch { pos: p, branch: u }, State::Branch { pos: q, branch: v }) => {
            u == v && (p - q).abs() <= PATH_TOL
        }
        (State::Timed { x, s }, State::Timed { x: y, s: t }) => x == y && (s - t).abs() <= PATH_TOL,
        _ => false,
    }
}

/// Probe times pinning down a deterministic path: speed-one segments with
/// at most one breakpoint are determined by their values on any two points
/// per segment, so seventeen probes across the horizon are overkill.
fn det_probes(model: &ProcessModel) -> Vec<f64> {
    (0..=16).map(|k| model.horizon * k as f64 / 16.0).collect()
}

/// Exact law comparison for deterministic models: the outcomes from `x`
/// (pushed through `map` when given) and from `y` must match as weighted
/// multisets of probe-time state rows.
pub fn det_laws_match(
    model: &ProcessModel,
    x: &State,
    y: &State,
    map: Option<&SymmetryMap>,
) -> Result<bool> {
    let probes = det_probes(model);
    let rows_of = |outs: &[DetOutcome], push: Option<&SymmetryMap>| -> Option<Vec<(f64, Vec<State>)>> {
        outs.iter()
            .map(|o| {
                let mut row = Vec::with_capacity(probes.len());
                for &t in &probes {
                    let s = o.path.state_at(t);
                    row.push(match push {
                        Some(g) => g.apply(&s)?,
                        None => s,
                    });
                }
                Some((o.prob, row))
            })
            .collect()
    };
    let ox = mc::det_outcomes(model, x)?;
    let oy = mc::det_outcomes(model, y)?;
    // A generator undefined somewhere along a path cannot witness the pair.
    let Some(rx) = rows_of(&ox, map) else { return Ok(false) };
    let Some(ry) = rows_of(&oy, None) else { return Ok(false) };
    Ok(multisets_match(&rx, &ry, |a, b| {
        a.len() == b.len() && a.iter().zip(b).all(|(s, t)| states_close(s, t))
    }))
}

/// Exact observation-law comparison for deterministic models: the
/// distributions over probe-time observation rows must coincide. This is
/// the trajectory initiation condition restricted to finitely many probe
/// times — complete here because deterministic observation paths are step
/// functions with breakpoints at segment boundaries.
pub fn det_obs_laws_match(model: &ProcessModel, x: &State, y: &State) -> Result<bool> {
    let probes = det_probes(model);
    let rows_of = |outs: &[DetOutcome]| -> Vec<(f64, Vec<Obs>)> {
        outs.iter()
            .map(|o| (o.prob, probes.iter().map(|&t| model.obs_of(&o.path.state_at(t))).collect()))
            .collect()
    };
    let rx = rows_of(&mc::det_outcomes(model, x)?);
    let ry = rows_of(&mc::det_outcomes(model, y)?);
    Ok(multisets_match(&rx, &ry, |a, b| a == b))
}

/// Match two weighted multisets greedily (rows are few; probabilities must
/// agree within [`PATH_TOL`]).
fn multisets_match<T>(
    a: &[(f64, T)],
    b: &[(f64, T)],
    mut same: impl FnMut(&T, &T) -> bool,
) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = alloc::vec![false; b.len()];
    'outer: for (pa, ra) in a {
        for (j, (pb, rb)) in b.iter().enumerate() {
            if !used[j] && (pa - pb).abs() <= PATH_TOL && same(ra, rb) {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Exact mass a deterministic model sends into `set` at time `t`.
pub fn det_mass(
    model: &ProcessModel,
    start: &State,
    t: f64,
    set: &dyn Fn(&State) -> bool,
) -> Result<f64> {
    Ok(mc::det_outcomes(model, start)?
        .iter()
        .filter(|o| set(&o.path.state_at(t)))
        .map(|o| o.prob)
        .sum())
}

/// A related pair whose kernel masses disagree on some closed set.
#[derive(Debug, Clone, PartialEq)]
pub struct Ind1Violation {
    pub x: State,
    pub y: State,
    pub t: f64,
    /// Index into the supplied family of closed sets.
    pub set_index: usize,
    pub mass_x: f64,
    pub mass_y: f64,
}

/// Induction on states over a finite family of closed sets: for every
/// related pair and every time, the mass vectors returned by `masses`
/// must agree within `tol`. `masses(x, t)` returns `P_t(x, C_i)` for each
/// set `C_i` of the family; the family itself lives with the caller, who
/// knows which sets are closed for the relation under test.
pub fn check_induction1_masses(
    masses: &dyn Fn(&State, f64) -> Result<Vec<f64>>,
    pairs: &[(State, State)],
    times: &[f64],
    tol: f64,
) -> Result<Option<Ind1Violation>> {
    for (x, y) in pairs {
        for &t in times {
            let mx = masses(x, t)?;
            let my = masses(y, t)?;
            if mx.len() != my.len() {
                return Err(Error::precondition("mass vectors must have equal length"));
            }
            for (i, (a, b)) in mx.iter().zip(&my).enumerate() {
                if (a - b).abs() > tol {
                    return Ok(Some(Ind1Violation {
                        x: *x,
                        y: *y,
                        t,
                        set_index: i,
                        mass_x: *a,
                        mass_y: *b,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Outcome of a separation sweep over unrelated pairs.
#[derive(Debug, Clone, Default)]
pub struct SeparationReport {
    pub separated: usize,
    pub total: usize,
    /// Pairs the profile failed to separate.
    pub failures: Vec<(State, State)>,
}

impl SeparationReport {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.separated as f64 / self.total as f64
        }
    }
}

/// Certify unrelated pairs apart: `profile(x)` evaluates closed-form
/// probabilities (or transform values) of a family of distinguishing
/// trajectory events; a pair is separated when some component differs by
/// more than `gap`.
pub fn separate_pairs(
    profile: &dyn Fn(&State) -> Result<Vec<f64>>,
    pairs: &[(State, State)],
    gap: f64,
) -> Result<SeparationReport> {
    let mut report = SeparationReport { total: pairs.len(), ..Default::default() };
    for (x, y) in pairs {
        let px = profile(x)?;
        let py = profile(y)?;
        if px.len() != py.len() {
            return Err(Error::precondition("profiles must have equal length"));
        }
        if px.iter().zip(&py).any(|(a, b)| (a - b).abs() > gap) {
            report.separated += 1;
        } else {
            report.failures.push((*x, *y));
        }
    }
    Ok(report)
}

/// Injectivity scan: sweep `z` over `[lo, hi]` in steps of `step` and
/// collect every point whose profile stays within `accept_tol` of the
/// reference profile (max over components). A diagonal-only relation is
/// certified when every accepted point of every scan lies next to its
/// reference.
pub fn injectivity_scan(
    profile: &dyn Fn(f64) -> Vec<f64>,
    reference: f64,
    lo: f64,
    hi: f64,
    step: f64,
    accept_tol: f64,
) -> Vec<f64> {
    assert!(step > 0.0 && hi > lo);
    let base = profile(reference);
    let n = ((hi - lo) / step) as usize;
    let mut accepted = Vec::new();
    for i in 0..=n {
        let z = lo + i as f64 * step;
        let p = profile(z);
        let dev = p.iter().zip(&base).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if dev <= accept_tol {
            accepted.push(z);
        }
    }
    accepted
}

/// The closure proposition on finite processes, verified end to end: given
/// two partitions that are bisimulations, their join (the transitive
/// closure of the union) is checked to be one and returned.
pub fn union_closure_lmp(
    lmp: &crate::lmp::FiniteLmp,
    p: &crate::partition::Partition,
    q: &crate::partition::Partition,
) -> Result<crate::partition::Partition> {
    for (name, part) in [("first", p), ("second", q)] {
        if let Err(ce) = lmp.verify_partition(part) {
            return Err(Error::precondition(format!(
                "{name} partition is not a bisimulation: {ce:?}"
            )));
        }
    }
    let joined = p.join(q);
    if let Err(ce) = lmp.verify_partition(&joined) {
        return Err(Error::validation(format!(
            "join of two bisimulations failed verification: {ce:?}"
        )));
    }
    Ok(joined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmp::FiniteLmp;
    use crate::partition::Partition;
    use crate::process::ProcessKind;
    use crate::relation::FeatureMap;
    use crate::space::{ObsKind, ObservationMap};
    use alloc::vec;

    fn bm_point_obs() -> ProcessModel {
        ProcessModel::new(
            ProcessKind::BrownianMotion,
            ObservationMap::from_kind(ObsKind::Point(0.0)),
            4.0,
            0.01,
        )
        .unwrap()
    }

    #[test]
    fn grids_and_pair_splitting() {
        let g = grid_1d(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let w = RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::ReflectAbout { c: 0.0 }],
            invariant: FeatureMap::Abs,
        });
        let xs: Vec<State> = g.iter().map(|&x| State::Real(x)).collect();
        let (rel, unrel) = split_pairs(&w, &xs).unwrap();
        // |x| matches only ±x: two related pairs among five points.
        assert_eq!(rel.len(), 2);
        assert_eq!(unrel.len(), 8);
    }

    #[test]
    fn initiation_catches_obs_mismatch() {
        let m = bm_point_obs();
        let good = [(State::Real(1.0), State::Real(-1.0))];
        assert!(check_initiation1(&m, &good).is_ok());
        let bad = [(State::Real(0.0), State::Real(1.0))];
        let v = check_initiation1(&m, &bad).unwrap_err();
        assert_eq!(v.obs_x, Obs::Bits(1));
        assert_eq!(v.obs_y, Obs::Bits(0));
        // Reflection about 0 commutes with the point observation.
        let g = SymmetryMap::ReflectAbout { c: 0.0 };
        let xs: Vec<State> = grid_1d(-2.0, 2.0, 9).iter().map(|&x| State::Real(x)).collect();
        assert!(check_obs_commutes(&m, &g, &xs).is_ok());
        // Translation does not.
        let t = SymmetryMap::Translate { k: 1.0 };
        assert!(check_obs_commutes(&m, &t, &xs).is_err());
    }

    #[test]
    fn reflection_preserves_bm_law_translation_does_not_shift_it() {
        let m = bm_point_obs();
        let starts = [State::Real(1.0), State::Real(-0.5)];
        let sym = SymmetryGroup {
            generators: vec![SymmetryMap::ReflectAbout { c: 0.0 }],
            invariant: FeatureMap::Abs,
        };
        let opts = LawCheckOpts { n_paths: 20_000, ..Default::default() };
        let rep = check_symmetry_laws(&m, &sym, &starts, &opts).unwrap();
        assert_eq!(rep.checks.len(), 2);
        assert!(rep.pass(), "max z = {}", rep.max_z());

        // A deliberate non-symmetry to make sure the test has teeth: x ↦ 2x
        // is not available, but comparing the law from x against the law
        // from x+1 *without* mapping is — translation pushes the law to a
        // shifted one, and the marginal test must see it.
        let pushed =
            mc::sample_checkpoints(&m, &State::Real(0.0), &[1.0], 0.01, None, 20_000, 3).unwrap();
        let direct =
            mc::sample_checkpoints(&m, &State::Real(1.0), &[1.0], 0.01, None, 20_000, 4).unwrap();
        assert!(stats::two_sample_marginal(&pushed, &direct).z > Z_CRIT);
    }

    #[test]
    fn deterministic_law_and_obs_comparisons() {
        let m = ProcessModel::new(
            ProcessKind::Drift { a: 1.0 },
            ObservationMap::from_kind(ObsKind::Integers),
            4.0,
            0.01,
        )
        .unwrap();
        let g = SymmetryMap::Translate { k: 1.0 };
        // x and x+1 have identical laws through the unit translation.
        assert!(det_laws_match(&m, &State::Real(0.25), &State::Real(1.25), Some(&g)).unwrap());
        // Without the map the paths differ.
        assert!(!det_laws_match(&m, &State::Real(0.25), &State::Real(1.25), None).unwrap());
        // Observation paths agree for integer-translated starts…
        assert!(det_obs_laws_match(&m, &State::Real(0.25), &State::Real(1.25)).unwrap());
        // …and disagree across a fractional shift.
        assert!(!det_obs_laws_match(&m, &State::Real(0.25), &State::Real(0.75)).unwrap());
        // Drift mass is a point mass on the translated start.
        let mass = det_mass(&m, &State::Real(0.25), 0.75, &|s| match s {
            State::Real(x) => (*x - 1.0).abs() < 1e-12,
            _ => false,
        })
        .unwrap();
        assert_eq!(mass, 1.0);
    }

    #[test]
    fn induction_masses_and_separation_drivers() {
        // Masses of the Gaussian kernel on {0} and on ℝ \ {0}: the point
        // carries no mass and nothing dies, for every start and time.
        let masses = |_: &State, _: f64| -> Result<Vec<f64>> { Ok(vec![0.0, 1.0]) };
        let pairs = [(State::Real(1.0), State::Real(2.0))];
        assert!(check_induction1_masses(&masses, &pairs, &[0.5, 1.0], 1e-12).unwrap().is_none());

        let bad = |x: &State, _: f64| -> Result<Vec<f64>> { Ok(vec![x.real().unwrap()]) };
        let v = check_induction1_masses(&bad, &pairs, &[1.0], 1e-12).unwrap().unwrap();
        assert_eq!(v.set_index, 0);

        // Hit-zero probabilities separate different |x|.
        let profile = |s: &State| -> Result<Vec<f64>> {
            let x = s.real().unwrap();
            Ok(vec![crate::analytic::bm_hit_zero_cdf(x, 1.0)])
        };
        let pairs =
            [(State::Real(1.0), State::Real(2.0)), (State::Real(1.0), State::Real(-1.0))];
        let rep = separate_pairs(&profile, &pairs, 1e-6).unwrap();
        assert_eq!(rep.separated, 1);
        assert_eq!(rep.failures, vec![(State::Real(1.0), State::Real(-1.0))]);
    }

    #[test]
    fn injectivity_scan_accepts_only_the_diagonal() {
        let profile = |z: f64| -> Vec<f64> {
            [0.5, 1.0, 2.0]
                .iter()
                .map(|&l| crate::analytic::drifted_one_sided_hit_laplace(z, 0.0, 1.0, l))
                .collect()
        };
        let accepted = injectivity_scan(&profile, 1.0, 0.5, 1.5, 1e-3, 1e-4);
        assert!(!accepted.is_empty());
        assert!(accepted.iter().all(|z| (z - 1.0).abs() <= 2e-3), "{accepted:?}");
    }

    #[test]
    fn union_closure_on_a_finite_process() {
        // States 0, 1, 2 behave identically (0.7 into state 4); state 3
        // shares their label but not their mass. Two overlapping pair
        // relations join into {0,1,2}.
        let m = FiniteLmp::new(
            vec![0, 0, 0, 0, 1],
            vec![
                0.0, 0.0, 0.0, 0.0, 0.7, //
                0.0, 0.0, 0.0, 0.0, 0.7, //
                0.0, 0.0, 0.0, 0.0, 0.7, //
                0.0, 0.0, 0.0, 0.0, 0.3, //
                0.0, 0.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        let p = Partition::from_blocks(5, &[vec![0, 1], vec![2], vec![3], vec![4]]).unwrap();
        let q = Partition::from_blocks(5, &[vec![0], vec![1, 2], vec![3], vec![4]]).unwrap();
        let j = union_closure_lmp(&m, &p, &q).unwrap();
        assert_eq!(j.n_blocks(), 3);
        assert!(j.same_block(0, 2));
        assert!(!j.same_block(0, 3));
        // A non-bisimulation input is rejected up front (0 and 3 send
        // different mass into the dying state).
        let bad = Partition::from_blocks(5, &[vec![0, 3], vec![1], vec![2], vec![4]]).unwrap();
        assert!(union_closure_lmp(&m, &bad, &q).is_err());
    }
}
