//! The example gallery: concrete process models, their notable
//! bisimulations as machine-checkable witnesses, and the closed-form
//! statistics that separate unrelated states.
//!
//! Every entry packages five things: a model, a relation witness, a state
//! grid for generating pairs, starts for the law checks, and a
//! [`Separator`] — a family of distinguishing trajectory events whose
//! probabilities (or Laplace transforms of firing times) are computable in
//! closed form. Checking an entry means: related pairs agree on
//! observations exactly, the witness generators preserve the law (exactly
//! for deterministic models, statistically otherwise), and the separator
//! certifies the unrelated pairs apart.
//!
//! The gallery also carries the two instructive negatives: a naive
//! relation on the zero-observed line that survives the state-to-state
//! kernel conditions yet is refuted by a hitting-time event, and a fork
//! process where two roots agree on every observation path but fail the
//! kernel condition on a closed branch set.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::analytic;
use crate::bisim::{self, Ind1Violation, LawCheckOpts, LawReport, SeparationReport};
use crate::mc::{self, DetPath, EventSpec, McOpts};
use crate::process::{ProcessKind, ProcessModel};
use crate::relation::{FeatureMap, RelationWitness, SymmetryGroup, SymmetryMap};
use crate::rng::derive_seed;
use crate::space::{Obs, ObsKind, ObservationMap, State};
use crate::stats::Estimate;
use crate::{math, Result};

/// Default gap for closed-form profile separation.
pub const SEP_GAP: f64 = 1e-6;

/// Transform abscissas for the Laplace-profile separators.
pub const LAMBDAS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

/// A family of distinguishing trajectory events with closed-form values.
/// Each variant evaluates, per start state, the probabilities of
/// observation-defined events (or Laplace transforms of their firing
/// times) — quantities any bisimulation must match across related states.
#[derive(Debug, Clone, PartialEq)]
pub enum Separator {
    /// Deterministic models: `ℙ(proposition b has fired by t)` for every
    /// proposition and scheduled time, computed exactly from the outcome
    /// enumeration.
    DetObsSchedule { times: Vec<f64> },
    /// `ℙ^z(T_0 ≤ t)` for driftless Brownian motion, over a time grid.
    HitZeroCdf { times: Vec<f64> },
    /// `E^z[e^{−λT}]`, `T` the exit of the unit cell `[⌊z⌋, ⌊z⌋+1]`
    /// (equivalently the hitting time of the integer observation).
    UnitExitLaplace { lambdas: Vec<f64> },
    /// Interval observation on the free line: inside, the Laplace
    /// transform of the exit of `[lo, hi]`; outside, of re-entry.
    IntervalLaplace { lo: f64, hi: f64, lambdas: Vec<f64> },
    /// `E^z[e^{−λT_0}]` for Brownian motion with drift `a`.
    DriftedHitZeroLaplace { a: f64, lambdas: Vec<f64> },
    /// Drifted exit of the unit cell around `z`.
    DriftedUnitExitLaplace { a: f64, lambdas: Vec<f64> },
    /// Drifted interval observation on `[−1, 1]`: exit inside, entry
    /// outside.
    DriftedIntervalLaplace { a: f64, lambdas: Vec<f64> },
    /// `ℙ^z(ζ ≤ t)` for the half line absorbed at 0.
    DeathCdf { times: Vec<f64> },
    /// `E^z[e^{−λζ}]`-style exit transform for the doubly absorbed
    /// interval (the death time is the exit time).
    ExitLaplace { lo: f64, hi: f64, lambdas: Vec<f64> },
    /// `E^z[e^{−λT_b}; T_b < ζ]` — reach the marked interior point before
    /// absorption.
    ReachLaplace { target: f64, lo: f64, hi: f64, lambdas: Vec<f64> },
}

/// First time a deterministic path makes proposition `bit` true, if ever.
fn det_first_fire(model: &ProcessModel, path: &DetPath, bit: usize) -> Option<f64> {
    match (&model.kind, &model.obs.kind, path) {
        (ProcessKind::Drift { a }, ObsKind::Point(c), DetPath::Line { x0, .. }) => {
            let t = (c - x0) / a;
            (t >= 0.0).then_some(t)
        }
        (ProcessKind::Drift { a }, ObsKind::Integers, DetPath::Line { x0, .. }) => {
            let t = if *a > 0.0 {
                (math::ceil(*x0) - x0) / a
            } else {
                (x0 - math::floor(*x0)) / -a
            };
            Some(t)
        }
        (_, ObsKind::ForkTips, DetPath::Fork { p0, br0, choice, end_pos, .. }) => {
            let final_branch = match br0 {
                1 | 4 => choice.expect("fork outcomes commit a choice"),
                b => *b,
            };
            let fires = matches!((bit, final_branch), (0, 2 | 5) | (1, 3 | 6));
            fires.then(|| end_pos - p0)
        }
        _ => None,
    }
}

impl Separator {
    /// Evaluate the profile at a live state.
    pub fn eval(&self, model: &ProcessModel, s: &State) -> Result<Vec<f64>> {
        match self {
            Separator::DetObsSchedule { times } => {
                let outs = mc::det_outcomes(model, s)?;
                let n_bits = model.obs.ap_names.len().max(1);
                let mut vals = Vec::with_capacity(times.len() * n_bits);
                for &t in times {
                    for bit in 0..n_bits {
                        let p: f64 = outs
                            .iter()
                            .filter(|o| {
                                det_first_fire(model, &o.path, bit).is_some_and(|tf| tf <= t)
                            })
                            .map(|o| o.prob)
                            .sum();
                        vals.push(p);
                    }
                }
                Ok(vals)
            }
            Separator::HitZeroCdf { times } => {
                let z = require_real(s)?;
                Ok(times.iter().map(|&t| analytic::bm_hit_zero_cdf(z, t)).collect())
            }
            Separator::UnitExitLaplace { lambdas } => {
                let z = require_real(s)?;
                let u = math::frac(z);
                Ok(lambdas
                    .iter()
                    .map(|&l| analytic::bm_interval_exit_laplace(u, 0.0, 1.0, l))
                    .collect())
            }
            Separator::IntervalLaplace { lo, hi, lambdas } => {
                let z = require_real(s)?;
                Ok(lambdas
                    .iter()
                    .map(|&l| {
                        if z >= *lo && z <= *hi {
                            analytic::bm_interval_exit_laplace(z, *lo, *hi, l)
                        } else if z > *hi {
                            analytic::drifted_one_sided_hit_laplace(z, *hi, 0.0, l)
                        } else {
                            analytic::drifted_one_sided_hit_laplace(z, *lo, 0.0, l)
                        }
                    })
                    .collect())
            }
            Separator::DriftedHitZeroLaplace { a, lambdas } => {
                let z = require_real(s)?;
                Ok(lambdas
                    .iter()
                    .map(|&l| analytic::drifted_one_sided_hit_laplace(z, 0.0, *a, l))
                    .collect())
            }
            Separator::DriftedUnitExitLaplace { a, lambdas } => {
                let z = require_real(s)?;
                let u = math::frac(z);
                Ok(lambdas
                    .iter()
                    .map(|&l| analytic::drifted_two_barrier_laplace(u, *a, l))
                    .collect())
            }
            Separator::DriftedIntervalLaplace { a, lambdas } => {
                let z = require_real(s)?;
                Ok(lambdas
                    .iter()
                    .map(|&l| {
                        if (-1.0..=1.0).contains(&z) {
                            analytic::drifted_interval_exit_laplace(z, *a, l)
                        } else if z > 1.0 {
                            analytic::drifted_one_sided_hit_laplace(z, 1.0, *a, l)
                        } else {
                            analytic::drifted_one_sided_hit_laplace(z, -1.0, *a, l)
                        }
                    })
                    .collect())
            }
            Separator::DeathCdf { times } => {
                let z = require_real(s)?;
                Ok(times.iter().map(|&t| analytic::absorbed_bm_death_cdf(z, t)).collect())
            }
            Separator::ExitLaplace { lo, hi, lambdas } => {
                let z = require_real(s)?;
                Ok(lambdas
                    .iter()
                    .map(|&l| analytic::bm_interval_exit_laplace(z, *lo, *hi, l))
                    .collect())
            }
            Separator::ReachLaplace { target, lo, hi, lambdas } => {
                let z = require_real(s)?;
                Ok(lambdas
                    .iter()
                    .map(|&l| analytic::absorbed_bm_reach_laplace(z, *target, *lo, *hi, l))
                    .collect())
            }
        }
    }
}

fn require_real(s: &State) -> Result<f64> {
    s.real().ok_or_else(|| crate::Error::precondition("profile needs a real coordinate"))
}

/// One gallery example.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub id: &'static str,
    pub title: &'static str,
    /// Human statement of the claimed relation.
    pub claim: &'static str,
    pub model: ProcessModel,
    pub witness: RelationWitness,
    /// Grid of states generating the checked pairs.
    pub states: Vec<State>,
    /// Starts for the generator law checks.
    pub law_starts: Vec<State>,
    /// Checkpoint times for statistical law checks.
    pub law_times: Vec<f64>,
    pub separator: Separator,
    pub gap: f64,
    /// Seed stream offset so entries decorrelate under one gallery seed.
    seed_stream: u64,
}

/// Options for running gallery checks.
#[derive(Debug, Clone)]
pub struct GalleryOpts {
    pub n_paths: u64,
    pub seed: u64,
    /// Minimum fraction of unrelated pairs the separator must certify.
    pub min_separation: f64,
}

impl Default for GalleryOpts {
    fn default() -> Self {
        GalleryOpts { n_paths: 20_000, seed: 2026, min_separation: 0.99 }
    }
}

/// Everything one entry check produces.
#[derive(Debug, Clone)]
pub struct EntryReport {
    pub id: String,
    pub n_related: usize,
    pub n_unrelated: usize,
    pub init1_ok: bool,
    pub obs_commute_ok: bool,
    /// `None` for diagonal witnesses with nothing to compare.
    pub law: Option<LawReport>,
    pub separation: SeparationReport,
}

impl EntryReport {
    pub fn pass(&self, opts: &GalleryOpts) -> bool {
        self.init1_ok
            && self.obs_commute_ok
            && self.law.as_ref().is_none_or(|l| l.pass())
            && self.separation.fraction() >= opts.min_separation
    }
}

impl GalleryEntry {
    /// The per-state profile: the observation bits first (any bisimulation
    /// must match them now), then the separator statistics.
    pub fn profile(&self, s: &State) -> Result<Vec<f64>> {
        let head = match self.model.obs_of(s) {
            Obs::Bits(b) => b as f64,
            Obs::Dead => -1.0,
        };
        let mut v = vec![head];
        v.extend(self.separator.eval(&self.model, s)?);
        Ok(v)
    }

    /// Run the full check: initiation, generator laws, separation.
    pub fn check(&self, opts: &GalleryOpts) -> Result<EntryReport> {
        let (related, unrelated) = bisim::split_pairs(&self.witness, &self.states)?;
        let init1_ok = bisim::check_initiation1(&self.model, &related).is_ok();
        let (obs_commute_ok, law) = match &self.witness {
            RelationWitness::Symmetry(group) if !group.generators.is_empty() => {
                let obs_ok = group
                    .generators
                    .iter()
                    .all(|g| bisim::check_obs_commutes(&self.model, g, &self.states).is_ok());
                let lc = LawCheckOpts {
                    times: self.law_times.clone(),
                    dt: 0.01,
                    n_paths: opts.n_paths,
                    seed: derive_seed(opts.seed, self.seed_stream),
                };
                let rep = bisim::check_symmetry_laws(&self.model, group, &self.law_starts, &lc)?;
                (obs_ok, Some(rep))
            }
            _ => (true, None),
        };
        let profile = |s: &State| self.profile(s);
        let separation = bisim::separate_pairs(&profile, &unrelated, self.gap)?;
        Ok(EntryReport {
            id: String::from(self.id),
            n_related: related.len(),
            n_unrelated: unrelated.len(),
            init1_ok,
            obs_commute_ok,
            law,
            separation,
        })
    }
}

fn real_states(lo: f64, hi: f64, n: usize) -> Vec<State> {
    bisim::grid_1d(lo, hi, n).into_iter().map(State::Real).collect()
}

fn model(kind: ProcessKind, obs: ObsKind, horizon: f64, dt: f64) -> ProcessModel {
    ProcessModel::new(kind, ObservationMap::from_kind(obs), horizon, dt)
        .expect("gallery models are valid by construction")
}

/// The thirteen worked examples.
pub fn gallery() -> Vec<GalleryEntry> {
    let lambdas = LAMBDAS.to_vec();
    let mut entries = Vec::new();

    // 1. Rightward drift, observe the origin: every positive state has an
    // empty observable future, so the positive half line collapses; the
    // rest is frozen by its exact firing time.
    entries.push(GalleryEntry {
        id: "drift-point",
        title: "uniform drift observing the origin",
        claim: "x ~ y iff both are positive, or x = y",
        model: model(ProcessKind::Drift { a: 1.0 }, ObsKind::Point(0.0), 4.0, 0.04),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![
                SymmetryMap::TranslateHalfLine { k: 0.7, positive: true },
                SymmetryMap::TranslateHalfLine { k: 1.3, positive: true },
            ],
            invariant: FeatureMap::HalfLineClass { positive: true },
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: real_states(0.5, 2.0, 3),
        law_times: vec![0.5, 1.0, 2.0],
        separator: Separator::DetObsSchedule {
            times: bisim::grid_1d(0.1, 3.5, 35),
        },
        gap: SEP_GAP,
        seed_stream: 1,
    });

    // 2. Drift observing the integers: the observation path from x is the
    // x mod 1 clock, so integer translation is a complete symmetry.
    entries.push(GalleryEntry {
        id: "drift-integers",
        title: "uniform drift observing the integer lattice",
        claim: "x ~ y iff x − y is an integer",
        model: model(ProcessKind::Drift { a: 1.0 }, ObsKind::Integers, 4.0, 0.04),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::Translate { k: 1.0 }, SymmetryMap::Translate { k: -1.0 }],
            invariant: FeatureMap::Frac,
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: real_states(-1.3, 1.4, 3),
        law_times: vec![0.5, 1.0, 2.0],
        separator: Separator::DetObsSchedule {
            times: bisim::grid_1d(0.02, 1.2, 60),
        },
        gap: SEP_GAP,
        seed_stream: 2,
    });

    // 3. The fork: above the late fork the two trees are indistinguishable
    // and glue; below, fork timing is observable through the tip events.
    let fork_states: Vec<State> = {
        let mut v = vec![State::Branch { pos: 0.0, branch: 1 }];
        for &p in &[20.0, 60.0] {
            v.push(State::Branch { pos: p, branch: 4 });
        }
        for &p in &[20.0, 60.0, 96.0, 98.0, 100.0] {
            v.push(State::Branch { pos: p, branch: 2 });
            v.push(State::Branch { pos: p, branch: 3 });
        }
        for &p in &[96.0, 98.0, 100.0] {
            v.push(State::Branch { pos: p, branch: 5 });
            v.push(State::Branch { pos: p, branch: 6 });
        }
        v
    };
    entries.push(GalleryEntry {
        id: "fork",
        title: "the deterministic fork with early and late branching",
        claim: "states on the two trees glue at equal positions past the late fork; everything else is rigid",
        model: model(
            ProcessKind::Fork { fork_pos: 95.0, end_pos: 100.0 },
            ObsKind::ForkTips,
            110.0,
            1.0,
        ),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::ForkGlue { fork_pos: 95.0 }],
            invariant: FeatureMap::ForkClass,
        }),
        law_starts: fork_states
            .iter()
            .filter(|s| matches!(s, State::Branch { pos, .. } if *pos > 95.0))
            .copied()
            .collect(),
        states: fork_states,
        law_times: vec![1.0, 2.0, 4.0],
        separator: Separator::DetObsSchedule {
            times: bisim::grid_1d(0.5, 100.0, 200),
        },
        gap: SEP_GAP,
        seed_stream: 3,
    });

    // 4. Brownian motion observing the origin: reflection is the only
    // symmetry; hitting-time laws freeze |x|.
    entries.push(GalleryEntry {
        id: "bm-point",
        title: "Brownian motion observing the origin",
        claim: "x ~ y iff |x| = |y|",
        model: model(ProcessKind::BrownianMotion, ObsKind::Point(0.0), 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::ReflectAbout { c: 0.0 }],
            invariant: FeatureMap::Abs,
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: real_states(0.7, 2.2, 2),
        law_times: vec![0.5, 1.0, 2.0],
        separator: Separator::HitZeroCdf { times: vec![0.25, 0.5, 1.0, 2.0, 4.0] },
        gap: SEP_GAP,
        seed_stream: 4,
    });

    // 5. Brownian motion observing the integers: translations *and*
    // reflections about integers preserve the picture, leaving the
    // distance to the nearest integer.
    entries.push(GalleryEntry {
        id: "bm-integers",
        title: "Brownian motion observing the integer lattice",
        claim: "x ~ y iff dist(x, ℤ) = dist(y, ℤ)",
        model: model(ProcessKind::BrownianMotion, ObsKind::Integers, 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![
                SymmetryMap::Translate { k: 1.0 },
                SymmetryMap::Translate { k: -1.0 },
                SymmetryMap::ReflectAbout { c: 0.0 },
            ],
            invariant: FeatureMap::DistToInt,
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: real_states(0.3, 1.8, 3),
        law_times: vec![0.1, 0.4, 1.0],
        separator: Separator::UnitExitLaplace { lambdas: lambdas.clone() },
        gap: SEP_GAP,
        seed_stream: 5,
    });

    // 6. Brownian motion observing a centred interval: reflection again.
    entries.push(GalleryEntry {
        id: "bm-interval",
        title: "Brownian motion observing the interval [−1, 1]",
        claim: "x ~ y iff |x| = |y|",
        model: model(ProcessKind::BrownianMotion, ObsKind::Interval(-1.0, 1.0), 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::ReflectAbout { c: 0.0 }],
            invariant: FeatureMap::Abs,
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: real_states(0.4, 1.9, 2),
        law_times: vec![0.5, 1.0, 2.0],
        separator: Separator::IntervalLaplace { lo: -1.0, hi: 1.0, lambdas: lambdas.clone() },
        gap: SEP_GAP,
        seed_stream: 6,
    });

    // 7. Drifted Brownian motion observing the origin: drift kills the
    // reflection, and the hitting transform is injective — diagonal only.
    entries.push(GalleryEntry {
        id: "drifted-point",
        title: "drifted Brownian motion observing the origin",
        claim: "only x ~ x (the hitting transform is injective in x)",
        model: model(ProcessKind::DriftedBm { a: 1.0 }, ObsKind::Point(0.0), 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![],
            invariant: FeatureMap::Coordinate,
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: vec![],
        law_times: vec![0.5, 1.0, 2.0],
        separator: Separator::DriftedHitZeroLaplace { a: 1.0, lambdas: lambdas.clone() },
        gap: SEP_GAP,
        seed_stream: 7,
    });

    // 8. Drifted Brownian motion observing the integers: integer
    // translations survive the drift; reflections do not.
    entries.push(GalleryEntry {
        id: "drifted-integers",
        title: "drifted Brownian motion observing the integer lattice",
        claim: "x ~ y iff x − y is an integer",
        model: model(ProcessKind::DriftedBm { a: 1.0 }, ObsKind::Integers, 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::Translate { k: 1.0 }, SymmetryMap::Translate { k: -1.0 }],
            invariant: FeatureMap::Frac,
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: real_states(0.3, 1.8, 3),
        law_times: vec![0.1, 0.4, 1.0],
        separator: Separator::DriftedUnitExitLaplace { a: 1.0, lambdas: lambdas.clone() },
        gap: SEP_GAP,
        seed_stream: 8,
    });

    // 9. Drifted Brownian motion observing [−1, 1]: diagonal only.
    entries.push(GalleryEntry {
        id: "drifted-interval",
        title: "drifted Brownian motion observing the interval [−1, 1]",
        claim: "only x ~ x",
        model: model(ProcessKind::DriftedBm { a: 1.0 }, ObsKind::Interval(-1.0, 1.0), 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![],
            invariant: FeatureMap::Coordinate,
        }),
        states: real_states(-3.0, 3.0, 20),
        law_starts: vec![],
        law_times: vec![0.5, 1.0, 2.0],
        separator: Separator::DriftedIntervalLaplace { a: 1.0, lambdas: lambdas.clone() },
        gap: SEP_GAP,
        seed_stream: 9,
    });

    // 10. Brownian motion on (0, ∞) absorbed at 0, nothing observed but
    // death: the death-time law is injective in the start — diagonal.
    entries.push(GalleryEntry {
        id: "absorbed-half-line",
        title: "Brownian motion on the half line absorbed at 0",
        claim: "only x ~ x (the death-time law is injective in x)",
        model: model(
            ProcessKind::AbsorbedBm { lo: 0.0, hi: f64::INFINITY },
            ObsKind::None,
            8.0,
            0.01,
        ),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![],
            invariant: FeatureMap::Coordinate,
        }),
        states: real_states(0.15, 3.0, 20),
        law_starts: vec![],
        law_times: vec![0.5, 1.0, 2.0],
        separator: Separator::DeathCdf { times: vec![0.5, 1.0, 2.0, 4.0] },
        gap: SEP_GAP,
        seed_stream: 10,
    });

    // 11. Brownian motion on (0, 2) absorbed at both ends: the midpoint
    // reflection is the only surviving symmetry.
    entries.push(GalleryEntry {
        id: "absorbed-two-barrier",
        title: "Brownian motion on (0, 2) absorbed at both ends",
        claim: "x ~ y iff y = x or y = 2 − x",
        model: model(ProcessKind::AbsorbedBm { lo: 0.0, hi: 2.0 }, ObsKind::None, 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::ReflectAbout { c: 1.0 }],
            invariant: FeatureMap::AbsAbout { c: 1.0 },
        }),
        states: real_states(0.05, 1.95, 20),
        law_starts: vec![State::Real(0.4), State::Real(1.3)],
        law_times: vec![0.2, 0.6, 1.5],
        separator: Separator::ExitLaplace { lo: 0.0, hi: 2.0, lambdas: lambdas.clone() },
        gap: SEP_GAP,
        seed_stream: 11,
    });

    // 12. Same interval, with the midpoint marked: the reflection fixes
    // the mark, so the symmetry survives.
    entries.push(GalleryEntry {
        id: "absorbed-marked-midpoint",
        title: "absorbed Brownian motion on (0, 2) observing the midpoint",
        claim: "x ~ y iff y = x or y = 2 − x",
        model: model(ProcessKind::AbsorbedBm { lo: 0.0, hi: 2.0 }, ObsKind::Point(1.0), 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![SymmetryMap::ReflectAbout { c: 1.0 }],
            invariant: FeatureMap::AbsAbout { c: 1.0 },
        }),
        states: real_states(0.05, 1.95, 20),
        law_starts: vec![State::Real(0.4), State::Real(1.3)],
        law_times: vec![0.2, 0.6, 1.5],
        separator: Separator::ReachLaplace {
            target: 1.0,
            lo: 0.0,
            hi: 2.0,
            lambdas: lambdas.clone(),
        },
        gap: SEP_GAP,
        seed_stream: 12,
    });

    // 13. A longer interval with an off-centre mark: no isometry fixes
    // both the barriers and the mark — diagonal only.
    entries.push(GalleryEntry {
        id: "absorbed-marked-quarter",
        title: "absorbed Brownian motion on (0, 4) observing the point 1",
        claim: "only x ~ x",
        model: model(ProcessKind::AbsorbedBm { lo: 0.0, hi: 4.0 }, ObsKind::Point(1.0), 8.0, 0.01),
        witness: RelationWitness::Symmetry(SymmetryGroup {
            generators: vec![],
            invariant: FeatureMap::Coordinate,
        }),
        states: real_states(0.2, 3.8, 20),
        law_starts: vec![],
        law_times: vec![0.2, 0.6, 1.5],
        separator: Separator::ReachLaplace { target: 1.0, lo: 0.0, hi: 4.0, lambdas },
        gap: SEP_GAP,
        seed_stream: 13,
    });

    entries
}

/// Look up a gallery entry by id.
pub fn entry_by_id(id: &str) -> Option<GalleryEntry> {
    gallery().into_iter().find(|e| e.id == id)
}

// --- the naive relation and its refutation -----------------------------------

/// Report for the naive "zero with zero, rest with rest" relation on the
/// origin-observing Brownian line.
#[derive(Debug, Clone)]
pub struct NaiveReport {
    /// The relation's closed sets are `∅, {0}, ℝ∖{0}, ℝ`; the Gaussian
    /// kernel gives every start the same mass vector on them, so the
    /// state-to-state kernel condition holds. `None` records that no
    /// violation was found.
    pub kernel_violation: Option<Ind1Violation>,
    /// The refuting pair (both in the "rest" class).
    pub pair: (f64, f64),
    /// The hitting deadline of the refuting trajectory event.
    pub t: f64,
    /// Exact probabilities of the event from each start.
    pub p_x: f64,
    pub p_y: f64,
    /// Monte-Carlo confirmations of the two probabilities.
    pub mc_x: Estimate,
    pub mc_y: Estimate,
    /// Two-sample score between the estimates.
    pub gap_z: f64,
}

impl NaiveReport {
    /// The naive relation stands refuted when the kernel check passed but
    /// the trajectory event tells the pair apart, with Monte Carlo
    /// agreeing.
    pub fn refuted(&self) -> bool {
        self.kernel_violation.is_none()
            && (self.p_x - self.p_y).abs() > 1e-3
            && self.gap_z > crate::stats::Z_CRIT
    }
}

/// Check the naive relation on Brownian motion observing the origin: all
/// nonzero states related, zero related to itself. The state-to-state
/// kernel condition passes on every closed set of the relation, yet the
/// observation-closed event "hit 0 by t" refutes it.
pub fn naive_counterexample(n_paths: u64, seed: u64) -> Result<NaiveReport> {
    let m = model(ProcessKind::BrownianMotion, ObsKind::Point(0.0), 8.0, 0.01);
    let witness = RelationWitness::Symmetry(SymmetryGroup {
        generators: vec![],
        invariant: FeatureMap::NonzeroClass,
    });
    let states = real_states(-3.0, 3.0, 20);
    let (related, _) = bisim::split_pairs(&witness, &states)?;
    // Initiation holds: nonzero states share the observation.
    bisim::check_initiation1(&m, &related)
        .map_err(|v| crate::Error::validation(alloc::format!("unexpected: {v:?}")))?;
    // The closed sets are ∅, {0}, its complement, and ℝ. The Gaussian
    // kernel puts zero mass on the point and one on the rest, for every
    // start and time, so the mass vectors agree identically.
    let masses = |_: &State, _: f64| -> Result<Vec<f64>> { Ok(vec![0.0, 1.0, 1.0]) };
    let kernel_violation =
        bisim::check_induction1_masses(&masses, &related, &[0.25, 1.0, 4.0], 1e-12)?;

    let (x, y, t) = (1.0, 2.0, 1.0);
    let p_x = analytic::bm_hit_zero_cdf(x, t);
    let p_y = analytic::bm_hit_zero_cdf(y, t);
    let ev = EventSpec::HitBy { barriers: vec![0.0], t };
    let mc_x = mc::estimate_event(
        &m,
        &State::Real(x),
        &ev,
        &McOpts { n_paths, seed: derive_seed(seed, 101) },
    )?;
    let mc_y = mc::estimate_event(
        &m,
        &State::Real(y),
        &ev,
        &McOpts { n_paths, seed: derive_seed(seed, 102) },
    )?;
    let gap_z = (mc_x.value - mc_y.value).abs()
        / math::hypot(mc_x.std_err, mc_y.std_err).max(f64::MIN_POSITIVE);
    Ok(NaiveReport { kernel_violation, pair: (x, y), t, p_x, p_y, mc_x, mc_y, gap_z })
}

// --- the fork's trajectory-initiation demonstration ---------------------------

/// Report for the two fork roots: equal observation laws, yet a closed
/// branch set receives different kernel mass.
#[derive(Debug, Clone)]
pub struct ForkRootsReport {
    /// Exact: the two roots have identical observation-path laws.
    pub obs_laws_equal: bool,
    /// The time at which the closed set (the early tree's P branch,
    /// together with its glued upper part) is weighed.
    pub t: f64,
    pub mass_x: f64,
    pub mass_y: f64,
}

impl ForkRootsReport {
    pub fn demonstrates_gap(&self) -> bool {
        self.obs_laws_equal && (self.mass_x - self.mass_y).abs() > 0.25
    }
}

/// The early-fork root and the late-fork root satisfy the trajectory
/// initiation condition (their observation processes are equal in law)
/// but are not bisimilar: branch 2 — a closed set of every bisimulation
/// containing the glue — receives mass ½ from the early root and 0 from
/// the late one at any time before the late fork.
pub fn fork_roots_demo() -> Result<ForkRootsReport> {
    let m = model(
        ProcessKind::Fork { fork_pos: 95.0, end_pos: 100.0 },
        ObsKind::ForkTips,
        110.0,
        1.0,
    );
    let x = State::Branch { pos: 0.0, branch: 1 };
    let y = State::Branch { pos: 0.0, branch: 4 };
    let obs_laws_equal = bisim::det_obs_laws_match(&m, &x, &y)?;
    let t = 50.0;
    let in_branch2 = |s: &State| matches!(s, State::Branch { branch: 2, .. });
    let mass_x = bisim::det_mass(&m, &x, t, &in_branch2)?;
    let mass_y = bisim::det_mass(&m, &y, t, &in_branch2)?;
    Ok(ForkRootsReport { obs_laws_equal, t, mass_x, mass_y })
}

// --- morphism instances --------------------------------------------------------

use crate::cospan::SpaceMap;

/// A concrete morphism instance between two gallery-adjacent models.
#[derive(Debug, Clone)]
pub struct HomInstance {
    pub id: &'static str,
    pub map: SpaceMap,
    pub src: ProcessModel,
    pub tgt: ProcessModel,
    /// Grid for the exact observation-commutation check.
    pub obs_states: Vec<State>,
    /// Starts for the pushforward-law check.
    pub law_starts: Vec<State>,
}

/// The Brownian line observing the integers.
pub fn hom_line() -> ProcessModel {
    model(ProcessKind::BrownianMotion, ObsKind::Integers, 2.0, 0.01)
}

/// Reflected Brownian motion on `[0, 1]` observing the boundary set.
pub fn hom_unit_interval() -> ProcessModel {
    model(
        ProcessKind::ReflectedBm { lo: 0.0, hi: 1.0 },
        ObsKind::PointSet(vec![0.0, 1.0]),
        2.0,
        0.01,
    )
}

/// Reflected Brownian motion on `[0, 1/2]` observing 0.
pub fn hom_half_interval() -> ProcessModel {
    model(ProcessKind::ReflectedBm { lo: 0.0, hi: 0.5 }, ObsKind::Point(0.0), 2.0, 0.01)
}

/// Brownian motion on the circle of circumference 1, observing the marked
/// angle 0.
pub fn hom_circle() -> ProcessModel {
    model(
        ProcessKind::CircleBm { radius: 1.0 / (2.0 * math::PI) },
        ObsKind::Point(0.0),
        2.0,
        0.01,
    )
}

/// The four morphisms of the folding square, source laws to target laws:
/// line → circle, line → unit interval, circle → half interval, unit
/// interval → half interval. Their composites agree: both equal the
/// distance-to-integer map.
pub fn hom_catalog() -> Vec<HomInstance> {
    let line_grid = real_states(-3.0, 3.0, 25);
    let circle_grid: Vec<State> = bisim::grid_1d(-3.0, 3.0, 25)
        .into_iter()
        .map(|t| State::Real(crate::space::wrap_angle(t)))
        .collect();
    let unit_grid = real_states(0.0, 1.0, 21);
    vec![
        HomInstance {
            id: "line-to-circle",
            map: SpaceMap::WrapToCircle,
            src: hom_line(),
            tgt: hom_circle(),
            obs_states: line_grid.clone(),
            law_starts: vec![State::Real(0.3), State::Real(1.7), State::Real(-0.6)],
        },
        HomInstance {
            id: "line-to-unit-interval",
            map: SpaceMap::FoldUnit,
            src: hom_line(),
            tgt: hom_unit_interval(),
            obs_states: line_grid,
            law_starts: vec![State::Real(0.3), State::Real(1.7), State::Real(-0.6)],
        },
        HomInstance {
            id: "circle-to-half-interval",
            map: SpaceMap::AngleToArc,
            src: hom_circle(),
            tgt: hom_half_interval(),
            obs_states: circle_grid,
            law_starts: vec![State::Real(0.9), State::Real(-2.0)],
        },
        HomInstance {
            id: "unit-interval-to-half-interval",
            map: SpaceMap::FoldHalf,
            src: hom_unit_interval(),
            tgt: hom_half_interval(),
            obs_states: unit_grid,
            law_starts: vec![State::Real(0.3), State::Real(0.85)],
        },
    ]
}

/// A continuous map that is *not* a morphism: doubling on the
/// origin-observing Brownian line preserves the observation but scales
/// the variance.
pub fn broken_hom() -> HomInstance {
    let bm = model(ProcessKind::BrownianMotion, ObsKind::Point(0.0), 2.0, 0.01);
    HomInstance {
        id: "broken-doubling",
        map: SpaceMap::Scale { c: 2.0 },
        src: bm.clone(),
        tgt: bm,
        obs_states: real_states(-3.0, 3.0, 25),
        law_starts: vec![State::Real(0.5), State::Real(-1.2)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Z_CRIT;

    #[test]
    fn gallery_is_complete_and_distinct() {
        let g = gallery();
        assert_eq!(g.len(), 13);
        for (i, e) in g.iter().enumerate() {
            for f in &g[i + 1..] {
                assert_ne!(e.id, f.id);
            }
            assert!(e.states.len() >= 19, "{}", e.id);
        }
        assert!(entry_by_id("fork").is_some());
        assert!(entry_by_id("nope").is_none());
    }

    #[test]
    fn deterministic_entries_check_exactly() {
        let opts = GalleryOpts::default();
        for id in ["drift-point", "drift-integers", "fork"] {
            let e = entry_by_id(id).unwrap();
            let r = e.check(&opts).unwrap();
            assert!(r.init1_ok && r.obs_commute_ok, "{id}");
            if let Some(law) = &r.law {
                assert!(law.checks.iter().all(|c| c.exact), "{id}");
                assert!(law.pass(), "{id}: max z {}", law.max_z());
            }
            // The fork grid deliberately contains the two roots, which no
            // observation-schedule profile can separate; everything else
            // must split.
            let allowed_failures = if id == "fork" { 1 } else { 0 };
            assert!(
                r.separation.failures.len() <= allowed_failures,
                "{id}: {:?}",
                r.separation.failures
            );
        }
    }

    #[test]
    fn profiles_are_class_invariants() {
        // Related states have identical profiles; the separator values are
        // genuine functions of the relation class.
        for id in ["bm-point", "bm-integers", "bm-interval", "absorbed-two-barrier"] {
            let e = entry_by_id(id).unwrap();
            let (related, _) = bisim::split_pairs(&e.witness, &e.states).unwrap();
            assert!(!related.is_empty(), "{id}");
            for (x, y) in &related {
                let px = e.profile(x).unwrap();
                let py = e.profile(y).unwrap();
                for (a, b) in px.iter().zip(&py) {
                    assert!((a - b).abs() < 1e-12, "{id}: {x:?} vs {y:?}");
                }
            }
        }
    }

    #[test]
    fn diagonal_profiles_separate_everything() {
        for id in ["drifted-point", "drifted-interval", "absorbed-half-line", "absorbed-marked-quarter"]
        {
            let e = entry_by_id(id).unwrap();
            let r = e.check(&GalleryOpts::default()).unwrap();
            assert_eq!(r.n_related, 0, "{id}");
            assert!(r.separation.failures.is_empty(), "{id}: {:?}", r.separation.failures);
        }
    }

    #[test]
    fn naive_relation_passes_kernels_but_fails_hitting() {
        let r = naive_counterexample(20_000, 9).unwrap();
        assert!(r.kernel_violation.is_none());
        assert!((r.p_x - 0.3173105078629141).abs() < 1e-12);
        assert!((r.p_y - 0.045500263896358).abs() < 1e-9);
        assert!(r.mc_x.z_against(r.p_x) < Z_CRIT, "{:?}", r.mc_x);
        assert!(r.mc_y.z_against(r.p_y) < Z_CRIT, "{:?}", r.mc_y);
        assert!(r.refuted());
    }

    #[test]
    fn fork_roots_agree_on_observations_but_not_kernels() {
        let r = fork_roots_demo().unwrap();
        assert!(r.obs_laws_equal);
        assert_eq!(r.mass_x, 0.5);
        assert_eq!(r.mass_y, 0.0);
        assert!(r.demonstrates_gap());
    }

    #[test]
    fn hom_catalog_obs_commutes_exactly() {
        // The statistical halves run in the integration suite; observation
        // commutation is exact and cheap.
        for h in hom_catalog() {
            for s in &h.obs_states {
                let (a, b) = (h.src.obs_of(s), h.tgt.obs_of(&h.map.apply(s)));
                assert_eq!(a, b, "{}: {s:?}", h.id);
            }
        }
        let b = broken_hom();
        for s in &b.obs_states {
            assert_eq!(b.src.obs_of(s), b.tgt.obs_of(&b.map.apply(s)));
        }
    }
}
