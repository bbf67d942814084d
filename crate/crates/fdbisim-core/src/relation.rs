//! Relation witnesses: finite, symbolic descriptions of candidate
//! bisimulations that the checkers can both *decide* (is this pair
//! related?) and *traverse* (map a state to related states).
//!
//! A witness carries an invariant feature map — states are related exactly
//! when their features agree — and optionally a set of generating
//! symmetries whose orbits realise the classes constructively. Generators
//! are what the trajectory-law checks exercise; the feature map is what
//! grid enumeration uses.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;
use crate::partition::Partition;
use crate::space::{wrap_angle, State};
use crate::Result;

/// Features (and clock coordinates) compare equal within this tolerance.
pub const FEATURE_TOL: f64 = 1e-12;

/// A measurable self-map of the state space asserted to preserve the
/// process law and the observations. Partial maps return `None` outside
/// their domain; every domain here is forward-invariant for the process
/// the map is used with, so mapped trajectories stay comparable.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryMap {
    Identity,
    /// `x ↦ 2c − x`.
    ReflectAbout { c: f64 },
    /// `x ↦ x + k`.
    Translate { k: f64 },
    /// `x ↦ x + k` restricted to the half line `x > 0` (or `x < 0`); with
    /// the matching drift sign the half line is forward-invariant and
    /// `k` points inward.
    TranslateHalfLine { k: f64, positive: bool },
    /// Circle reflection `θ ↦ −θ`.
    NegateAngle,
    /// Cross-tree glue on the fork: branches 2↔5 and 3↔6 at equal
    /// positions, defined past the lower fork where both trees run.
    ForkGlue { fork_pos: f64 },
}

impl SymmetryMap {
    /// Apply the map; `None` means the state is outside the domain.
    /// The cemetery is fixed by every symmetry.
    pub fn apply(&self, s: &State) -> Option<State> {
        if s.is_dead() {
            return Some(State::Dead);
        }
        match (self, s) {
            (SymmetryMap::Identity, s) => Some(*s),
            (SymmetryMap::ReflectAbout { c }, State::Real(x)) => Some(State::Real(2.0 * c - x)),
            (SymmetryMap::Translate { k }, State::Real(x)) => Some(State::Real(x + k)),
            (SymmetryMap::TranslateHalfLine { k, positive }, State::Real(x)) => {
                let inside = if *positive { *x > 0.0 } else { *x < 0.0 };
                if inside {
                    Some(State::Real(x + k))
                } else {
                    None
                }
            }
            (SymmetryMap::NegateAngle, State::Real(theta)) => Some(State::Real(wrap_angle(-theta))),
            (SymmetryMap::ForkGlue { fork_pos }, State::Branch { pos, branch }) => {
                if *pos <= *fork_pos {
                    return None;
                }
                let swapped = match branch {
                    2 => 5,
                    5 => 2,
                    3 => 6,
                    6 => 3,
                    _ => return None,
                };
                Some(State::Branch { pos: *pos, branch: swapped })
            }
            _ => None,
        }
    }

    /// Compose two full-line isometries (`self ∘ other`), when the result
    /// is again one. Reflections and translations close under composition;
    /// partial or non-line maps only compose with the identity.
    pub fn compose(&self, other: &SymmetryMap) -> Option<SymmetryMap> {
        use SymmetryMap::*;
        Some(match (self, other) {
            (Identity, g) | (g, Identity) => g.clone(),
            (Translate { k: k1 }, Translate { k: k2 }) => Translate { k: k1 + k2 },
            // 2c − (x + k) = 2(c − k/2) − x
            (ReflectAbout { c }, Translate { k }) => ReflectAbout { c: c - k / 2.0 },
            // (2c − x) + k = 2(c + k/2) − x
            (Translate { k }, ReflectAbout { c }) => ReflectAbout { c: c + k / 2.0 },
            // 2c₁ − (2c₂ − x) = x + 2(c₁ − c₂)
            (ReflectAbout { c: c1 }, ReflectAbout { c: c2 }) => Translate { k: 2.0 * (c1 - c2) },
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        use alloc::format;
        match self {
            SymmetryMap::Identity => String::from("identity"),
            SymmetryMap::ReflectAbout { c } => format!("reflect about {c}"),
            SymmetryMap::Translate { k } => format!("translate by {k}"),
            SymmetryMap::TranslateHalfLine { k, positive } => {
                format!("translate by {k} on the {} half line", if *positive { "positive" } else { "negative" })
            }
            SymmetryMap::NegateAngle => String::from("negate angle"),
            SymmetryMap::ForkGlue { .. } => String::from("cross-tree glue"),
        }
    }
}

/// The invariant deciding relatedness: states are related exactly when
/// their feature vectors agree (within [`FEATURE_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// The identity relation: the coordinate itself.
    Coordinate,
    /// `|x|` — reflection classes about 0.
    Abs,
    /// `|x − c|` — reflection classes about `c`.
    AbsAbout { c: f64 },
    /// `x mod 1` — integer-translation classes (compared circularly).
    Frac,
    /// Distance to the nearest integer — translation-or-mirror classes.
    DistToInt,
    /// Fold into `[lo, hi]` by reflection at both ends — the fibre classes
    /// of the period-`2(hi−lo)` tent map.
    Fold { lo: f64, hi: f64 },
    /// One class for the open half line (`x > 0`, or `x < 0` when
    /// `positive` is false), singletons elsewhere.
    HalfLineClass { positive: bool },
    /// `{0}` vs everything else, singleton zero.
    NonzeroClass,
    /// Fork classes: position plus branch with the cross-tree branches
    /// identified (5 ≡ 2, 6 ≡ 3).
    ForkClass,
    /// Finite-state block membership.
    BlockOf(Partition),
}

impl FeatureMap {
    /// Feature vector of a live state (two slots; unused slots are 0).
    pub fn eval(&self, s: &State) -> Result<[f64; 2]> {
        match (self, s) {
            (FeatureMap::Coordinate, State::Real(x)) => Ok([*x, 0.0]),
            (FeatureMap::Abs, State::Real(x)) => Ok([math::abs(*x), 0.0]),
            (FeatureMap::AbsAbout { c }, State::Real(x)) => Ok([math::abs(x - c), 0.0]),
            (FeatureMap::Frac, State::Real(x)) => Ok([math::frac(*x), 0.0]),
            (FeatureMap::DistToInt, State::Real(x)) => Ok([math::dist_to_int(*x), 0.0]),
            (FeatureMap::Fold { lo, hi }, State::Real(x)) => Ok([math::fold(*lo, *hi, *x), 0.0]),
            (FeatureMap::HalfLineClass { positive }, State::Real(x)) => {
                let inside = if *positive { *x > 0.0 } else { *x < 0.0 };
                Ok(if inside { [1.0, 0.0] } else { [0.0, *x] })
            }
            (FeatureMap::NonzeroClass, State::Real(x)) => {
                Ok(if *x == 0.0 { [0.0, 0.0] } else { [1.0, 0.0] })
            }
            (FeatureMap::ForkClass, State::Branch { pos, branch }) => {
                let canon = match branch {
                    5 => 2,
                    6 => 3,
                    b => *b,
                };
                Ok([*pos, canon as f64])
            }
            (FeatureMap::BlockOf(p), State::Index(i)) => Ok([p.block_of(*i) as f64, 0.0]),
            (FeatureMap::BlockOf(p), State::Timed { x, .. }) => Ok([p.block_of(*x) as f64, 0.0]),
            _ => Err(Error::domain("feature map does not apply to this state kind")),
        }
    }

    /// Compare two feature vectors. `Frac` uses the circular metric so the
    /// classes are closed at the wrap-around point.
    pub fn feature_eq(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        match self {
            FeatureMap::Frac => {
                let d = math::abs(a[0] - b[0]);
                d <= FEATURE_TOL || d >= 1.0 - FEATURE_TOL
            }
            _ => {
                math::abs(a[0] - b[0]) <= FEATURE_TOL && math::abs(a[1] - b[1]) <= FEATURE_TOL
            }
        }
    }
}

/// A symmetry-group witness: generators plus the class invariant. The
/// generator list may be empty when the relation has no useful continuous
/// symmetries (the invariant alone then carries the claim).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGroup {
    pub generators: Vec<SymmetryMap>,
    pub invariant: FeatureMap,
}

/// Per-clock partitions of an embedded process's base states: partition
/// `parts[i]` applies for clock values in `[breaks[i], breaks[i+1])`
/// (with `breaks[0] = 0` and an implicit final break at 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TimedPartition {
    breaks: Vec<f64>,
    parts: Vec<Partition>,
}

impl TimedPartition {
    pub fn uniform(p: Partition) -> Self {
        TimedPartition { breaks: alloc::vec![0.0], parts: alloc::vec![p] }
    }

    pub fn new(breaks: Vec<f64>, parts: Vec<Partition>) -> Result<Self> {
        if breaks.len() != parts.len() || breaks.is_empty() {
            return Err(Error::validation("need one partition per clock segment"));
        }
        if breaks[0] != 0.0
            || breaks.windows(2).any(|w| w[0] >= w[1])
            || *breaks.last().unwrap() >= 1.0
        {
            return Err(Error::validation("breaks must be 0 = b0 < b1 < … < 1"));
        }
        let n = parts[0].len();
        if parts.iter().any(|p| p.len() != n) {
            return Err(Error::validation("all segment partitions need the same state count"));
        }
        Ok(TimedPartition { breaks, parts })
    }

    pub fn n_base_states(&self) -> usize {
        self.parts[0].len()
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, &Partition)> {
        self.breaks.iter().copied().zip(self.parts.iter())
    }

    /// The partition in force at clock value `s ∈ [0, 1)`.
    pub fn at(&self, s: f64) -> &Partition {
        let i = self.breaks.partition_point(|b| *b <= s);
        &self.parts[i - 1]
    }

    /// Join of all segment partitions: relates `x` and `y` when they are
    /// related at *some* clock value (the projection to the base).
    pub fn join_all(&self) -> Partition {
        let mut acc = self.parts[0].clone();
        for p in &self.parts[1..] {
            acc = acc.join(p);
        }
        acc
    }

    /// Is this witness the same partition at every clock value?
    pub fn is_uniform(&self) -> bool {
        self.parts.iter().all(|p| *p == self.parts[0])
    }
}

/// A candidate-relation witness.
#[derive(Debug, Clone, PartialEq)]
pub enum RelationWitness {
    /// A partition of finite-state indices (discrete-time processes).
    FinitePartition(Partition),
    /// Feature classes with optional generating symmetries (continuous
    /// state spaces).
    Symmetry(SymmetryGroup),
    /// Clock-indexed partitions of an embedded process.
    Timed(TimedPartition),
}

impl RelationWitness {
    /// Are `a` and `b` related? The cemetery relates only to itself.
    pub fn related(&self, a: &State, b: &State) -> Result<bool> {
        match (a.is_dead(), b.is_dead()) {
            (true, true) => return Ok(true),
            (true, false) | (false, true) => return Ok(false),
            _ => {}
        }
        match self {
            RelationWitness::FinitePartition(p) => match (a, b) {
                (State::Index(i), State::Index(j)) => Ok(p.same_block(*i, *j)),
                (State::Timed { x, s }, State::Timed { x: y, s: sy }) => {
                    Ok(math::abs(s - sy) <= FEATURE_TOL && p.same_block(*x, *y))
                }
                _ => Err(Error::domain("partition witnesses apply to finite-state processes")),
            },
            RelationWitness::Symmetry(g) => {
                let fa = g.invariant.eval(a)?;
                let fb = g.invariant.eval(b)?;
                Ok(g.invariant.feature_eq(fa, fb))
            }
            RelationWitness::Timed(tp) => match (a, b) {
                (State::Timed { x, s }, State::Timed { x: y, s: sy }) => {
                    Ok(math::abs(s - sy) <= FEATURE_TOL && tp.at(*s).same_block(*x, *y))
                }
                _ => Err(Error::domain("timed witnesses apply to embedded processes")),
            },
        }
    }

    /// All states of `grid` related to `a` (used by grid separation scans).
    pub fn related_in<'g>(&self, a: &State, grid: &'g [State]) -> Result<Vec<&'g State>> {
        let mut out = Vec::new();
        for s in grid {
            if self.related(a, s)? {
                out.push(s);
            }
        }
        Ok(out)
    }
}

/// Check that every generator preserves the invariant on the sample states
/// in its domain — the cheap consistency between the constructive and the
/// decision side of a witness.
pub fn check_generators_preserve_invariant(
    group: &SymmetryGroup,
    samples: &[State],
) -> Result<()> {
    for g in &group.generators {
        for s in samples {
            if let Some(t) = g.apply(s) {
                if t.is_dead() != s.is_dead() {
                    continue;
                }
                let fs = group.invariant.eval(s)?;
                let ft = group.invariant.eval(&t)?;
                if !group.invariant.feature_eq(fs, ft) {
                    return Err(Error::validation(alloc::format!(
                        "generator '{}' moves {s:?} out of its class",
                        g.name()
                    )));
                }
            }
        }
    }
    Ok(())
}
