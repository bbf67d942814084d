//! State spaces, states (with the cemetery point `∂`), and observation maps.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;
use crate::Result;

/// Behaviour of an interval endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Hitting the endpoint kills the process (moves it to `∂`).
    Absorbing,
    /// The process reflects off the endpoint.
    Reflecting,
    /// Open end: the endpoint is not part of the space (e.g. `[0, ∞)` seen
    /// as an interval with an infinite open end).
    Open,
}

/// A state space. Every space is implicitly extended with the cemetery
/// point `∂` (one-point compactification); `∂` is distinct from every
/// interior point and is represented by [`State::Dead`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpace {
    /// The real line.
    RealLine,
    /// A real interval with the given endpoint behaviour.
    Interval { lo: f64, hi: f64, boundary: Boundary },
    /// A circle of the given radius; states are angles in `(−π, π]`.
    Circle { radius: f64 },
    /// A finite set `{0, …, n−1}`.
    FiniteSet { n: usize },
    /// `{0, …, n−1} × [0, 1)` — a finite set with a clock coordinate,
    /// housing embedded discrete-time processes.
    Product { n: usize },
    /// The fork geometry: a root `(0,1)`, two upper branches
    /// `(0, end] × {2,3}`, a lower stem `[0, fork] × {4}`, and two lower
    /// branches `(fork, end] × {5,6}`. Positions advance at speed 1.
    Fork { fork_pos: f64, end_pos: f64 },
}

impl StateSpace {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpace::RealLine => Ok(()),
            StateSpace::Interval { lo, hi, .. } => {
                if lo < hi {
                    Ok(())
                } else {
                    Err(Error::validation("interval needs lo < hi"))
                }
            }
            StateSpace::Circle { radius } => {
                if radius > 0.0 {
                    Ok(())
                } else {
                    Err(Error::validation("circle needs radius > 0"))
                }
            }
            StateSpace::FiniteSet { n } | StateSpace::Product { n } => {
                if n >= 1 {
                    Ok(())
                } else {
                    Err(Error::validation("finite set needs n >= 1"))
                }
            }
            StateSpace::Fork { fork_pos, end_pos } => {
                if fork_pos > 0.0 && end_pos > fork_pos {
                    Ok(())
                } else {
                    Err(Error::validation("fork needs 0 < fork_pos < end_pos"))
                }
            }
        }
    }

    /// Does `s` belong to this space (or is it `∂`, which belongs to every
    /// extended space)?
    pub fn contains(&self, s: &State) -> bool {
        match (self, s) {
            (_, State::Dead) => true,
            (StateSpace::RealLine, State::Real(x)) => x.is_finite(),
            (StateSpace::Interval { lo, hi, .. }, State::Real(x)) => *x >= *lo && *x <= *hi,
            (StateSpace::Circle { .. }, State::Real(th)) => {
                *th > -math::PI - 1e-12 && *th <= math::PI + 1e-12
            }
            (StateSpace::FiniteSet { n }, State::Index(i)) => i < n,
            (StateSpace::Product { n }, State::Timed { x, s }) => x < n && *s >= 0.0 && *s < 1.0,
            (StateSpace::Fork { fork_pos, end_pos }, State::Branch { pos, branch }) => {
                match branch {
                    1 => *pos == 0.0,
                    2 | 3 => *pos > 0.0 && *pos <= *end_pos,
                    4 => *pos >= 0.0 && *pos <= *fork_pos,
                    5 | 6 => *pos > *fork_pos && *pos <= *end_pos,
                    _ => false,
                }
            }
            _ => false,
        }
    }
}

/// A point of a state space, or the cemetery `∂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    /// A real coordinate (line, interval, or circle angle in `(−π, π]`).
    Real(f64),
    /// An element of a finite set.
    Index(usize),
    /// A point of a product space: finite part plus clock `s ∈ [0, 1)`.
    Timed { x: usize, s: f64 },
    /// A point of the fork: position along a branch, branch id in `1..=6`.
    Branch { pos: f64, branch: u8 },
    /// The cemetery point `∂`.
    Dead,
}

impl State {
    pub fn is_dead(&self) -> bool {
        matches!(self, State::Dead)
    }

    /// The real coordinate, if this is a real-valued state.
    pub fn real(&self) -> Option<f64> {
        match self {
            State::Real(x) => Some(*x),
            _ => None,
        }
    }
}

/// Observation value: a bit-vector over the atomic propositions, or the
/// distinguished symbol for the cemetery (`obs(∂) = ∂`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Obs {
    /// Bitmask over `ap_names` (bit `i` set ⟺ proposition `i` holds).
    Bits(u32),
    /// The cemetery observation.
    Dead,
}

/// How states map to atomic-proposition bit-vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum ObsKind {
    /// No atomic propositions: every live state observes `()`.
    None,
    /// One proposition: `x = c` exactly.
    Point(f64),
    /// One proposition per listed point: `x = c_i`.
    Points(Vec<f64>),
    /// A single proposition for the whole set: `x ∈ {c_0, …}`.
    PointSet(Vec<f64>),
    /// One proposition: `x ∈ ℤ`.
    Integers,
    /// One proposition: `lo ≤ x ≤ hi`.
    Interval(f64, f64),
    /// Per-state bitmasks for finite and product spaces (indexed by the
    /// finite part).
    FiniteLabels(Vec<u32>),
    /// The fork observations: `P` at the end of branches 2/5, `Q` at the end
    /// of branches 3/6, nothing elsewhere.
    ForkTips,
}

/// An observation map: proposition names plus the evaluation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMap {
    pub ap_names: Vec<String>,
    pub kind: ObsKind,
}

impl ObservationMap {
    pub fn new(ap_names: Vec<String>, kind: ObsKind) -> Self {
        ObservationMap { ap_names, kind }
    }

    /// Build the map with default proposition names.
    pub fn from_kind(kind: ObsKind) -> Self {
        use alloc::string::ToString;
        let ap_names: Vec<String> = match &kind {
            ObsKind::None => Vec::new(),
            ObsKind::Point(_)
            | ObsKind::PointSet(_)
            | ObsKind::Integers
            | ObsKind::Interval(..) => {
                alloc::vec!["P".to_string()]
            }
            ObsKind::Points(ps) => (0..ps.len()).map(|i| alloc::format!("P{i}")).collect(),
            ObsKind::FiniteLabels(rows) => {
                let bits = rows.iter().fold(0u32, |acc, r| acc | r);
                let width = 32 - bits.leading_zeros();
                (0..width.max(1)).map(|i| alloc::format!("P{i}")).collect()
            }
            ObsKind::ForkTips => alloc::vec!["P".to_string(), "Q".to_string()],
        };
        ObservationMap { ap_names, kind }
    }

    /// Evaluate the observation of a state. Total: `∂ ↦ ∂`, and every live
    /// state yields a bit-vector.
    pub fn eval(&self, space: &StateSpace, s: &State) -> Obs {
        match s {
            State::Dead => Obs::Dead,
            State::Real(x) => Obs::Bits(match &self.kind {
                ObsKind::None => 0,
                ObsKind::Point(c) => (*x == *c) as u32,
                ObsKind::Points(ps) => {
                    let mut bits = 0u32;
                    for (i, c) in ps.iter().enumerate() {
                        if *x == *c {
                            bits |= 1 << i;
                        }
                    }
                    bits
                }
                ObsKind::PointSet(ps) => ps.iter().any(|c| *x == *c) as u32,
                ObsKind::Integers => (*x == math::floor(*x)) as u32,
                ObsKind::Interval(lo, hi) => (*x >= *lo && *x <= *hi) as u32,
                ObsKind::FiniteLabels(_) | ObsKind::ForkTips => 0,
            }),
            State::Index(i) => Obs::Bits(match &self.kind {
                ObsKind::FiniteLabels(rows) => rows.get(*i).copied().unwrap_or(0),
                ObsKind::None => 0,
                _ => 0,
            }),
            State::Timed { x, .. } => Obs::Bits(match &self.kind {
                // obs(x, s) depends only on the finite part, never on s.
                ObsKind::FiniteLabels(rows) => rows.get(*x).copied().unwrap_or(0),
                ObsKind::None => 0,
                _ => 0,
            }),
            State::Branch { pos, branch } => Obs::Bits(match (&self.kind, space) {
                (ObsKind::ForkTips, StateSpace::Fork { end_pos, .. }) => {
                    if *pos == *end_pos {
                        match branch {
                            2 | 5 => 0b01, // P
                            3 | 6 => 0b10, // Q
                            _ => 0,
                        }
                    } else {
                        0
                    }
                }
                _ => 0,
            }),
        }
    }
}

/// Wrap an angle into the circle's canonical range `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * math::PI;
    let mut t = theta - two_pi * math::round(theta / two_pi);
    // round() ties can land us on −π; normalise to the (−π, π] convention.
    if t <= -math::PI {
        t += two_pi;
    }
    t
}
