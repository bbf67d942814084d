//! Process models: a dynamics kind, an observation map, and the sampling
//! grid on which trajectories are drawn.

use alloc::format;

use crate::error::Error;
use crate::lmp::FiniteLmp;
use crate::space::{Boundary, ObsKind, ObservationMap, State, StateSpace};
use crate::Result;

/// The dynamics of a process.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessKind {
    /// Standard Brownian motion on the line.
    BrownianMotion,
    /// Deterministic uniform motion `x ↦ x + at` on the line (`a ≠ 0`).
    Drift { a: f64 },
    /// Brownian motion with drift `a ≠ 0` on the line.
    DriftedBm { a: f64 },
    /// Brownian motion on `(lo, hi)` killed at the endpoints; `hi = ∞`
    /// makes the upper end barrier-free.
    AbsorbedBm { lo: f64, hi: f64 },
    /// Brownian motion reflected into `[lo, hi]`.
    ReflectedBm { lo: f64, hi: f64 },
    /// Brownian motion on a circle of circumference `2π·radius`; states are
    /// angles in `(−π, π]` and the angle diffuses as `W_t / radius`.
    CircleBm { radius: f64 },
    /// Two speed-1 trees: a root that immediately forks in two, and a stem
    /// that forks at `fork_pos`; both fork choices are fair coin flips and
    /// the branch tips at `end_pos` are absorbing.
    Fork { fork_pos: f64, end_pos: f64 },
    /// A finite LMP embedded on `X × [0, 1)`: the clock advances at speed 1
    /// and the chain jumps per `τ` each time it crosses an integer.
    Embedded { lmp: FiniteLmp },
}

/// A process model ready for sampling and checking.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    pub kind: ProcessKind,
    pub obs: ObservationMap,
    /// Time horizon every sampled trajectory covers.
    pub horizon: f64,
    /// Grid step for sampled trajectories; at most `horizon / 100`.
    pub grid_step: f64,
}

impl ProcessModel {
    pub fn new(
        kind: ProcessKind,
        obs: ObservationMap,
        horizon: f64,
        grid_step: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::validation("horizon must be positive and finite"));
        }
        if !(grid_step > 0.0) || grid_step > horizon / 100.0 {
            return Err(Error::validation(format!(
                "grid_step must be in (0, horizon/100] = (0, {}]",
                horizon / 100.0
            )));
        }
        match &kind {
            ProcessKind::Drift { a } | ProcessKind::DriftedBm { a } => {
                if *a == 0.0 || !a.is_finite() {
                    return Err(Error::validation("drift must be nonzero and finite"));
                }
            }
            ProcessKind::AbsorbedBm { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::validation("absorbing barriers need lo < hi"));
                }
            }
            ProcessKind::ReflectedBm { lo, hi } => {
                if !(lo < hi) || !hi.is_finite() || !lo.is_finite() {
                    return Err(Error::validation("reflecting barriers need finite lo < hi"));
                }
            }
            ProcessKind::CircleBm { radius } => {
                if !(radius > &0.0) || !radius.is_finite() {
                    return Err(Error::validation("circle radius must be positive"));
                }
            }
            ProcessKind::Fork { fork_pos, end_pos } => {
                if !(fork_pos > &0.0) || !(end_pos > fork_pos) {
                    return Err(Error::validation("fork needs 0 < fork_pos < end_pos"));
                }
            }
            ProcessKind::BrownianMotion | ProcessKind::Embedded { .. } => {}
        }
        let model = ProcessModel { kind, obs, horizon, grid_step };
        model.space().validate()?;
        model.check_obs_compatibility()?;
        Ok(model)
    }

    /// Convenience constructor for an embedded LMP: the observation map is
    /// the LMP's own labels and does not depend on the clock.
    pub fn embedded(lmp: FiniteLmp, horizon: f64, grid_step: f64) -> Result<Self> {
        let obs = ObservationMap::from_kind(ObsKind::FiniteLabels(lmp.labels().to_vec()));
        ProcessModel::new(ProcessKind::Embedded { lmp }, obs, horizon, grid_step)
    }

    /// The (live part of the) state space this process moves in.
    pub fn space(&self) -> StateSpace {
        match &self.kind {
            ProcessKind::BrownianMotion
            | ProcessKind::Drift { .. }
            | ProcessKind::DriftedBm { .. } => StateSpace::RealLine,
            ProcessKind::AbsorbedBm { lo, hi } => {
                StateSpace::Interval { lo: *lo, hi: *hi, boundary: Boundary::Absorbing }
            }
            ProcessKind::ReflectedBm { lo, hi } => {
                StateSpace::Interval { lo: *lo, hi: *hi, boundary: Boundary::Reflecting }
            }
            ProcessKind::CircleBm { radius } => StateSpace::Circle { radius: *radius },
            ProcessKind::Fork { fork_pos, end_pos } => {
                StateSpace::Fork { fork_pos: *fork_pos, end_pos: *end_pos }
            }
            ProcessKind::Embedded { lmp } => StateSpace::Product { n: lmp.n_states() },
        }
    }

    fn check_obs_compatibility(&self) -> Result<()> {
        let ok = match (&self.kind, &self.obs.kind) {
            (ProcessKind::Fork { .. }, ObsKind::ForkTips | ObsKind::None) => true,
            (ProcessKind::Fork { .. }, _) => false,
            (ProcessKind::Embedded { lmp }, ObsKind::FiniteLabels(rows)) => {
                rows.len() == lmp.n_states()
            }
            (ProcessKind::Embedded { .. }, ObsKind::None) => true,
            (ProcessKind::Embedded { .. }, _) => false,
            (_, ObsKind::FiniteLabels(_) | ObsKind::ForkTips) => false,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation("observation map does not fit the state space"))
        }
    }

    /// Number of grid steps per trajectory (`horizon / grid_step`, rounded).
    pub fn n_steps(&self) -> usize {
        libm::round(self.horizon / self.grid_step) as usize
    }

    /// Validate a starting state: it must lie in the space, and strictly
    /// inside any absorbing barrier (starting on the barrier would be
    /// starting dead).
    pub fn check_start(&self, s: &State) -> Result<()> {
        if s.is_dead() {
            return Err(Error::domain("cannot start a trajectory at ∂"));
        }
        if !self.space().contains(s) {
            return Err(Error::domain(format!("start state {s:?} is outside the state space")));
        }
        if let ProcessKind::AbsorbedBm { lo, hi } = &self.kind {
            if let Some(x) = s.real() {
                if x <= *lo || x >= *hi {
                    return Err(Error::domain("start state must lie strictly between barriers"));
                }
            }
        }
        Ok(())
    }

    /// Observation of a state under this model's map.
    pub fn obs_of(&self, s: &State) -> crate::space::Obs {
        self.obs.eval(&self.space(), s)
    }

    /// Processes whose event probabilities are computed exactly rather than
    /// estimated: deterministic motion and the finitely-branching fork.
    pub fn exactly_evaluable(&self) -> bool {
        matches!(self.kind, ProcessKind::Drift { .. } | ProcessKind::Fork { .. })
    }
}
