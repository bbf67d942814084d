//! Sampled trajectories on a uniform time grid, with `∂`-absorption.

use alloc::vec::Vec;

use crate::space::State;

/// One sampled path of a process: values on the grid `0, Δ, 2Δ, …, nΔ`.
/// Once a path enters the cemetery it stays there, so the sample vector is
/// a live prefix followed by a (possibly empty) run of `∂`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.states.len().saturating_sub(1)) as f64
    }

    /// Value at time `t`, rounding to the nearest grid point. Returns `None`
    /// past the sampled horizon (the trajectory continues, but we did not
    /// sample it).
    pub fn value_at(&self, t: f64) -> Option<State> {
        if t < 0.0 {
            return None;
        }
        let idx = libm::round(t / self.dt) as usize;
        self.states.get(idx).copied()
    }

    /// Index of the first `∂` entry, if the path died within the horizon.
    pub fn death_index(&self) -> Option<usize> {
        self.states.iter().position(|s| s.is_dead())
    }

    /// Check the `∂`-suffix invariant: dead stays dead.
    pub fn absorption_ok(&self) -> bool {
        let mut dead = false;
        for s in &self.states {
            if dead && !s.is_dead() {
                return false;
            }
            dead = dead || s.is_dead();
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn value_at_grid_and_past_horizon() {
        let tr = Trajectory {
            dt: 0.5,
            states: vec![State::Real(0.0), State::Real(1.0), State::Real(2.0)],
        };
        assert_eq!(tr.horizon(), 1.0);
        assert_eq!(tr.value_at(0.0), Some(State::Real(0.0)));
        assert_eq!(tr.value_at(0.5), Some(State::Real(1.0)));
        // 0.74 rounds to the grid point at 0.5.
        assert_eq!(tr.value_at(0.74), Some(State::Real(1.0)));
        assert_eq!(tr.value_at(1.0), Some(State::Real(2.0)));
        assert_eq!(tr.value_at(1.6), None);
        assert_eq!(tr.value_at(-0.1), None);
    }

    #[test]
    fn absorption_invariant() {
        let good = Trajectory {
            dt: 1.0,
            states: vec![State::Real(1.0), State::Dead, State::Dead],
        };
        assert!(good.absorption_ok());
        assert_eq!(good.death_index(), Some(1));
        let bad = Trajectory {
            dt: 1.0,
            states: vec![State::Real(1.0), State::Dead, State::Real(0.0)],
        };
        assert!(!bad.absorption_ok());
    }
}
