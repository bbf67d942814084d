//! Monte Carlo samplers and event estimators.
//!
//! Design rules:
//!
//! * increments are exact Gaussians — no Euler error on the line, and
//!   reflected/circle values are exact folds/wraps of a free path;
//! * barrier hits between grid points are recovered with Brownian-bridge
//!   crossing probabilities, and crossing times are de-biased (linear
//!   interpolation for straddles, midpoint for bridge hits);
//! * deterministic dynamics (uniform drift, the fork) are never sampled:
//!   their finitely many outcomes are enumerated and weighted exactly;
//! * work is split into fixed-size chunks with per-chunk derived seeds, so
//!   results are reproducible and independent of how chunks are merged.

use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::lmp::FiniteLmp;
use crate::math;
use crate::process::{ProcessKind, ProcessModel};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::space::{wrap_angle, Obs, State};
use crate::stats::{CkSample, Estimate, RunningMoments};
use crate::traj::Trajectory;
use crate::Result;

/// Paths per seeding chunk. Every estimator derives the chunk seed from
/// `(seed, chunk index)`, so totals are invariant under re-chunking.
pub const CHUNK: u64 = 4096;

/// Bridge survival factors with exponent beyond this are treated as 1
/// (the crossing probability is below 4e-18).
const BRIDGE_EXP_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy)]
pub struct McOpts {
    pub n_paths: u64,
    pub seed: u64,
}

/// A measurable set of real values, used in value-at-time events.
#[derive(Debug, Clone, PartialEq)]
pub enum RealSet {
    Point(f64),
    /// Closed interval; infinite endpoints give half-lines.
    Interval(f64, f64),
    Integers,
}

impl RealSet {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            RealSet::Point(c) => x == *c,
            RealSet::Interval(lo, hi) => x >= *lo && x <= *hi,
            RealSet::Integers => x == math::floor(x),
        }
    }
}

/// Trajectory events whose probability the estimators compute.
#[derive(Debug, Clone, PartialEq)]
pub enum EventSpec {
    /// The path is alive at `t` with value in `set`.
    ValueAtIn { t: f64, set: RealSet },
    /// The path hits one of `barriers` by time `t` (before dying, if the
    /// process can die).
    HitBy { barriers: Vec<f64>, t: f64 },
    /// The path is dead by time `t`.
    DeadBy { t: f64 },
    /// The observation at time `t` equals `obs`.
    ObsAt { t: f64, obs: Obs },
}

impl EventSpec {
    fn latest_time(&self) -> f64 {
        match self {
            EventSpec::ValueAtIn { t, .. }
            | EventSpec::HitBy { t, .. }
            | EventSpec::DeadBy { t }
            | EventSpec::ObsAt { t, .. } => *t,
        }
    }
}

fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

// --- deterministic dynamics ------------------------------------------------

/// One outcome of a deterministic process: a weight and a fully resolved
/// path. Uniform drift has a single outcome; a fork start has two.
#[derive(Debug, Clone)]
pub struct DetOutcome {
    pub prob: f64,
    pub path: DetPath,
}

#[derive(Debug, Clone)]
pub enum DetPath {
    Line { x0: f64, a: f64 },
    Fork { p0: f64, br0: u8, choice: Option<u8>, fork_pos: f64, end_pos: f64 },
}

impl DetPath {
    /// The exact state at time `t ≥ 0`.
    pub fn state_at(&self, t: f64) -> State {
        match *self {
            DetPath::Line { x0, a } => State::Real(x0 + a * t),
            DetPath::Fork { p0, br0, choice, fork_pos, end_pos } => {
                let cap = |p: f64| if p > end_pos { end_pos } else { p };
                match br0 {
                    1 => {
                        if t == 0.0 {
                            State::Branch { pos: 0.0, branch: 1 }
                        } else {
                            State::Branch { pos: cap(t), branch: choice.expect("root outcome") }
                        }
                    }
                    4 => {
                        let pos = p0 + t;
                        if pos <= fork_pos {
                            State::Branch { pos, branch: 4 }
                        } else {
                            State::Branch {
                                pos: cap(pos),
                                branch: choice.expect("stem outcome"),
                            }
                        }
                    }
                    br => State::Branch { pos: cap(p0 + t), branch: br },
                }
            }
        }
    }
}

/// Enumerate the outcomes of a deterministic process from `start`.
pub fn det_outcomes(model: &ProcessModel, start: &State) -> Result<Vec<DetOutcome>> {
    model.check_start(start)?;
    match (&model.kind, start) {
        (ProcessKind::Drift { a }, State::Real(x0)) => {
            Ok(alloc::vec![DetOutcome { prob: 1.0, path: DetPath::Line { x0: *x0, a: *a } }])
        }
        (ProcessKind::Fork { fork_pos, end_pos }, State::Branch { pos, branch }) => {
            let mk = |choice| DetPath::Fork {
                p0: *pos,
                br0: *branch,
                choice,
                fork_pos: *fork_pos,
                end_pos: *end_pos,
            };
            Ok(match branch {
                1 => alloc::vec![
                    DetOutcome { prob: 0.5, path: mk(Some(2)) },
                    DetOutcome { prob: 0.5, path: mk(Some(3)) },
                ],
                4 => alloc::vec![
                    DetOutcome { prob: 0.5, path: mk(Some(5)) },
                    DetOutcome { prob: 0.5, path: mk(Some(6)) },
                ],
                _ => alloc::vec![DetOutcome { prob: 1.0, path: mk(None) }],
            })
        }
        _ => Err(Error::precondition("process is not deterministic")),
    }
}

fn det_event_occurs(model: &ProcessModel, path: &DetPath, event: &EventSpec) -> Result<bool> {
    Ok(match event {
        EventSpec::ValueAtIn { t, set } => match path.state_at(*t) {
            State::Real(x) => set.contains(x),
            _ => return Err(Error::unsupported("value-at events need a real-valued process")),
        },
        EventSpec::HitBy { barriers, t } => match path {
            DetPath::Line { x0, a } => barriers.iter().any(|b| {
                let s = (b - x0) / a;
                s >= 0.0 && s <= *t
            }),
            DetPath::Fork { .. } => {
                return Err(Error::unsupported("barrier events need a real-valued process"))
            }
        },
        EventSpec::DeadBy { .. } => false,
        EventSpec::ObsAt { t, obs } => model.obs_of(&path.state_at(*t)) == *obs,
    })
}

/// Exact probability of `event` for a deterministic process.
pub fn exact_event_prob(model: &ProcessModel, start: &State, event: &EventSpec) -> Result<f64> {
    let mut p = 0.0;
    for out in det_outcomes(model, start)? {
        if det_event_occurs(model, &out.path, event)? {
            p += out.prob;
        }
    }
    Ok(p)
}

// --- diffusion walkers ------------------------------------------------------

/// First hit of any of `barriers` by a line diffusion `dx = a dt + dW`,
/// walking `steps` grid points of size `dt`. Straddled crossings are timed
/// by linear interpolation; with `bridge` set, non-straddled crossings are
/// recovered with the Brownian-bridge probability and timed at the step
/// midpoint (the bridge is drift-free given its endpoints, so the same
/// formula covers the drifted case).
fn first_hit_line(
    x0: f64,
    a: f64,
    dt: f64,
    steps: usize,
    barriers: &[f64],
    bridge: bool,
    rng: &mut Rng,
) -> Option<f64> {
    if barriers.iter().any(|&b| b == x0) {
        return Some(0.0);
    }
    let sqrt_dt = math::sqrt(dt);
    let mut x = x0;
    for i in 0..steps {
        let y = x + a * dt + sqrt_dt * normal(rng);
        let t = i as f64 * dt;
        let mut best: Option<f64> = None;
        for &b in barriers {
            let (dx, dy) = (x - b, y - b);
            let t_hit = if dx * dy <= 0.0 {
                // Straddle: cross within the step, time by interpolation.
                Some(t + dt * dx / (dx - dy))
            } else if bridge {
                let arg = 2.0 * dx * dy / dt;
                if arg < BRIDGE_EXP_CUTOFF && rng.gen::<f64>() < math::exp(-arg) {
                    Some(t + 0.5 * dt)
                } else {
                    None
                }
            } else {
                None
            };
            if let Some(h) = t_hit {
                best = Some(best.map_or(h, |cur: f64| cur.min(h)));
            }
        }
        if best.is_some() {
            return best;
        }
        x = y;
    }
    None
}

/// Fate of one absorbed-diffusion path: reached the interior target first,
/// was killed at a barrier first, or survived the whole walk.
enum AbsorbedFate {
    Reached(f64),
    Killed(f64),
    Survived(f64),
}

/// Walk Brownian motion on `(lo, hi)` killed at the ends, optionally
/// watching an interior `target`. Every boundary uses bridge-corrected
/// crossing detection; the earliest crossing in a step decides the fate.
fn absorbed_walk(
    x0: f64,
    lo: f64,
    hi: f64,
    target: Option<f64>,
    dt: f64,
    steps: usize,
    rng: &mut Rng,
) -> AbsorbedFate {
    let sqrt_dt = math::sqrt(dt);
    let mut x = x0;
    if target == Some(x0) {
        return AbsorbedFate::Reached(0.0);
    }
    for i in 0..steps {
        let y = x + sqrt_dt * normal(rng);
        let t = i as f64 * dt;
        let cross = |b: f64, rng: &mut Rng| -> Option<f64> {
            let (dx, dy) = (x - b, y - b);
            if dx * dy <= 0.0 {
                Some(t + dt * dx / (dx - dy))
            } else {
                let arg = 2.0 * dx * dy / dt;
                if arg < BRIDGE_EXP_CUTOFF && rng.gen::<f64>() < math::exp(-arg) {
                    Some(t + 0.5 * dt)
                } else {
                    None
                }
            }
        };
        let t_reach = target.and_then(|b| cross(b, rng));
        let mut t_kill = cross(lo, rng);
        if hi.is_finite() {
            if let Some(h) = cross(hi, rng) {
                t_kill = Some(t_kill.map_or(h, |cur: f64| cur.min(h)));
            }
        }
        match (t_reach, t_kill) {
            (Some(r), Some(k)) if r <= k => return AbsorbedFate::Reached(r),
            (Some(_), Some(k)) => return AbsorbedFate::Killed(k),
            (Some(r), None) => return AbsorbedFate::Reached(r),
            (None, Some(k)) => return AbsorbedFate::Killed(k),
            (None, None) => {}
        }
        x = y;
    }
    AbsorbedFate::Survived(x)
}

/// Fold a free Brownian value into `[lo, hi]` (double reflection); the
/// folded free path has exactly the law of reflected Brownian motion.
fn fold_into(lo: f64, hi: f64, w: f64) -> f64 {
    math::fold(lo, hi, w)
}

/// Sample the state of an embedded LMP at clock time `t` from `(x0, s0)`:
/// run the jump chain for `⌊t + s0⌋` steps.
fn embedded_state_at(lmp: &FiniteLmp, x0: usize, s0: f64, t: f64, rng: &mut Rng) -> State {
    let steps = math::floor(t + s0) as usize;
    let mut x = x0;
    for _ in 0..steps {
        let u = rng.gen::<f64>();
        let mut acc = 0.0;
        let mut next = None;
        for (y, &m) in lmp.row(x).iter().enumerate() {
            acc += m;
            if u < acc {
                next = Some(y);
                break;
            }
        }
        match next {
            Some(y) => x = y,
            None => return State::Dead,
        }
    }
    State::Timed { x, s: math::frac(s0 + t) }
}

// --- estimators --------------------------------------------------------------

fn chunked<T: FnMut(&mut Rng, u64)>(opts: &McOpts, mut body: T) {
    let mut done = 0u64;
    let mut chunk = 0u64;
    while done < opts.n_paths {
        let count = CHUNK.min(opts.n_paths - done);
        let mut rng = rng_from_seed(derive_seed(opts.seed, chunk));
        body(&mut rng, count);
        done += count;
        chunk += 1;
    }
}

fn indicator_estimate(opts: &McOpts, hits: u64) -> Estimate {
    let mut m = RunningMoments { count: opts.n_paths, sum: hits as f64, sumsq: hits as f64 };
    if opts.n_paths == 0 {
        m = RunningMoments::default();
    }
    Estimate::from_moments(&m)
}

/// Estimate the probability of `event` from `start`. Deterministic
/// processes are evaluated exactly (`std_err = 0`, `n_samples = 0`).
pub fn estimate_event(
    model: &ProcessModel,
    start: &State,
    event: &EventSpec,
    opts: &McOpts,
) -> Result<Estimate> {
    model.check_start(start)?;
    if event.latest_time() > model.horizon + 1e-12 {
        return Err(Error::precondition("event time beyond model horizon"));
    }
    if model.exactly_evaluable() {
        return Ok(Estimate::exact(exact_event_prob(model, start, event)?));
    }
    match (&model.kind, event) {
        // Free-line, reflected, and circle values at a fixed time are exact
        // one-shot draws; no grid, no killing.
        (ProcessKind::BrownianMotion, _)
        | (ProcessKind::DriftedBm { .. }, _)
        | (ProcessKind::ReflectedBm { .. }, _)
        | (ProcessKind::CircleBm { .. }, _) => {
            let a = match model.kind {
                ProcessKind::DriftedBm { a } => a,
                _ => 0.0,
            };
            match event {
                EventSpec::DeadBy { .. } => Ok(Estimate::exact(0.0)),
                EventSpec::ValueAtIn { t, .. } | EventSpec::ObsAt { t, .. } => {
                    let x0 = start.real().ok_or_else(|| {
                        Error::precondition("real-valued start state required")
                    })?;
                    let sqrt_t = math::sqrt(*t);
                    let mut hits = 0u64;
                    chunked(opts, |rng, count| {
                        for _ in 0..count {
                            let w = x0 + a * *t + sqrt_t * normal(rng);
                            let v = match model.kind {
                                ProcessKind::ReflectedBm { lo, hi } => fold_into(lo, hi, w),
                                ProcessKind::CircleBm { radius } => {
                                    wrap_angle(x0 + (w - x0) / radius)
                                }
                                _ => w,
                            };
                            let ok = match event {
                                EventSpec::ValueAtIn { set: s, .. } => s.contains(v),
                                EventSpec::ObsAt { obs, .. } => {
                                    model.obs_of(&State::Real(v)) == *obs
                                }
                                _ => unreachable!(),
                            };
                            if ok {
                                hits += 1;
                            }
                        }
                    });
                    Ok(indicator_estimate(opts, hits))
                }
                EventSpec::HitBy { barriers, t } => {
                    if matches!(
                        model.kind,
                        ProcessKind::ReflectedBm { .. } | ProcessKind::CircleBm { .. }
                    ) {
                        return Err(Error::unsupported(
                            "barrier hitting is implemented for free-line diffusions",
                        ));
                    }
                    estimate_hit_prob(model, start, barriers, *t, true, opts)
                }
            }
        }
        (ProcessKind::AbsorbedBm { lo, hi }, _) => {
            let x0 = start
                .real()
                .ok_or_else(|| Error::precondition("real-valued start state required"))?;
            let t = event.latest_time();
            let steps = libm::ceil(t / model.grid_step) as usize;
            let dt = t / steps as f64;
            let target = match event {
                EventSpec::HitBy { barriers, .. } => {
                    if barriers.len() != 1 {
                        return Err(Error::unsupported(
                            "absorbed processes support a single interior target",
                        ));
                    }
                    Some(barriers[0])
                }
                _ => None,
            };
            let mut hits = 0u64;
            chunked(opts, |rng, count| {
                for _ in 0..count {
                    let fate = absorbed_walk(x0, *lo, *hi, target, dt, steps, rng);
                    let ok = match event {
                        EventSpec::HitBy { .. } => matches!(fate, AbsorbedFate::Reached(_)),
                        EventSpec::DeadBy { .. } => matches!(fate, AbsorbedFate::Killed(_)),
                        EventSpec::ValueAtIn { set, .. } => match fate {
                            AbsorbedFate::Survived(x) => set.contains(x),
                            _ => false,
                        },
                        EventSpec::ObsAt { obs, .. } => {
                            let s = match fate {
                                AbsorbedFate::Survived(x) => State::Real(x),
                                AbsorbedFate::Killed(_) => State::Dead,
                                // Reaching is not a terminal event without a
                                // target; unreachable, as target is None.
                                AbsorbedFate::Reached(_) => unreachable!(),
                            };
                            model.obs_of(&s) == *obs
                        }
                    };
                    if ok {
                        hits += 1;
                    }
                }
            });
            Ok(indicator_estimate(opts, hits))
        }
        (ProcessKind::Embedded { lmp }, _) => match event {
            EventSpec::DeadBy { t } | EventSpec::ObsAt { t, .. } => {
                let (x0, s0) = match start {
                    State::Timed { x, s } => (*x, *s),
                    _ => return Err(Error::precondition("embedded start state required")),
                };
                let mut hits = 0u64;
                chunked(opts, |rng, count| {
                    for _ in 0..count {
                        let s = embedded_state_at(lmp, x0, s0, *t, rng);
                        let ok = match event {
                            EventSpec::DeadBy { .. } => s.is_dead(),
                            EventSpec::ObsAt { obs, .. } => model.obs_of(&s) == *obs,
                            _ => unreachable!(),
                        };
                        if ok {
                            hits += 1;
                        }
                    }
                });
                Ok(indicator_estimate(opts, hits))
            }
            _ => Err(Error::unsupported(
                "embedded processes support observation and death events",
            )),
        },
        (ProcessKind::Drift { .. } | ProcessKind::Fork { .. }, _) => unreachable!(),
    }
}

/// Hitting probability `ℙ^x(T_B ≤ t)` for a free-line diffusion, with the
/// bridge correction switchable so its bias contribution can be measured.
pub fn estimate_hit_prob(
    model: &ProcessModel,
    start: &State,
    barriers: &[f64],
    t: f64,
    bridge: bool,
    opts: &McOpts,
) -> Result<Estimate> {
    let (x0, a) = free_line_params(model, start)?;
    let steps = libm::ceil(t / model.grid_step) as usize;
    let dt = t / steps as f64;
    let mut hits = 0u64;
    chunked(opts, |rng, count| {
        for _ in 0..count {
            if first_hit_line(x0, a, dt, steps, barriers, bridge, rng).is_some() {
                hits += 1;
            }
        }
    });
    Ok(indicator_estimate(opts, hits))
}

/// `E^x[e^{−λ T_B}; T_B ≤ horizon]` for a free-line diffusion: the Laplace
/// transform of the first hit of any barrier in `B`, truncated at the
/// model horizon (callers pick horizons that make the tail negligible
/// against Monte Carlo error).
pub fn estimate_laplace_first_hit(
    model: &ProcessModel,
    start: &State,
    barriers: &[f64],
    lambda: f64,
    opts: &McOpts,
) -> Result<Estimate> {
    let (x0, a) = free_line_params(model, start)?;
    let steps = model.n_steps();
    let dt = model.horizon / steps as f64;
    let mut acc = RunningMoments::default();
    chunked(opts, |rng, count| {
        for _ in 0..count {
            let w = match first_hit_line(x0, a, dt, steps, barriers, true, rng) {
                Some(t_hit) => math::exp(-lambda * t_hit),
                None => 0.0,
            };
            acc.push(w);
        }
    });
    Ok(Estimate::from_moments(&acc))
}

/// `E^x[e^{−λ T_target}; T_target before killing]` for Brownian motion on
/// `(lo, hi)` absorbed at the ends, truncated at the model horizon.
pub fn estimate_laplace_reach(
    model: &ProcessModel,
    start: &State,
    target: f64,
    lambda: f64,
    opts: &McOpts,
) -> Result<Estimate> {
    model.check_start(start)?;
    let (lo, hi) = match model.kind {
        ProcessKind::AbsorbedBm { lo, hi } => (lo, hi),
        _ => return Err(Error::precondition("reach estimator needs an absorbed process")),
    };
    let x0 = start
        .real()
        .ok_or_else(|| Error::precondition("real-valued start state required"))?;
    let steps = model.n_steps();
    let dt = model.horizon / steps as f64;
    let mut acc = RunningMoments::default();
    chunked(opts, |rng, count| {
        for _ in 0..count {
            let w = match absorbed_walk(x0, lo, hi, Some(target), dt, steps, rng) {
                AbsorbedFate::Reached(t_hit) => math::exp(-lambda * t_hit),
                _ => 0.0,
            };
            acc.push(w);
        }
    });
    Ok(Estimate::from_moments(&acc))
}

/// `E^x[e^{−λ T_∂}; T_∂ ≤ horizon]` for Brownian motion on `(lo, hi)`
/// absorbed at the ends: the Laplace transform of the killing time.
pub fn estimate_laplace_death(
    model: &ProcessModel,
    start: &State,
    lambda: f64,
    opts: &McOpts,
) -> Result<Estimate> {
    model.check_start(start)?;
    let (lo, hi) = match model.kind {
        ProcessKind::AbsorbedBm { lo, hi } => (lo, hi),
        _ => return Err(Error::precondition("death estimator needs an absorbed process")),
    };
    let x0 = start
        .real()
        .ok_or_else(|| Error::precondition("real-valued start state required"))?;
    let steps = model.n_steps();
    let dt = model.horizon / steps as f64;
    let mut acc = RunningMoments::default();
    chunked(opts, |rng, count| {
        for _ in 0..count {
            let w = match absorbed_walk(x0, lo, hi, None, dt, steps, rng) {
                AbsorbedFate::Killed(t_kill) => math::exp(-lambda * t_kill),
                _ => 0.0,
            };
            acc.push(w);
        }
    });
    Ok(Estimate::from_moments(&acc))
}

fn free_line_params(model: &ProcessModel, start: &State) -> Result<(f64, f64)> {
    model.check_start(start)?;
    let a = match model.kind {
        ProcessKind::BrownianMotion => 0.0,
        ProcessKind::DriftedBm { a } => a,
        _ => return Err(Error::precondition("free-line diffusion required")),
    };
    let x0 = start
        .real()
        .ok_or_else(|| Error::precondition("real-valued start state required"))?;
    Ok((x0, a))
}

// --- trajectory and checkpoint sampling --------------------------------------

/// Sample one trajectory on the model grid.
pub fn sample_trajectory(model: &ProcessModel, start: &State, rng: &mut Rng) -> Result<Trajectory> {
    model.check_start(start)?;
    let steps = model.n_steps();
    let dt = model.horizon / steps as f64;
    let sqrt_dt = math::sqrt(dt);
    let mut states = Vec::with_capacity(steps + 1);
    match &model.kind {
        ProcessKind::BrownianMotion | ProcessKind::DriftedBm { .. } => {
            let a = match model.kind {
                ProcessKind::DriftedBm { a } => a,
                _ => 0.0,
            };
            let mut x = start.real().unwrap();
            states.push(State::Real(x));
            for _ in 0..steps {
                x += a * dt + sqrt_dt * normal(rng);
                states.push(State::Real(x));
            }
        }
        ProcessKind::Drift { .. } | ProcessKind::Fork { .. } => {
            let outs = det_outcomes(model, start)?;
            let path = if outs.len() == 1 {
                &outs[0].path
            } else if rng.gen::<f64>() < 0.5 {
                &outs[0].path
            } else {
                &outs[1].path
            };
            for i in 0..=steps {
                states.push(path.state_at(i as f64 * dt));
            }
        }
        ProcessKind::ReflectedBm { lo, hi } => {
            let mut w = start.real().unwrap();
            states.push(State::Real(w));
            for _ in 0..steps {
                w += sqrt_dt * normal(rng);
                states.push(State::Real(fold_into(*lo, *hi, w)));
            }
        }
        ProcessKind::CircleBm { radius } => {
            let theta0 = start.real().unwrap();
            let mut w = 0.0;
            states.push(State::Real(theta0));
            for _ in 0..steps {
                w += sqrt_dt * normal(rng);
                states.push(State::Real(wrap_angle(theta0 + w / radius)));
            }
        }
        ProcessKind::AbsorbedBm { lo, hi } => {
            let mut x = start.real().unwrap();
            states.push(State::Real(x));
            let mut dead = false;
            for _ in 0..steps {
                if dead {
                    states.push(State::Dead);
                    continue;
                }
                let y = x + sqrt_dt * normal(rng);
                let killed = {
                    let mut k = bridge_kills(x, y, *lo, dt, rng);
                    if !k && hi.is_finite() {
                        k = bridge_kills(*hi - x, *hi - y, 0.0, dt, rng);
                    }
                    k
                };
                if killed {
                    dead = true;
                    states.push(State::Dead);
                } else {
                    x = y;
                    states.push(State::Real(x));
                }
            }
        }
        ProcessKind::Embedded { lmp } => {
            let (x0, s0) = match start {
                State::Timed { x, s } => (*x, *s),
                _ => return Err(Error::precondition("embedded start state required")),
            };
            // Pre-walk the jump chain far enough for the horizon.
            let max_jumps = math::floor(s0 + model.horizon) as usize;
            let mut chain: Vec<Option<usize>> = Vec::with_capacity(max_jumps + 1);
            chain.push(Some(x0));
            let mut cur = Some(x0);
            for _ in 0..max_jumps {
                cur = cur.and_then(|x| {
                    let u = rng.gen::<f64>();
                    let mut accum = 0.0;
                    for (y, &m) in lmp.row(x).iter().enumerate() {
                        accum += m;
                        if u < accum {
                            return Some(y);
                        }
                    }
                    None
                });
                chain.push(cur);
            }
            for i in 0..=steps {
                let t = i as f64 * dt;
                let k = math::floor(s0 + t) as usize;
                states.push(match chain[k] {
                    Some(x) => State::Timed { x, s: math::frac(s0 + t) },
                    None => State::Dead,
                });
            }
        }
    }
    Ok(Trajectory { dt, states })
}

/// Crossing of the barrier at `lo` between consecutive values `x → y`
/// (straddle, or Brownian-bridge excursion below).
fn bridge_kills(x: f64, y: f64, lo: f64, dt: f64, rng: &mut Rng) -> bool {
    let (dx, dy) = (x - lo, y - lo);
    if dx * dy <= 0.0 {
        return true;
    }
    if dx < 0.0 {
        // Both strictly beyond the barrier (can only happen at the first
        // step of an already-outside walk; treat as crossed).
        return true;
    }
    let arg = 2.0 * dx * dy / dt;
    arg < BRIDGE_EXP_CUTOFF && rng.gen::<f64>() < math::exp(-arg)
}

/// Sample `n` checkpoint vectors of the process law from `start`,
/// optionally pushing every checkpoint state through `map` before its real
/// coordinate is recorded (dead checkpoints truncate the vector; `map`
/// must preserve `∂`). `dt` is the walk resolution for processes that can
/// die; exact-increment kinds ignore it.
pub fn sample_checkpoints(
    model: &ProcessModel,
    start: &State,
    times: &[f64],
    dt: f64,
    map: Option<&dyn Fn(&State) -> State>,
    n: u64,
    seed: u64,
) -> Result<Vec<CkSample>> {
    model.check_start(start)?;
    assert!(!times.is_empty() && times.len() <= 3);
    assert!(times.windows(2).all(|w| w[0] < w[1]) && times[0] > 0.0);
    let x0 = start
        .real()
        .ok_or_else(|| Error::precondition("checkpoint sampling needs real coordinates"))?;
    let record = |s: &State, out: &mut Vec<f64>| -> bool {
        let mapped = match map {
            Some(f) => f(s),
            None => *s,
        };
        match mapped {
            State::Dead => false,
            State::Real(v) => {
                out.push(v);
                true
            }
            _ => false,
        }
    };

    let mut samples = Vec::with_capacity(n as usize);
    let opts = McOpts { n_paths: n, seed };
    match &model.kind {
        ProcessKind::BrownianMotion
        | ProcessKind::DriftedBm { .. }
        | ProcessKind::ReflectedBm { .. }
        | ProcessKind::CircleBm { .. } => {
            let a = match model.kind {
                ProcessKind::DriftedBm { a } => a,
                _ => 0.0,
            };
            chunked(&opts, |rng, count| {
                for _ in 0..count {
                    let mut vals = Vec::with_capacity(times.len());
                    let mut w = x0;
                    let mut prev_t = 0.0;
                    for &t in times {
                        let gap = t - prev_t;
                        w += a * gap + math::sqrt(gap) * normal(rng);
                        prev_t = t;
                        let v = match model.kind {
                            ProcessKind::ReflectedBm { lo, hi } => fold_into(lo, hi, w),
                            ProcessKind::CircleBm { radius } => {
                                wrap_angle(x0 + (w - x0) / radius)
                            }
                            _ => w,
                        };
                        if !record(&State::Real(v), &mut vals) {
                            break;
                        }
                    }
                    samples.push(CkSample::live(&vals));
                }
            });
        }
        ProcessKind::AbsorbedBm { lo, hi } => {
            chunked(&opts, |rng, count| {
                for _ in 0..count {
                    let mut vals = Vec::with_capacity(times.len());
                    let mut x = x0;
                    let mut t_now = 0.0;
                    let mut dead = false;
                    for &t in times {
                        if !dead {
                            let gap = t - t_now;
                            let steps = libm::ceil(gap / dt).max(1.0) as usize;
                            let step = gap / steps as f64;
                            let sqrt_step = math::sqrt(step);
                            for _ in 0..steps {
                                let y = x + sqrt_step * normal(rng);
                                let mut killed = bridge_kills(x, y, *lo, step, rng);
                                if !killed && hi.is_finite() {
                                    killed = bridge_kills(*hi - x, *hi - y, 0.0, step, rng);
                                }
                                if killed {
                                    dead = true;
                                    break;
                                }
                                x = y;
                            }
                        }
                        t_now = t;
                        let s = if dead { State::Dead } else { State::Real(x) };
                        if !record(&s, &mut vals) {
                            break;
                        }
                    }
                    samples.push(CkSample::live(&vals));
                }
            });
        }
        _ => {
            return Err(Error::unsupported(
                "checkpoint sampling covers diffusion processes; deterministic and \
                 embedded processes are compared exactly",
            ))
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::space::{ObsKind, ObservationMap};
    use crate::stats;

    fn bm_model(horizon: f64, grid: f64) -> ProcessModel {
        ProcessModel::new(
            ProcessKind::BrownianMotion,
            ObservationMap::from_kind(ObsKind::Point(0.0)),
            horizon,
            grid,
        )
        .unwrap()
    }

    #[test]
    fn estimates_are_deterministic_in_the_seed() {
        let m = bm_model(1.0, 0.01);
        let ev = EventSpec::HitBy { barriers: alloc::vec![0.0], t: 1.0 };
        let opts = McOpts { n_paths: 5000, seed: 11 };
        let a = estimate_event(&m, &State::Real(1.0), &ev, &opts).unwrap();
        let b = estimate_event(&m, &State::Real(1.0), &ev, &opts).unwrap();
        assert_eq!(a, b);
        let c = estimate_event(&m, &State::Real(1.0), &ev, &McOpts { n_paths: 5000, seed: 12 })
            .unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn bm_value_at_time_matches_gaussian_cdf() {
        let m = bm_model(1.0, 0.01);
        let ev = EventSpec::ValueAtIn {
            t: 1.0,
            set: RealSet::Interval(f64::NEG_INFINITY, 0.5),
        };
        let est = estimate_event(&m, &State::Real(0.0), &ev, &McOpts { n_paths: 20_000, seed: 3 })
            .unwrap();
        let z = est.z_against(math::normal_cdf(0.5));
        assert!(z < stats::Z_CRIT, "z = {z}");
    }

    #[test]
    fn bm_hit_prob_matches_reflection_formula() {
        let m = bm_model(1.0, 0.005);
        let est = estimate_hit_prob(
            &m,
            &State::Real(1.0),
            &[0.0],
            1.0,
            true,
            &McOpts { n_paths: 20_000, seed: 5 },
        )
        .unwrap();
        let z = est.z_against(analytic::bm_hit_zero_cdf(1.0, 1.0));
        assert!(z < stats::Z_CRIT, "z = {z}");
    }

    #[test]
    fn drift_and_fork_evaluate_exactly() {
        let obs = ObservationMap::from_kind(ObsKind::Integers);
        let m = ProcessModel::new(ProcessKind::Drift { a: 1.0 }, obs, 2.0, 0.02).unwrap();
        let hit_int = EventSpec::ValueAtIn { t: 0.7, set: RealSet::Integers };
        let est =
            estimate_event(&m, &State::Real(0.3), &hit_int, &McOpts { n_paths: 10, seed: 0 })
                .unwrap();
        assert_eq!(est, Estimate::exact(1.0));
        let miss = EventSpec::ValueAtIn { t: 0.5, set: RealSet::Integers };
        let est2 =
            estimate_event(&m, &State::Real(0.3), &miss, &McOpts { n_paths: 10, seed: 0 })
                .unwrap();
        assert_eq!(est2, Estimate::exact(0.0));

        let fork = ProcessModel::new(
            ProcessKind::Fork { fork_pos: 95.0, end_pos: 100.0 },
            ObservationMap::from_kind(ObsKind::ForkTips),
            120.0,
            1.0,
        )
        .unwrap();
        // From the root, the P-tip observation at t = 100 has probability ½;
        // from a committed branch state it is 0 or 1.
        let p_tip = EventSpec::ObsAt { t: 100.0, obs: Obs::Bits(0b01) };
        let root = State::Branch { pos: 0.0, branch: 1 };
        let est3 = estimate_event(&fork, &root, &p_tip, &McOpts { n_paths: 10, seed: 0 }).unwrap();
        assert_eq!(est3, Estimate::exact(0.5));
        let committed = State::Branch { pos: 97.0, branch: 5 };
        let est4 =
            estimate_event(&fork, &committed, &p_tip, &McOpts { n_paths: 10, seed: 0 }).unwrap();
        assert_eq!(est4, Estimate::exact(1.0));
        // The stem at 95 still faces the coin flip.
        let stem = State::Branch { pos: 90.0, branch: 4 };
        let est5 = estimate_event(&fork, &stem, &p_tip, &McOpts { n_paths: 10, seed: 0 }).unwrap();
        assert_eq!(est5, Estimate::exact(0.5));
    }

    #[test]
    fn reflected_values_stay_in_range_and_match_image_density() {
        let (lo, hi) = (0.0, 1.0);
        let m = ProcessModel::new(
            ProcessKind::ReflectedBm { lo, hi },
            ObservationMap::from_kind(ObsKind::Points(alloc::vec![lo, hi])),
            1.0,
            0.01,
        )
        .unwrap();
        let mut rng = rng_from_seed(17);
        let tr = sample_trajectory(&m, &State::Real(0.25), &mut rng).unwrap();
        assert!(tr.states.iter().all(|s| match s {
            State::Real(x) => (lo..=hi).contains(x),
            _ => false,
        }));

        // ℙ(Y_t ≤ m) against the image-sum density of reflected BM.
        let t = 0.3;
        let x0 = 0.25;
        let mid = 0.5;
        let ev = EventSpec::ValueAtIn { t, set: RealSet::Interval(f64::NEG_INFINITY, mid) };
        let est = estimate_event(&m, &State::Real(x0), &ev, &McOpts { n_paths: 30_000, seed: 21 })
            .unwrap();
        let density = |y: f64| {
            let mut p = 0.0;
            for k in -10..=10 {
                let shift = 2.0 * (hi - lo) * k as f64;
                p += math::normal_pdf((y - x0 + shift) / math::sqrt(t));
                p += math::normal_pdf((y + x0 + shift) / math::sqrt(t));
            }
            p / math::sqrt(t)
        };
        let want = analytic::integrate(density, lo, mid, 1e-10);
        let z = est.z_against(want);
        assert!(z < stats::Z_CRIT, "z = {z}, est {} vs {want}", est.value);
    }

    #[test]
    fn circle_values_match_wrapped_normal() {
        let radius = 0.5;
        let m = ProcessModel::new(
            ProcessKind::CircleBm { radius },
            ObservationMap::from_kind(ObsKind::Point(0.0)),
            1.0,
            0.01,
        )
        .unwrap();
        let t = 0.4;
        let theta0 = 1.0;
        let (alpha, beta) = (-0.5, 0.5);
        let ev = EventSpec::ValueAtIn { t, set: RealSet::Interval(alpha, beta) };
        let est = estimate_event(&m, &State::Real(theta0), &ev, &McOpts { n_paths: 30_000, seed: 9 })
            .unwrap();
        // Wrapped normal: sum the Gaussian mass of every 2π translate.
        let sd = math::sqrt(t) / radius;
        let mut want = 0.0;
        for k in -12..=12 {
            let shift = 2.0 * math::PI * k as f64;
            want += math::normal_cdf((beta + shift - theta0) / sd)
                - math::normal_cdf((alpha + shift - theta0) / sd);
        }
        let z = est.z_against(want);
        assert!(z < stats::Z_CRIT, "z = {z}");
    }

    #[test]
    fn laplace_exit_matches_two_barrier_formula() {
        let m = bm_model(20.0, 0.01);
        let est = estimate_laplace_first_hit(
            &m,
            &State::Real(0.3),
            &[0.0, 1.0],
            1.0,
            &McOpts { n_paths: 20_000, seed: 31 },
        )
        .unwrap();
        let want = analytic::bm_two_barrier_laplace(0.3, 1.0);
        let z = est.z_against(want);
        assert!(z < stats::Z_CRIT, "z = {z}, est {} vs {want}", est.value);
    }

    #[test]
    fn laplace_reach_matches_sinh_formula() {
        let m = ProcessModel::new(
            ProcessKind::AbsorbedBm { lo: 0.0, hi: 4.0 },
            ObservationMap::from_kind(ObsKind::Point(1.0)),
            20.0,
            0.01,
        )
        .unwrap();
        let est = estimate_laplace_reach(
            &m,
            &State::Real(2.0),
            1.0,
            1.0,
            &McOpts { n_paths: 20_000, seed: 41 },
        )
        .unwrap();
        let want = analytic::absorbed_bm_reach_laplace(2.0, 1.0, 0.0, 4.0, 1.0);
        let z = est.z_against(want);
        assert!(z < stats::Z_CRIT, "z = {z}, est {} vs {want}", est.value);
    }

    #[test]
    fn laplace_death_matches_one_barrier_formula() {
        // Killed at 0 only: E^z[e^{−λ T_∂}] = e^{−z√(2λ)}; horizon 16 leaves
        // truncation mass below e^{−16}, far inside the test band.
        let m = ProcessModel::new(
            ProcessKind::AbsorbedBm { lo: 0.0, hi: f64::INFINITY },
            ObservationMap::from_kind(ObsKind::None),
            16.0,
            0.01,
        )
        .unwrap();
        let est =
            estimate_laplace_death(&m, &State::Real(1.0), 1.0, &McOpts { n_paths: 20_000, seed: 47 })
                .unwrap();
        let want = math::exp(-1.0 * math::sqrt(2.0));
        let z = est.z_against(want);
        assert!(z < stats::Z_CRIT, "z = {z}, est {} vs {want}", est.value);
    }

    #[test]
    fn absorbed_death_prob_matches_cdf() {
        let m = ProcessModel::new(
            ProcessKind::AbsorbedBm { lo: 0.0, hi: f64::INFINITY },
            ObservationMap::from_kind(ObsKind::None),
            1.0,
            0.005,
        )
        .unwrap();
        let ev = EventSpec::DeadBy { t: 1.0 };
        let est = estimate_event(&m, &State::Real(1.0), &ev, &McOpts { n_paths: 20_000, seed: 51 })
            .unwrap();
        let z = est.z_against(analytic::absorbed_bm_death_cdf(1.0, 1.0));
        assert!(z < stats::Z_CRIT, "z = {z}");
    }

    #[test]
    fn embedded_death_and_obs_probabilities() {
        let lmp = FiniteLmp::new(alloc::vec![0b01, 0b10], alloc::vec![0.0, 0.5, 0.0, 0.0]).unwrap();
        let m = ProcessModel::embedded(lmp, 4.0, 0.04).unwrap();
        let start = State::Timed { x: 0, s: 0.0 };
        // One jump by t = 1.5: dead w.p. ½.
        let ev = EventSpec::DeadBy { t: 1.5 };
        let est = estimate_event(&m, &start, &ev, &McOpts { n_paths: 20_000, seed: 61 }).unwrap();
        assert!(est.z_against(0.5) < stats::Z_CRIT);
        // Two jumps by t = 2.5: dead surely.
        let ev2 = EventSpec::DeadBy { t: 2.5 };
        let est2 = estimate_event(&m, &start, &ev2, &McOpts { n_paths: 2_000, seed: 62 }).unwrap();
        assert_eq!(est2.value, 1.0);
        // Observation of state 1's label at t = 1.5.
        let ev3 = EventSpec::ObsAt { t: 1.5, obs: Obs::Bits(0b10) };
        let est3 = estimate_event(&m, &start, &ev3, &McOpts { n_paths: 20_000, seed: 63 }).unwrap();
        assert!(est3.z_against(0.5) < stats::Z_CRIT);
    }

    #[test]
    fn trajectories_keep_invariants() {
        let m = ProcessModel::new(
            ProcessKind::AbsorbedBm { lo: 0.0, hi: 2.0 },
            ObservationMap::from_kind(ObsKind::None),
            1.0,
            0.01,
        )
        .unwrap();
        let mut rng = rng_from_seed(71);
        let mut saw_death = false;
        for _ in 0..50 {
            let tr = sample_trajectory(&m, &State::Real(0.5), &mut rng).unwrap();
            assert_eq!(tr.states.len(), m.n_steps() + 1);
            assert!(tr.absorption_ok());
            saw_death |= tr.death_index().is_some();
        }
        assert!(saw_death, "paths from 0.5 should die within t = 1 fairly often");
    }

    #[test]
    fn checkpoints_respect_maps_and_death() {
        let m = bm_model(1.0, 0.01);
        // Reflecting the start must equal mapping the paths: compare law of
        // −W from 1 with law of W from −1 (they are identical).
        let times = [0.25, 0.5, 0.75];
        let neg = |s: &State| match s {
            State::Real(x) => State::Real(-x),
            other => *other,
        };
        let a = sample_checkpoints(&m, &State::Real(1.0), &times, 0.01, Some(&neg), 20_000, 81)
            .unwrap();
        let b = sample_checkpoints(&m, &State::Real(-1.0), &times, 0.01, None, 20_000, 82).unwrap();
        let r = stats::two_sample_marginal(&a, &b);
        assert!(r.z.abs() < stats::Z_CRIT, "z = {}", r.z);

        // Absorbed checkpoints can die, and the death classes show up.
        let am = ProcessModel::new(
            ProcessKind::AbsorbedBm { lo: 0.0, hi: f64::INFINITY },
            ObservationMap::from_kind(ObsKind::None),
            1.0,
            0.01,
        )
        .unwrap();
        let c =
            sample_checkpoints(&am, &State::Real(0.3), &times, 0.01, None, 5_000, 83).unwrap();
        assert!(c.iter().any(|s| s.n_live() < times.len()));
        assert!(c.iter().any(|s| s.n_live() == times.len()));
    }
}
