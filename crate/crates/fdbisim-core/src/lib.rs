//! Bisimulation checking for continuous-time Feller-Dynkin processes and
//! discrete-time labelled Markov processes.
//!
//! The crate is organised around one pipeline:
//!
//! * [`space`] / [`traj`] — state spaces with a cemetery point `∂`,
//!   observation maps, and grid-sampled cadlag trajectories;
//! * [`analytic`] — closed-form transition kernels, hitting-time laws and
//!   Laplace transforms for the Brownian family;
//! * [`mc`] — exact-increment Monte Carlo samplers and event estimators with
//!   Brownian-bridge barrier corrections;
//! * [`relation`] / [`bisim`] — relation witnesses (partitions or symmetry
//!   groups with invariant features), the initiation/induction checks, and
//!   distinguisher-driven refutation;
//! * [`lmp`] / [`embed`] — finite labelled Markov processes, partition
//!   refinement, and the embedding of an LMP as a continuous-time process on
//!   `X × [0,1)` with relation lifts in both directions;
//! * [`cospan`] — process homomorphisms, kernel bisimulations, and finite
//!   pushout/cospan constructions;
//! * [`catalog`] — the built-in example gallery exercised by the CLI.
//!
//! The crate is `no_std` (with `alloc`) so the algorithmic core stays free of
//! platform dependencies; all IO lives in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytic;
pub mod bisim;
pub mod catalog;
pub mod cospan;
pub mod embed;
pub mod error;
pub mod lmp;
pub mod math;
pub mod mc;
pub mod partition;
pub mod process;
pub mod relation;
pub mod rng;
pub mod space;
pub mod stats;
pub mod traj;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
