//! Simulation core for a one-dimensional Hadamard quantum walk with a
//! perfectly absorbing detector that is periodically removed and put back
//! at a random site.
//!
//! The crate is `no_std` and needs only `alloc`. IO, configuration files,
//! parallel ensembles and the command line live in the `rrmdqw` crate.

#![no_std]

extern crate alloc;

pub mod detector;
pub mod ensemble;
pub mod observables;
pub mod oracle;
pub mod profile;
pub mod rng;
pub mod stats;
pub mod walk;

/// Lattice site index.
pub type Site = i64;

pub use detector::{build_trajectory, DetectorPolicy, DetectorTrajectory, PolicyError, WindowUpper};
pub use ensemble::{run_ensemble, run_realization, EnsembleStats, RealizationResult, RecordSpec, RunConfig, RunError};
pub use observables::{Point, Series};
pub use profile::Profile;
pub use rng::RngStream;
pub use stats::Welford;
pub use walk::{init_state, Coin, Spinor, StepOutcome, WalkError, WalkerState};
