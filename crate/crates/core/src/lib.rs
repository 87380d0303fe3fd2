//! Simulation and analysis of EPRB coincidence experiments.
//!
//! * [`types`] and [`validate`] hold the shared data model and log checks.
//! * [`models`] holds local station models and a non-local singlet sampler.
//! * [`runner`] turns a [`runner::RunConfig`] into an [`types::EventLog`].
//! * [`analysis`] computes correlations and Bell-type statistics from logs.
//! * [`oracles`] enumerates the exact combinatorial bounds and counts.
//! * [`io`] reads and writes the CSV log and its JSON sidecar.

pub mod analysis;
pub mod io;
pub mod models;
pub mod oracles;
pub mod rng;
pub mod runner;
pub mod types;
pub mod validate;

pub use types::{
    CorrelationEstimate, EventLog, Outcome, PairState, ProtocolMode, Setting, SettingLabel,
    SettingPair, SettingsTable, Side, StationRecord, Trial,
};
pub use validate::{validate_log, Violation, ViolationKind};
