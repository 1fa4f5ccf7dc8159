//! Experiment harness for the semi-infected contact process: phase-transition
//! sweeps, mean-field deviation measurement, coupling audits, lumping checks
//! and auxiliary-chain checks, with seeded parallel replication and CSV/JSON
//! emission. The `semicp` binary is a thin CLI over [`experiments`].

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod rows;
pub mod stats;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat};
pub use error::HarnessError;
