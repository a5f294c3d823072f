//! Benchmark harness for the `rpca-core` solvers: single planted trials,
//! seeded sweeps over rank or corruption level, CSV/SVG reports and a
//! per-iteration timing probe.

pub mod probe;
pub mod report;
pub mod sweep;
pub mod trial;

use thiserror::Error;

pub use probe::{scaling_probe, ProbeTable};
pub use report::{aggregate, emit_report, AggregateRow, GroupField};
pub use sweep::{run_sweep, Scale, SweepSpec, SweepVariable};
pub use trial::{run_trial, Method, MethodConfigs, TrialRecord};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] rpca_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("no trial records to report")]
    EmptyRecords,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;
