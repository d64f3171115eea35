//! Config-driven experiments: ingest CSV data, train policies over a sweep of
//! sensor costs, persist models and write the budget curve.

pub mod config;
pub mod ingest;
pub mod persist;
pub mod sweep;

pub use config::{ExperimentConfig, Mode, Overrides};
pub use ingest::{ingest, Experiment};
pub use persist::ModelFile;
pub use sweep::{run_sweep, BudgetCurve, CurveRow, Prepared};
