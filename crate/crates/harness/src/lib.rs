//! Experiment harness for the `crowdlabel` library: configuration, Monte Carlo
//! sweeps with CSV output, and the acceptance suite behind `crowdlabel validate`.

pub mod acceptance;
pub mod config;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig};
pub use sweep::{emit_csv, run_sweep, write_csv, SweepRow, SweepTable};
