//! Experiment runner for `scvx-core`: weight sweeps that regenerate the
//! convergence tables, per-iteration traces, convergence plots and an
//! invariant audit.

pub mod check;
pub mod error;
pub mod plot;
pub mod spec;
pub mod sweep;
pub mod trace;

pub use error::{CliError, Result};
pub use spec::ExperimentSpec;
pub use sweep::{run_sweep, SweepReport};
