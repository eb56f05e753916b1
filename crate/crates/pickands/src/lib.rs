//! Parallel Monte Carlo drivers, table formats and the command-line front end
//! for estimating Pickands' constants of fractional Brownian motion.
//!
//! The numerical kernels live in [`pickands_core`]; this crate adds the
//! worker pool, the shared spectrum cache and file IO.

pub mod cache;
pub mod cli;
pub mod driver;
pub mod error;
pub mod table;

pub use driver::{change_of_measure_check, estimate_albin, estimate_eta_sweep, estimate_ratio, SweepMode};
pub use error::{CliError, ExitStatus};
pub use pickands_core;
