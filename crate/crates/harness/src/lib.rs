//! Monte-Carlo experiment runner for the self-interference cancellers.
//!
//! A [`Scenario`] describes the simulated world and the algorithms under
//! test; the `run_*` functions return data series that the `sic` binary
//! writes as TSV files.

pub mod error;
pub mod output;
pub mod runner;
pub mod scenario;
pub mod sim;

pub use error::{HarnessError, Result};
pub use output::{fmt_g, RunOutput, Series};
pub use runner::{run_complexity, run_convergence, run_decoding, run_sweep};
pub use scenario::{Coherence, Scenario};
