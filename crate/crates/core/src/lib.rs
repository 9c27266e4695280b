//! Random walks on free products of two finite rooted graphs.
//!
//! The crate builds the walk from a [`WalkConfig`], evaluates its generating
//! functions exactly (by path enumeration, see [`oracle`]) and numerically
//! (by linear solves and a monotone fixed point, see [`genfun`]), decomposes
//! sampled trajectories at their renewal times ([`simulator`]) and checks the
//! central limit theorems for the graph distance, the word length and the
//! entropy distance ([`estimators`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod genfun;
pub mod kernel;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod series;
pub mod simulator;
pub mod stats;
pub mod word;

pub use config::{FactorSpec, Prob, ValidationReport, WalkConfig};
pub use error::{Error, Result};
pub use genfun::GenFunContext;
pub use kernel::Walk;
pub use series::TruncatedSeries;
pub use simulator::{RenewalSample, Trajectory};
pub use word::{Factor, Letter, Word};

/// Validates a configuration, returning the per-invariant report.
pub fn validate_config(cfg: &WalkConfig) -> ValidationReport {
    cfg.validate()
}
