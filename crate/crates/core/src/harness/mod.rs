//! Configuration, experiment orchestration, acceptance registry and reports.

pub mod checks;
pub mod config;
pub mod convergence;
pub mod profiles;
pub mod report;
mod run;

pub use checks::{registry, run_acceptance};
pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{CheckResult, Condition, RunReport};
pub use run::run;
