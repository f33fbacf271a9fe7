//! Experiment orchestration: configuration, seeded runs, persisted reports and
//! the acceptance runner.

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod report;

pub use acceptance::{acceptance_suite, AcceptanceSummary, Tier};
pub use config::{ExperimentConfig, ExperimentId};
pub use experiments::{execute, run};
pub use report::{verify_outputs, ExperimentReport, ReportRow};
