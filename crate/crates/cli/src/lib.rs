//! Library surface of the experiment CLI: configuration, the experiment
//! orchestrator, and the report generator. The binary in `main.rs` is a thin
//! wrapper so integration tests can drive everything in-process.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{
    load_config, parse_config, preset, ConfigError, ExperimentConfig, GameChoice, MetricKind,
    Overrides, ScheduleChoice, PRESET_NAMES,
};
pub use report::{run_report, ReportError, VariantReport};
pub use runner::{canonical_description, fmt_float, run_experiment, ExperimentOutcome, RunnerError};
