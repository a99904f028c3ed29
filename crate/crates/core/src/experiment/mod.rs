//! Scenario configuration, Monte Carlo execution and result comparison.
//!
//! `records.csv` columns, in order: `run, k, n_true, n_est, ospa, ospa_loc,
//! ospa_card, ms`.

mod compare;
mod config;
mod runner;

pub use compare::{compare, compare_records, ComparisonRow};
pub use config::{
    BirthConfig, FilterConfig, FusionConfig, FusionKind, MetricConfig, MotionConfig, OutputConfig,
    ProcessNoiseKind, RegionConfig, ScenarioConfig, SensorConfig, TargetConfig,
};
pub use runner::{
    read_records, run_experiment, run_monte_carlo, summarize, ExperimentResult, RunRecord, Scenario,
    SummaryRow, CONFIG_ECHO_FILE, RECORDS_FILE, SUMMARY_FILE,
};
