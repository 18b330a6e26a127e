//! Closed-loop harness: configuration, case matrix, metrics and outputs.

pub mod cases;
pub mod closed_loop;
pub mod compare;
pub mod config;
pub mod metrics;
pub mod output;

pub use cases::{
    eco_trace, eligible_egos, run_case, run_matrix, CaseResult, ClassifiedTraffic, Ego,
};
pub use closed_loop::{run_closed_loop, StepRecord, TrajectoryLog};
pub use compare::{compare_cases, Comparison, ComparisonRow};
pub use config::{
    CaseLabel, ControllerConfig, ControllerKind, Driving, Scenario, ScenarioConfig, SimConfig,
};
pub use metrics::{compute_metrics, TripMetrics, Violations};
pub use output::{load_metrics, write_comparison, write_json, write_outputs, write_trajectory};
