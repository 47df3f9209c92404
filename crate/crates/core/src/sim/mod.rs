//! Scenario runner, logs, cycle metrics and report generation.

pub mod gust;
pub mod log;
pub mod metrics;
pub mod reports;
pub mod runner;
pub mod scenario;

pub use log::{read_log, write_log, LogRow, LOG_COLUMNS};
pub use metrics::{compute_metrics, write_metrics_csv, CycleMetrics};
pub use reports::{
    emit_figures, model_comparison_report, write_comparison_csv, write_sweep_csv, reeling_fixed_point, tracking_error_sweep, turn_rate_regression, Figure,
    ModelComparison, SteadyCrosswind, SweepAxis, SweepRow, TurnRateFit,
};
pub use runner::{run_simulation, run_simulation_partial, PhaseSwitch, SimError, SimOutput};
pub use scenario::{load_scenario, Scenario, ScenarioError};
