//! Experiment orchestration: configuration, the (policy, seed) grid with
//! common random numbers, regret metrics and the CSV / JSON artifacts.

mod config;
mod metrics;
mod output;
mod run;

pub use config::{
    resolve_alias, CocsSettings, CucbSettings, ExperimentConfig, LinUcbSettings, RunSettings,
    ScheduleRule, SolverSettings,
};
pub use metrics::{
    concave_fraction, mean_series, regret_curve, sublinearity_fit, sublinearity_fit_rounds,
    ExponentFit,
};
pub use output::{
    csv_file_name, nonconvex_delta, read_summary, render_report, run_sweep, write_run_csv,
    ExperimentSummary, PolicySummary, RunSummary, SweepPoint, SweepSummary, CSV_HEADER,
    SUMMARY_FILE, SWEEP_SUMMARY_FILE,
};
pub use run::{build_policy, run_experiment, ExperimentResult, RoundLog, RunResult};
