//! Downstream analysis: sparse regression on raw and cleaned data, and the
//! Monte Carlo harness that compares detectors end to end.

mod lasso;
mod pipeline;

pub use lasso::{
    coefficient_metrics, cross_validation_errors, fit_lasso, fit_lasso_path, fit_lasso_with,
    fold_assignment, kkt_violation, lambda_max, log_lambda_grid, objective_trace, predict,
    select_lambda_cv, select_lambda_cv_with, soft_threshold, CoefficientMetrics, LassoFit,
    LassoOptions, KKT_TOLERANCE,
};
pub use pipeline::{
    compare_pipelines, read_records, simulate_detection, summarize, write_records, write_summary,
    CompareConfig, Method, MetricSummary, ResultRecord, SimulationConfig, CV_MAX_SWEEPS,
};
