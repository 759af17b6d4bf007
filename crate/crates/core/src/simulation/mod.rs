//! Monte-Carlo studies on two Gaussian classes with identity covariance.

mod components;
mod config;
mod output;
mod study;

pub use components::{
    estimate_components, estimate_components_with, mc_variance_err_cvk, permutation_ratio, ComponentsReport,
    McVariance,
};
pub use config::{
    bayes_auc, default_shift, shift_for_bayes_auc, ComponentsConfig, CvEstimator, Population, StudyConfig,
    SCHEMA_VERSION,
};
pub use output::{report_columns, write_report_csv, write_report_json, write_trials_csv};
pub use study::{
    conditional_auc, gaussian_dataset, generate_dataset, mean_sd, run_study, run_trial, summarize,
    EstimatorSummary, SeSummary, StudyReport, StudyRun, TrialDiagnostics, TrialOutcome, TrialValue,
    MAX_FAILURE_RATE,
};
