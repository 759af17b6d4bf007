//! Cross-validated AUC and error-rate estimators, together with ad-hoc and
//! influence-function standard-error estimators and a simulation harness.

pub mod adhoc;
pub mod auc;
pub mod classifier;
pub mod data;
pub mod error;
pub mod estimators;
pub mod fold;
pub mod grid;
pub mod influence;
pub mod resampling;
pub mod rng;
pub mod simulation;

pub use auc::{empirical_auc, empirical_auc_with, psi, PairwiseAucTable, TieRule};
pub use classifier::{train, ClassifierKind, ClassifierSpec, Scorer, TrainedClassifier, TrainingRule};
pub use data::{Samples, TwoClassDataset};
pub use error::{Error, Result};
pub use estimators::{
    auc_cvk, auc_cvkm, auc_cvkr, auc_cvn, err_cvk, err_loo, CvAucResult, CvErrResult, CvOptions, Pairing,
    ZeroDenPolicy,
};
pub use fold::{FoldMap, Remainder};
pub use grid::Grid;
pub use influence::{if_sd_cvkm, if_sd_cvn_reduction, if_sd_err_cvn, perturbed_auc_cvkm, InfluenceComponents, Observation};
pub use resampling::{plan_cvk, plan_cvkm, plan_cvkr, plan_cvn, CvMode, FoldPlan, Repetition};

#[cfg(test)]
pub(crate) mod testkit;
