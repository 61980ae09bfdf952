//! Metrics, baselines and experiment harnesses.

mod allocations;
mod deflation;
mod roc;
mod study;

pub use allocations::{enumerate_allocations, kl_asymmetry};
pub use deflation::deflation_baseline;
pub use roc::{auc, roc_experiment, roc_with, run_method, tpr_fpr, RocConfig, RocCurve, RocMethod, RocPoint};
pub use study::{allocation_study, AllocationStudy, AllocationStudyRow};
