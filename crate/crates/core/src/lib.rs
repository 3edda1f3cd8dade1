//! Tabular classification and all-relevant feature selection, plus the
//! cross-validated benchmark harness that compares them.
//!
//! * [`dataset`]: CSV/ARFF loading, schemas, stratified fold plans.
//! * [`metrics`]: accuracy, probability RMSE, ROC curves and weighted AUC.
//! * [`classifiers`]: random forest, linear SVM (SMO), Naïve Bayes,
//!   Hoeffding tree and locally weighted learning.
//! * [`boruta`]: shadow-attribute feature selection.
//! * [`evaluation`]: repeated cross-validation and the corrected paired t-test.
//! * [`report`], [`config`], [`cli`]: the experiment runner behind the binary.

pub mod boruta;
pub mod classifiers;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod evaluation;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod synthetic;
