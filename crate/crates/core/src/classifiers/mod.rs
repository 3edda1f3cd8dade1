//! The five learners behind one probabilistic-classifier contract.
//!
//! Every fitted model maps a schema-conforming instance (a full row,
//! including the ignored class slot) to a probability vector over the class
//! levels. Fitted models are immutable and `Send + Sync`.

mod encode;
pub mod forest;
pub mod hoeffding;
pub mod lwl;
pub mod naive_bayes;
pub mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeSpec, Dataset};
use crate::metrics::argmax;

pub use self::forest::{train_random_forest, DecisionTree, ForestParams, RandomForest};
pub use self::hoeffding::{hoeffding_bound, train_hoeffding_tree, HoeffdingParams, HoeffdingTree};
pub use self::lwl::{train_lwl, LwlModel, LwlParams, Neighbors};
pub use self::naive_bayes::{train_naive_bayes, NaiveBayes};
pub use self::svm::{train_svm, BinarySvm, SmoParams, SvmModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set contains a single class")]
    SingleClassTrainingSet,
    #[error("instance does not match the training schema: {0}")]
    SchemaMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub trait ProbabilisticModel: Send + Sync {
    fn n_classes(&self) -> usize;

    fn predict_distribution(&self, instance: &[f64]) -> Result<Vec<f64>, ClassifierError>;

    /// Hard prediction: argmax of the distribution, lowest class index on ties.
    fn predict(&self, instance: &[f64]) -> Result<usize, ClassifierError> {
        Ok(argmax(&self.predict_distribution(instance)?))
    }
}

impl ProbabilisticModel for Box<dyn ProbabilisticModel> {
    fn n_classes(&self) -> usize {
        (**self).n_classes()
    }

    fn predict_distribution(&self, instance: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        (**self).predict_distribution(instance)
    }
}

/// Attribute layout a model was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub attributes: Vec<AttributeSpec>,
    pub class_index: usize,
}

impl Schema {
    pub fn of(ds: &Dataset) -> Self {
        Self {
            attributes: ds.attributes().to_vec(),
            class_index: ds.class_index(),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.attributes[self.class_index].kind.n_levels().unwrap_or(0)
    }

    pub fn predictors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.attributes.len()).filter(move |&i| i != self.class_index)
    }

    pub fn check(&self, instance: &[f64]) -> Result<(), ClassifierError> {
        if instance.len() != self.attributes.len() {
            return Err(ClassifierError::SchemaMismatch(format!(
                "expected {} values, got {}",
                self.attributes.len(),
                instance.len()
            )));
        }
        Ok(())
    }
}

/// Normalizes non-negative weights to a probability vector; an all-zero
/// vector becomes uniform.
pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        v.iter_mut().for_each(|x| *x /= sum);
    } else {
        let n = v.len() as f64;
        v.iter_mut().for_each(|x| *x = 1.0 / n);
    }
    v
}

/// Algorithm choice plus hyperparameters, as named in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "params", rename_all = "snake_case")]
pub enum ModelSpec {
    RandomForest(ForestParams),
    Svm(SmoParams),
    NaiveBayes,
    HoeffdingTree(HoeffdingParams),
    Lwl(LwlParams),
}

impl ModelSpec {
    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<Box<dyn ProbabilisticModel>, ClassifierError> {
        Ok(match self {
            ModelSpec::RandomForest(p) => Box::new(train_random_forest(train, p, seed)?),
            ModelSpec::Svm(p) => Box::new(train_svm(train, p, seed)?),
            ModelSpec::NaiveBayes => Box::new(train_naive_bayes(train)?),
            ModelSpec::HoeffdingTree(p) => Box::new(train_hoeffding_tree(train, p, seed)?),
            ModelSpec::Lwl(p) => Box::new(train_lwl(train, p)?),
        })
    }

    /// Column heading used in reports.
    pub fn display_name(&self) -> &'static str {
        match self {
            ModelSpec::RandomForest(_) => "Random Forest",
            ModelSpec::Svm(_) => "Support Vector Machine",
            ModelSpec::NaiveBayes => "Naïve Bayes",
            ModelSpec::HoeffdingTree(_) => "Hoeffding tree",
            ModelSpec::Lwl(_) => "Lazy LWL",
        }
    }

    /// The five models in report column order, with default parameters.
    pub fn standard_lineup() -> Vec<ModelSpec> {
        vec![
            ModelSpec::RandomForest(ForestParams::default()),
            ModelSpec::Svm(SmoParams::default()),
            ModelSpec::NaiveBayes,
            ModelSpec::Lwl(LwlParams::default()),
            ModelSpec::HoeffdingTree(HoeffdingParams::default()),
        ]
    }
}
