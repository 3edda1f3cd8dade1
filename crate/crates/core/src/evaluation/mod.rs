//! Repeated stratified cross-validation, per-fold metric vectors and the
//! corrected resampled paired t-test used to compare models.

mod experiment;
mod ttest;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boruta::BorutaError;
use crate::classifiers::{ClassifierError, ModelSpec};
use crate::dataset::{split, stratified_folds, Dataset, DatasetError, FoldPlan};
use crate::metrics::{evaluate, MetricsError, PredictionRecord};
use crate::rng::derive_seed;

pub use self::experiment::{
    run_experiment, AttributeOutcome, DatasetSummary, EvaluationSection, ExperimentReport, FoldValues,
    ModelEntry, ModelSummary, Phase, PhaseComparisons, Protocol, SelectionSettings, SelectionSummary,
    REPORT_SCHEMA_VERSION,
};
pub use self::ttest::{corrected_paired_ttest, corrected_resampled_t, ComparisonResult, TStatistic, Verdict};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("model `{model}`: {source}")]
    Classifier {
        model: String,
        #[source]
        source: ClassifierError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Boruta(#[from] BorutaError),
    #[error("score vectors differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("score vectors come from different fold plans or metrics")]
    UnalignedFoldPlans,
    #[error("fewer than two usable paired scores")]
    TooFewPairs,
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Rmse,
    WeightedAuc,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Accuracy, Metric::Rmse, Metric::WeightedAuc];

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Rmse)
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy",
            Metric::Rmse => "RMSE",
            Metric::WeightedAuc => "ROC",
        }
    }
}

/// One metric's value on every (repeat, fold) of a cross-validation, in
/// that order. A fold whose test part holds a single class has an AUC of
/// NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub model_id: String,
    pub metric: Metric,
    pub values: Vec<f64>,
    pub n_train: Vec<usize>,
    pub n_test: Vec<usize>,
    /// Fingerprint of the plan each value came from.
    pub plans: Vec<u64>,
}

impl FoldScores {
    /// Mean over the first `len` values, skipping NaN.
    pub fn mean_of_first(&self, len: usize) -> f64 {
        let finite: Vec<f64> = self.values[..len.min(self.values.len())]
            .iter()
            .copied()
            .filter(|v| !v.is_nan())
            .collect();
        if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean_of_first(self.values.len())
    }
}

/// Stratified plans for `repeats` repetitions, repeat `r` seeded with
/// `derive_seed(seed, r)`.
pub fn fold_plans(ds: &Dataset, k: usize, repeats: usize, seed: u64) -> Result<Vec<FoldPlan>, DatasetError> {
    (0..repeats)
        .map(|r| stratified_folds(ds, k, derive_seed(seed, r as u64)))
        .collect()
}

/// Accuracy, RMSE and weighted AUC of one model, in [`Metric::ALL`] order.
pub type CvScores = [FoldScores; 3];

struct FoldOutcome {
    values: [f64; 3],
    n_train: usize,
    n_test: usize,
    plan: u64,
}

fn run_fold(
    spec: &ModelSpec,
    ds: &Dataset,
    plan: &FoldPlan,
    fold: usize,
) -> Result<FoldOutcome, (Option<ClassifierError>, Option<MetricsError>)> {
    let (train, test) = split(ds, plan, fold);
    let model = spec
        .fit(&train, derive_seed(plan.seed, fold as u64))
        .map_err(|e| (Some(e), None))?;
    let mut records = Vec::with_capacity(test.n_instances());
    for (i, row) in test.rows().iter().enumerate() {
        let dist = model.predict_distribution(row).map_err(|e| (Some(e), None))?;
        records.push(PredictionRecord::new(test.class_of(i), dist).map_err(|e| (None, Some(e)))?);
    }
    let summary = evaluate(&records).map_err(|e| (None, Some(e)))?;
    Ok(FoldOutcome {
        values: [summary.accuracy, summary.rmse, summary.weighted_auc],
        n_train: train.n_instances(),
        n_test: test.n_instances(),
        plan: plan.fingerprint(),
    })
}

/// Cross-validates one model over fixed plans. Folds run in parallel and
/// are merged in (repeat, fold) order.
pub fn cross_validate_with_plans(
    model_id: &str,
    spec: &ModelSpec,
    ds: &Dataset,
    plans: &[FoldPlan],
) -> Result<CvScores, EvaluationError> {
    let tasks: Vec<(usize, usize)> = plans
        .iter()
        .enumerate()
        .flat_map(|(r, p)| (0..p.k).map(move |f| (r, f)))
        .collect();
    let outcomes: Vec<FoldOutcome> = tasks
        .par_iter()
        .map(|&(r, f)| run_fold(spec, ds, &plans[r], f))
        .collect::<Result<_, _>>()
        .map_err(|e| match e {
            (Some(source), _) => EvaluationError::Classifier {
                model: model_id.to_string(),
                source,
            },
            (None, Some(m)) => EvaluationError::Metrics(m),
            (None, None) => unreachable!(),
        })?;
    let scores = |m: usize| FoldScores {
        model_id: model_id.to_string(),
        metric: Metric::ALL[m],
        values: outcomes.iter().map(|o| o.values[m]).collect(),
        n_train: outcomes.iter().map(|o| o.n_train).collect(),
        n_test: outcomes.iter().map(|o| o.n_test).collect(),
        plans: outcomes.iter().map(|o| o.plan).collect(),
    };
    Ok([scores(0), scores(1), scores(2)])
}

/// `repeats` × `k`-fold stratified cross-validation of one model.
pub fn cross_validate(
    spec: &ModelSpec,
    ds: &Dataset,
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<CvScores, EvaluationError> {
    if repeats == 0 {
        return Err(EvaluationError::InvalidProtocol("repeats must be >= 1".into()));
    }
    let plans = fold_plans(ds, k, repeats, seed)?;
    cross_validate_with_plans(spec.display_name(), spec, ds, &plans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ForestParams;
    use crate::dataset::{AttributeKind, AttributeSpec};

    #[test]
    fn value_count_is_repeats_times_k() {
        let ds = crate::synthetic::planted_signal(60, 2, 3, 1);
        let [acc, rmse, auc] = cross_validate(&ModelSpec::NaiveBayes, &ds, 10, 3, 7).unwrap();
        for s in [&acc, &rmse, &auc] {
            assert_eq!(s.values.len(), 30);
            assert!(s.n_train.iter().zip(&s.n_test).all(|(a, b)| a + b == 60));
        }
        assert_eq!(acc.metric, Metric::Accuracy);
        assert_eq!(auc.metric, Metric::WeightedAuc);
    }

    #[test]
    fn constant_model_under_stratification() {
        // 90 / 10 split; a single constant attribute leaves NB with the prior
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|i| vec![0.0, if i < 90 { 0.0 } else { 1.0 }])
            .collect();
        let ds = Dataset::new(
            "skew",
            vec![
                AttributeSpec::new("const", AttributeKind::Binary),
                AttributeSpec::new("class", AttributeKind::Binary),
            ],
            1,
            rows,
        )
        .unwrap();
        let [acc, ..] = cross_validate(&ModelSpec::NaiveBayes, &ds, 10, 2, 3).unwrap();
        for v in &acc.values {
            assert!((v - 0.9).abs() < 1e-12);
        }
        assert!((acc.mean() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_plans_across_models() {
        let ds = crate::synthetic::planted_signal(40, 1, 3, 2);
        let plans = fold_plans(&ds, 5, 2, 11).unwrap();
        let rf = ModelSpec::RandomForest(ForestParams {
            n_trees: 5,
            ..Default::default()
        });
        let a = cross_validate_with_plans("rf", &rf, &ds, &plans).unwrap();
        let b = cross_validate_with_plans("nb", &ModelSpec::NaiveBayes, &ds, &plans).unwrap();
        assert_eq!(a[0].plans, b[0].plans);
        let again = cross_validate_with_plans("rf", &rf, &ds, &plans).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn tiny_two_fold_run() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]];
        let ds = Dataset::new(
            "toy",
            vec![
                AttributeSpec::new("a", AttributeKind::Binary),
                AttributeSpec::new("class", AttributeKind::Binary),
            ],
            1,
            rows,
        )
        .unwrap();
        let [acc, ..] = cross_validate(&ModelSpec::NaiveBayes, &ds, 2, 1, 0).unwrap();
        assert_eq!(acc.values.len(), 2);
        assert!((acc.mean() - (acc.values[0] + acc.values[1]) / 2.0).abs() < 1e-15);
    }
}
