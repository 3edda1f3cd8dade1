//! The two-phase experiment: every model on all attributes, then Boruta on
//! the full dataset and every model again on the confirmed attributes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    corrected_paired_ttest, cross_validate_with_plans, fold_plans, ComparisonResult, CvScores,
    EvaluationError, Metric,
};
use crate::boruta::{boruta_run, reduce_dataset, BorutaConfig, BorutaError, BorutaResult, FeatureDecision};
use crate::classifiers::ModelSpec;
use crate::dataset::Dataset;
use crate::report::{nullable, nullable_vec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    pub k: usize,
    /// Repeats averaged in the results tables.
    pub repeats: usize,
    /// Repeats feeding the significance tests.
    pub ttest_repeats: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            k: 10,
            repeats: 1,
            ttest_repeats: 10,
            seed: 42,
            alpha: 0.05,
        }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<(), EvaluationError> {
        let bad = |m: &str| Err(EvaluationError::InvalidProtocol(m.into()));
        if self.k < 2 {
            return bad("k must be >= 2");
        }
        if self.repeats == 0 {
            return bad("repeats must be >= 1");
        }
        if self.ttest_repeats == 0 {
            return bad("ttest_repeats must be >= 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        Ok(())
    }

    fn total_repeats(&self) -> usize {
        self.repeats.max(self.ttest_repeats)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry {
    pub name: String,
    pub spec: ModelSpec,
}

impl ModelEntry {
    pub fn new(name: impl Into<String>, spec: ModelSpec) -> Self {
        Self {
            name: name.into(),
            spec,
        }
    }

    /// The standard five, named by their display names.
    pub fn standard_lineup() -> Vec<ModelEntry> {
        ModelSpec::standard_lineup()
            .into_iter()
            .map(|s| ModelEntry::new(s.display_name(), s))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionSettings {
    pub boruta: BorutaConfig,
    pub include_tentative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n_instances: usize,
    pub n_predictors: usize,
    pub n_classes: usize,
    pub class_levels: Vec<String>,
    pub class_counts: Vec<usize>,
}

impl DatasetSummary {
    pub fn of(ds: &Dataset) -> Self {
        Self {
            name: ds.name().to_string(),
            n_instances: ds.n_instances(),
            n_predictors: ds.n_predictors(),
            n_classes: ds.n_classes(),
            class_levels: ds.class_levels(),
            class_counts: ds.class_counts(),
        }
    }
}

/// Per-fold values of the folds averaged in the tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldValues {
    pub accuracy: Vec<f64>,
    pub rmse: Vec<f64>,
    #[serde(with = "nullable_vec")]
    pub weighted_auc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub algorithm: String,
    pub accuracy: f64,
    pub rmse: f64,
    #[serde(with = "nullable")]
    pub weighted_auc: f64,
    pub folds: FoldValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Evaluation1,
    Evaluation2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSection {
    pub n_predictors: usize,
    pub predictors: Vec<String>,
    pub k: usize,
    pub repeats: usize,
    pub models: Vec<ModelSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseComparisons {
    pub phase: Phase,
    pub ttest_repeats: usize,
    pub alpha: f64,
    pub results: Vec<ComparisonResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeOutcome {
    pub name: String,
    pub decision: FeatureDecision,
    pub hits: usize,
    pub z_score: f64,
    pub decided_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub n_predictors: usize,
    pub confirmed: usize,
    pub tentative: usize,
    pub rejected: usize,
    /// Share of predictors dropped from the reduced dataset.
    pub reduction: f64,
    pub runs_completed: usize,
    pub include_tentative: bool,
    pub attributes: Vec<AttributeOutcome>,
    /// Why the second evaluation was skipped, if it was.
    pub error: Option<String>,
}

impl SelectionSummary {
    pub fn from_result(result: &BorutaResult, include_tentative: bool) -> Self {
        let confirmed = result.confirmed().len();
        let tentative = result.tentative().len();
        let kept = confirmed + if include_tentative { tentative } else { 0 };
        Self {
            n_predictors: result.n_predictors(),
            confirmed,
            tentative,
            rejected: result.rejected().len(),
            reduction: 1.0 - kept as f64 / result.n_predictors() as f64,
            runs_completed: result.runs_completed,
            include_tentative,
            attributes: (0..result.n_predictors())
                .map(|j| AttributeOutcome {
                    name: result.names[j].clone(),
                    decision: result.decisions[j],
                    hits: result.hit_counts[j],
                    z_score: result.last_z[j],
                    decided_at: result.decided_at[j],
                })
                .collect(),
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub dataset_summary: DatasetSummary,
    pub evaluation_1: EvaluationSection,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evaluation_2: Option<EvaluationSection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection: Option<SelectionSummary>,
    pub comparisons: Vec<PhaseComparisons>,
}

fn evaluate_phase(
    ds: &Dataset,
    models: &[ModelEntry],
    protocol: &Protocol,
    phase: Phase,
) -> Result<(EvaluationSection, PhaseComparisons), EvaluationError> {
    let plans = fold_plans(ds, protocol.k, protocol.total_repeats(), protocol.seed)?;
    let scores: Vec<CvScores> = models
        .iter()
        .map(|m| cross_validate_with_plans(&m.name, &m.spec, ds, &plans))
        .collect::<Result<_, _>>()?;

    let table_len = protocol.repeats * protocol.k;
    let head = |v: &[f64]| v[..table_len].to_vec();
    let summaries = models
        .iter()
        .zip(&scores)
        .map(|(m, [acc, rmse, auc])| ModelSummary {
            name: m.name.clone(),
            algorithm: m.spec.display_name().to_string(),
            accuracy: acc.mean_of_first(table_len),
            rmse: rmse.mean_of_first(table_len),
            weighted_auc: auc.mean_of_first(table_len),
            folds: FoldValues {
                accuracy: head(&acc.values),
                rmse: head(&rmse.values),
                weighted_auc: head(&auc.values),
            },
        })
        .collect();

    let test_len = protocol.ttest_repeats * protocol.k;
    let mut results = Vec::new();
    for (m, _) in Metric::ALL.iter().enumerate() {
        for i in 0..models.len() {
            for j in i + 1..models.len() {
                let trim = |s: &super::FoldScores| super::FoldScores {
                    values: s.values[..test_len].to_vec(),
                    n_train: s.n_train[..test_len].to_vec(),
                    n_test: s.n_test[..test_len].to_vec(),
                    plans: s.plans[..test_len].to_vec(),
                    ..s.clone()
                };
                match corrected_paired_ttest(&trim(&scores[i][m]), &trim(&scores[j][m]), protocol.alpha) {
                    Ok(r) => results.push(r),
                    Err(EvaluationError::TooFewPairs) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }

    Ok((
        EvaluationSection {
            n_predictors: ds.n_predictors(),
            predictors: ds
                .predictor_indices()
                .iter()
                .map(|&a| ds.attribute(a).name.clone())
                .collect(),
            k: protocol.k,
            repeats: protocol.repeats,
            models: summaries,
        },
        PhaseComparisons {
            phase,
            ttest_repeats: protocol.ttest_repeats,
            alpha: protocol.alpha,
            results,
        },
    ))
}

/// Runs evaluation 1 and, when `selection` is given, Boruta on the full
/// dataset followed by evaluation 2 on the reduced one. If nothing is
/// confirmed the second evaluation is skipped and the reason recorded.
pub fn run_experiment(
    ds: &Dataset,
    models: &[ModelEntry],
    protocol: &Protocol,
    selection: Option<&SelectionSettings>,
) -> Result<ExperimentReport, EvaluationError> {
    protocol.validate()?;
    if models.is_empty() {
        return Err(EvaluationError::InvalidProtocol(
            "at least one model is required".into(),
        ));
    }
    let mut names = BTreeSet::new();
    for m in models {
        if !names.insert(m.name.as_str()) {
            return Err(EvaluationError::InvalidProtocol(format!(
                "duplicate model name `{}`",
                m.name
            )));
        }
    }

    let (evaluation_1, comparisons_1) = evaluate_phase(ds, models, protocol, Phase::Evaluation1)?;
    let mut comparisons = vec![comparisons_1];
    let mut evaluation_2 = None;
    let mut summary = None;
    if let Some(settings) = selection {
        let result = boruta_run(ds, &settings.boruta)?;
        let mut s = SelectionSummary::from_result(&result, settings.include_tentative);
        match reduce_dataset(ds, &result, settings.include_tentative) {
            Ok(reduced) => {
                let (section, cmp) = evaluate_phase(&reduced, models, protocol, Phase::Evaluation2)?;
                evaluation_2 = Some(section);
                comparisons.push(cmp);
            }
            Err(e @ BorutaError::NothingConfirmed) => s.error = Some(e.to_string()),
            Err(e) => return Err(e.into()),
        }
        summary = Some(s);
    }

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        dataset_summary: DatasetSummary::of(ds),
        evaluation_1,
        evaluation_2,
        selection: summary,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ForestParams;
    use crate::evaluation::cross_validate;

    fn small_protocol() -> Protocol {
        Protocol {
            k: 5,
            repeats: 1,
            ttest_repeats: 2,
            seed: 3,
            alpha: 0.05,
        }
    }

    #[test]
    fn means_match_fold_values() {
        let ds = crate::synthetic::planted_signal(50, 2, 4, 1);
        let models = vec![
            ModelEntry::new("nb", ModelSpec::NaiveBayes),
            ModelEntry::new(
                "rf",
                ModelSpec::RandomForest(ForestParams {
                    n_trees: 10,
                    ..Default::default()
                }),
            ),
        ];
        let report = run_experiment(&ds, &models, &small_protocol(), None).unwrap();
        assert_eq!(report.evaluation_1.models.len(), 2);
        assert!(report.evaluation_2.is_none());
        let [acc, ..] = cross_validate(&ModelSpec::NaiveBayes, &ds, 5, 2, 3).unwrap();
        let nb = &report.evaluation_1.models[0];
        assert_eq!(nb.folds.accuracy, acc.values[..5].to_vec());
        let mean = nb.folds.accuracy.iter().sum::<f64>() / 5.0;
        assert!((nb.accuracy - mean).abs() < 1e-12);
        // 3 metrics × 1 pair
        assert_eq!(report.comparisons[0].results.len(), 3);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let ds = crate::synthetic::planted_signal(20, 1, 1, 1);
        let models = vec![
            ModelEntry::new("x", ModelSpec::NaiveBayes),
            ModelEntry::new("x", ModelSpec::NaiveBayes),
        ];
        assert!(matches!(
            run_experiment(&ds, &models, &small_protocol(), None),
            Err(EvaluationError::InvalidProtocol(_))
        ));
        assert!(run_experiment(&ds, &[], &small_protocol(), None).is_err());
    }

    #[test]
    fn selection_on_noise_skips_second_phase() {
        let ds = crate::synthetic::pure_noise(60, 6, 2, 9);
        let settings = SelectionSettings {
            boruta: BorutaConfig {
                max_runs: 20,
                forest: ForestParams {
                    n_trees: 30,
                    ..Default::default()
                },
                ..Default::default()
            },
            include_tentative: false,
        };
        let models = vec![ModelEntry::new("nb", ModelSpec::NaiveBayes)];
        let report = run_experiment(&ds, &models, &small_protocol(), Some(&settings)).unwrap();
        let sel = report.selection.unwrap();
        if sel.confirmed == 0 {
            assert!(report.evaluation_2.is_none());
            assert!(sel.error.is_some());
        }
    }
}
