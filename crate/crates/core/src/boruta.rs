//! Boruta all-relevant feature selection.
//!
//! Every run extends the data with shuffled "shadow" copies of the
//! attributes still in play, fits a random forest, and scores each column
//! by out-of-bag permutation importance. An attribute scores a hit when its
//! z score beats the best shadow. Binomial tests on the hit counts confirm
//! or reject attributes until none is left undecided or the run budget is
//! spent.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use thiserror::Error;

use crate::classifiers::{train_random_forest, ClassifierError, ForestParams, RandomForest};
use crate::dataset::{AttributeSpec, Dataset};
use crate::rng::{derive_seed, rng_from_seed, Rng};

const MIN_SHADOWS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BorutaError {
    #[error("dataset has no predictors")]
    NoPredictors,
    #[error("no tree has out-of-bag rows; choose another seed")]
    NoOobSamples,
    #[error("no attribute was confirmed")]
    NothingConfirmed,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureDecision {
    Confirmed,
    Tentative,
    Rejected,
}

/// Importance of one column of the dataset given to
/// [`permutation_importance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRecord {
    pub attribute: usize,
    /// Mean out-of-bag accuracy loss over trees.
    pub mean_loss: f64,
    /// `mean_loss` over its standard deviation across trees; 0 when the
    /// deviation is 0.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BorutaConfig {
    pub max_runs: usize,
    pub p_value: f64,
    pub forest: ForestParams,
    pub seed: u64,
}

impl Default for BorutaConfig {
    fn default() -> Self {
        Self {
            max_runs: 100,
            p_value: 0.01,
            forest: ForestParams::default(),
            seed: 42,
        }
    }
}

impl BorutaConfig {
    pub fn validate(&self) -> Result<(), BorutaError> {
        if self.max_runs < 7 {
            return Err(BorutaError::InvalidConfig(format!(
                "max_runs must be >= 7, got {}",
                self.max_runs
            )));
        }
        if !(self.p_value > 0.0 && self.p_value < 1.0) {
            return Err(BorutaError::InvalidConfig(format!(
                "p_value must lie in (0, 1), got {}",
                self.p_value
            )));
        }
        Ok(())
    }
}

/// Importance of one attribute in one run, with shadows reported against
/// the attribute they were shuffled from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunImportance {
    pub attribute: usize,
    pub shadow: bool,
    pub z_score: f64,
}

/// Outcome per predictor, in the order of [`BorutaResult::attributes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaResult {
    /// Attribute indices of the predictors in the input dataset.
    pub attributes: Vec<usize>,
    pub names: Vec<String>,
    pub decisions: Vec<FeatureDecision>,
    pub hit_counts: Vec<usize>,
    /// Run at which the decision became final.
    pub decided_at: Vec<Option<usize>>,
    /// z score in the last run the attribute took part in.
    pub last_z: Vec<f64>,
    pub runs_completed: usize,
    pub z_history: Vec<Vec<RunImportance>>,
}

impl BorutaResult {
    fn with(&self, decision: FeatureDecision) -> Vec<usize> {
        self.attributes
            .iter()
            .zip(&self.decisions)
            .filter(|(_, &d)| d == decision)
            .map(|(&a, _)| a)
            .collect()
    }

    pub fn confirmed(&self) -> Vec<usize> {
        self.with(FeatureDecision::Confirmed)
    }

    pub fn tentative(&self) -> Vec<usize> {
        self.with(FeatureDecision::Tentative)
    }

    pub fn rejected(&self) -> Vec<usize> {
        self.with(FeatureDecision::Rejected)
    }

    pub fn n_predictors(&self) -> usize {
        self.attributes.len()
    }

    /// Share of predictors not confirmed.
    pub fn reduction(&self) -> f64 {
        1.0 - self.confirmed().len() as f64 / self.n_predictors() as f64
    }
}

fn permuted(column: &[f64], rng: &mut Rng) -> Vec<f64> {
    let mut c = column.to_vec();
    c.shuffle(rng);
    c
}

/// Appends one shuffled copy of every predictor (at least five copies in
/// total, cycling through the predictors) after the existing attributes.
pub fn shadow_extend(ds: &Dataset, rng: &mut Rng) -> Result<Dataset, BorutaError> {
    let predictors = ds.predictor_indices();
    if predictors.is_empty() {
        return Err(BorutaError::NoPredictors);
    }
    let n_shadows = predictors.len().max(MIN_SHADOWS);
    let mut specs = Vec::with_capacity(n_shadows);
    let mut columns = Vec::with_capacity(n_shadows);
    for s in 0..n_shadows {
        let source = predictors[s % predictors.len()];
        let column: Vec<f64> = ds.rows().iter().map(|r| r[source]).collect();
        let attr = ds.attribute(source);
        specs.push(AttributeSpec::new(
            format!("shadow{s}_{}", attr.name),
            attr.kind.clone(),
        ));
        columns.push(permuted(&column, rng));
    }
    Ok(ds.with_appended_columns(specs, columns))
}

fn tree_accuracy(forest: &RandomForest, t: usize, ds: &Dataset, rows: &[Vec<f64>]) -> f64 {
    let oob = forest.oob_indices(t);
    let tree = &forest.trees()[t];
    let correct = oob
        .iter()
        .zip(rows)
        .filter(|(&i, row)| tree.predict_class(row) == ds.class_of(i))
        .count();
    correct as f64 / oob.len() as f64
}

/// Per-predictor out-of-bag permutation importance of a forest fitted on
/// `ds`. Trees without out-of-bag rows are skipped; a tree that never
/// tests an attribute contributes a loss of zero for it.
pub fn permutation_importance(
    ds: &Dataset,
    forest: &RandomForest,
    seed: u64,
) -> Result<Vec<ImportanceRecord>, BorutaError> {
    let trees: Vec<usize> = (0..forest.trees().len())
        .filter(|&t| !forest.oob_indices(t).is_empty())
        .collect();
    if trees.is_empty() {
        return Err(BorutaError::NoOobSamples);
    }
    let oob_rows: Vec<Vec<Vec<f64>>> = trees
        .iter()
        .map(|&t| {
            forest
                .oob_indices(t)
                .iter()
                .map(|&i| ds.row(i).to_vec())
                .collect()
        })
        .collect();
    let base: Vec<f64> = trees
        .iter()
        .zip(&oob_rows)
        .map(|(&t, rows)| tree_accuracy(forest, t, ds, rows))
        .collect();

    Ok(ds
        .predictor_indices()
        .into_par_iter()
        .map(|attr| {
            let losses: Vec<f64> = trees
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    if !forest.trees()[t].uses_attribute(attr) {
                        return 0.0;
                    }
                    let mut rng = rng_from_seed(derive_seed(derive_seed(seed, attr as u64), t as u64));
                    let column: Vec<f64> = oob_rows[k].iter().map(|r| r[attr]).collect();
                    let shuffled = permuted(&column, &mut rng);
                    let mut rows = oob_rows[k].clone();
                    for (r, v) in rows.iter_mut().zip(shuffled) {
                        r[attr] = v;
                    }
                    base[k] - tree_accuracy(forest, t, ds, &rows)
                })
                .collect();
            let n = losses.len() as f64;
            let mean = losses.iter().sum::<f64>() / n;
            let sd = if losses.len() > 1 {
                (losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            ImportanceRecord {
                attribute: attr,
                mean_loss: mean,
                z_score: if sd > 0.0 { mean / sd } else { 0.0 },
            }
        })
        .collect())
}

/// `P(X >= hits)` and `P(X <= hits)` for `X ~ Binomial(runs, 1/2)`.
fn hit_tails(hits: usize, runs: usize) -> (f64, f64) {
    let b = Binomial::new(0.5, runs as u64).expect("p = 0.5 is valid");
    let upper = if hits == 0 { 1.0 } else { b.sf(hits as u64 - 1) };
    (upper, b.cdf(hits as u64))
}

pub fn boruta_run(ds: &Dataset, config: &BorutaConfig) -> Result<BorutaResult, BorutaError> {
    config.validate()?;
    let attributes = ds.predictor_indices();
    if attributes.is_empty() {
        return Err(BorutaError::NoPredictors);
    }
    let p = attributes.len();
    let mut result = BorutaResult {
        names: attributes.iter().map(|&a| ds.attribute(a).name.clone()).collect(),
        attributes: attributes.clone(),
        decisions: vec![FeatureDecision::Tentative; p],
        hit_counts: vec![0; p],
        decided_at: vec![None; p],
        last_z: vec![0.0; p],
        runs_completed: 0,
        z_history: Vec::new(),
    };

    for run in 1..=config.max_runs {
        if !result.decisions.contains(&FeatureDecision::Tentative) {
            break;
        }
        // positions into `attributes` still in play
        let active: Vec<usize> = (0..p)
            .filter(|&j| result.decisions[j] != FeatureDecision::Rejected)
            .collect();
        let reduced = ds.select_predictors(&active.iter().map(|&j| attributes[j]).collect::<Vec<_>>());
        let run_seed = derive_seed(config.seed, run as u64);
        let mut rng = rng_from_seed(derive_seed(run_seed, 0));
        let extended = shadow_extend(&reduced, &mut rng)?;
        let forest = train_random_forest(&extended, &config.forest, derive_seed(run_seed, 1))?;
        let importance = permutation_importance(&extended, &forest, derive_seed(run_seed, 2))?;

        // predictors of `reduced` come first in `extended`, in `active` order
        let n_orig = reduced.n_attributes();
        let reduced_predictors = reduced.predictor_indices();
        let mut history = Vec::with_capacity(importance.len());
        let mut shadow_max = f64::NEG_INFINITY;
        let mut original_z = vec![0.0; active.len()];
        for rec in &importance {
            if rec.attribute >= n_orig {
                shadow_max = shadow_max.max(rec.z_score);
                let source = (rec.attribute - n_orig) % active.len();
                history.push(RunImportance {
                    attribute: attributes[active[source]],
                    shadow: true,
                    z_score: rec.z_score,
                });
            } else {
                let pos = reduced_predictors
                    .iter()
                    .position(|&a| a == rec.attribute)
                    .expect("predictor of the reduced dataset");
                original_z[pos] = rec.z_score;
                history.push(RunImportance {
                    attribute: attributes[active[pos]],
                    shadow: false,
                    z_score: rec.z_score,
                });
            }
        }
        for (pos, &j) in active.iter().enumerate() {
            result.last_z[j] = original_z[pos];
            if original_z[pos] > shadow_max {
                result.hit_counts[j] += 1;
            }
        }
        result.z_history.push(history);
        result.runs_completed = run;

        let undecided: Vec<usize> = (0..p)
            .filter(|&j| result.decisions[j] == FeatureDecision::Tentative)
            .collect();
        let threshold = config.p_value / undecided.len() as f64;
        for j in undecided {
            let (upper, lower) = hit_tails(result.hit_counts[j], run);
            if upper < threshold {
                result.decisions[j] = FeatureDecision::Confirmed;
                result.decided_at[j] = Some(run);
            } else if lower < threshold {
                result.decisions[j] = FeatureDecision::Rejected;
                result.decided_at[j] = Some(run);
            }
        }
    }
    Ok(result)
}

/// Keeps the confirmed predictors (and optionally the tentative ones) plus
/// the class, in their original order.
pub fn reduce_dataset(
    ds: &Dataset,
    result: &BorutaResult,
    include_tentative: bool,
) -> Result<Dataset, BorutaError> {
    let mut keep = result.confirmed();
    if include_tentative {
        keep.extend(result.tentative());
    }
    if keep.is_empty() {
        return Err(BorutaError::NothingConfirmed);
    }
    Ok(ds.select_predictors(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn quick() -> BorutaConfig {
        BorutaConfig {
            max_runs: 40,
            forest: ForestParams {
                n_trees: 60,
                ..ForestParams::default()
            },
            ..BorutaConfig::default()
        }
    }

    #[test]
    fn shadows_are_column_permutations() {
        let ds = synthetic::planted_signal(40, 1, 2, 3);
        let ext = shadow_extend(&ds, &mut rng_from_seed(1)).unwrap();
        assert_eq!(ext.n_predictors(), 8);
        assert_eq!(ext.n_attributes(), 9);
        assert_eq!(ext.class_index(), ds.class_index());

        let ds = synthetic::planted_signal(40, 3, 5, 3);
        let ext = shadow_extend(&ds, &mut rng_from_seed(1)).unwrap();
        assert_eq!(ext.n_predictors(), 16);
        for (s, src) in ds.predictor_indices().into_iter().enumerate() {
            let mut a: Vec<f64> = ds.rows().iter().map(|r| r[src]).collect();
            let mut b: Vec<f64> = ext.rows().iter().map(|r| r[ds.n_attributes() + s]).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn three_predictors_get_at_least_five_shadows() {
        let ds = synthetic::planted_signal(20, 1, 2, 0);
        let ext = shadow_extend(&ds, &mut rng_from_seed(0)).unwrap();
        assert_eq!(ext.n_attributes() - ds.n_attributes(), 5);
    }

    #[test]
    fn no_predictors() {
        let ds = synthetic::planted_signal(10, 0, 0, 0);
        assert_eq!(
            shadow_extend(&ds, &mut rng_from_seed(0)).unwrap_err(),
            BorutaError::NoPredictors
        );
    }

    #[test]
    fn shadow_of_class_copy_is_uncorrelated() {
        let ds = synthetic::planted_signal(100, 1, 0, 8);
        let mut rng = rng_from_seed(2);
        let mut total = 0.0;
        for _ in 0..50 {
            let ext = shadow_extend(&ds, &mut rng).unwrap();
            let x: Vec<f64> = ext.rows().iter().map(|r| r[2]).collect();
            let y: Vec<f64> = (0..100).map(|i| ds.class_of(i) as f64).collect();
            total += pearson(&x, &y).abs();
        }
        assert!(total / 50.0 < 0.3);
    }

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn perfect_predictor_dominates_importance() {
        let ds = synthetic::planted_signal(100, 1, 10, 5);
        let forest = train_random_forest(&ds, &ForestParams::default(), 5).unwrap();
        let imp = permutation_importance(&ds, &forest, 5).unwrap();
        let best = imp.iter().max_by(|a, b| a.z_score.total_cmp(&b.z_score)).unwrap();
        assert_eq!(best.attribute, 0);
    }

    #[test]
    fn constant_attribute_scores_zero() {
        let ds = synthetic::planted_signal(60, 1, 3, 5);
        let rows: Vec<Vec<f64>> = ds
            .rows()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r[1] = 1.0;
                r
            })
            .collect();
        let ds = Dataset::new("c", ds.attributes().to_vec(), ds.class_index(), rows).unwrap();
        let forest = train_random_forest(&ds, &ForestParams::default(), 1).unwrap();
        let imp = permutation_importance(&ds, &forest, 1).unwrap();
        assert_eq!(imp[1].mean_loss, 0.0);
        assert_eq!(imp[1].z_score, 0.0);
    }

    #[test]
    fn no_oob_rows() {
        let ds = synthetic::planted_signal(30, 1, 2, 0);
        let p = ForestParams {
            n_trees: 3,
            bootstrap: false,
            ..ForestParams::default()
        };
        let forest = train_random_forest(&ds, &p, 0).unwrap();
        assert_eq!(
            permutation_importance(&ds, &forest, 0).unwrap_err(),
            BorutaError::NoOobSamples
        );
    }

    #[test]
    fn planted_signals_are_confirmed() {
        let ds = synthetic::planted_signal(100, 3, 20, 21);
        let result = boruta_run(&ds, &quick()).unwrap();
        assert_eq!(result.confirmed(), vec![0, 1, 2]);
        assert!(result.rejected().len() >= 18);
        assert_eq!(
            result.confirmed().len() + result.tentative().len() + result.rejected().len(),
            23
        );
    }

    #[test]
    fn decisions_are_final_and_deterministic() {
        let ds = synthetic::planted_signal(80, 2, 8, 4);
        let a = boruta_run(&ds, &quick()).unwrap();
        let b = boruta_run(&ds, &quick()).unwrap();
        assert_eq!(a, b);
        for (j, at) in a.decided_at.iter().enumerate() {
            if let Some(run) = at {
                // a rejected attribute leaves the history after its run
                let later_appearances = a.z_history[*run..]
                    .iter()
                    .filter(|h| h.iter().any(|r| !r.shadow && r.attribute == a.attributes[j]))
                    .count();
                match a.decisions[j] {
                    FeatureDecision::Rejected => assert_eq!(later_appearances, 0),
                    FeatureDecision::Confirmed => assert_eq!(later_appearances, a.runs_completed - run),
                    FeatureDecision::Tentative => panic!("tentative attribute with a decision run"),
                }
            } else {
                assert_eq!(a.decisions[j], FeatureDecision::Tentative);
            }
        }
    }

    #[test]
    fn reduce_keeps_order_and_toggles_tentative() {
        let ds = synthetic::planted_signal(20, 2, 3, 0);
        let result = BorutaResult {
            attributes: vec![0, 1, 2, 3, 4],
            names: (0..5).map(|i| ds.attribute(i).name.clone()).collect(),
            decisions: vec![
                FeatureDecision::Confirmed,
                FeatureDecision::Rejected,
                FeatureDecision::Tentative,
                FeatureDecision::Confirmed,
                FeatureDecision::Rejected,
            ],
            hit_counts: vec![0; 5],
            decided_at: vec![None; 5],
            last_z: vec![0.0; 5],
            runs_completed: 0,
            z_history: vec![],
        };
        let names = |d: &Dataset| d.attributes().iter().map(|a| a.name.clone()).collect::<Vec<_>>();
        let r = reduce_dataset(&ds, &result, false).unwrap();
        assert_eq!(names(&r), vec!["signal0", "noise1", "class"]);
        let r = reduce_dataset(&ds, &result, true).unwrap();
        assert_eq!(names(&r), vec!["signal0", "noise0", "noise1", "class"]);
        assert!((result.reduction() - 0.6).abs() < 1e-12);

        let all = BorutaResult {
            decisions: vec![FeatureDecision::Confirmed; 5],
            ..result.clone()
        };
        assert_eq!(reduce_dataset(&ds, &all, false).unwrap(), ds);
        let none = BorutaResult {
            decisions: vec![FeatureDecision::Rejected; 5],
            ..result
        };
        assert_eq!(
            reduce_dataset(&ds, &none, true).unwrap_err(),
            BorutaError::NothingConfirmed
        );
    }

    #[test]
    fn config_validation() {
        let ds = synthetic::planted_signal(20, 1, 1, 0);
        let bad = BorutaConfig {
            max_runs: 6,
            ..BorutaConfig::default()
        };
        assert!(matches!(
            boruta_run(&ds, &bad),
            Err(BorutaError::InvalidConfig(_))
        ));
        let bad = BorutaConfig {
            p_value: 1.0,
            ..BorutaConfig::default()
        };
        assert!(matches!(
            boruta_run(&ds, &bad),
            Err(BorutaError::InvalidConfig(_))
        ));
    }

    #[test]
    fn binomial_tails() {
        let (up, low) = hit_tails(7, 7);
        assert!((up - 0.5f64.powi(7)).abs() < 1e-15);
        assert!((low - 1.0).abs() < 1e-15);
        let (up, low) = hit_tails(0, 7);
        assert_eq!(up, 1.0);
        assert!((low - 0.5f64.powi(7)).abs() < 1e-15);
    }
}
