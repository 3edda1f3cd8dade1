//! Corrected resampled paired t-test.
//!
//! Cross-validation folds share most of their training data, so the
//! per-fold differences are correlated and the classical paired t-test is
//! overconfident. The variance term is inflated to
//! `var(d) · (1/n + n_test/n_train)`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{EvaluationError, FoldScores, Metric};
use crate::report::nullable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ABetter,
    BBetter,
    NoSignificantDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TStatistic {
    pub t: f64,
    pub degrees_of_freedom: usize,
    /// Two-sided.
    pub p_value: f64,
    pub mean: f64,
    pub variance: f64,
}

/// The corrected statistic for differences `d` and the ratio of test to
/// training set size. With zero variance the statistic is 0 when the mean
/// is 0 (p = 1) and infinite with the sign of the mean otherwise (p = 0).
pub fn corrected_resampled_t(d: &[f64], test_train_ratio: f64) -> TStatistic {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    // a constant vector has zero variance even when its mean rounds
    let variance = if d.iter().all(|&x| x == d[0]) {
        0.0
    } else {
        d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    };
    let df = d.len() - 1;
    if variance == 0.0 {
        return TStatistic {
            t: if mean == 0.0 {
                0.0
            } else {
                mean.signum() * f64::INFINITY
            },
            degrees_of_freedom: df,
            p_value: if mean == 0.0 { 1.0 } else { 0.0 },
            mean,
            variance,
        };
    }
    let t = mean / (variance * (1.0 / n + test_train_ratio)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    TStatistic {
        t,
        degrees_of_freedom: df,
        p_value: 2.0 * dist.sf(t.abs()),
        mean,
        variance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub model_a: String,
    pub model_b: String,
    pub metric: Metric,
    /// Mean of `a - b` over the paired folds.
    #[serde(with = "nullable")]
    pub mean_difference: f64,
    #[serde(with = "nullable")]
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    #[serde(with = "nullable")]
    pub p_value: f64,
    pub verdict: Verdict,
}

/// Compares two models' scores on the same folds. Pairs where either value
/// is NaN are dropped. "Better" follows the metric's direction, so for RMSE
/// the model with the lower error wins.
pub fn corrected_paired_ttest(
    a: &FoldScores,
    b: &FoldScores,
    alpha: f64,
) -> Result<ComparisonResult, EvaluationError> {
    if a.values.len() != b.values.len() {
        return Err(EvaluationError::LengthMismatch {
            a: a.values.len(),
            b: b.values.len(),
        });
    }
    if a.metric != b.metric || a.plans != b.plans || a.n_test != b.n_test {
        return Err(EvaluationError::UnalignedFoldPlans);
    }
    let mut d = Vec::with_capacity(a.values.len());
    let (mut n_test, mut n_train) = (0usize, 0usize);
    for i in 0..a.values.len() {
        let (x, y) = (a.values[i], b.values[i]);
        if x.is_nan() || y.is_nan() {
            continue;
        }
        d.push(x - y);
        n_test += a.n_test[i];
        n_train += a.n_train[i];
    }
    if d.len() < 2 || n_train == 0 {
        return Err(EvaluationError::TooFewPairs);
    }
    let stat = corrected_resampled_t(&d, n_test as f64 / n_train as f64);
    let verdict = if stat.p_value >= alpha {
        Verdict::NoSignificantDifference
    } else if (stat.mean > 0.0) == a.metric.higher_is_better() {
        Verdict::ABetter
    } else {
        Verdict::BBetter
    };
    Ok(ComparisonResult {
        model_a: a.model_id.clone(),
        model_b: b.model_id.clone(),
        metric: a.metric,
        mean_difference: stat.mean,
        t_statistic: stat.t,
        degrees_of_freedom: stat.degrees_of_freedom,
        p_value: stat.p_value,
        verdict,
    })
}
