//! Accuracy, probability-vector RMSE, confusion matrices and ROC analysis
//! for multiclass probabilistic predictions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no prediction records")]
    EmptyInput,
    #[error("labels contain a single class; ROC analysis needs positives and negatives")]
    DegenerateLabels,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// One scored instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub truth: usize,
    pub distribution: Vec<f64>,
    pub predicted: usize,
}

impl PredictionRecord {
    pub fn new(truth: usize, distribution: Vec<f64>) -> Result<Self, MetricsError> {
        if distribution.is_empty() || truth >= distribution.len() {
            return Err(MetricsError::InvalidDistribution(format!(
                "truth {truth} outside {} classes",
                distribution.len()
            )));
        }
        if distribution.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(MetricsError::InvalidDistribution(
                "negative or non-finite probability".into(),
            ));
        }
        let sum: f64 = distribution.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidDistribution(format!(
                "probabilities sum to {sum}"
            )));
        }
        let predicted = argmax(&distribution);
        Ok(Self {
            truth,
            distribution,
            predicted,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.distribution.len()
    }

    pub fn is_correct(&self) -> bool {
        self.predicted == self.truth
    }
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub accuracy: f64,
    pub rmse: f64,
    pub weighted_auc: f64,
    /// `None` for classes absent from the truth labels.
    pub per_class_auc: Vec<Option<f64>>,
    pub confusion: ConfusionMatrix,
}

pub fn accuracy(records: &[PredictionRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let correct = records.iter().filter(|r| r.is_correct()).count();
    Ok(correct as f64 / records.len() as f64)
}

/// Root mean squared difference between predicted probability vectors and
/// one-hot truth vectors, averaged over instances and classes.
pub fn rmse(records: &[PredictionRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sum = 0.0;
    let mut cells = 0usize;
    for r in records {
        for (c, &p) in r.distribution.iter().enumerate() {
            let y = if c == r.truth { 1.0 } else { 0.0 };
            sum += (p - y) * (p - y);
        }
        cells += r.n_classes();
    }
    Ok((sum / cells as f64).sqrt())
}

pub fn confusion(records: &[PredictionRecord]) -> Result<ConfusionMatrix, MetricsError> {
    let n_classes = records.first().ok_or(MetricsError::EmptyInput)?.n_classes();
    let mut counts = vec![vec![0; n_classes]; n_classes];
    for r in records {
        counts[r.truth][r.predicted] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// ROC curve from a threshold sweep over the distinct scores in descending
/// order. Tied scores move the curve diagonally in a single step.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // fpr = 1 - specificity
        let specificity = (negatives - fp) as f64 / negatives as f64;
        points.push(RocPoint {
            fpr: 1.0 - specificity,
            tpr: tp as f64 / positives as f64,
        });
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// One-vs-rest AUC per class and their prior-weighted mean. Classes absent
/// from the truth labels get `None` and are excluded from the mean.
pub fn weighted_multiclass_auc(
    records: &[PredictionRecord],
) -> Result<(f64, Vec<Option<f64>>), MetricsError> {
    let n_classes = records.first().ok_or(MetricsError::EmptyInput)?.n_classes();
    let mut class_counts = vec![0usize; n_classes];
    for r in records {
        class_counts[r.truth] += 1;
    }
    if class_counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(MetricsError::DegenerateLabels);
    }
    let mut per_class = vec![None; n_classes];
    let mut weighted = 0.0;
    for c in 0..n_classes {
        if class_counts[c] == 0 {
            continue;
        }
        let scores: Vec<f64> = records.iter().map(|r| r.distribution[c]).collect();
        let labels: Vec<bool> = records.iter().map(|r| r.truth == c).collect();
        let area = auc(&roc_curve(&scores, &labels)?);
        per_class[c] = Some(area);
        weighted += area * class_counts[c] as f64;
    }
    Ok((weighted / records.len() as f64, per_class))
}

/// All metrics at once. When fewer than two classes occur in the truth
/// labels the AUC fields are NaN / `None`.
pub fn evaluate(records: &[PredictionRecord]) -> Result<EvalSummary, MetricsError> {
    let (weighted_auc, per_class_auc) = match weighted_multiclass_auc(records) {
        Ok(v) => v,
        Err(MetricsError::DegenerateLabels) => (f64::NAN, vec![None; records[0].n_classes()]),
        Err(e) => return Err(e),
    };
    Ok(EvalSummary {
        accuracy: accuracy(records)?,
        rmse: rmse(records)?,
        weighted_auc,
        per_class_auc,
        confusion: confusion(records)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(truth: usize, dist: &[f64]) -> PredictionRecord {
        PredictionRecord::new(truth, dist.to_vec()).unwrap()
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.25, 0.5, 0.25, 0.5 - 0.0]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(rec(1, &[0.5, 0.5]).predicted, 0);
    }

    #[test]
    fn record_validation() {
        assert!(PredictionRecord::new(0, vec![0.7, 0.7]).is_err());
        assert!(PredictionRecord::new(2, vec![0.5, 0.5]).is_err());
        assert!(PredictionRecord::new(0, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn six_of_seven() {
        let mut records: Vec<_> = (0..6).map(|_| rec(0, &[1.0, 0.0])).collect();
        records.push(rec(1, &[1.0, 0.0]));
        assert!((accuracy(&records).unwrap() - 6.0 / 7.0).abs() < 1e-15);
        let all: Vec<_> = (0..4)
            .map(|i| rec(i % 2, &if i % 2 == 0 { [1.0, 0.0] } else { [0.0, 1.0] }))
            .collect();
        assert_eq!(accuracy(&all).unwrap(), 1.0);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(accuracy(&[]), Err(MetricsError::EmptyInput));
        assert_eq!(rmse(&[]), Err(MetricsError::EmptyInput));
        assert!(confusion(&[]).is_err());
    }

    #[test]
    fn rmse_worked_examples() {
        assert_eq!(rmse(&[rec(0, &[1.0, 0.0]), rec(1, &[0.0, 1.0])]).unwrap(), 0.0);
        assert!((rmse(&[rec(0, &[0.5, 0.5])]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn confusion_cells() {
        let m = confusion(&[rec(2, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0])]).unwrap();
        assert_eq!(m.counts[2][5], 1);
        assert_eq!(m.total(), 1);
        assert_eq!(m.trace(), 0);
    }

    #[test]
    fn roc_corner_cases() {
        let perfect = roc_curve(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert!(perfect.points.contains(&RocPoint { fpr: 0.0, tpr: 1.0 }));
        assert_eq!(auc(&perfect), 1.0);

        let flat = roc_curve(&[0.3; 4], &[true, false, true, false]).unwrap();
        assert_eq!(
            flat.points,
            vec![RocPoint { fpr: 0.0, tpr: 0.0 }, RocPoint { fpr: 1.0, tpr: 1.0 }]
        );
        assert_eq!(auc(&flat), 0.5);

        assert_eq!(
            roc_curve(&[0.1, 0.2], &[true, true]),
            Err(MetricsError::DegenerateLabels)
        );
    }

    #[test]
    fn worked_roc_example() {
        let curve = roc_curve(&[0.9, 0.4, 0.35, 0.8], &[true, false, true, true]).unwrap();
        assert!((auc(&curve) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_auc_arithmetic() {
        // class 0 perfectly ranked, class 1 scores constant
        let records = vec![
            rec(0, &[0.9, 0.1]),
            rec(0, &[0.8, 0.2]),
            rec(0, &[0.7, 0.3]),
            rec(1, &[0.1, 0.9]),
        ];
        let (w, per) = weighted_multiclass_auc(&records).unwrap();
        assert_eq!(per, vec![Some(1.0), Some(1.0)]);
        assert_eq!(w, 1.0);

        let records = vec![
            rec(0, &[0.9, 0.1, 0.0]),
            rec(0, &[0.8, 0.1, 0.1]),
            rec(0, &[0.7, 0.1, 0.2]),
            rec(1, &[0.1, 0.1, 0.8]),
        ];
        let (w, per) = weighted_multiclass_auc(&records).unwrap();
        assert_eq!(per, vec![Some(1.0), Some(0.5), None]);
        assert!((w - 0.875).abs() < 1e-12);
    }

    #[test]
    fn single_class_truth_is_degenerate() {
        let records = vec![rec(0, &[0.9, 0.1]), rec(0, &[0.4, 0.6])];
        assert_eq!(
            weighted_multiclass_auc(&records),
            Err(MetricsError::DegenerateLabels)
        );
        assert!(evaluate(&records).unwrap().weighted_auc.is_nan());
    }
}
