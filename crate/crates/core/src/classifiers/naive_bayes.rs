//! Naïve Bayes with add-one smoothed priors and nominal likelihoods and
//! per-class Gaussian likelihoods for numeric attributes.
//!
//! The sufficient statistics ([`NbStats`]) are incremental so the Hoeffding
//! tree leaves can reuse them unchanged.

use crate::dataset::Dataset;

use super::{normalize, ClassifierError, ProbabilisticModel, Schema};

pub(crate) const VARIANCE_FLOOR: f64 = 1e-9;

/// Running mean / variance (Welford) plus observed range.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GaussianEstimator {
    pub weight: f64,
    pub mean: f64,
    m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for GaussianEstimator {
    fn default() -> Self {
        Self {
            weight: 0.0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl GaussianEstimator {
    pub fn add(&mut self, x: f64) {
        self.weight += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.weight;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Maximum-likelihood variance, floored.
    pub fn variance(&self) -> f64 {
        if self.weight > 0.0 {
            (self.m2 / self.weight).max(VARIANCE_FLOOR)
        } else {
            VARIANCE_FLOOR
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let var = self.variance();
        let d = x - self.mean;
        -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var)
    }

    /// P(X <= x) under the fitted normal.
    pub fn cdf(&self, x: f64) -> f64 {
        let sd = self.variance().sqrt();
        0.5 * (1.0 + statrs::function::erf::erf((x - self.mean) / (sd * std::f64::consts::SQRT_2)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum AttributeStats {
    Class,
    /// `[class][level]` counts.
    Nominal(Vec<Vec<f64>>),
    Numeric(Vec<GaussianEstimator>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NbStats {
    pub class_counts: Vec<f64>,
    pub attributes: Vec<AttributeStats>,
}

impl NbStats {
    pub fn new(schema: &Schema) -> Self {
        let n_classes = schema.n_classes();
        let attributes = schema
            .attributes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i == schema.class_index {
                    return AttributeStats::Class;
                }
                match a.kind.n_levels() {
                    Some(levels) => AttributeStats::Nominal(vec![vec![0.0; levels]; n_classes]),
                    None => AttributeStats::Numeric(vec![GaussianEstimator::default(); n_classes]),
                }
            })
            .collect();
        Self {
            class_counts: vec![0.0; n_classes],
            attributes,
        }
    }

    pub fn total(&self) -> f64 {
        self.class_counts.iter().sum()
    }

    pub fn update(&mut self, row: &[f64], class: usize) {
        self.class_counts[class] += 1.0;
        for (stats, &v) in self.attributes.iter_mut().zip(row) {
            match stats {
                AttributeStats::Class => {}
                AttributeStats::Nominal(counts) => {
                    if let Some(cell) = counts[class].get_mut(v as usize) {
                        *cell += 1.0;
                    }
                }
                AttributeStats::Numeric(est) => est[class].add(v),
            }
        }
    }

    /// Posterior class distribution, accumulated in log space.
    pub fn distribution(&self, row: &[f64]) -> Vec<f64> {
        let n_classes = self.class_counts.len();
        let total = self.total();
        let mut log_post: Vec<f64> = self
            .class_counts
            .iter()
            .map(|&n_c| ((n_c + 1.0) / (total + n_classes as f64)).ln())
            .collect();
        for (stats, &v) in self.attributes.iter().zip(row) {
            match stats {
                AttributeStats::Class => {}
                AttributeStats::Nominal(counts) => {
                    for (c, lp) in log_post.iter_mut().enumerate() {
                        let levels = counts[c].len() as f64;
                        let seen: f64 = counts[c].iter().sum();
                        let hits = counts[c].get(v as usize).copied().unwrap_or(0.0);
                        *lp += ((hits + 1.0) / (seen + levels)).ln();
                    }
                }
                AttributeStats::Numeric(est) => {
                    for (c, lp) in log_post.iter_mut().enumerate() {
                        // no observations for this class: uninformative
                        if est[c].weight > 0.0 {
                            *lp += est[c].log_density(v);
                        }
                    }
                }
            }
        }
        let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        normalize(log_post.iter().map(|lp| (lp - max).exp()).collect())
    }
}

#[derive(Debug, Clone)]
pub struct NaiveBayes {
    schema: Schema,
    stats: NbStats,
}

pub fn train_naive_bayes(train: &Dataset) -> Result<NaiveBayes, ClassifierError> {
    if train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let schema = Schema::of(train);
    let mut stats = NbStats::new(&schema);
    for (i, row) in train.rows().iter().enumerate() {
        stats.update(row, train.class_of(i));
    }
    Ok(NaiveBayes { schema, stats })
}

impl ProbabilisticModel for NaiveBayes {
    fn n_classes(&self) -> usize {
        self.stats.class_counts.len()
    }

    fn predict_distribution(&self, instance: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        self.schema.check(instance)?;
        Ok(self.stats.distribution(instance))
    }
}

impl NaiveBayes {
    pub fn class_counts(&self) -> &[f64] {
        &self.stats.class_counts
    }
}
