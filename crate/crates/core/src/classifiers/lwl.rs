//! Locally weighted learning: a lazy learner that, for every query, weights
//! the stored training rows by their distance to it and fits a weighted
//! decision stump.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

use super::encode::{min_max, scale};
use super::{ClassifierError, ProbabilisticModel, Schema};

/// Size of the neighbourhood that sets the kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NeighborsRepr", into = "NeighborsRepr")]
pub enum Neighbors {
    All,
    Count(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NeighborsRepr {
    Count(usize),
    Text(String),
}

impl TryFrom<NeighborsRepr> for Neighbors {
    type Error = String;

    fn try_from(r: NeighborsRepr) -> Result<Self, String> {
        match r {
            NeighborsRepr::Count(0) => Err("neighbors must be >= 1".into()),
            NeighborsRepr::Count(k) => Ok(Neighbors::Count(k)),
            NeighborsRepr::Text(s) if s.eq_ignore_ascii_case("all") => Ok(Neighbors::All),
            NeighborsRepr::Text(s) => Err(format!("neighbors must be a count or \"all\", got `{s}`")),
        }
    }
}

impl From<Neighbors> for NeighborsRepr {
    fn from(n: Neighbors) -> Self {
        match n {
            Neighbors::All => NeighborsRepr::Text("all".into()),
            Neighbors::Count(k) => NeighborsRepr::Count(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LwlParams {
    pub neighbors: Neighbors,
}

impl Default for LwlParams {
    fn default() -> Self {
        Self {
            neighbors: Neighbors::All,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Range {
    Numeric { min: f64, range: f64 },
    Nominal,
}

#[derive(Debug)]
pub struct LwlModel {
    schema: Schema,
    params: LwlParams,
    ranges: Vec<Range>,
    rows: Vec<Vec<f64>>,
    classes: Vec<usize>,
    distance_evaluations: AtomicUsize,
}

pub fn train_lwl(train: &Dataset, params: &LwlParams) -> Result<LwlModel, ClassifierError> {
    if train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if params.neighbors == Neighbors::Count(0) {
        return Err(ClassifierError::InvalidParams("neighbors must be >= 1".into()));
    }
    let ranges = (0..train.n_attributes())
        .map(|a| {
            if train.attribute(a).kind.is_nominal() {
                Range::Nominal
            } else {
                let (min, max) = min_max(train, a);
                Range::Numeric {
                    min,
                    range: max - min,
                }
            }
        })
        .collect();
    Ok(LwlModel {
        schema: Schema::of(train),
        params: params.clone(),
        ranges,
        rows: train.rows().to_vec(),
        classes: (0..train.n_instances()).map(|i| train.class_of(i)).collect(),
        distance_evaluations: AtomicUsize::new(0),
    })
}

/// One-level tree on weighted rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Stump {
    Leaf(Vec<f64>),
    Equals {
        attr: usize,
        level: f64,
        yes: Vec<f64>,
        no: Vec<f64>,
    },
    AtMost {
        attr: usize,
        threshold: f64,
        yes: Vec<f64>,
        no: Vec<f64>,
    },
}

impl Stump {
    pub fn distribution(&self, row: &[f64]) -> &[f64] {
        match self {
            Stump::Leaf(d) => d,
            Stump::Equals { attr, level, yes, no } => {
                if row[*attr] == *level {
                    yes
                } else {
                    no
                }
            }
            Stump::AtMost {
                attr,
                threshold,
                yes,
                no,
            } => {
                if row[*attr] <= *threshold {
                    yes
                } else {
                    no
                }
            }
        }
    }
}

fn entropy_weight(counts: &[f64]) -> f64 {
    // total * entropy, in nats
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| -c * (c / total).ln())
        .sum()
}

fn laplace(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    let k = counts.len() as f64;
    counts.iter().map(|c| (c + 1.0) / (total + k)).collect()
}

/// Fits the stump with the smallest weighted child entropy; the earliest
/// candidate (attribute order, then level or threshold order) wins ties.
pub(crate) fn fit_stump(schema: &Schema, rows: &[&[f64]], classes: &[usize], weights: &[f64]) -> Stump {
    let n_classes = schema.n_classes();
    let mut total = vec![0.0; n_classes];
    for (&c, &w) in classes.iter().zip(weights) {
        total[c] += w;
    }
    let mut best: Option<(f64, Stump)> = None;
    let mut offer = |score: f64, make: &dyn Fn() -> Stump| {
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, make()));
        }
    };
    let minus =
        |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (x - y).max(0.0)).collect() };

    for attr in schema.predictors() {
        match schema.attributes[attr].kind.n_levels() {
            Some(levels) => {
                let mut counts = vec![vec![0.0; n_classes]; levels];
                for ((r, &c), &w) in rows.iter().zip(classes).zip(weights) {
                    if let Some(cell) = counts.get_mut(r[attr] as usize) {
                        cell[c] += w;
                    }
                }
                for (level, yes) in counts.iter().enumerate() {
                    let yes_w: f64 = yes.iter().sum();
                    let no = minus(&total, yes);
                    let no_w: f64 = no.iter().sum();
                    if yes_w <= 0.0 || no_w <= 0.0 {
                        continue;
                    }
                    let score = entropy_weight(yes) + entropy_weight(&no);
                    offer(score, &|| Stump::Equals {
                        attr,
                        level: level as f64,
                        yes: laplace(yes),
                        no: laplace(&no),
                    });
                }
            }
            None => {
                let mut order: Vec<usize> = (0..rows.len()).collect();
                order.sort_by(|&a, &b| rows[a][attr].total_cmp(&rows[b][attr]));
                let mut left = vec![0.0; n_classes];
                for k in 0..order.len().saturating_sub(1) {
                    let i = order[k];
                    left[classes[i]] += weights[i];
                    let (v, next) = (rows[i][attr], rows[order[k + 1]][attr]);
                    if next <= v {
                        continue;
                    }
                    let right = minus(&total, &left);
                    let score = entropy_weight(&left) + entropy_weight(&right);
                    let threshold = (v + next) / 2.0;
                    let yes = left.clone();
                    offer(score, &|| Stump::AtMost {
                        attr,
                        threshold,
                        yes: laplace(&yes),
                        no: laplace(&right),
                    });
                }
            }
        }
    }
    best.map_or_else(|| Stump::Leaf(laplace(&total)), |(_, s)| s)
}

impl LwlModel {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.distance_evaluations.fetch_add(1, Ordering::Relaxed);
        let mut sum = 0.0;
        for attr in self.schema.predictors() {
            let d = match self.ranges[attr] {
                Range::Numeric { min, range } => scale(a[attr], min, range) - scale(b[attr], min, range),
                Range::Nominal => {
                    if a[attr] == b[attr] {
                        0.0
                    } else {
                        1.0
                    }
                }
            };
            sum += d * d;
        }
        sum.sqrt()
    }

    /// Kernel weights of the stored rows for a query, rescaled to sum to
    /// the row count.
    pub fn weights(&self, instance: &[f64]) -> Vec<f64> {
        let dist: Vec<f64> = self.rows.iter().map(|r| self.distance(instance, r)).collect();
        let mut sorted = dist.clone();
        sorted.sort_by(f64::total_cmp);
        let k = match self.params.neighbors {
            Neighbors::All => sorted.len(),
            Neighbors::Count(k) => k.min(sorted.len()),
        };
        let bandwidth = sorted[k - 1];
        let mut w: Vec<f64> = dist
            .iter()
            .map(|&d| {
                if bandwidth > 0.0 {
                    (1.0 - d / bandwidth).max(0.0)
                } else if d == 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            w.iter_mut().for_each(|x| *x = 1.0);
        } else {
            let n = w.len() as f64;
            w.iter_mut().for_each(|x| *x *= n / sum);
        }
        w
    }

    /// Distance computations performed so far by this model.
    pub fn distance_evaluations(&self) -> usize {
        self.distance_evaluations.load(Ordering::Relaxed)
    }

    /// Drops the stored training rows; later predictions fail.
    pub fn forget_training_data(&mut self) {
        self.rows.clear();
        self.classes.clear();
    }
}

impl Clone for LwlModel {
    fn clone(&self) -> Self {
        Self {
            schema: self.schema.clone(),
            params: self.params.clone(),
            ranges: self.ranges.clone(),
            rows: self.rows.clone(),
            classes: self.classes.clone(),
            distance_evaluations: AtomicUsize::new(self.distance_evaluations()),
        }
    }
}

impl ProbabilisticModel for LwlModel {
    fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    fn predict_distribution(&self, instance: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        self.schema.check(instance)?;
        if self.rows.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        let weights = self.weights(instance);
        let mut rows = Vec::new();
        let mut classes = Vec::new();
        let mut kept = Vec::new();
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                rows.push(self.rows[i].as_slice());
                classes.push(self.classes[i]);
                kept.push(w);
            }
        }
        let stump = fit_stump(&self.schema, &rows, &classes, &kept);
        Ok(stump.distribution(instance).to_vec())
    }
}
