//! Linear support vector machine trained by sequential minimal optimization,
//! extended to multiclass by one-vs-one voting.
//!
//! The binary solver works on the dual
//!
//! ```text
//! min ½ αᵀQα − eᵀα   s.t. 0 ≤ αᵢ ≤ C,  yᵀα = 0,   Qᵢⱼ = yᵢyⱼ⟨xᵢ, xⱼ⟩
//! ```
//!
//! and picks, at every step, the pair of coordinates that violates the KKT
//! conditions the most. It stops once the violation gap falls below the
//! tolerance.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::rng::{derive_seed, rng_from_seed, Rng};

use super::encode::FeatureEncoder;
use super::{ClassifierError, ProbabilisticModel, Schema};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoParams {
    pub c: f64,
    pub tolerance: f64,
    /// Iteration budget, in units of `1000 × n` updates per binary problem.
    pub max_passes: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

impl SmoParams {
    fn validate(&self) -> Result<(), ClassifierError> {
        if self.c.is_nan()
            || self.c <= 0.0
            || self.tolerance.is_nan()
            || self.tolerance <= 0.0
            || self.max_passes == 0
        {
            return Err(ClassifierError::InvalidParams(
                "SMO needs c > 0, tolerance > 0, max_passes >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A solved binary problem. `f(x) = ⟨w, x⟩ + bias`; positive means the
/// first class of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl BinarySvm {
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves one binary problem on encoded points with labels ±1.
pub fn solve_binary(points: &[Vec<f64>], labels: &[f64], params: &SmoParams, rng: &mut Rng) -> BinarySvm {
    let n = points.len();
    let c = params.c;
    let kernel: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| dot(a, b)).collect())
        .collect();
    let q = |i: usize, j: usize| labels[i] * labels[j] * kernel[i][j];

    let mut alpha = vec![0.0; n];
    // gradient of the dual objective: Qα − e
    let mut grad = vec![-1.0; n];
    let max_iter = params.max_passes.saturating_mul(1000).saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut ties = Vec::new();
    while iterations < max_iter {
        // i: maximal −y∇f over I_up (random among exact ties)
        let mut g_max = f64::NEG_INFINITY;
        ties.clear();
        for t in 0..n {
            if in_up(alpha[t], labels[t]) {
                let v = -labels[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    ties.clear();
                    ties.push(t);
                } else if v == g_max {
                    ties.push(t);
                }
            }
        }
        if ties.is_empty() {
            converged = true;
            break;
        }
        let i = ties[rng.random_range(0..ties.len())];

        let mut g_min = f64::INFINITY;
        ties.clear();
        for t in 0..n {
            if in_low(alpha[t], labels[t]) {
                let v = -labels[t] * grad[t];
                if v < g_min {
                    g_min = v;
                    ties.clear();
                    ties.push(t);
                } else if v == g_min {
                    ties.push(t);
                }
            }
        }
        if ties.is_empty() || g_max - g_min <= params.tolerance {
            converged = true;
            break;
        }
        let j = ties[rng.random_range(0..ties.len())];
        iterations += 1;

        let (yi, yj) = (labels[i], labels[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let curvature = (kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j]).max(TAU);
        // move along yᵢΔαᵢ = −yⱼΔαⱼ, then clip to the box
        let step = (g_max - g_min) / curvature;
        let sum = yi * old_i + yj * old_j;
        let mut ai = (old_i + yi * step).clamp(0.0, c);
        let mut aj = yj * (sum - yi * ai);
        if aj < 0.0 || aj > c {
            aj = aj.clamp(0.0, c);
            ai = yi * (sum - yj * aj);
            ai = ai.clamp(0.0, c);
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    let bias = -compute_rho(&alpha, &grad, labels, c);
    let dim = points.first().map_or(0, Vec::len);
    let mut weights = vec![0.0; dim];
    for (t, p) in points.iter().enumerate() {
        if alpha[t] > 0.0 {
            for (w, x) in weights.iter_mut().zip(p) {
                *w += alpha[t] * labels[t] * x;
            }
        }
    }
    BinarySvm {
        weights,
        bias,
        alphas: alpha,
        converged,
        iterations,
    }
}

/// Offset from free support vectors, or the midpoint of the feasible
/// interval when none are free.
fn compute_rho(alpha: &[f64], grad: &[f64], labels: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = labels[t] * grad[t];
        if alpha[t] >= c {
            if labels[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if labels[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
struct PairModel {
    first: usize,
    second: usize,
    svm: BinarySvm,
}

#[derive(Debug, Clone)]
pub struct SvmModel {
    schema: Schema,
    encoder: FeatureEncoder,
    pairs: Vec<PairModel>,
}

pub fn train_svm(train: &Dataset, params: &SmoParams, seed: u64) -> Result<SvmModel, ClassifierError> {
    params.validate()?;
    if train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let present: Vec<usize> = train
        .class_counts()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(c, _)| c)
        .collect();
    if present.len() < 2 {
        return Err(ClassifierError::SingleClassTrainingSet);
    }
    let encoder = FeatureEncoder::fit(train);
    let encoded: Vec<Vec<f64>> = train.rows().iter().map(|r| encoder.encode(r)).collect();

    let mut jobs = Vec::new();
    for (a, &first) in present.iter().enumerate() {
        for &second in &present[a + 1..] {
            jobs.push((first, second));
        }
    }
    let pairs = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(first, second))| {
            let mut points = Vec::new();
            let mut labels = Vec::new();
            for (i, p) in encoded.iter().enumerate() {
                let c = train.class_of(i);
                if c == first || c == second {
                    points.push(p.clone());
                    labels.push(if c == first { 1.0 } else { -1.0 });
                }
            }
            let mut rng = rng_from_seed(derive_seed(seed, k as u64));
            PairModel {
                first,
                second,
                svm: solve_binary(&points, &labels, params, &mut rng),
            }
        })
        .collect();
    Ok(SvmModel {
        schema: Schema::of(train),
        encoder,
        pairs,
    })
}

impl SvmModel {
    /// Binary machines in (first class, second class) order.
    pub fn binary_models(&self) -> impl Iterator<Item = (usize, usize, &BinarySvm)> {
        self.pairs.iter().map(|p| (p.first, p.second, &p.svm))
    }

    pub fn encode(&self, instance: &[f64]) -> Vec<f64> {
        self.encoder.encode(instance)
    }
}

impl ProbabilisticModel for SvmModel {
    fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    /// Pairwise votes normalized to sum to one; an exactly zero decision
    /// value splits its vote.
    fn predict_distribution(&self, instance: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        self.schema.check(instance)?;
        let x = self.encoder.encode(instance);
        let mut votes = vec![0.0; self.n_classes()];
        for p in &self.pairs {
            let f = p.svm.decision_value(&x);
            if f > 0.0 {
                votes[p.first] += 1.0;
            } else if f < 0.0 {
                votes[p.second] += 1.0;
            } else {
                votes[p.first] += 0.5;
                votes[p.second] += 0.5;
            }
        }
        let total = self.pairs.len() as f64;
        Ok(votes.into_iter().map(|v| v / total).collect())
    }
}
