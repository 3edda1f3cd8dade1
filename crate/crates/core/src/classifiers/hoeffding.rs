//! Hoeffding tree (VFDT) with adaptive Naïve Bayes leaves.
//!
//! The training set is consumed once, in order. Each leaf keeps the same
//! sufficient statistics as [`super::naive_bayes`] and, every
//! `grace_period` instances, compares the information gain of its two best
//! candidate splits against the Hoeffding bound.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::metrics::argmax;

use super::naive_bayes::{AttributeStats, GaussianEstimator, NbStats};
use super::{normalize, ClassifierError, ProbabilisticModel, Schema};

const NUMERIC_THRESHOLDS: usize = 10;
const MIN_BRANCH_FRACTION: f64 = 0.01;

/// `ε = sqrt(R² ln(1/δ) / 2n)`.
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> f64 {
    (range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafStrategy {
    MajorityClass,
    NaiveBayes,
    /// Naïve Bayes unless the majority class has predicted the leaf's own
    /// training stream strictly better.
    NaiveBayesAdaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoeffdingParams {
    pub delta: f64,
    pub grace_period: usize,
    pub tie_threshold: f64,
    pub leaf_strategy: LeafStrategy,
}

impl Default for HoeffdingParams {
    fn default() -> Self {
        Self {
            delta: 1e-7,
            grace_period: 200,
            tie_threshold: 0.05,
            leaf_strategy: LeafStrategy::NaiveBayesAdaptive,
        }
    }
}

impl HoeffdingParams {
    fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ClassifierError::InvalidParams("delta must lie in (0, 1)".into()));
        }
        if self.grace_period == 0 {
            return Err(ClassifierError::InvalidParams("grace_period must be >= 1".into()));
        }
        if self.tie_threshold.is_nan() || self.tie_threshold < 0.0 {
            return Err(ClassifierError::InvalidParams(
                "tie_threshold must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Leaf {
    stats: NbStats,
    mc_correct: f64,
    nb_correct: f64,
    weight_at_last_check: f64,
}

impl Leaf {
    fn new(stats: NbStats) -> Self {
        let w = stats.total();
        Self {
            stats,
            mc_correct: 0.0,
            nb_correct: 0.0,
            weight_at_last_check: w,
        }
    }

    fn learn(&mut self, row: &[f64], class: usize) {
        if argmax(&self.stats.class_counts) == class {
            self.mc_correct += 1.0;
        }
        if argmax(&self.stats.distribution(row)) == class {
            self.nb_correct += 1.0;
        }
        self.stats.update(row, class);
    }

    fn uses_naive_bayes(&self, strategy: LeafStrategy) -> bool {
        match strategy {
            LeafStrategy::MajorityClass => false,
            LeafStrategy::NaiveBayes => true,
            LeafStrategy::NaiveBayesAdaptive => self.mc_correct <= self.nb_correct,
        }
    }

    fn distribution(&self, row: &[f64], strategy: LeafStrategy) -> Vec<f64> {
        if self.uses_naive_bayes(strategy) {
            self.stats.distribution(row)
        } else {
            normalize(self.stats.class_counts.clone())
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Leaf),
    Nominal {
        attr: usize,
        children: Vec<usize>,
    },
    Numeric {
        attr: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    schema: Schema,
    params: HoeffdingParams,
    nodes: Vec<Node>,
    n_splits: usize,
}

struct SplitCandidate {
    merit: f64,
    attr: usize,
    threshold: Option<f64>,
    /// `[branch][class]` weights after the split.
    branches: Vec<Vec<f64>>,
}

fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

/// Information gain, or zero when fewer than two branches carry at least
/// the minimum fraction of the weight.
fn info_gain(pre: &[f64], branches: &[Vec<f64>]) -> f64 {
    let total: f64 = branches.iter().flatten().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let heavy = branches
        .iter()
        .filter(|b| b.iter().sum::<f64>() / total > MIN_BRANCH_FRACTION)
        .count();
    if heavy < 2 {
        return 0.0;
    }
    let post: f64 = branches
        .iter()
        .map(|b| b.iter().sum::<f64>() / total * entropy(b))
        .sum();
    entropy(pre) - post
}

fn numeric_candidates(est: &[GaussianEstimator]) -> Vec<(f64, Vec<Vec<f64>>)> {
    let min = est.iter().map(|e| e.min).fold(f64::INFINITY, f64::min);
    let max = est.iter().map(|e| e.max).fold(f64::NEG_INFINITY, f64::max);
    if min >= max || min.is_nan() || max.is_nan() {
        return Vec::new();
    }
    (1..=NUMERIC_THRESHOLDS)
        .map(|i| {
            let t = min + (max - min) * i as f64 / (NUMERIC_THRESHOLDS + 1) as f64;
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for e in est {
                let (l, r) = if e.weight <= 0.0 {
                    (0.0, 0.0)
                } else if t < e.min {
                    (0.0, e.weight)
                } else if t >= e.max {
                    (e.weight, 0.0)
                } else {
                    let l = e.weight * e.cdf(t);
                    (l, e.weight - l)
                };
                left.push(l);
                right.push(r);
            }
            (t, vec![left, right])
        })
        .collect()
}

fn best_splits(stats: &NbStats) -> Vec<SplitCandidate> {
    let pre = &stats.class_counts;
    let mut out = Vec::new();
    for (attr, a) in stats.attributes.iter().enumerate() {
        match a {
            AttributeStats::Class => {}
            AttributeStats::Nominal(counts) => {
                let levels = counts.first().map_or(0, Vec::len);
                let branches: Vec<Vec<f64>> = (0..levels)
                    .map(|l| counts.iter().map(|per_class| per_class[l]).collect())
                    .collect();
                out.push(SplitCandidate {
                    merit: info_gain(pre, &branches),
                    attr,
                    threshold: None,
                    branches,
                });
            }
            AttributeStats::Numeric(est) => {
                let best = numeric_candidates(est)
                    .into_iter()
                    .map(|(t, b)| (info_gain(pre, &b), t, b))
                    .fold(None::<(f64, f64, Vec<Vec<f64>>)>, |acc, c| match acc {
                        Some(a) if a.0 >= c.0 => Some(a),
                        _ => Some(c),
                    });
                if let Some((merit, t, branches)) = best {
                    out.push(SplitCandidate {
                        merit,
                        attr,
                        threshold: Some(t),
                        branches,
                    });
                }
            }
        }
    }
    out
}

impl HoeffdingTree {
    fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(_) => return i,
                Node::Nominal { attr, children } => match children.get(row[*attr] as usize) {
                    Some(&c) => i = c,
                    None => return i,
                },
                Node::Numeric {
                    attr,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*attr] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    fn learn(&mut self, row: &[f64], class: usize) {
        let i = self.leaf_index(row);
        let Node::Leaf(leaf) = &mut self.nodes[i] else {
            // unseen nominal level at an internal node: nothing to update
            return;
        };
        leaf.learn(row, class);
        let seen = leaf.stats.total();
        if seen - leaf.weight_at_last_check >= self.params.grace_period as f64 {
            leaf.weight_at_last_check = seen;
            self.attempt_split(i);
        }
    }

    fn attempt_split(&mut self, i: usize) {
        let Node::Leaf(leaf) = &self.nodes[i] else { return };
        let stats = &leaf.stats;
        if stats.class_counts.iter().filter(|&&c| c > 0.0).count() < 2 {
            return;
        }
        let mut candidates = best_splits(stats);
        // stable sort keeps attribute order among equal merits
        candidates.sort_by(|a, b| b.merit.total_cmp(&a.merit));
        let Some(best) = candidates.first() else { return };
        // the null split (no split, merit 0) competes with the attributes
        let second = candidates.get(1).map_or(0.0, |c| c.merit.max(0.0));
        let range = (self.schema.n_classes().max(2) as f64).log2();
        let eps = hoeffding_bound(range, self.params.delta, stats.total());
        let decided = best.merit - second > eps || eps < self.params.tie_threshold;
        if !decided || best.merit <= 0.0 {
            return;
        }
        let best = candidates.swap_remove(0);

        let children: Vec<usize> = best
            .branches
            .iter()
            .map(|class_counts| {
                let mut stats = NbStats::new(&self.schema);
                stats.class_counts = class_counts.clone();
                self.nodes.push(Node::Leaf(Leaf::new(stats)));
                self.nodes.len() - 1
            })
            .collect();
        self.nodes[i] = match best.threshold {
            Some(threshold) => Node::Numeric {
                attr: best.attr,
                threshold,
                left: children[0],
                right: children[1],
            },
            None => Node::Nominal {
                attr: best.attr,
                children,
            },
        };
        self.n_splits += 1;
    }

    pub fn n_splits(&self) -> usize {
        self.n_splits
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    /// Attribute tested at the root, if the root has split.
    pub fn root_attribute(&self) -> Option<usize> {
        match &self.nodes[0] {
            Node::Leaf(_) => None,
            Node::Nominal { attr, .. } | Node::Numeric { attr, .. } => Some(*attr),
        }
    }

    /// Whether the leaf reached by `instance` answers with Naïve Bayes
    /// rather than its majority class.
    pub fn leaf_uses_naive_bayes(&self, instance: &[f64]) -> bool {
        match &self.nodes[self.leaf_index(instance)] {
            Node::Leaf(l) => l.uses_naive_bayes(self.params.leaf_strategy),
            _ => false,
        }
    }
}

pub fn train_hoeffding_tree(
    train: &Dataset,
    params: &HoeffdingParams,
    _seed: u64,
) -> Result<HoeffdingTree, ClassifierError> {
    params.validate()?;
    if train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let schema = Schema::of(train);
    let root = Node::Leaf(Leaf::new(NbStats::new(&schema)));
    let mut tree = HoeffdingTree {
        schema,
        params: params.clone(),
        nodes: vec![root],
        n_splits: 0,
    };
    for (i, row) in train.rows().iter().enumerate() {
        tree.learn(row, train.class_of(i));
    }
    Ok(tree)
}

impl ProbabilisticModel for HoeffdingTree {
    fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    fn predict_distribution(&self, instance: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        self.schema.check(instance)?;
        Ok(match &self.nodes[self.leaf_index(instance)] {
            Node::Leaf(l) => l.distribution(instance, self.params.leaf_strategy),
            // stopped at an internal node on an unseen level
            _ => vec![1.0 / self.n_classes() as f64; self.n_classes()],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::train_naive_bayes;
    use crate::dataset::{AttributeKind, AttributeSpec};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng as _;

    #[test]
    fn closed_form_bound() {
        let e = hoeffding_bound(1.0, (-2.0f64).exp(), 2.0);
        assert!((e - 0.5f64.sqrt()).abs() < 1e-12);
        let e = hoeffding_bound(7f64.log2(), 1e-7, 200.0);
        let want = (7f64.log2().powi(2) * 1e7f64.ln() / 400.0).sqrt();
        assert!((e - want).abs() < 1e-12);
        assert!((e - 0.563539277465257).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn doubling_n_divides_by_sqrt2(r in 0.1f64..10.0, delta in 1e-9f64..0.99, n in 1u32..100_000) {
            let a = hoeffding_bound(r, delta, n as f64);
            let b = hoeffding_bound(r, delta, 2.0 * n as f64);
            prop_assert!((b - a / 2f64.sqrt()).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn short_stream_is_a_naive_bayes_leaf() {
        let ds = crate::synthetic::planted_signal(63, 3, 10, 4);
        let ht = train_hoeffding_tree(&ds, &HoeffdingParams::default(), 0).unwrap();
        let nb = train_naive_bayes(&ds).unwrap();
        assert_eq!(ht.n_splits(), 0);
        for row in ds.rows() {
            assert!(ht.leaf_uses_naive_bayes(row));
            assert_eq!(
                ht.predict_distribution(row).unwrap(),
                nb.predict_distribution(row).unwrap()
            );
        }
    }

    #[test]
    fn long_stream_splits_on_the_signal() {
        let mut rng = rng_from_seed(17);
        let n_noise = 5;
        let mut attrs: Vec<AttributeSpec> = (0..n_noise)
            .map(|i| AttributeSpec::new(format!("noise{i}"), AttributeKind::Binary))
            .collect();
        attrs.push(AttributeSpec::new("signal", AttributeKind::Binary));
        attrs.push(AttributeSpec::new("class", AttributeKind::Binary));
        let rows: Vec<Vec<f64>> = (0..10_000)
            .map(|_| {
                let c = rng.random_range(0..2) as f64;
                let mut r: Vec<f64> = (0..n_noise).map(|_| rng.random_range(0..2) as f64).collect();
                r.push(c);
                r.push(c);
                r
            })
            .collect();
        let ds = Dataset::new("stream", attrs, n_noise + 1, rows).unwrap();
        let ht = train_hoeffding_tree(&ds, &HoeffdingParams::default(), 0).unwrap();
        assert_eq!(ht.root_attribute(), Some(n_noise));
        let correct = ds
            .rows()
            .iter()
            .enumerate()
            .skip(200)
            .filter(|(i, r)| ht.predict(r).unwrap() == ds.class_of(*i))
            .count();
        assert!(correct as f64 / (ds.n_instances() - 200) as f64 > 0.99);
    }

    #[test]
    fn numeric_attribute_can_split() {
        let mut rng = rng_from_seed(3);
        let rows: Vec<Vec<f64>> = (0..2000)
            .map(|_| {
                let x: f64 = rng.random::<f64>() * 10.0;
                vec![x, if x > 5.0 { 1.0 } else { 0.0 }]
            })
            .collect();
        let ds = Dataset::new(
            "num",
            vec![
                AttributeSpec::new("x", AttributeKind::Numeric),
                AttributeSpec::new("class", AttributeKind::Binary),
            ],
            1,
            rows,
        )
        .unwrap();
        let ht = train_hoeffding_tree(&ds, &HoeffdingParams::default(), 0).unwrap();
        assert_eq!(ht.root_attribute(), Some(0));
        assert_eq!(ht.predict(&[1.0, 0.0]).unwrap(), 0);
        assert_eq!(ht.predict(&[9.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn params_are_validated() {
        let ds = crate::synthetic::pure_noise(10, 2, 2, 0);
        for p in [
            HoeffdingParams {
                delta: 0.0,
                ..Default::default()
            },
            HoeffdingParams {
                grace_period: 0,
                ..Default::default()
            },
            HoeffdingParams {
                tie_threshold: -1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                train_hoeffding_tree(&ds, &p, 0),
                Err(ClassifierError::InvalidParams(_))
            ));
        }
    }
}
