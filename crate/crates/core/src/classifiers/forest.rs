//! Random forest of Gini-impurity trees grown on bootstrap samples.
//!
//! Nominal attributes split multiway on their levels, numeric attributes
//! split in two at midpoints between consecutive distinct values. At each
//! node the candidate attributes are visited in a random order; the first
//! `mtry` are always evaluated and, if none of them reduces impurity, the
//! search continues through the remaining attributes until one does.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::rng::{derive_seed, rng_from_seed, Rng};

use super::{normalize, ClassifierError, ProbabilisticModel, Schema};

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Attributes sampled per split; `None` means `floor(log2 F) + 1`.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_split: usize,
    /// Bootstrap sample size; `None` means the training set size.
    pub bootstrap_size: Option<usize>,
    /// When false every tree sees each training row exactly once and no
    /// out-of-bag rows exist.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            mtry: None,
            max_depth: None,
            min_split: 2,
            bootstrap_size: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, n_predictors: usize) -> usize {
        let default = if n_predictors == 0 {
            1
        } else {
            (n_predictors as f64).log2().floor() as usize + 1
        };
        self.mtry.unwrap_or(default).clamp(1, n_predictors.max(1))
    }

    fn validate(&self, n_predictors: usize) -> Result<(), ClassifierError> {
        if self.n_trees == 0 {
            return Err(ClassifierError::InvalidParams("n_trees must be >= 1".into()));
        }
        if let Some(m) = self.mtry {
            if m == 0 || m > n_predictors.max(1) {
                return Err(ClassifierError::InvalidParams(format!(
                    "mtry {m} outside 1..={n_predictors}"
                )));
            }
        }
        if self.bootstrap_size == Some(0) {
            return Err(ClassifierError::InvalidParams(
                "bootstrap_size must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Split {
    Leaf,
    Numeric {
        attr: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Nominal {
        attr: usize,
        children: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    /// Normalized class distribution of the training rows reaching the node.
    distribution: Vec<f64>,
    split: Split,
}

/// One CART-style classification tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    used_attributes: Vec<bool>,
}

impl DecisionTree {
    fn leaf_for(&self, row: &[f64]) -> &Node {
        let mut node = &self.nodes[0];
        loop {
            match &node.split {
                Split::Leaf => return node,
                Split::Numeric {
                    attr,
                    threshold,
                    left,
                    right,
                } => {
                    node = &self.nodes[if row[*attr] <= *threshold { *left } else { *right }];
                }
                Split::Nominal { attr, children } => match children.get(row[*attr] as usize) {
                    Some(&child) => node = &self.nodes[child],
                    // unseen level: stop at this node
                    None => return node,
                },
            }
        }
    }

    pub fn predict_distribution(&self, row: &[f64]) -> &[f64] {
        &self.leaf_for(row).distribution
    }

    pub fn predict_class(&self, row: &[f64]) -> usize {
        crate::metrics::argmax(self.predict_distribution(row))
    }

    pub fn uses_attribute(&self, attr: usize) -> bool {
        self.used_attributes.get(attr).copied().unwrap_or(false)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i].split {
                Split::Leaf => 0,
                Split::Numeric { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                Split::Nominal { children, .. } => 1 + children.iter().map(|&c| go(t, c)).max().unwrap_or(0),
            }
        }
        go(self, 0)
    }
}

struct TreeBuilder<'a> {
    ds: &'a Dataset,
    predictors: Vec<usize>,
    mtry: usize,
    params: &'a ForestParams,
    n_classes: usize,
    nodes: Vec<Node>,
    used: Vec<bool>,
}

struct Candidate {
    gain: f64,
    attr: usize,
    threshold: Option<f64>,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

impl<'a> TreeBuilder<'a> {
    fn class_counts(&self, samples: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_classes];
        for &i in samples {
            counts[self.ds.class_of(i)] += 1.0;
        }
        counts
    }

    fn push(&mut self, distribution: Vec<f64>) -> usize {
        self.nodes.push(Node {
            distribution,
            split: Split::Leaf,
        });
        self.nodes.len() - 1
    }

    fn build(&mut self, samples: &[usize], depth: usize, rng: &mut Rng) -> usize {
        let counts = self.class_counts(samples);
        let id = self.push(normalize(counts.clone()));
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || samples.len() < self.params.min_split || depth_capped {
            return id;
        }

        let parent = gini(&counts, samples.len() as f64);
        let mut order = self.predictors.clone();
        order.shuffle(rng);
        let mut best: Option<Candidate> = None;
        for (visited, &attr) in order.iter().enumerate() {
            if visited >= self.mtry && best.as_ref().is_some_and(|b| b.gain > MIN_GAIN) {
                break;
            }
            if let Some(c) = self.evaluate(attr, samples, parent) {
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        let Some(best) = best.filter(|b| b.gain > MIN_GAIN) else {
            return id;
        };
        self.used[best.attr] = true;

        match best.threshold {
            Some(threshold) => {
                let (l, r): (Vec<usize>, Vec<usize>) = samples
                    .iter()
                    .partition(|&&i| self.ds.row(i)[best.attr] <= threshold);
                let left = self.build(&l, depth + 1, rng);
                let right = self.build(&r, depth + 1, rng);
                self.nodes[id].split = Split::Numeric {
                    attr: best.attr,
                    threshold,
                    left,
                    right,
                };
            }
            None => {
                let levels = self.ds.attribute(best.attr).kind.n_levels().unwrap_or(0);
                let mut groups = vec![Vec::new(); levels];
                for &i in samples {
                    groups[self.ds.row(i)[best.attr] as usize].push(i);
                }
                let mut children = Vec::with_capacity(levels);
                for g in &groups {
                    if g.is_empty() {
                        // empty branch predicts the parent's distribution
                        let d = self.nodes[id].distribution.clone();
                        children.push(self.push(d));
                    } else {
                        children.push(self.build(g, depth + 1, rng));
                    }
                }
                self.nodes[id].split = Split::Nominal {
                    attr: best.attr,
                    children,
                };
            }
        }
        id
    }

    fn evaluate(&self, attr: usize, samples: &[usize], parent: f64) -> Option<Candidate> {
        let n = samples.len() as f64;
        match self.ds.attribute(attr).kind.n_levels() {
            Some(levels) => {
                let mut counts = vec![vec![0.0; self.n_classes]; levels];
                for &i in samples {
                    counts[self.ds.row(i)[attr] as usize][self.ds.class_of(i)] += 1.0;
                }
                let non_empty = counts.iter().filter(|c| c.iter().sum::<f64>() > 0.0).count();
                if non_empty < 2 {
                    return None;
                }
                let child: f64 = counts
                    .iter()
                    .map(|c| {
                        let t: f64 = c.iter().sum();
                        t / n * gini(c, t)
                    })
                    .sum();
                Some(Candidate {
                    gain: parent - child,
                    attr,
                    threshold: None,
                })
            }
            None => {
                let mut sorted: Vec<(f64, usize)> = samples
                    .iter()
                    .map(|&i| (self.ds.row(i)[attr], self.ds.class_of(i)))
                    .collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut right = vec![0.0; self.n_classes];
                for &(_, c) in &sorted {
                    right[c] += 1.0;
                }
                let mut left = vec![0.0; self.n_classes];
                let mut best: Option<(f64, f64)> = None;
                for k in 0..sorted.len() - 1 {
                    let (v, c) = sorted[k];
                    left[c] += 1.0;
                    right[c] -= 1.0;
                    let next = sorted[k + 1].0;
                    if next <= v {
                        continue;
                    }
                    let nl = (k + 1) as f64;
                    let nr = n - nl;
                    let child = nl / n * gini(&left, nl) + nr / n * gini(&right, nr);
                    let gain = parent - child;
                    if best.is_none_or(|(g, _)| gain > g) {
                        best = Some((gain, (v + next) / 2.0));
                    }
                }
                best.map(|(gain, t)| Candidate {
                    gain,
                    attr,
                    threshold: Some(t),
                })
            }
        }
    }
}

fn grow_tree(ds: &Dataset, samples: &[usize], params: &ForestParams, rng: &mut Rng) -> DecisionTree {
    let predictors = ds.predictor_indices();
    let mut builder = TreeBuilder {
        ds,
        mtry: params.resolved_mtry(predictors.len()),
        predictors,
        params,
        n_classes: ds.n_classes(),
        nodes: Vec::new(),
        used: vec![false; ds.n_attributes()],
    };
    builder.build(samples, 0, rng);
    DecisionTree {
        nodes: builder.nodes,
        used_attributes: builder.used,
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    schema: Schema,
    trees: Vec<DecisionTree>,
    oob: Vec<Vec<usize>>,
    seed: u64,
}

pub fn train_random_forest(
    train: &Dataset,
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForest, ClassifierError> {
    if train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    params.validate(train.n_predictors())?;
    let n = train.n_instances();
    let draws = params.bootstrap_size.unwrap_or(n);

    let grown: Vec<(DecisionTree, Vec<usize>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, t as u64));
            if !params.bootstrap {
                let all: Vec<usize> = (0..n).collect();
                return (grow_tree(train, &all, params, &mut rng), Vec::new());
            }
            let mut in_bag = vec![false; n];
            let samples: Vec<usize> = (0..draws)
                .map(|_| {
                    let i = rng.random_range(0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();
            let oob = (0..n).filter(|&i| !in_bag[i]).collect();
            (grow_tree(train, &samples, params, &mut rng), oob)
        })
        .collect();
    let (trees, oob) = grown.into_iter().unzip();
    Ok(RandomForest {
        schema: Schema::of(train),
        trees,
        oob,
        seed,
    })
}

impl RandomForest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Training-row indices not drawn into tree `t`'s bootstrap sample.
    pub fn oob_indices(&self, t: usize) -> &[usize] {
        &self.oob[t]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Out-of-bag accuracy on the training set the forest was fitted on;
    /// `None` when no row is out of bag for any tree.
    pub fn oob_accuracy(&self, train: &Dataset) -> Option<f64> {
        let n_classes = self.schema.n_classes();
        let mut votes = vec![vec![0.0; n_classes]; train.n_instances()];
        let mut covered = vec![false; train.n_instances()];
        for (tree, oob) in self.trees.iter().zip(&self.oob) {
            for &i in oob {
                covered[i] = true;
                for (v, p) in votes[i].iter_mut().zip(tree.predict_distribution(train.row(i))) {
                    *v += p;
                }
            }
        }
        let scored: Vec<usize> = (0..train.n_instances()).filter(|&i| covered[i]).collect();
        if scored.is_empty() {
            return None;
        }
        let correct = scored
            .iter()
            .filter(|&&i| crate::metrics::argmax(&votes[i]) == train.class_of(i))
            .count();
        Some(correct as f64 / scored.len() as f64)
    }
}

impl ProbabilisticModel for RandomForest {
    fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    fn predict_distribution(&self, instance: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        self.schema.check(instance)?;
        let mut sum = vec![0.0; self.n_classes()];
        for tree in &self.trees {
            for (s, p) in sum.iter_mut().zip(tree.predict_distribution(instance)) {
                *s += p;
            }
        }
        let n = self.trees.len() as f64;
        Ok(sum.into_iter().map(|s| s / n).collect())
    }
}
