use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError};
use crate::rng::rng_from_seed;

/// Assignment of every instance to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub stratified: bool,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// FNV-1a over `k` and the assignment vector. Two plans with equal
    /// fingerprints partition the instances identically.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.k as u64);
        for &a in &self.assignments {
            feed(a as u64);
        }
        h
    }
}

/// Stratified `k`-fold plan: members of each class are shuffled and dealt
/// round-robin, with the dealing position carried over from one class to the
/// next so that overall fold sizes also differ by at most one.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidFoldCount(k));
    }
    let n = ds.n_instances();
    if k > n {
        return Err(DatasetError::KTooLarge { k, n });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
    for i in 0..n {
        by_class[ds.class_of(i)].push(i);
    }
    let mut rng = rng_from_seed(seed);
    let mut assignments = vec![0; n];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
        stratified: true,
    })
}

/// Splits `ds` into (train, test) for one fold, preserving instance order.
///
/// Panics if `fold >= plan.k` or the plan was built for a different
/// instance count.
pub fn split(ds: &Dataset, plan: &FoldPlan, fold: usize) -> (Dataset, Dataset) {
    assert!(fold < plan.k, "fold {fold} out of range for k = {}", plan.k);
    assert_eq!(
        plan.assignments.len(),
        ds.n_instances(),
        "plan/dataset size mismatch"
    );
    let (test, train): (Vec<usize>, Vec<usize>) =
        (0..ds.n_instances()).partition(|&i| plan.assignments[i] == fold);
    (ds.subset(&train), ds.subset(&test))
}
