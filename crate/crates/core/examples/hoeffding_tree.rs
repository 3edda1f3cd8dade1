//! A Hoeffding tree learning from a stream: the bound as a function of the
//! number of observations, then the tree that grows on 10,000 rows.

use carebench::classifiers::{hoeffding_bound, train_hoeffding_tree, HoeffdingParams, ProbabilisticModel};
use carebench::synthetic::planted_signal;

fn main() {
    let range = 7f64.log2();
    for n in [50.0, 200.0, 800.0, 3200.0] {
        println!(
            "epsilon(R = log2 7, delta = 1e-7, n = {n:>6}) = {:.4}",
            hoeffding_bound(range, 1e-7, n)
        );
    }

    let params = HoeffdingParams::default();
    for n in [63, 10_000] {
        let ds = planted_signal(n, 1, 5, 3);
        let tree = train_hoeffding_tree(&ds, &params, 0).unwrap();
        let correct = (0..n)
            .filter(|&i| tree.predict(ds.row(i)).unwrap() == ds.class_of(i))
            .count();
        println!(
            "{n:>6} rows: {} splits, {} leaves, root {:?}, NB leaf for row 0: {}, training accuracy {:.3}",
            tree.n_splits(),
            tree.n_leaves(),
            tree.root_attribute().map(|a| ds.attribute(a).name.clone()),
            tree.leaf_uses_naive_bayes(ds.row(0)),
            correct as f64 / n as f64,
        );
    }
}
