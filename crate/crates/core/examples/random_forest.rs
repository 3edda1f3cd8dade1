//! Random forest on the planted-signal table and on pure noise, reporting
//! out-of-bag accuracy and tree shapes.

use carebench::classifiers::{train_random_forest, ForestParams, ProbabilisticModel};
use carebench::synthetic::{planted_signal, pure_noise};

fn main() {
    let params = ForestParams::default();
    for (label, ds) in [
        ("planted", planted_signal(200, 3, 20, 1)),
        ("noise", pure_noise(200, 20, 2, 1)),
    ] {
        let forest = train_random_forest(&ds, &params, 7).unwrap();
        let depth = forest.trees().iter().map(|t| t.depth()).max().unwrap_or(0);
        let nodes: usize = forest.trees().iter().map(|t| t.n_nodes()).sum();
        println!(
            "{label:>8}: mtry {}, OOB accuracy {:.3}, max depth {depth}, {:.1} nodes/tree",
            params.resolved_mtry(ds.n_predictors()),
            forest.oob_accuracy(&ds).unwrap(),
            nodes as f64 / forest.trees().len() as f64,
        );
        println!(
            "          P(class | row 0) = {:?}",
            forest.predict_distribution(ds.row(0)).unwrap()
        );
    }
}
