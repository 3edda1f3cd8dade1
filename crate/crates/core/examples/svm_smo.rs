//! Linear SVM trained by SMO: a binary toy problem, then one-vs-one voting
//! on a three-class table.

use carebench::classifiers::svm::solve_binary;
use carebench::classifiers::{train_svm, ProbabilisticModel, SmoParams};
use carebench::rng::rng_from_seed;
use carebench::synthetic::pure_noise;

fn main() {
    let points = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![2.0, 0.0], vec![2.0, 1.0]];
    let labels = [-1.0, -1.0, 1.0, 1.0];
    let params = SmoParams::default();
    let svm = solve_binary(&points, &labels, &params, &mut rng_from_seed(1));
    println!(
        "w = {:?}, b = {:.4}, alphas = {:?}, converged after {} iterations: {}",
        svm.weights, svm.bias, svm.alphas, svm.iterations, svm.converged
    );
    for p in &points {
        println!("  f({p:?}) = {:+.4}", svm.decision_value(p));
    }

    let ds = pure_noise(90, 6, 3, 3);
    let model = train_svm(&ds, &params, 11).unwrap();
    println!("{} pairwise machines", model.binary_models().count());
    for i in 0..3 {
        println!("  row {i}: {:?}", model.predict_distribution(ds.row(i)).unwrap());
    }
}
