//! Naïve Bayes with add-one smoothing on a four-row table, compared against
//! the posterior worked out by hand.

use carebench::classifiers::{train_naive_bayes, ProbabilisticModel};
use carebench::dataset::{AttributeKind, AttributeSpec, Dataset};

fn main() {
    let attrs = vec![
        AttributeSpec::new("a", AttributeKind::Binary),
        AttributeSpec::new("class", AttributeKind::Binary),
    ];
    let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]];
    let ds = Dataset::new("toy", attrs, 1, rows).unwrap();
    let nb = train_naive_bayes(&ds).unwrap();

    // prior (2+1)/(4+2) for both classes, P(a=1|1) = 3/4, P(a=1|0) = 1/4
    let by_hand = 0.5 * 0.75 / (0.5 * 0.75 + 0.5 * 0.25);
    let dist = nb.predict_distribution(&[1.0, 0.0]).unwrap();
    println!("P(class=1 | a=1) = {:.6} (by hand {by_hand:.6})", dist[1]);
    println!("smoothed class counts: {:?}", nb.class_counts());
}
