//! Locally weighted learning: kernel weights around a query and the local
//! stump's prediction, for a full and a 5-nearest neighbourhood.

use carebench::classifiers::{train_lwl, LwlParams, Neighbors, ProbabilisticModel};
use carebench::synthetic::self_care_like;

fn main() {
    let ds = self_care_like(5);
    let query = ds.row(0).to_vec();
    for neighbors in [Neighbors::All, Neighbors::Count(5)] {
        let mut model = train_lwl(&ds, &LwlParams { neighbors }).unwrap();
        let weights = model.weights(&query);
        let used = weights.iter().filter(|&&w| w > 0.0).count();
        let dist = model.predict_distribution(&query).unwrap();
        println!(
            "{neighbors:?}: {used} rows with positive weight, predicted {} (truth {}), {} distance evaluations",
            ds.class_label(carebench::metrics::argmax(&dist)),
            ds.class_label(ds.class_of(0)),
            model.distance_evaluations(),
        );
        model.forget_training_data();
    }
}
