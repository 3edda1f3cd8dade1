//! ROC curve, AUC and the multiclass summary metrics on hand-made scores.

use carebench::metrics::{auc, evaluate, roc_curve, PredictionRecord};

fn main() {
    let scores = [0.9, 0.4, 0.35, 0.8];
    let labels = [true, false, true, true];
    let curve = roc_curve(&scores, &labels).unwrap();
    for p in &curve.points {
        println!("fpr {:.3}  tpr {:.3}", p.fpr, p.tpr);
    }
    println!("AUC = {:.4}", auc(&curve));

    let records: Vec<PredictionRecord> = [
        (0, vec![0.7, 0.2, 0.1]),
        (0, vec![0.4, 0.5, 0.1]),
        (1, vec![0.1, 0.8, 0.1]),
        (1, vec![0.3, 0.3, 0.4]),
        (2, vec![0.2, 0.2, 0.6]),
        (2, vec![0.1, 0.1, 0.8]),
    ]
    .into_iter()
    .map(|(t, d)| PredictionRecord::new(t, d).unwrap())
    .collect();
    let summary = evaluate(&records).unwrap();
    println!("accuracy {:.4}", summary.accuracy);
    println!("rmse     {:.4}", summary.rmse);
    println!(
        "weighted AUC {:.4}, per class {:?}",
        summary.weighted_auc, summary.per_class_auc
    );
    println!("confusion {:?}", summary.confusion.counts);
}
