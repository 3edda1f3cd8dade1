//! Boruta on the planted-signal table: which attributes survive, and how
//! quickly each was decided.

use carebench::boruta::{boruta_run, reduce_dataset, BorutaConfig};
use carebench::synthetic::planted_signal;

fn main() {
    let ds = planted_signal(200, 3, 20, 9);
    let result = boruta_run(&ds, &BorutaConfig::default()).unwrap();
    println!("{} runs", result.runs_completed);
    for i in 0..result.n_predictors() {
        println!(
            "  {:<8} {:<10} hits {:>3}  decided at {:>4}  z {:+.2}",
            result.names[i],
            format!("{:?}", result.decisions[i]),
            result.hit_counts[i],
            result.decided_at[i].map_or("-".to_string(), |r| r.to_string()),
            result.last_z[i],
        );
    }
    let reduced = reduce_dataset(&ds, &result, false).unwrap();
    println!(
        "kept {} of {} predictors (reduction {:.1}%)",
        reduced.n_predictors(),
        ds.n_predictors(),
        100.0 * result.reduction()
    );
}
