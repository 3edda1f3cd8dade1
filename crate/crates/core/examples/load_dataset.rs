//! Loads a CSV or ARFF file and prints its schema, class balance and a
//! stratified 10-fold plan.
//!
//!     cargo run --example load_dataset -- fixtures/tiny.arff
//!     cargo run --example load_dataset -- data/SCADI.csv Classes

use std::fs::File;

use carebench::dataset::{load_arff, load_csv, split, stratified_folds, ClassColumn, CsvOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "fixtures/tiny.csv".to_string());
    let file = File::open(&path)?;
    let ds = if path.ends_with(".arff") {
        load_arff(file)?
    } else {
        let class = args.next().map(ClassColumn::Name).unwrap_or(ClassColumn::Last);
        load_csv(file, &CsvOptions::with_class(class))?
    };

    println!(
        "{}: {} instances, {} predictors",
        ds.name(),
        ds.n_instances(),
        ds.n_predictors()
    );
    for attr in ds.attributes().iter().take(8) {
        println!("  {:<12} {:?}", attr.name, attr.kind);
    }
    if ds.n_attributes() > 8 {
        println!("  ... {} more", ds.n_attributes() - 8);
    }
    for (level, count) in ds.class_levels().iter().zip(ds.class_counts()) {
        println!("  class {level}: {count}");
    }

    let k = ds.n_instances().min(10);
    if k >= 2 {
        let plan = stratified_folds(&ds, k, 42)?;
        println!("{k}-fold sizes: {:?}", plan.fold_sizes());
        let (train, test) = split(&ds, &plan, 0);
        println!(
            "fold 0: train {}, test {}",
            train.n_instances(),
            test.n_instances()
        );
    }
    Ok(())
}
