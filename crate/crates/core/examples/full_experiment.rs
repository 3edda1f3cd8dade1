//! Both evaluation phases on the synthetic self-care table: five models
//! under 10-fold CV, Boruta on the full table, then the same five models on
//! the confirmed attributes. Prints the markdown report.
//!
//!     cargo run --release --example full_experiment [seed]

use std::time::Instant;

use carebench::evaluation::{run_experiment, ModelEntry, Protocol, SelectionSettings};
use carebench::report::render_markdown;
use carebench::synthetic::self_care_like;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let ds = self_care_like(seed);
    let protocol = Protocol {
        seed,
        ..Protocol::default()
    };
    let selection = SelectionSettings::default();

    let started = Instant::now();
    let report = run_experiment(&ds, &ModelEntry::standard_lineup(), &protocol, Some(&selection))
        .expect("experiment failed");
    println!("{}", render_markdown(&report));
    eprintln!("finished in {:.1?}", started.elapsed());
}
