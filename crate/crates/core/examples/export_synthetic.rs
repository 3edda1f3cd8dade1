//! Writes one of the seeded synthetic tables as CSV to stdout.
//!
//!     cargo run --example export_synthetic -- noise 120 20 2 7 > noise.csv
//!     cargo run --example export_synthetic -- planted 200 3 20 1
//!     cargo run --example export_synthetic -- self-care 42

use carebench::synthetic::{planted_signal, pure_noise, self_care_like};

fn arg(args: &[String], i: usize, default: u64) -> u64 {
    args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ds = match args.first().map(String::as_str) {
        Some("noise") => pure_noise(
            arg(&args, 1, 120) as usize,
            arg(&args, 2, 20) as usize,
            arg(&args, 3, 2) as usize,
            arg(&args, 4, 7),
        ),
        Some("planted") => planted_signal(
            arg(&args, 1, 200) as usize,
            arg(&args, 2, 3) as usize,
            arg(&args, 3, 20) as usize,
            arg(&args, 4, 1),
        ),
        Some("self-care") | None => self_care_like(arg(&args, 1, 42)),
        Some(other) => {
            eprintln!("unknown table `{other}`; expected noise, planted or self-care");
            std::process::exit(1);
        }
    };
    ds.write_csv(std::io::stdout().lock()).expect("stdout closed");
}
