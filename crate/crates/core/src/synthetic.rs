//! Seeded synthetic datasets for tests, examples and fixtures.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::dataset::{AttributeKind, AttributeSpec, Dataset};
use crate::rng::rng_from_seed;

fn binary_columns(prefix: &str, n: usize) -> impl Iterator<Item = AttributeSpec> + '_ {
    (0..n).map(move |i| AttributeSpec::new(format!("{prefix}{i}"), AttributeKind::Binary))
}

/// Binary class with `n_signal` exact copies of it followed by `n_noise`
/// fair-coin columns. The class is balanced to within one instance.
pub fn planted_signal(n: usize, n_signal: usize, n_noise: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let mut classes: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    classes.shuffle(&mut rng);
    let rows = classes
        .iter()
        .map(|&c| {
            let mut row = vec![c; n_signal];
            row.extend((0..n_noise).map(|_| rng.random_range(0..2) as f64));
            row.push(c);
            row
        })
        .collect();
    let mut attrs: Vec<AttributeSpec> = binary_columns("signal", n_signal)
        .chain(binary_columns("noise", n_noise))
        .collect();
    attrs.push(AttributeSpec::new("class", AttributeKind::Binary));
    Dataset::new("planted_signal", attrs, n_signal + n_noise, rows).expect("valid by construction")
}

/// Fair-coin binary predictors and a uniformly drawn class with levels
/// `c0, c1, ...`, independent of everything else.
pub fn pure_noise(n: usize, n_predictors: usize, n_classes: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let rows = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..n_predictors).map(|_| rng.random_range(0..2) as f64).collect();
            row.push(rng.random_range(0..n_classes) as f64);
            row
        })
        .collect();
    let mut attrs: Vec<AttributeSpec> = binary_columns("noise", n_predictors).collect();
    let levels = (0..n_classes).map(|c| format!("c{c}")).collect();
    attrs.push(AttributeSpec::new("class", AttributeKind::Nominal(levels)));
    Dataset::new("pure_noise", attrs, n_predictors, rows).expect("valid by construction")
}

/// Class sizes of the self-care table layout, class1 through class7.
pub const SELF_CARE_CLASS_SIZES: [usize; 7] = [2, 13, 9, 2, 5, 10, 29];

/// A table shaped like the self-care activities data: 70 children, a binary
/// `Gender`, a numeric `Age`, 203 binary activity codes and a seven-level
/// `Classes` column. The first 56 codes depend on the class; the remaining
/// codes are noise.
pub fn self_care_like(seed: u64) -> Dataset {
    const CODES: usize = 203;
    const INFORMATIVE: usize = 56;
    let mut rng = rng_from_seed(seed);
    // each class switches on its own block of eight informative codes
    let profile = |class: usize, code: usize| -> f64 {
        if code < INFORMATIVE {
            if code / 8 == class {
                0.9
            } else {
                0.08
            }
        } else {
            0.15
        }
    };
    let mut classes: Vec<usize> = SELF_CARE_CLASS_SIZES
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
        .collect();
    classes.shuffle(&mut rng);
    let rows = classes
        .iter()
        .map(|&c| {
            let mut row = vec![rng.random_range(0..2) as f64, rng.random_range(6..19) as f64];
            row.extend((0..CODES).map(|j| {
                if rng.random::<f64>() < profile(c, j) {
                    1.0
                } else {
                    0.0
                }
            }));
            row.push(c as f64);
            row
        })
        .collect();
    let mut attrs = vec![
        AttributeSpec::new("Gender", AttributeKind::Binary),
        AttributeSpec::new("Age", AttributeKind::Numeric),
    ];
    attrs.extend((0..CODES).map(|j| {
        AttributeSpec::new(
            format!("d{}-{}", 5100 + j / 10 * 10, j % 10),
            AttributeKind::Binary,
        )
    }));
    let levels = (1..=7).map(|c| format!("class{c}")).collect();
    attrs.push(AttributeSpec::new("Classes", AttributeKind::Nominal(levels)));
    Dataset::new("self_care_like", attrs, CODES + 2, rows).expect("valid by construction")
}
