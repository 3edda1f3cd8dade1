//! Min-max scaling and indicator encoding fitted on a training fold.

use crate::dataset::{AttributeKind, Dataset};

#[derive(Debug, Clone)]
enum Block {
    Numeric { attr: usize, min: f64, range: f64 },
    Binary { attr: usize },
    OneHot { attr: usize, levels: usize },
}

/// Maps rows to dense feature vectors in `[0, 1]`: numeric attributes are
/// min-max scaled with training statistics (test values clamped), binary
/// attributes pass through as one column, and other nominal attributes get
/// one indicator column per level. Unknown levels encode as all zeros.
#[derive(Debug, Clone)]
pub(crate) struct FeatureEncoder {
    blocks: Vec<Block>,
    width: usize,
}

impl FeatureEncoder {
    pub fn fit(ds: &Dataset) -> Self {
        let mut blocks = Vec::new();
        let mut width = 0;
        for attr in ds.predictor_indices() {
            match &ds.attribute(attr).kind {
                AttributeKind::Numeric => {
                    let (min, max) = min_max(ds, attr);
                    blocks.push(Block::Numeric {
                        attr,
                        min,
                        range: max - min,
                    });
                    width += 1;
                }
                AttributeKind::Binary => {
                    blocks.push(Block::Binary { attr });
                    width += 1;
                }
                AttributeKind::Nominal(levels) => {
                    blocks.push(Block::OneHot {
                        attr,
                        levels: levels.len(),
                    });
                    width += levels.len();
                }
            }
        }
        Self { blocks, width }
    }

    pub fn encode(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width);
        for block in &self.blocks {
            match *block {
                Block::Numeric { attr, min, range } => out.push(scale(row[attr], min, range)),
                Block::Binary { attr } => out.push(if row[attr] == 1.0 { 1.0 } else { 0.0 }),
                Block::OneHot { attr, levels } => {
                    let v = row[attr];
                    out.extend((0..levels).map(|l| if v == l as f64 { 1.0 } else { 0.0 }));
                }
            }
        }
        out
    }
}

pub(crate) fn min_max(ds: &Dataset, attr: usize) -> (f64, f64) {
    ds.rows()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r[attr]), hi.max(r[attr]))
        })
}

/// `(x - min) / range` clamped to `[0, 1]`; zero when the range is empty.
pub(crate) fn scale(x: f64, min: f64, range: f64) -> f64 {
    if range > 0.0 && range.is_finite() {
        ((x - min) / range).clamp(0.0, 1.0)
    } else {
        0.0
    }
}
