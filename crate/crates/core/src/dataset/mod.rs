//! Tabular datasets: attribute schema, instance matrix and class designation.
//!
//! Values are stored as `f64`. Numeric attributes hold the number itself;
//! nominal and binary attributes hold the index of the level in the
//! attribute's level list (for [`AttributeKind::Binary`] the index equals the
//! 0/1 value).

mod arff;
mod csv;
mod folds;

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::arff::{load_arff, load_arff_with_class};
pub use self::csv::{load_csv, ClassColumn, CsvOptions};
pub use self::folds::{split, stratified_folds, FoldPlan};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("malformed row {row}: expected {expected} fields, found {found}")]
    MalformedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("dataset has no instances")]
    EmptyDataset,
    #[error("unknown class column `{0}`")]
    UnknownClassColumn(String),
    #[error("unsupported ARFF feature: {0}")]
    UnsupportedArffFeature(String),
    #[error("malformed ARFF header: {0}")]
    MalformedHeader(String),
    #[error("invalid value `{value}` at row {row}, column `{column}`: {reason}")]
    InvalidValue {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },
    #[error("invalid attribute `{name}`: {reason}")]
    InvalidAttribute { name: String, reason: String },
    #[error("class attribute `{0}` is not nominal")]
    ClassNotNominal(String),
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("fold count {k} exceeds instance count {n}")]
    KTooLarge { k: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    /// Nominal with levels `["0", "1"]`.
    Binary,
    Nominal(Vec<String>),
}

impl AttributeKind {
    /// Builds a nominal kind, normalizing the level set `{0, 1}` to
    /// [`AttributeKind::Binary`].
    pub fn nominal<S: Into<String>>(
        name: &str,
        levels: impl IntoIterator<Item = S>,
    ) -> Result<Self, DatasetError> {
        let levels: Vec<String> = levels.into_iter().map(Into::into).collect();
        if levels.is_empty() {
            return Err(DatasetError::InvalidAttribute {
                name: name.to_string(),
                reason: "empty level list".into(),
            });
        }
        for (i, level) in levels.iter().enumerate() {
            if levels[..i].contains(level) {
                return Err(DatasetError::InvalidAttribute {
                    name: name.to_string(),
                    reason: format!("duplicate level `{level}`"),
                });
            }
        }
        if levels.len() == 2 && levels.iter().all(|l| l == "0" || l == "1") {
            return Ok(AttributeKind::Binary);
        }
        Ok(AttributeKind::Nominal(levels))
    }

    pub fn is_nominal(&self) -> bool {
        !matches!(self, AttributeKind::Numeric)
    }

    pub fn n_levels(&self) -> Option<usize> {
        match self {
            AttributeKind::Numeric => None,
            AttributeKind::Binary => Some(2),
            AttributeKind::Nominal(levels) => Some(levels.len()),
        }
    }

    pub fn level_label(&self, index: usize) -> Option<&str> {
        match self {
            AttributeKind::Numeric => None,
            AttributeKind::Binary => ["0", "1"].get(index).copied(),
            AttributeKind::Nominal(levels) => levels.get(index).map(String::as_str),
        }
    }

    pub fn level_index(&self, label: &str) -> Option<usize> {
        match self {
            AttributeKind::Numeric => None,
            AttributeKind::Binary => match label {
                "0" => Some(0),
                "1" => Some(1),
                _ => label.parse::<f64>().ok().and_then(|v| {
                    if v == 0.0 {
                        Some(0)
                    } else if v == 1.0 {
                        Some(1)
                    } else {
                        None
                    }
                }),
            },
            AttributeKind::Nominal(levels) => levels.iter().position(|l| l == label),
        }
    }

    /// Parses one textual cell into the internal value representation.
    pub(crate) fn parse_value(&self, text: &str) -> Result<f64, String> {
        match self {
            AttributeKind::Numeric => match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err("not a finite number".into()),
            },
            _ => self
                .level_index(text)
                .map(|i| i as f64)
                .ok_or_else(|| "not a declared level".into()),
        }
    }

    pub(crate) fn format_value(&self, value: f64) -> String {
        match self.level_label(value as usize) {
            Some(label) if self.is_nominal() => label.to_string(),
            _ => format!("{value}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn new(name: impl Into<String>, kind: AttributeKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

/// An immutable, validated table with one designated nominal class attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    attributes: Vec<AttributeSpec>,
    class_index: usize,
    rows: Vec<Vec<f64>>,
}

impl Dataset {
    /// Validates and wraps a table. Rejects ragged rows, non-finite numeric
    /// values, nominal values outside the level list and a non-nominal class.
    /// An empty row set is allowed here (fold splits can be empty); loaders
    /// reject it separately.
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<AttributeSpec>,
        class_index: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, DatasetError> {
        let class = attributes
            .get(class_index)
            .ok_or_else(|| DatasetError::UnknownClassColumn(class_index.to_string()))?;
        if !class.kind.is_nominal() {
            return Err(DatasetError::ClassNotNominal(class.name.clone()));
        }
        for attr in &attributes {
            if let AttributeKind::Nominal(levels) = &attr.kind {
                AttributeKind::nominal(&attr.name, levels.iter().cloned())?;
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != attributes.len() {
                return Err(DatasetError::MalformedRow {
                    row: r + 1,
                    expected: attributes.len(),
                    found: row.len(),
                });
            }
            for (value, attr) in row.iter().zip(&attributes) {
                let ok = match attr.kind.n_levels() {
                    None => value.is_finite(),
                    Some(n) => value.fract() == 0.0 && *value >= 0.0 && (*value as usize) < n,
                };
                if !ok {
                    return Err(DatasetError::InvalidValue {
                        row: r + 1,
                        column: attr.name.clone(),
                        value: value.to_string(),
                        reason: "outside the attribute's domain".into(),
                    });
                }
            }
        }
        Ok(Self {
            name: name.into(),
            attributes,
            class_index,
            rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &AttributeSpec {
        &self.attributes[index]
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    pub fn class_attribute(&self) -> &AttributeSpec {
        &self.attributes[self.class_index]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn n_instances(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.attributes.len() - 1
    }

    /// Attribute indices of every predictor, in schema order.
    pub fn predictor_indices(&self) -> Vec<usize> {
        (0..self.attributes.len())
            .filter(|&i| i != self.class_index)
            .collect()
    }

    pub fn n_classes(&self) -> usize {
        self.class_attribute().kind.n_levels().unwrap_or(0)
    }

    pub fn class_levels(&self) -> Vec<String> {
        (0..self.n_classes())
            .map(|i| self.class_label(i).to_string())
            .collect()
    }

    pub fn class_label(&self, class: usize) -> &str {
        self.class_attribute().kind.level_label(class).unwrap_or("?")
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.rows[i][self.class_index] as usize
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for row in &self.rows {
            counts[row[self.class_index] as usize] += 1;
        }
        counts
    }

    /// Rows at `indices` (in that order) over the same schema.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            attributes: self.attributes.clone(),
            class_index: self.class_index,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Restricts the schema to the given predictor attribute indices plus the
    /// class, preserving original attribute order.
    pub fn select_predictors(&self, predictors: &[usize]) -> Dataset {
        let mut keep: Vec<usize> = predictors
            .iter()
            .copied()
            .filter(|&i| i != self.class_index && i < self.attributes.len())
            .collect();
        keep.push(self.class_index);
        keep.sort_unstable();
        keep.dedup();
        let class_index = keep.iter().position(|&i| i == self.class_index).unwrap();
        Dataset {
            name: self.name.clone(),
            attributes: keep.iter().map(|&i| self.attributes[i].clone()).collect(),
            class_index,
            rows: self
                .rows
                .iter()
                .map(|row| keep.iter().map(|&i| row[i]).collect())
                .collect(),
        }
    }

    /// Appends predictor columns after the existing attributes.
    pub(crate) fn with_appended_columns(&self, specs: Vec<AttributeSpec>, columns: Vec<Vec<f64>>) -> Dataset {
        let mut attributes = self.attributes.clone();
        attributes.extend(specs);
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut row = row.clone();
                row.extend(columns.iter().map(|c| c[r]));
                row
            })
            .collect();
        Dataset {
            name: self.name.clone(),
            attributes,
            class_index: self.class_index,
            rows,
        }
    }

    /// Writes the table as comma-separated text with a header line. Reloading
    /// the output with [`load_csv`] and the class column named reproduces this
    /// dataset.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.attributes)
                .map(|(v, a)| a.kind.format_value(*v))
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Ordering used for inferred level lists: digit runs compare numerically,
/// so `class2 < class10`.
pub(crate) fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    if let (Ok(x), Ok(y)) = (a.parse::<f64>(), b.parse::<f64>()) {
        return x.total_cmp(&y).then_with(|| a.cmp(b));
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(&cb) {
        let ord = if *da && *db {
            let (ta, tb) = (sa.trim_start_matches('0'), sb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
        } else {
            sa.cmp(sb)
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}
