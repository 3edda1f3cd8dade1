use std::collections::BTreeMap;
use std::io::Read;

use super::{natural_cmp, AttributeKind, AttributeSpec, Dataset, DatasetError};

/// Which column holds the class.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ClassColumn {
    Name(String),
    Index(usize),
    #[default]
    Last,
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub class_column: ClassColumn,
    /// Explicit kinds for named columns, bypassing inference.
    pub overrides: BTreeMap<String, AttributeKind>,
    pub name: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            class_column: ClassColumn::Last,
            overrides: BTreeMap::new(),
            name: "dataset".to_string(),
        }
    }
}

impl CsvOptions {
    pub fn with_class(class_column: ClassColumn) -> Self {
        Self {
            class_column,
            ..Self::default()
        }
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

/// Loads comma-separated text. Column kinds are inferred: Binary when every
/// value is 0 or 1, Numeric when every value parses as a number, Nominal
/// (levels in natural order) otherwise. The class column is always nominal.
pub fn load_csv<R: Read>(source: R, options: &CsvOptions) -> Result<Dataset, DatasetError> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(source);

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DatasetError::Csv(e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        records.push(record.iter().map(str::to_string).collect::<Vec<_>>());
    }

    let mut records = records.into_iter();
    let header: Vec<String> = if options.has_header {
        records.next().ok_or(DatasetError::EmptyDataset)?
    } else {
        Vec::new()
    };
    let body: Vec<Vec<String>> = records.collect();
    let width = if options.has_header {
        header.len()
    } else {
        body.first().map(Vec::len).ok_or(DatasetError::EmptyDataset)?
    };
    let names: Vec<String> = if options.has_header {
        header
    } else {
        (1..=width).map(|i| format!("attr{i}")).collect()
    };

    let class_index = match &options.class_column {
        ClassColumn::Last => width.checked_sub(1),
        ClassColumn::Index(i) => Some(*i).filter(|&i| i < width),
        ClassColumn::Name(name) => names.iter().position(|n| n == name),
    }
    .ok_or_else(|| {
        DatasetError::UnknownClassColumn(match &options.class_column {
            ClassColumn::Name(n) => n.clone(),
            ClassColumn::Index(i) => i.to_string(),
            ClassColumn::Last => "<last>".into(),
        })
    })?;

    for (r, row) in body.iter().enumerate() {
        if row.len() != width {
            return Err(DatasetError::MalformedRow {
                row: r + 1,
                expected: width,
                found: row.len(),
            });
        }
        for (c, cell) in row.iter().enumerate() {
            if is_missing(cell) {
                return Err(DatasetError::MissingValue {
                    row: r + 1,
                    column: names[c].clone(),
                });
            }
        }
    }
    if body.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }

    let mut attributes = Vec::with_capacity(width);
    for (c, name) in names.iter().enumerate() {
        let column = body.iter().map(|row| row[c].as_str());
        let kind = match options.overrides.get(name) {
            Some(kind) => kind.clone(),
            None => infer_kind(name, column, c == class_index)?,
        };
        if c == class_index && !kind.is_nominal() {
            return Err(DatasetError::ClassNotNominal(name.clone()));
        }
        attributes.push(AttributeSpec::new(name.clone(), kind));
    }

    let mut rows = Vec::with_capacity(body.len());
    for (r, row) in body.iter().enumerate() {
        let mut values = Vec::with_capacity(width);
        for (cell, attr) in row.iter().zip(&attributes) {
            let v = attr
                .kind
                .parse_value(cell)
                .map_err(|reason| DatasetError::InvalidValue {
                    row: r + 1,
                    column: attr.name.clone(),
                    value: cell.clone(),
                    reason,
                })?;
            values.push(v);
        }
        rows.push(values);
    }
    Dataset::new(options.name.clone(), attributes, class_index, rows)
}

fn infer_kind<'a>(
    name: &str,
    values: impl Iterator<Item = &'a str> + Clone,
    force_nominal: bool,
) -> Result<AttributeKind, DatasetError> {
    let numbers: Option<Vec<f64>> = values
        .clone()
        .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect();
    if let Some(numbers) = &numbers {
        if numbers.iter().all(|&x| x == 0.0 || x == 1.0) {
            return Ok(AttributeKind::Binary);
        }
        if !force_nominal {
            return Ok(AttributeKind::Numeric);
        }
    }
    let mut levels: Vec<&str> = values.collect();
    levels.sort_by(|a, b| natural_cmp(a, b));
    levels.dedup();
    AttributeKind::nominal(name, levels)
}
