//! The ARFF subset: `@relation`, `@attribute` (numeric/real/integer or
//! `{...}` nominal), `@data` with dense comma-separated rows, `%` comments.

use std::io::{BufRead, BufReader, Read};

use super::{AttributeKind, AttributeSpec, ClassColumn, Dataset, DatasetError};

/// Loads ARFF with the last attribute as class.
pub fn load_arff<R: Read>(source: R) -> Result<Dataset, DatasetError> {
    load_arff_with_class(source, &ClassColumn::Last)
}

pub fn load_arff_with_class<R: Read>(source: R, class_column: &ClassColumn) -> Result<Dataset, DatasetError> {
    let reader = BufReader::new(source);
    let mut relation = None;
    let mut attributes: Vec<AttributeSpec> = Vec::new();
    let mut in_data = false;
    let mut rows = Vec::new();

    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let (keyword, rest) = split_keyword(line);
            match keyword.to_ascii_lowercase().as_str() {
                "@relation" => relation = Some(unquote(rest.trim()).to_string()),
                "@attribute" => attributes.push(parse_attribute(rest)?),
                "@data" => {
                    if attributes.is_empty() {
                        return Err(DatasetError::MalformedHeader(
                            "@data before any @attribute".into(),
                        ));
                    }
                    in_data = true;
                }
                _ => return Err(DatasetError::MalformedHeader(format!("unexpected line `{line}`"))),
            }
            continue;
        }

        if line.starts_with('{') {
            return Err(DatasetError::UnsupportedArffFeature("sparse data rows".into()));
        }
        let row_no = rows.len() + 1;
        let cells: Vec<&str> = line.split(',').map(|c| unquote(c.trim())).collect();
        if cells.len() != attributes.len() {
            return Err(DatasetError::MalformedRow {
                row: row_no,
                expected: attributes.len(),
                found: cells.len(),
            });
        }
        let mut values = Vec::with_capacity(cells.len());
        for (cell, attr) in cells.iter().zip(&attributes) {
            if cell.is_empty() || *cell == "?" {
                return Err(DatasetError::MissingValue {
                    row: row_no,
                    column: attr.name.clone(),
                });
            }
            let v = attr
                .kind
                .parse_value(cell)
                .map_err(|reason| DatasetError::InvalidValue {
                    row: row_no,
                    column: attr.name.clone(),
                    value: cell.to_string(),
                    reason,
                })?;
            values.push(v);
        }
        rows.push(values);
    }

    let relation = relation.ok_or_else(|| DatasetError::MalformedHeader("missing @relation".into()))?;
    if !in_data {
        return Err(DatasetError::MalformedHeader("missing @data".into()));
    }
    if rows.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let class_index = match class_column {
        ClassColumn::Last => Some(attributes.len() - 1),
        ClassColumn::Index(i) => Some(*i).filter(|&i| i < attributes.len()),
        ClassColumn::Name(n) => attributes.iter().position(|a| &a.name == n),
    }
    .ok_or_else(|| DatasetError::UnknownClassColumn(format!("{class_column:?}")))?;
    Dataset::new(relation, attributes, class_index, rows)
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], &line[i..]),
        None => (line, ""),
    }
}

fn unquote(s: &str) -> &str {
    let b = s.as_bytes();
    if b.len() >= 2 && (b[0] == b'\'' || b[0] == b'"') && b[b.len() - 1] == b[0] {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

fn parse_attribute(rest: &str) -> Result<AttributeSpec, DatasetError> {
    let rest = rest.trim();
    let (name, ty) = if let Some(q) = rest.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let end = rest[1..]
            .find(q)
            .ok_or_else(|| DatasetError::MalformedHeader(format!("unterminated name in `{rest}`")))?;
        (&rest[1..=end], rest[end + 2..].trim())
    } else {
        let (n, t) = split_keyword(rest);
        (n, t.trim())
    };
    if name.is_empty() || ty.is_empty() {
        return Err(DatasetError::MalformedHeader(format!(
            "incomplete @attribute `{rest}`"
        )));
    }
    if ty.starts_with('{') {
        let inner = ty
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| DatasetError::MalformedHeader(format!("unclosed level list `{ty}`")))?;
        let levels: Vec<&str> = inner
            .split(',')
            .map(|l| unquote(l.trim()))
            .filter(|l| !l.is_empty())
            .collect();
        let kind = AttributeKind::nominal(name, levels)?;
        return Ok(AttributeSpec::new(name, kind));
    }
    match ty.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(AttributeSpec::new(name, AttributeKind::Numeric)),
        other => Err(DatasetError::UnsupportedArffFeature(format!(
            "attribute `{name}` of type `{other}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "% self-care sample\n\
        @RELATION scadi\n\
        \n\
        @attribute gender {0,1}\n\
        @attribute age numeric\n\
        @attribute 'd 5100' {1,0}\n\
        @attribute Classes {class1,class2,class7}\n\
        @data\n\
        0,12,1,class1\n\
        1,4,0,class7\n";

    #[test]
    fn parses_header_and_rows() {
        let ds = load_arff(SAMPLE.as_bytes()).unwrap();
        assert_eq!(ds.name(), "scadi");
        assert_eq!(ds.attribute(0).kind, AttributeKind::Binary);
        assert_eq!(ds.attribute(1).kind, AttributeKind::Numeric);
        assert_eq!(ds.attribute(2).name, "d 5100");
        assert_eq!(ds.attribute(2).kind, AttributeKind::Binary);
        assert_eq!(ds.class_index(), 3);
        assert_eq!(ds.row(0), &[0.0, 12.0, 1.0, 0.0]);
        assert_eq!(ds.row(1), &[1.0, 4.0, 0.0, 2.0]);
    }

    #[test]
    fn string_and_date_are_unsupported() {
        for ty in ["string", "date \"yyyy\"", "relational"] {
            let text = format!("@relation r\n@attribute note {ty}\n@attribute c {{a,b}}\n@data\n");
            assert!(matches!(
                load_arff(text.as_bytes()),
                Err(DatasetError::UnsupportedArffFeature(_))
            ));
        }
    }

    #[test]
    fn sparse_rows_are_unsupported() {
        let text = "@relation r\n@attribute x numeric\n@attribute c {a,b}\n@data\n{0 1, 1 a}\n";
        assert!(matches!(
            load_arff(text.as_bytes()),
            Err(DatasetError::UnsupportedArffFeature(_))
        ));
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(
            load_arff("@attribute x numeric\n@data\n1\n".as_bytes()),
            Err(DatasetError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_arff("@relation r\n@attribute c {a,b\n@data\na\n".as_bytes()),
            Err(DatasetError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_arff("@relation r\n@data\n".as_bytes()),
            Err(DatasetError::MalformedHeader(_))
        ));
    }

    #[test]
    fn missing_and_undeclared_values() {
        let base = "@relation r\n@attribute x numeric\n@attribute c {a,b}\n@data\n";
        assert!(matches!(
            load_arff(format!("{base}?,a\n").as_bytes()),
            Err(DatasetError::MissingValue { row: 1, .. })
        ));
        assert!(matches!(
            load_arff(format!("{base}1,z\n").as_bytes()),
            Err(DatasetError::InvalidValue { .. })
        ));
    }

    #[test]
    fn class_override() {
        let ds = load_arff_with_class(SAMPLE.as_bytes(), &ClassColumn::Name("gender".into())).unwrap();
        assert_eq!(ds.class_index(), 0);
        assert!(matches!(
            load_arff_with_class(SAMPLE.as_bytes(), &ClassColumn::Name("age".into())),
            Err(DatasetError::ClassNotNominal(_))
        ));
    }
}
