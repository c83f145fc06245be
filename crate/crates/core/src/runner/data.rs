use std::path::Path;

use crate::error::{Result, SopError};
use crate::io::{parse_grid, read_to_string};
use crate::model::Dataset;

/// Headerless CSV, one example per line: features, then a non-negative integer label.
pub fn parse_dataset(text: &str, source: &str) -> Result<Dataset> {
    let rows = parse_grid::<String>(text, source)?;
    let err = |line: usize, message: String| SopError::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let width = rows.first().map_or(0, |r| r.1.len());
    if width < 2 && !rows.is_empty() {
        return Err(err(
            rows[0].0,
            "need at least one feature and a label".into(),
        ));
    }
    let mut inputs = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        if fields.len() != width {
            return Err(err(
                line,
                format!("expected {width} columns, found {}", fields.len()),
            ));
        }
        let (label_field, feature_fields) = fields.split_last().expect("width >= 2");
        let label = label_field.parse::<usize>().map_err(|_| {
            err(
                line,
                format!("label {label_field:?} is not a non-negative integer"),
            )
        })?;
        let mut features = Vec::with_capacity(feature_fields.len());
        for (col, f) in feature_fields.iter().enumerate() {
            let v = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    err(
                        line,
                        format!("column {}: {f:?} is not a finite number", col + 1),
                    )
                })?;
            features.push(v);
        }
        inputs.push(features);
        labels.push(label);
    }
    Dataset::new(inputs, labels)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows() {
        let d = parse_dataset("0.5,1,0\n-1,2e-1,1\n", "d.csv").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.inputs[1], vec![-1.0, 0.2]);
        assert_eq!(d.labels, vec![0, 1]);
    }

    #[test]
    fn errors_name_lines() {
        for (text, line) in [
            ("1,2,0\n1,2,x\n", 2),
            ("1,2,0\n\n1,nan,1\n", 3),
            ("1,2,0\n1,2\n", 2),
            ("1,2,-1\n", 1),
            ("1,2,0.5\n", 1),
        ] {
            match parse_dataset(text, "d.csv") {
                Err(SopError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
