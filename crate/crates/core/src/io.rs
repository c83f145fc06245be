//! Headerless CSV grids and atomic file output.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, SopError};

/// Parses comma-separated rows, skipping blank lines and `#` comments. Errors name the
/// 1-based line.
pub(crate) fn parse_grid<T: FromStr>(text: &str, source: &str) -> Result<Vec<(usize, Vec<T>)>>
where
    T::Err: std::fmt::Display,
{
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for (col, field) in line.split(',').enumerate() {
            let value = field.trim().parse::<T>().map_err(|e| SopError::Parse {
                path: source.to_string(),
                line: idx + 1,
                message: format!("column {}: {e} ({:?})", col + 1, field.trim()),
            })?;
            row.push(value);
        }
        rows.push((idx + 1, row));
    }
    Ok(rows)
}

/// Rows of equal width; the first row fixes the width.
pub(crate) fn parse_rect<T: FromStr>(text: &str, source: &str) -> Result<Vec<Vec<T>>>
where
    T::Err: std::fmt::Display,
{
    let rows = parse_grid(text, source)?;
    let width = rows.first().map_or(0, |r| r.1.len());
    for (line, row) in &rows {
        if row.len() != width {
            return Err(SopError::Parse {
                path: source.to_string(),
                line: *line,
                message: format!("expected {width} columns, found {}", row.len()),
            });
        }
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SopError::file(path, e))
}

/// Writes through a sibling temp file and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| SopError::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| SopError::file(path, e))
}
