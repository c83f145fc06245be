use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, shape_err, Result, SopError};
use crate::io::{parse_rect, read_to_string};
use crate::model::Segmentation;

const MAGIC: &[u8; 4] = b"SOPM";
const HEADER_LEN: usize = 16;

/// Row-major intensity map, shifted to zero mean at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
    /// Mean removed at ingestion.
    offset: f64,
    /// Population standard deviation.
    sigma: f64,
}

impl IntensityMap {
    pub fn new(height: usize, width: usize, raw: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(shape_err("map must have at least one pixel"));
        }
        if raw.len() != height * width {
            return Err(shape_err(format!(
                "{} values for a {height}x{width} map",
                raw.len()
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(domain_err("map has non-finite values"));
        }
        let n = raw.len() as f64;
        let offset = raw.iter().sum::<f64>() / n;
        let values: Vec<f64> = raw.iter().map(|v| v - offset).collect();
        let sigma = (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        Ok(Self {
            height,
            width,
            values,
            offset,
            sigma,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Zero-mean values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// CSV grid, one map row per line.
    pub fn from_csv_str(text: &str, source: &str) -> Result<Self> {
        let rows = parse_rect::<f64>(text, source)?;
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        Self::new(height, width, rows.into_iter().flatten().collect())
    }

    /// `SOPM` header (magic, u32 height, u32 width, u32 reserved) then little-endian f32.
    pub fn from_bytes(bytes: &[u8], source: &str) -> Result<Self> {
        let bad = |message: String| SopError::Parse {
            path: source.to_string(),
            line: 0,
            message,
        };
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(bad("missing SOPM header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let (height, width) = (word(4) as usize, word(8) as usize);
        let body = &bytes[HEADER_LEN..];
        if body.len() != height * width * 4 {
            return Err(bad(format!(
                "{height}x{width} map needs {} data bytes, found {}",
                height * width * 4,
                body.len()
            )));
        }
        let raw = body
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        Self::new(height, width, raw)
    }

    /// Binary encoding of the original values, rounded to f32.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        for &v in &self.values {
            out.extend_from_slice(&((v + self.offset) as f32).to_le_bytes());
        }
        out
    }

    /// Binary if the file starts with `SOPM`, CSV otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| SopError::file(path, e))?;
        let source = path.display().to_string();
        if bytes.starts_with(MAGIC) {
            Self::from_bytes(&bytes, &source)
        } else {
            let text = String::from_utf8(bytes).map_err(|_| SopError::Parse {
                path: source.clone(),
                line: 0,
                message: "neither SOPM binary nor UTF-8 CSV".into(),
            })?;
            Self::from_csv_str(&text, &source)
        }
    }
}

/// Per-pixel segment ids as a CSV grid of the given shape.
pub fn segmentation_from_csv_str(
    text: &str,
    source: &str,
    height: usize,
    width: usize,
) -> Result<Segmentation> {
    let rows = parse_rect::<usize>(text, source)?;
    let found = (rows.len(), rows.first().map_or(0, Vec::len));
    if found != (height, width) {
        return Err(shape_err(format!(
            "segmentation is {}x{}, map is {height}x{width}",
            found.0, found.1
        )));
    }
    Segmentation::new(rows.into_iter().flatten().collect())
}

pub fn load_segmentation(path: &Path, height: usize, width: usize) -> Result<Segmentation> {
    let text = read_to_string(path)?;
    segmentation_from_csv_str(&text, &path.display().to_string(), height, width)
}
