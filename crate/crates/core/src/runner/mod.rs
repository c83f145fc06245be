//! Experiment commands behind the `sop` binary. Each command reads a strict JSON config,
//! writes its artifacts atomically into an output directory and reports whether every
//! tolerance gate passed.

mod certify;
mod config;
mod data;
mod eval;
mod label;
mod train;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Result, SopError};
use crate::io::write_atomic;
use crate::math::round_sig;

pub use certify::cmd_certify;
pub use config::{
    CertifyConfig, CertifyFamily, EvalConfig, EvalMetric, LabelConfig, MapInput, PolynomialKind,
    RunConfig, TrainSection,
};
pub use data::{load_dataset, parse_dataset};
pub use eval::cmd_eval;
pub use label::cmd_label;
pub use train::{cmd_train, contiguous_segments};

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Every tolerance gate held.
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
    /// Human-readable gate results.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Certify,
    Train,
    Eval,
    Label,
}

/// Dispatches `command`. `out` is created if missing.
pub fn run(command: Command, config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out).map_err(|e| SopError::file(out, e))?;
    match command {
        Command::Certify => cmd_certify(config, out),
        Command::Train => cmd_train(config, out),
        Command::Eval => cmd_eval(config, out),
        Command::Label => cmd_label(config, out),
    }
}

/// Rounds every float to 9 significant digits; integers are left alone.
pub fn rounded(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with sorted keys and rounded floats, newline terminated.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String> {
    let v = rounded(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn fmt_num(v: f64) -> String {
    format!("{}", round_sig(v))
}

pub(crate) fn emit(
    out: &Path,
    name: &str,
    contents: &str,
    artifacts: &mut Vec<PathBuf>,
) -> Result<()> {
    let path = out.join(name);
    write_atomic(&path, contents.as_bytes())?;
    artifacts.push(path);
    Ok(())
}

pub(crate) fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_json_sorts_and_rounds() {
        let v = serde_json::json!({"b": 1.0 / 3.0, "a": [2, 0.1 + 0.2]});
        let s = to_stable_json(&v).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": [\n    2,\n    0.3\n  ],\n  \"b\": 0.333333333\n}\n"
        );
    }
}
