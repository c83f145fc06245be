use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SopError};
use crate::io::read_to_string;

/// Top-level run configuration. Unknown keys are rejected at every level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub certify: Option<CertifyConfig>,
    pub train: Option<TrainSection>,
    pub eval: Option<EvalConfig>,
    pub label: Option<LabelConfig>,
    /// Directory that relative paths are resolved against; the config file's directory
    /// when loaded from disk.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SopError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json_str(&read_to_string(path)?)
            .map_err(|e| SopError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            SopError::Config("a seed is required (config \"seed\" or --seed)".into())
        })
    }

    pub(crate) fn section<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T> {
        section
            .as_ref()
            .ok_or_else(|| SopError::Config(format!("missing \"{name}\" section")))
    }

    pub(crate) fn path(&self, p: &Path) -> PathBuf {
        super::resolve(self.base_dir.as_deref(), p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyFamily {
    /// Minimum total deletion error on monomials.
    Monomial,
    /// Minimum total insertion error on binomials.
    Binomial,
    /// Insertion error of the zero attribution on monomials.
    ZeroAttribution,
    /// Grouped errors of the exact grouped attribution.
    Grouped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolynomialKind {
    Monomial,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub family: CertifyFamily,
    pub d_min: usize,
    pub d_max: usize,
    /// Polynomial checked by the `grouped` family.
    #[serde(default)]
    pub polynomial: Option<PolynomialKind>,
    /// Offset grid search in the fit; defaults to on for binomials only.
    #[serde(default)]
    pub with_offset: Option<bool>,
    /// When set, the fitted slope must land within `slope_tolerance` of it.
    #[serde(default)]
    pub slope_target: Option<f64>,
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
}

fn default_slope_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// Headerless CSV, features then an integer label per row.
    pub dataset: PathBuf,
    pub steps: usize,
    pub learning_rate: f64,
    #[serde(default = "default_heads")]
    pub heads: usize,
    /// Contiguous, near-equal segments over the feature axis.
    pub segments: usize,
    /// `linear` or `tanh`.
    #[serde(default = "default_backbone")]
    pub backbone: String,
    #[serde(default = "default_embed_dim")]
    pub embed_dim: usize,
    #[serde(default = "default_classifier_steps")]
    pub classifier_steps: usize,
    #[serde(default = "default_classifier_lr")]
    pub classifier_learning_rate: f64,
    #[serde(default = "yes")]
    pub train_classifier: bool,
    /// Accuracy gate on the training set.
    #[serde(default)]
    pub min_accuracy: Option<f64>,
}

fn default_heads() -> usize {
    crate::model::DEFAULT_HEADS
}

fn default_backbone() -> String {
    "tanh".into()
}

fn default_embed_dim() -> usize {
    8
}

fn default_classifier_steps() -> usize {
    200
}

fn default_classifier_lr() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMetric {
    Accuracy,
    Insertion,
    Deletion,
    GroupedInsertion,
    GroupedDeletion,
    RandomInsertion,
    Sparsity,
    Comprehensiveness,
    Sufficiency,
}

impl EvalMetric {
    pub const ALL: [EvalMetric; 9] = [
        EvalMetric::Accuracy,
        EvalMetric::Insertion,
        EvalMetric::Deletion,
        EvalMetric::GroupedInsertion,
        EvalMetric::GroupedDeletion,
        EvalMetric::RandomInsertion,
        EvalMetric::Sparsity,
        EvalMetric::Comprehensiveness,
        EvalMetric::Sufficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvalMetric::Accuracy => "accuracy",
            EvalMetric::Insertion => "insertion",
            EvalMetric::Deletion => "deletion",
            EvalMetric::GroupedInsertion => "grouped_insertion",
            EvalMetric::GroupedDeletion => "grouped_deletion",
            EvalMetric::RandomInsertion => "random_insertion",
            EvalMetric::Sparsity => "sparsity",
            EvalMetric::Comprehensiveness => "comprehensiveness",
            EvalMetric::Sufficiency => "sufficiency",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub checkpoint: PathBuf,
    pub dataset: PathBuf,
    #[serde(default = "all_metrics")]
    pub metrics: Vec<EvalMetric>,
    /// Features per step of the per-feature curves.
    #[serde(default = "one")]
    pub step: usize,
    /// Classes to explain; the predicted class when absent.
    #[serde(default)]
    pub classes: Option<Vec<usize>>,
    /// Number of top-scored groups forming the rationale.
    #[serde(default = "one")]
    pub rationale_groups: usize,
    #[serde(default)]
    pub max_examples: Option<usize>,
}

fn all_metrics() -> Vec<EvalMetric> {
    EvalMetric::ALL.to_vec()
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapInput {
    /// CSV grid or `SOPM` binary.
    pub map: PathBuf,
    /// CSV grid of per-pixel segment ids.
    pub segmentation: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelConfig {
    pub checkpoint: PathBuf,
    pub maps: Vec<MapInput>,
    #[serde(default = "default_cluster_sigma")]
    pub cluster_sigma: f64,
}

fn default_cluster_sigma() -> f64 {
    crate::structures::DEFAULT_CLUSTER_SIGMA
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_parsing() {
        assert!(RunConfig::from_json_str(r#"{"seed": 1, "extra": 2}"#).is_err());
        assert!(RunConfig::from_json_str(
            r#"{"certify": {"family": "monomial", "d_min": 2, "d_max": 4, "bogus": 1}}"#
        )
        .is_err());
        let c = RunConfig::from_json_str(
            r#"{"certify": {"family": "binomial", "d_min": 3, "d_max": 9}}"#,
        )
        .unwrap();
        let cert = c.certify.unwrap();
        assert_eq!(cert.family, CertifyFamily::Binomial);
        assert_eq!(cert.slope_tolerance, 0.05);
        assert!(c.seed.is_none());
    }

    #[test]
    fn eval_defaults() {
        let c = RunConfig::from_json_str(
            r#"{"seed": 3, "eval": {"checkpoint": "c.json", "dataset": "d.csv"}}"#,
        )
        .unwrap();
        let e = c.eval.unwrap();
        assert_eq!(e.metrics.len(), EvalMetric::ALL.len());
        assert_eq!(e.step, 1);
        assert!(RunConfig::default().require_seed().is_err());
    }
}
