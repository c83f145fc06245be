use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, shape_err, Result};
use crate::math::{axpy, softmax, DenseMatrix};

/// Frozen black-box feature extractor plus the linear classifier on its embedding.
///
/// `embed` must be deterministic. `embed_vjp` is optional: backbones that cannot
/// differentiate with respect to their input return `None`, which freezes the group
/// generator during training.
pub trait Backbone: Send + Sync {
    fn input_dim(&self) -> usize;

    fn embed_dim(&self) -> usize;

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `n_classes x embed_dim`.
    fn classifier(&self) -> &DenseMatrix;

    /// Gradient of `upstream . embed(x)` with respect to `x`.
    fn embed_vjp(&self, _x: &[f64], _upstream: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    fn n_classes(&self) -> usize {
        self.classifier().rows()
    }

    /// Class logits of the unwrapped model, `C embed(x)`.
    fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.classifier().matvec(&self.embed(x)?)
    }
}

fn check_classifier(classifier: &DenseMatrix, h: usize) -> Result<()> {
    if classifier.cols() != h {
        return Err(shape_err(format!(
            "classifier has {} columns but embedding width is {h}",
            classifier.cols()
        )));
    }
    if classifier.rows() == 0 {
        return Err(shape_err("classifier has no classes"));
    }
    Ok(())
}

/// `embed(x) = W x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBackbone {
    weight: DenseMatrix,
    bias: Vec<f64>,
    classifier: DenseMatrix,
}

impl LinearBackbone {
    pub fn new(weight: DenseMatrix, bias: Vec<f64>, classifier: DenseMatrix) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(shape_err("bias length must equal embedding width"));
        }
        check_classifier(&classifier, weight.rows())?;
        Ok(Self {
            weight,
            bias,
            classifier,
        })
    }

    pub fn weight(&self) -> &DenseMatrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }
}

impl Backbone for LinearBackbone {
    fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    fn embed_dim(&self) -> usize {
        self.weight.rows()
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.weight.matvec(x)?;
        axpy(1.0, &self.bias, &mut z);
        Ok(z)
    }

    fn classifier(&self) -> &DenseMatrix {
        &self.classifier
    }

    fn embed_vjp(&self, x: &[f64], upstream: &[f64]) -> Option<Result<Vec<f64>>> {
        if x.len() != self.input_dim() {
            return Some(Err(shape_err("linear backbone vjp: bad input length")));
        }
        Some(self.weight.t_matvec(upstream))
    }
}

/// One-layer tanh network, `embed(x) = tanh(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhBackbone {
    weight: DenseMatrix,
    bias: Vec<f64>,
    classifier: DenseMatrix,
}

impl TanhBackbone {
    pub fn new(weight: DenseMatrix, bias: Vec<f64>, classifier: DenseMatrix) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(shape_err("bias length must equal embedding width"));
        }
        check_classifier(&classifier, weight.rows())?;
        Ok(Self {
            weight,
            bias,
            classifier,
        })
    }
}

impl Backbone for TanhBackbone {
    fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    fn embed_dim(&self) -> usize {
        self.weight.rows()
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.weight.matvec(x)?;
        for (zi, bi) in z.iter_mut().zip(&self.bias) {
            *zi = (*zi + bi).tanh();
        }
        Ok(z)
    }

    fn classifier(&self) -> &DenseMatrix {
        &self.classifier
    }

    fn embed_vjp(&self, x: &[f64], upstream: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.embed(x).and_then(|z| {
            if upstream.len() != z.len() {
                return Err(shape_err("tanh backbone vjp: bad upstream length"));
            }
            let local: Vec<f64> = z
                .iter()
                .zip(upstream)
                .map(|(zi, u)| u * (1.0 - zi * zi))
                .collect();
            self.weight.t_matvec(&local)
        }))
    }
}

/// Serializable toy backbones used by the experiment runner and checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ToyBackbone {
    Linear(LinearBackbone),
    Tanh(TanhBackbone),
}

impl ToyBackbone {
    /// Random backbone with Gaussian(0, 1/sqrt(d)) weights and a zero classifier.
    /// Use [`fit_classifier`] to obtain a pretrained head.
    pub fn random<R: Rng + ?Sized>(
        kind: &str,
        d: usize,
        h: usize,
        n_classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let normal = Normal::new(0.0, 1.0 / (d as f64).sqrt()).expect("valid std");
        let weight = DenseMatrix::from_fn(h, d, |_, _| normal.sample(rng));
        let bias = vec![0.0; h];
        let classifier = DenseMatrix::zeros(n_classes, h);
        match kind {
            "linear" => Ok(ToyBackbone::Linear(LinearBackbone::new(
                weight, bias, classifier,
            )?)),
            "tanh" => Ok(ToyBackbone::Tanh(TanhBackbone::new(
                weight, bias, classifier,
            )?)),
            other => Err(domain_err(format!("unknown backbone kind {other:?}"))),
        }
    }

    pub fn with_classifier(&self, classifier: DenseMatrix) -> Result<Self> {
        Ok(match self {
            ToyBackbone::Linear(b) => ToyBackbone::Linear(LinearBackbone::new(
                b.weight.clone(),
                b.bias.clone(),
                classifier,
            )?),
            ToyBackbone::Tanh(b) => ToyBackbone::Tanh(TanhBackbone::new(
                b.weight.clone(),
                b.bias.clone(),
                classifier,
            )?),
        })
    }

    fn inner(&self) -> &dyn Backbone {
        match self {
            ToyBackbone::Linear(b) => b,
            ToyBackbone::Tanh(b) => b,
        }
    }
}

impl Backbone for ToyBackbone {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn embed_dim(&self) -> usize {
        self.inner().embed_dim()
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner().embed(x)
    }

    fn classifier(&self) -> &DenseMatrix {
        self.inner().classifier()
    }

    fn embed_vjp(&self, x: &[f64], upstream: &[f64]) -> Option<Result<Vec<f64>>> {
        self.inner().embed_vjp(x, upstream)
    }
}

/// Wraps an arbitrary embedding closure; not differentiable.
pub struct FnBackbone<F> {
    embed: F,
    input_dim: usize,
    classifier: DenseMatrix,
}

impl<F> FnBackbone<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(input_dim: usize, classifier: DenseMatrix, embed: F) -> Self {
        Self {
            embed,
            input_dim,
            classifier,
        }
    }
}

impl<F> Backbone for FnBackbone<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn embed_dim(&self) -> usize {
        self.classifier.cols()
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(shape_err("closure backbone: bad input length"));
        }
        let z = (self.embed)(x);
        if z.len() != self.embed_dim() {
            return Err(shape_err(format!(
                "backbone returned width {}, expected {}",
                z.len(),
                self.embed_dim()
            )));
        }
        Ok(z)
    }

    fn classifier(&self) -> &DenseMatrix {
        &self.classifier
    }
}

/// Softmax-regression head (no bias) on frozen embeddings, full-batch gradient descent
/// from zero. Stands in for the pretrained classifier of a real backbone.
pub fn fit_classifier<B: Backbone + ?Sized>(
    backbone: &B,
    inputs: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    steps: usize,
    learning_rate: f64,
) -> Result<DenseMatrix> {
    if inputs.is_empty() || inputs.len() != labels.len() {
        return Err(domain_err(
            "classifier fit needs a non-empty labelled dataset",
        ));
    }
    let embeddings = inputs
        .iter()
        .map(|x| backbone.embed(x))
        .collect::<Result<Vec<_>>>()?;
    let h = backbone.embed_dim();
    let mut weight = DenseMatrix::zeros(n_classes, h);
    let n = inputs.len() as f64;
    for _ in 0..steps {
        let mut grad = DenseMatrix::zeros(n_classes, h);
        for (z, &label) in embeddings.iter().zip(labels) {
            let probs = softmax(&weight.matvec(z)?)?;
            for (k, p) in probs.iter().enumerate() {
                let g = p - if k == label { 1.0 } else { 0.0 };
                grad.add_outer(g / n, &one_hot_row(k, n_classes), z)?;
            }
        }
        weight.add_scaled(-learning_rate, &grad)?;
    }
    Ok(weight)
}

fn one_hot_row(k: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}
