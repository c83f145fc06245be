//! Cross-entropy training of the generator and selector with hand-derived gradients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, shape_err, Result, SopError};
use crate::math::{axpy, hadamard, softmax, sparsemax_vjp_from_output, DenseMatrix};
use crate::model::backbone::Backbone;
use crate::model::forward::{argmax, forward_traced, ForwardTrace};
use crate::model::params::{GroupGenParams, GroupSelectParams};
use crate::model::segmentation::Segmentation;

/// Labelled inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(domain_err("dataset is empty"));
        }
        if inputs.len() != labels.len() {
            return Err(shape_err("inputs and labels differ in length"));
        }
        let d = inputs[0].len();
        if inputs.iter().any(|x| x.len() != d) {
            return Err(shape_err("inputs have different lengths"));
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

/// Trainable parameters of a SOP model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SopParams {
    pub gen: GroupGenParams,
    pub sel: GroupSelectParams,
}

impl SopParams {
    /// Seeded initialization: Gaussian projections, `C` from the backbone classifier.
    pub fn init<B: Backbone + ?Sized, R: Rng + ?Sized>(
        backbone: &B,
        seg: &Segmentation,
        heads: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let n = seg.n_segments();
        Ok(Self {
            gen: GroupGenParams::random(heads, n, n + 1, rng)?,
            sel: GroupSelectParams::random(backbone.classifier(), rng)?,
        })
    }

    fn matrices(&self) -> Vec<&DenseMatrix> {
        let mut out = Vec::new();
        for h in self.gen.heads() {
            out.push(&h.w_q);
            out.push(&h.w_k);
        }
        out.extend([&self.sel.w_q, &self.sel.w_k, &self.sel.c]);
        out
    }

    /// All parameters flattened: per head `w_q, w_k`, then selector `w_q, w_k, c`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.matrices()
            .into_iter()
            .flat_map(|m| m.data().to_vec())
            .collect()
    }

    pub fn from_flat(&self, flat: &[f64]) -> Result<Self> {
        let total: usize = self.matrices().iter().map(|m| m.data().len()).sum();
        if flat.len() != total {
            return Err(shape_err(format!(
                "expected {total} parameters, got {}",
                flat.len()
            )));
        }
        let mut offset = 0;
        let mut take = |m: &DenseMatrix| {
            let n = m.data().len();
            let out = DenseMatrix::new(m.rows(), m.cols(), flat[offset..offset + n].to_vec());
            offset += n;
            out
        };
        let mut heads = Vec::new();
        for h in self.gen.heads() {
            heads.push(crate::model::params::HeadWeights {
                w_q: take(&h.w_q)?,
                w_k: take(&h.w_k)?,
            });
        }
        let w_q = take(&self.sel.w_q)?;
        let w_k = take(&self.sel.w_k)?;
        let c = take(&self.sel.c)?;
        Ok(Self {
            gen: GroupGenParams::new(heads)?,
            sel: GroupSelectParams::new(w_q, w_k, c)?,
        })
    }
}

/// Gradient with the same layout as [`SopParams`].
#[derive(Debug, Clone)]
pub struct SopGradients {
    pub heads: Vec<(DenseMatrix, DenseMatrix)>,
    pub sel_w_q: DenseMatrix,
    pub sel_w_k: DenseMatrix,
    pub c: DenseMatrix,
}

impl SopGradients {
    fn zeros_like(p: &SopParams) -> Self {
        let z = |m: &DenseMatrix| DenseMatrix::zeros(m.rows(), m.cols());
        Self {
            heads: p
                .gen
                .heads()
                .iter()
                .map(|h| (z(&h.w_q), z(&h.w_k)))
                .collect(),
            sel_w_q: z(&p.sel.w_q),
            sel_w_k: z(&p.sel.w_k),
            c: z(&p.sel.c),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (q, k) in &self.heads {
            out.extend_from_slice(q.data());
            out.extend_from_slice(k.data());
        }
        out.extend_from_slice(self.sel_w_q.data());
        out.extend_from_slice(self.sel_w_k.data());
        out.extend_from_slice(self.c.data());
        out
    }
}

/// Which parameter blocks receive gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainableBlocks {
    pub generator: bool,
    pub selector: bool,
    pub classifier: bool,
}

impl Default for TrainableBlocks {
    fn default() -> Self {
        Self {
            generator: true,
            selector: true,
            classifier: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub heads: usize,
    pub seed: u64,
    #[serde(default = "yes")]
    pub train_classifier: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub initial: SopParams,
    pub params: SopParams,
    /// Mean loss before each step, plus the loss after the final step.
    pub loss_history: Vec<f64>,
    pub accuracy: f64,
    pub generator_trained: bool,
}

fn cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    let probs = softmax(logits)?;
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    let mut grad = probs;
    grad[label] -= 1.0;
    Ok((lse - logits[label], grad))
}

fn backward<B: Backbone + ?Sized>(
    x: &[f64],
    trace: &ForwardTrace,
    d_pred: &[f64],
    seg: &Segmentation,
    params: &SopParams,
    backbone: &B,
    blocks: TrainableBlocks,
    grads: &mut SopGradients,
) -> Result<()> {
    let attr = &trace.attribution;
    let g = attr.n_groups();
    let n_classes = attr.n_classes();
    let h = params.sel.embed_dim();
    let sel = &params.sel;
    let st = &trace.selector;

    // prediction_k = sum_i c_ik y_ik
    let mut d_partial = vec![vec![0.0; n_classes]; g];
    let mut d_affinity = Vec::with_capacity(n_classes); // per class, length G
    for k in 0..n_classes {
        let column: Vec<f64> = (0..g).map(|i| attr.scores.get(i, k)).collect();
        let d_scores: Vec<f64> = (0..g)
            .map(|i| d_pred[k] * attr.partial_logits.get(i, k))
            .collect();
        d_affinity.push(sparsemax_vjp_from_output(&column, &d_scores));
        for (row, c) in d_partial.iter_mut().zip(&column) {
            row[k] = d_pred[k] * c;
        }
    }

    let mut d_class_queries = vec![vec![0.0; h]; n_classes];
    for k in 0..n_classes {
        for i in 0..g {
            let a = d_affinity[k][i] / st.scale;
            if a != 0.0 {
                axpy(a, st.group_keys.row(i), &mut d_class_queries[k]);
            }
        }
    }
    let mut d_group_keys = vec![vec![0.0; h]; g];
    for (i, dk) in d_group_keys.iter_mut().enumerate() {
        for k in 0..n_classes {
            let a = d_affinity[k][i] / st.scale;
            if a != 0.0 {
                axpy(a, st.class_queries.row(k), dk);
            }
        }
    }

    // class_queries_k = W_q' C_k ; group_keys_i = W_k' z_i ; partial_ik = C_k . z_i
    if blocks.selector {
        for k in 0..n_classes {
            grads
                .sel_w_q
                .add_outer(1.0, &d_class_queries[k], sel.c.row(k))?;
        }
        for i in 0..g {
            grads
                .sel_w_k
                .add_outer(1.0, &d_group_keys[i], &trace.embeddings[i])?;
        }
    }
    if blocks.classifier {
        for k in 0..n_classes {
            let back = sel.w_q.t_matvec(&d_class_queries[k])?;
            grads.c.add_outer(1.0, &unit(k, n_classes), &back)?;
            for i in 0..g {
                let a = d_partial[i][k];
                if a != 0.0 {
                    grads
                        .c
                        .add_outer(a, &unit(k, n_classes), &trace.embeddings[i])?;
                }
            }
        }
    }
    if !blocks.generator {
        return Ok(());
    }

    let mut d_embeddings = Vec::with_capacity(g);
    for i in 0..g {
        let mut dz = sel.w_k.t_matvec(&d_group_keys[i])?;
        for k in 0..n_classes {
            axpy(d_partial[i][k], sel.c.row(k), &mut dz);
        }
        d_embeddings.push(dz);
    }

    let gt = &trace.generator;
    let n_seg = seg.n_segments();
    for (head_idx, head) in params.gen.heads().iter().enumerate() {
        let attention = &gt.attention[head_idx];
        let mut d_scores = DenseMatrix::zeros(n_seg, n_seg);
        for r in 0..n_seg {
            let group = head_idx * n_seg + r;
            let d_masked = backbone
                .embed_vjp(&trace.masked_inputs[group], &d_embeddings[group])
                .ok_or_else(|| domain_err("backbone has no input gradient"))??;
            let d_mask = hadamard(&d_masked, x);
            let d_weights = seg.reduce(&d_mask);
            let d_row = sparsemax_vjp_from_output(attention.row(r), &d_weights);
            d_scores.add_outer(1.0 / gt.scale, &unit(r, n_seg), &d_row)?;
        }
        // scores = Q K^T, Q = T W_q^T, K = T W_k^T
        let d_q = d_scores.matmul(&gt.keys[head_idx])?;
        let d_k = d_scores.transpose().matmul(&gt.queries[head_idx])?;
        let (gq, gk) = &mut grads.heads[head_idx];
        gq.add_scaled(1.0, &d_q.transpose().matmul(&gt.tokens)?)?;
        gk.add_scaled(1.0, &d_k.transpose().matmul(&gt.tokens)?)?;
        debug_assert_eq!(gq.shape(), head.w_q.shape());
    }
    Ok(())
}

fn unit(i: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Mean cross-entropy of `softmax(prediction)` over the dataset and its gradient.
pub fn loss_and_grad<B: Backbone + ?Sized>(
    data: &Dataset,
    seg: &Segmentation,
    params: &SopParams,
    backbone: &B,
    blocks: TrainableBlocks,
) -> Result<(f64, SopGradients)> {
    let mut grads = SopGradients::zeros_like(params);
    let mut total = 0.0;
    let n = data.len() as f64;
    for (x, &label) in data.inputs.iter().zip(&data.labels) {
        let trace = forward_traced(x, seg, &params.gen, &params.sel, backbone)?;
        let (loss, d_pred) = cross_entropy(&trace.attribution.prediction, label)?;
        total += loss;
        let d_pred: Vec<f64> = d_pred.iter().map(|g| g / n).collect();
        backward(
            x, &trace, &d_pred, seg, params, backbone, blocks, &mut grads,
        )?;
    }
    Ok((total / n, grads))
}

/// Mean loss only.
pub fn mean_loss<B: Backbone + ?Sized>(
    data: &Dataset,
    seg: &Segmentation,
    params: &SopParams,
    backbone: &B,
) -> Result<f64> {
    let mut total = 0.0;
    for (x, &label) in data.inputs.iter().zip(&data.labels) {
        let trace = forward_traced(x, seg, &params.gen, &params.sel, backbone)?;
        total += cross_entropy(&trace.attribution.prediction, label)?.0;
    }
    Ok(total / data.len() as f64)
}

pub fn accuracy<B: Backbone + ?Sized>(
    data: &Dataset,
    seg: &Segmentation,
    params: &SopParams,
    backbone: &B,
) -> Result<f64> {
    let mut correct = 0usize;
    for (x, &label) in data.inputs.iter().zip(&data.labels) {
        let attr = crate::model::sop_forward(x, seg, &params.gen, &params.sel, backbone)?;
        if argmax(&attr.prediction) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

fn apply_step(params: &mut SopParams, grads: &SopGradients, lr: f64) -> Result<()> {
    for (head, (gq, gk)) in params.gen.heads_mut().iter_mut().zip(&grads.heads) {
        head.w_q.add_scaled(-lr, gq)?;
        head.w_k.add_scaled(-lr, gk)?;
    }
    params.sel.w_q.add_scaled(-lr, &grads.sel_w_q)?;
    params.sel.w_k.add_scaled(-lr, &grads.sel_w_k)?;
    params.sel.c.add_scaled(-lr, &grads.c)?;
    Ok(())
}

/// Full-batch gradient descent with a fixed step from a seeded initialization. The
/// backbone stays frozen; the generator is trained only when the backbone exposes an
/// input gradient.
pub fn train<B: Backbone + ?Sized>(
    data: &Dataset,
    seg: &Segmentation,
    backbone: &B,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let initial = SopParams::init(backbone, seg, config.heads, &mut rng)?;
    train_from(data, seg, backbone, initial, config)
}

/// [`train`] starting from given parameters; `config.seed` and `config.heads` are unused.
pub fn train_from<B: Backbone + ?Sized>(
    data: &Dataset,
    seg: &Segmentation,
    backbone: &B,
    initial: SopParams,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(domain_err("dataset is empty"));
    }
    if data.n_features() != backbone.input_dim() {
        return Err(shape_err("dataset width does not match backbone input"));
    }
    if data.n_classes() > backbone.n_classes() {
        return Err(shape_err("dataset has more classes than the classifier"));
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(domain_err("learning rate must be finite and non-negative"));
    }
    initial.gen.check_segments(seg.n_segments())?;
    let probe = vec![0.0; backbone.embed_dim()];
    let generator_trained = backbone
        .embed_vjp(&data.inputs[0], &probe)
        .is_some_and(|r| r.is_ok());
    let blocks = TrainableBlocks {
        generator: generator_trained,
        selector: true,
        classifier: config.train_classifier,
    };

    let mut params = initial.clone();
    let mut history = Vec::with_capacity(config.steps + 1);
    for step in 0..config.steps {
        let (loss, grads) = loss_and_grad(data, seg, &params, backbone, blocks)?;
        if !loss.is_finite() {
            return Err(SopError::Numeric(format!(
                "loss became {loss} at step {step} (previous {:?}, lr {})",
                history.last(),
                config.learning_rate
            )));
        }
        history.push(loss);
        if config.learning_rate > 0.0 {
            apply_step(&mut params, &grads, config.learning_rate)?;
        }
    }
    let final_loss = mean_loss(data, seg, &params, backbone)?;
    if !final_loss.is_finite() {
        return Err(SopError::Numeric(format!(
            "final loss is {final_loss} after {} steps",
            config.steps
        )));
    }
    history.push(final_loss);
    let accuracy = accuracy(data, seg, &params, backbone)?;
    Ok(TrainOutcome {
        initial,
        params,
        loss_history: history,
        accuracy,
        generator_trained,
    })
}
