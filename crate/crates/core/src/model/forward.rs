//! The SOP forward pass: generate groups, embed masked inputs, select groups, and sum.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};
use crate::faithfulness::ScoredGroups;
use crate::math::{attention_scores, hadamard, sparsemax, DenseMatrix};
use crate::model::backbone::Backbone;
use crate::model::params::{token_dim, GroupGenParams, GroupSelectParams};
use crate::model::segmentation::Segmentation;

/// A prediction together with the grouped attribution that produced it.
///
/// `scores` and `partial_logits` are `G x n_classes`; column `k` of `scores` lies on the
/// simplex and `prediction[k]` is exactly `sum_i scores[i][k] * partial_logits[i][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedAttribution {
    pub masks: Vec<Vec<f64>>,
    pub scores: DenseMatrix,
    pub partial_logits: DenseMatrix,
    pub prediction: Vec<f64>,
}

/// Weighted sum of partial logits for class `k`, summed in group order.
pub fn reconstruct(scores: &DenseMatrix, partial_logits: &DenseMatrix, k: usize) -> f64 {
    (0..scores.rows())
        .map(|i| scores.get(i, k) * partial_logits.get(i, k))
        .sum()
}

impl GroupedAttribution {
    pub fn new(
        masks: Vec<Vec<f64>>,
        scores: DenseMatrix,
        partial_logits: DenseMatrix,
    ) -> Result<Self> {
        if scores.shape() != partial_logits.shape() || scores.rows() != masks.len() {
            return Err(shape_err(
                "scores, partial logits and masks disagree on group count",
            ));
        }
        let prediction = (0..scores.cols())
            .map(|k| reconstruct(&scores, &partial_logits, k))
            .collect();
        Ok(Self {
            masks,
            scores,
            partial_logits,
            prediction,
        })
    }

    pub fn n_groups(&self) -> usize {
        self.masks.len()
    }

    pub fn n_classes(&self) -> usize {
        self.scores.cols()
    }

    pub fn n_features(&self) -> usize {
        self.masks.first().map_or(0, Vec::len)
    }

    /// `prediction_k - sum_i c_ik y_ik` for every class; identically zero by construction.
    pub fn reconstruction_residual(&self) -> Vec<f64> {
        (0..self.n_classes())
            .map(|k| self.prediction[k] - reconstruct(&self.scores, &self.partial_logits, k))
            .collect()
    }

    pub fn predicted_class(&self) -> usize {
        argmax(&self.prediction)
    }

    /// Groups with their scores for one class.
    pub fn for_class(&self, k: usize) -> ScoredGroups {
        ScoredGroups {
            masks: self.masks.clone(),
            scores: (0..self.n_groups())
                .map(|i| self.scores.get(i, k))
                .collect(),
        }
    }

    /// Reorders groups; `order[j]` is the old index of the new group `j`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let pick = |m: &DenseMatrix| {
            DenseMatrix::from_rows(&order.iter().map(|&i| m.row(i).to_vec()).collect::<Vec<_>>())
        };
        Self::new(
            order.iter().map(|&i| self.masks[i].clone()).collect(),
            pick(&self.scores)?,
            pick(&self.partial_logits)?,
        )
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| {
            if x > bv {
                (i, x)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Segment tokens `[mean of x over segment j, e_j]`, one row per segment.
pub fn segment_tokens(x: &[f64], seg: &Segmentation) -> Result<DenseMatrix> {
    let pooled = seg.pool(x)?;
    let n = seg.n_segments();
    Ok(DenseMatrix::from_fn(n, token_dim(n), |j, c| match c {
        0 => pooled[j],
        c if c == j + 1 => 1.0,
        _ => 0.0,
    }))
}

/// Intermediate values of the group generator, kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct GeneratorTrace {
    pub tokens: DenseMatrix,
    pub queries: Vec<DenseMatrix>,
    pub keys: Vec<DenseMatrix>,
    /// Per head, `n_segments x n_segments` sparsemax attention.
    pub attention: Vec<DenseMatrix>,
    pub scale: f64,
}

pub(crate) fn generate_traced(
    x: &[f64],
    seg: &Segmentation,
    params: &GroupGenParams,
) -> Result<(Vec<Vec<f64>>, GeneratorTrace)> {
    seg.check_input(x)?;
    params.check_segments(seg.n_segments())?;
    let tokens = segment_tokens(x, seg)?;
    let scale = (x.len() as f64).sqrt();
    let mut masks = Vec::with_capacity(seg.n_segments() * params.n_heads());
    let mut queries = Vec::new();
    let mut keys = Vec::new();
    let mut attention = Vec::new();
    for head in params.heads() {
        let q = tokens.matmul_t(&head.w_q)?;
        let k = tokens.matmul_t(&head.w_k)?;
        let scores = attention_scores(&q, &k, scale)?;
        let mut rows = Vec::with_capacity(scores.rows());
        for row in scores.iter_rows() {
            let weights = sparsemax(row)?;
            masks.push(seg.broadcast(&weights));
            rows.push(weights);
        }
        attention.push(DenseMatrix::from_rows(&rows)?);
        queries.push(q);
        keys.push(k);
    }
    Ok((
        masks,
        GeneratorTrace {
            tokens,
            queries,
            keys,
            attention,
            scale,
        },
    ))
}

/// Group masks for `x`: per head, sparsemax self-attention over segment tokens scaled by
/// `sqrt(d)`; each attention row is one group, broadcast from segments to features.
/// Produces `n_segments * heads` masks, head-major.
pub fn generate_groups(
    x: &[f64],
    seg: &Segmentation,
    params: &GroupGenParams,
) -> Result<Vec<Vec<f64>>> {
    generate_traced(x, seg, params).map(|(m, _)| m)
}

/// `z_i = embed(S_i (.) x)`.
pub fn embed_groups<B: Backbone + ?Sized>(
    x: &[f64],
    masks: &[Vec<f64>],
    backbone: &B,
) -> Result<Vec<Vec<f64>>> {
    masks
        .iter()
        .map(|m| {
            if m.len() != x.len() {
                return Err(shape_err(format!(
                    "mask has length {}, input has {}",
                    m.len(),
                    x.len()
                )));
            }
            let z = backbone.embed(&hadamard(m, x))?;
            if z.len() != backbone.embed_dim() {
                return Err(shape_err(format!(
                    "backbone returned embedding of width {}, expected {}",
                    z.len(),
                    backbone.embed_dim()
                )));
            }
            Ok(z)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct SelectorTrace {
    /// `n_classes x h`, row k is `W_q' C_k`.
    pub class_queries: DenseMatrix,
    /// `G x h`, row i is `W_k' z_i`.
    pub group_keys: DenseMatrix,
    pub scale: f64,
}

pub(crate) fn select_traced(
    z: &[Vec<f64>],
    params: &GroupSelectParams,
) -> Result<(DenseMatrix, DenseMatrix, SelectorTrace)> {
    if z.is_empty() {
        return Err(shape_err("group selection needs at least one group"));
    }
    let h = params.embed_dim();
    if let Some(bad) = z.iter().find(|zi| zi.len() != h) {
        return Err(shape_err(format!(
            "embedding width {} does not match selector width {h}",
            bad.len()
        )));
    }
    let embeddings = DenseMatrix::from_rows(z)?;
    let class_queries = params.c.matmul_t(&params.w_q)?;
    let group_keys = embeddings.matmul_t(&params.w_k)?;
    let scale = (h as f64).sqrt();
    // n_classes x G: one sparsemax over groups per class
    let affinity = attention_scores(&class_queries, &group_keys, scale)?;
    let mut columns = Vec::with_capacity(affinity.rows());
    for row in affinity.iter_rows() {
        columns.push(sparsemax(row)?);
    }
    let scores = DenseMatrix::from_rows(&columns)?.transpose();
    let partial_logits = embeddings.matmul_t(&params.c)?;
    Ok((
        scores,
        partial_logits,
        SelectorTrace {
            class_queries,
            group_keys,
            scale,
        },
    ))
}

/// Scores (`G x n_classes`, each column on the simplex) and partial logits `y_ik = C_k . z_i`.
pub fn select_groups(
    z: &[Vec<f64>],
    params: &GroupSelectParams,
) -> Result<(DenseMatrix, DenseMatrix)> {
    select_traced(z, params).map(|(s, y, _)| (s, y))
}

/// Full forward pass returning the grouped attribution and its prediction.
pub fn sop_forward<B: Backbone + ?Sized>(
    x: &[f64],
    seg: &Segmentation,
    gen: &GroupGenParams,
    sel: &GroupSelectParams,
    backbone: &B,
) -> Result<GroupedAttribution> {
    let masks = generate_groups(x, seg, gen)?;
    let z = embed_groups(x, &masks, backbone)?;
    let (scores, partial_logits) = select_groups(&z, sel)?;
    GroupedAttribution::new(masks, scores, partial_logits)
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub(crate) struct ForwardTrace {
    pub generator: GeneratorTrace,
    pub masked_inputs: Vec<Vec<f64>>,
    pub embeddings: Vec<Vec<f64>>,
    pub selector: SelectorTrace,
    pub attribution: GroupedAttribution,
}

pub(crate) fn forward_traced<B: Backbone + ?Sized>(
    x: &[f64],
    seg: &Segmentation,
    gen: &GroupGenParams,
    sel: &GroupSelectParams,
    backbone: &B,
) -> Result<ForwardTrace> {
    let (masks, generator) = generate_traced(x, seg, gen)?;
    let embeddings = embed_groups(x, &masks, backbone)?;
    let masked_inputs = masks.iter().map(|m| hadamard(m, x)).collect();
    let (scores, partial_logits, selector) = select_traced(&embeddings, sel)?;
    Ok(ForwardTrace {
        generator,
        masked_inputs,
        embeddings,
        selector,
        attribution: GroupedAttribution::new(masks, scores, partial_logits)?,
    })
}
