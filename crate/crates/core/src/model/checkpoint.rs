use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};
use crate::math::DenseMatrix;
use crate::model::backbone::{Backbone, ToyBackbone};
use crate::model::params::{token_dim, GroupGenParams, GroupSelectParams, HeadWeights};
use crate::model::segmentation::Segmentation;
use crate::model::train::SopParams;
use crate::model::SopModel;

/// Flat JSON checkpoint of a trained SOP model and its toy backbone.
///
/// Matrices are stored row-major; `w_q`/`w_k` concatenate the heads in order, each
/// `key_dim x (n_segments + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub d: usize,
    pub h: usize,
    pub heads: usize,
    pub key_dim: usize,
    pub n_segments: usize,
    pub n_classes: usize,
    pub segmentation: Vec<usize>,
    pub w_q: Vec<f64>,
    pub w_k: Vec<f64>,
    pub w_q_sel: Vec<f64>,
    pub w_k_sel: Vec<f64>,
    pub c: Vec<f64>,
    pub backbone: ToyBackbone,
}

impl Checkpoint {
    pub fn from_model(model: &SopModel<ToyBackbone>) -> Self {
        let gen = &model.params.gen;
        let sel = &model.params.sel;
        Self {
            d: model.segmentation.n_features(),
            h: sel.embed_dim(),
            heads: gen.n_heads(),
            key_dim: gen.key_dim(),
            n_segments: model.segmentation.n_segments(),
            n_classes: sel.n_classes(),
            segmentation: model.segmentation.assignment().to_vec(),
            w_q: gen
                .heads()
                .iter()
                .flat_map(|h| h.w_q.data().to_vec())
                .collect(),
            w_k: gen
                .heads()
                .iter()
                .flat_map(|h| h.w_k.data().to_vec())
                .collect(),
            w_q_sel: sel.w_q.data().to_vec(),
            w_k_sel: sel.w_k.data().to_vec(),
            c: sel.c.data().to_vec(),
            backbone: model.backbone.clone(),
        }
    }

    pub fn into_model(self) -> Result<SopModel<ToyBackbone>> {
        let seg = Segmentation::with_count(self.n_segments, self.segmentation)?;
        if seg.n_features() != self.d || self.backbone.input_dim() != self.d {
            return Err(shape_err("checkpoint input width is inconsistent"));
        }
        let p = token_dim(self.n_segments);
        let per_head = self.key_dim * p;
        if self.heads == 0
            || self.w_q.len() != per_head * self.heads
            || self.w_k.len() != per_head * self.heads
        {
            return Err(shape_err(
                "checkpoint generator weights have the wrong size",
            ));
        }
        let heads = (0..self.heads)
            .map(|i| {
                let span = i * per_head..(i + 1) * per_head;
                Ok(HeadWeights {
                    w_q: DenseMatrix::new(self.key_dim, p, self.w_q[span.clone()].to_vec())?,
                    w_k: DenseMatrix::new(self.key_dim, p, self.w_k[span].to_vec())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sel = GroupSelectParams::new(
            DenseMatrix::new(self.h, self.h, self.w_q_sel)?,
            DenseMatrix::new(self.h, self.h, self.w_k_sel)?,
            DenseMatrix::new(self.n_classes, self.h, self.c)?,
        )?;
        if self.backbone.embed_dim() != self.h {
            return Err(shape_err("checkpoint backbone width differs from h"));
        }
        SopModel::new(
            seg,
            SopParams {
                gen: GroupGenParams::new(heads)?,
                sel,
            },
            self.backbone,
        )
    }
}
