//! Sum-of-Parts models: a frozen backbone wrapped by a sparse group generator and a sparse
//! group selector whose prediction is the score-weighted sum of per-group partial logits.

mod backbone;
mod checkpoint;
mod forward;
mod params;
mod segmentation;
mod train;

pub use backbone::{
    fit_classifier, Backbone, FnBackbone, LinearBackbone, TanhBackbone, ToyBackbone,
};
pub use checkpoint::Checkpoint;
pub use forward::{
    embed_groups, generate_groups, reconstruct, segment_tokens, select_groups, sop_forward,
    GroupedAttribution,
};
pub use params::{
    token_dim, GroupGenParams, GroupSelectParams, HeadWeights, DEFAULT_HEADS, INIT_STD,
};
pub use segmentation::Segmentation;
pub use train::{
    accuracy, loss_and_grad, mean_loss, train, train_from, Dataset, SopGradients, SopParams,
    TrainConfig, TrainOutcome, TrainableBlocks,
};

use crate::error::{shape_err, Result};

/// A segmentation, trained parameters and the wrapped backbone.
#[derive(Debug, Clone)]
pub struct SopModel<B> {
    pub segmentation: Segmentation,
    pub params: SopParams,
    pub backbone: B,
}

impl<B: Backbone> SopModel<B> {
    pub fn new(segmentation: Segmentation, params: SopParams, backbone: B) -> Result<Self> {
        if segmentation.n_features() != backbone.input_dim() {
            return Err(shape_err(format!(
                "segmentation covers {} features, backbone expects {}",
                segmentation.n_features(),
                backbone.input_dim()
            )));
        }
        params.gen.check_segments(segmentation.n_segments())?;
        if params.sel.embed_dim() != backbone.embed_dim() {
            return Err(shape_err(
                "selector width differs from backbone embedding width",
            ));
        }
        Ok(Self {
            segmentation,
            params,
            backbone,
        })
    }

    pub fn forward(&self, x: &[f64]) -> Result<GroupedAttribution> {
        sop_forward(
            x,
            &self.segmentation,
            &self.params.gen,
            &self.params.sel,
            &self.backbone,
        )
    }

    pub fn n_groups(&self) -> usize {
        self.segmentation.n_segments() * self.params.gen.n_heads()
    }

    /// Class probabilities of the SOP prediction.
    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::math::softmax(&self.forward(x)?.prediction)
    }
}
