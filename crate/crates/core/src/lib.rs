//! Sum-of-Parts (SOP) toolkit.
//!
//! * [`math`]: dense matrices, sparsemax/softmax with exact Jacobians, attention weights
//!   and a finite-difference gradient oracle.
//! * [`model`]: the SOP wrapper around a frozen backbone. Groups are generated with
//!   sparse self-attention over segments, embedded through the backbone and scored with a
//!   sparse class-query attention. The prediction is exactly the score-weighted sum of the
//!   per-group partial logits.
//! * [`faithfulness`]: powerset deletion/insertion errors (per-feature and grouped),
//!   insertion/deletion curves, comprehensiveness, sufficiency and sparsity.
//! * [`certificates`]: L1 linear programs bounding the best per-feature attribution error on
//!   Boolean monomials and binomials, with exponential fits.
//! * [`structures`]: void/cluster labelling of groups on weak-lensing style intensity maps.
//! * [`runner`]: the `certify`, `train`, `eval` and `label` experiment commands.

#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod certificates;
pub mod error;
pub mod faithfulness;
mod io;
pub mod math;
pub mod model;
pub mod runner;
pub mod structures;

pub use error::{Result, SopError};
pub use math::DenseMatrix;
pub use model::{Backbone, GroupedAttribution, Segmentation, SopModel};
