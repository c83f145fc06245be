//! Dense linear algebra and the normalizers used by the attention blocks.

mod activation;
mod attention;
mod format;
mod gradcheck;
mod matrix;

pub use activation::{
    softmax, sparsemax, sparsemax_threshold, sparsemax_vjp, sparsemax_vjp_from_output,
};
pub use attention::{attention_scores, attention_weights, Normalizer};
pub use format::round_sig;
pub use gradcheck::finite_diff_grad;
pub use matrix::{axpy, dot, hadamard, DenseMatrix};
