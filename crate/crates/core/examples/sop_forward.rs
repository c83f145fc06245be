//! Wrap a black-box embedding in a SOP model and inspect one grouped prediction.
//!
//! cargo run --example sop_forward

use sop_core::model::{FnBackbone, GroupGenParams, GroupSelectParams, HeadWeights, SopParams};
use sop_core::{DenseMatrix, Segmentation, SopModel};

fn main() -> sop_core::Result<()> {
    // 4x4 image, four 2x2 patches
    let seg = Segmentation::grid_patches(4, 4, 2)?;
    let classifier = DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.5], vec![-0.5, 1.0, 0.2]])?;
    let backbone = FnBackbone::new(16, classifier.clone(), |x: &[f64]| {
        let top: f64 = x[..8].iter().sum();
        let bottom: f64 = x[8..].iter().sum();
        vec![top.tanh(), bottom.tanh(), (top * bottom).tanh()]
    });

    let p = seg.n_segments() + 1;
    let head = |shift: usize| HeadWeights {
        w_q: DenseMatrix::from_fn(p, p, |i, j| {
            if i == j {
                3.0
            } else if (i + shift) % p == j {
                1.5
            } else {
                0.0
            }
        }),
        w_k: DenseMatrix::identity(p),
    };
    let gen = GroupGenParams::new(vec![head(1), head(2)])?;
    let sel = GroupSelectParams::new(
        DenseMatrix::from_fn(3, 3, |i, j| if i == j { 4.0 } else { 0.0 }),
        DenseMatrix::identity(3),
        classifier,
    )?;
    let model = SopModel::new(seg, SopParams { gen, sel }, backbone)?;

    let x: Vec<f64> = (0..16)
        .map(|i| if i % 4 < 2 { 0.9 } else { -0.2 })
        .collect();
    let attr = model.forward(&x)?;
    println!(
        "{} groups over {} features",
        attr.n_groups(),
        attr.n_features()
    );
    for (i, mask) in attr.masks.iter().enumerate() {
        let members: Vec<usize> = (0..mask.len()).filter(|&f| mask[f] > 0.0).collect();
        println!(
            "  group {i}: features {members:?}  scores {:.3?}  partial logits {:.3?}",
            attr.scores.row(i),
            attr.partial_logits.row(i)
        );
    }
    println!(
        "prediction {:.4?} (class {})",
        attr.prediction,
        attr.predicted_class()
    );
    println!(
        "reconstruction residual {:?}",
        attr.reconstruction_residual()
    );
    println!("probabilities {:.4?}", model.probabilities(&x)?);
    Ok(())
}
