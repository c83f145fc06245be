//! Sparsemax next to softmax, and sparse attention rows with exact zeros.
//!
//! cargo run --example sparsemax_attention

use sop_core::math::{attention_weights, softmax, sparsemax, sparsemax_vjp, Normalizer};
use sop_core::DenseMatrix;

fn main() -> sop_core::Result<()> {
    for v in [vec![0.5, 0.2], vec![1.0, 0.0], vec![2.0, 1.8, -0.5, 0.1]] {
        println!("v = {v:?}");
        println!("  softmax   {:?}", softmax(&v)?);
        println!("  sparsemax {:?}", sparsemax(&v)?);
        println!("  vjp of [1,0,..] {:?}", sparsemax_vjp(&v, &unit(v.len()))?);
    }

    let q = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.3, 0.3], vec![0.0, -1.0]])?;
    let k = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7]])?;
    for norm in [Normalizer::Softmax, Normalizer::Sparsemax] {
        let w = attention_weights(&q, &k, 1.0, norm)?;
        println!("{norm:?} attention");
        for row in w.iter_rows() {
            println!("  {row:.3?}");
        }
    }
    Ok(())
}

fn unit(n: usize) -> Vec<f64> {
    let mut u = vec![0.0; n];
    u[0] = 1.0;
    u
}
