//! Insertion/deletion curves, powerset errors and rationale metrics on a small model.
//!
//! cargo run --example faithfulness_curves

use sop_core::faithfulness::{
    comprehensiveness, deletion_curve, flatten_grouped, grouped_curve, insertion_curve,
    ranking_from_attribution, sparsity, sufficiency, total_powerset_error, PerturbationKind,
    ScoredGroups,
};
use sop_core::math::softmax;

fn main() -> sop_core::Result<()> {
    let theta = [1.2, -0.4, 0.8, 0.1, -1.5, 0.6];
    let x = [1.0, 0.5, 1.5, -2.0, 0.2, 1.0];
    let logit = |v: &[f64]| v.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
    let prob = |v: &[f64]| 1.0 / (1.0 + (-logit(v)).exp());
    let probs = |v: &[f64]| softmax(&[logit(v), 0.0]).unwrap();

    // gradient-times-input is exact for a linear logit
    let alpha: Vec<f64> = theta.iter().zip(&x).map(|(t, v)| t * v).collect();
    for kind in [PerturbationKind::Deletion, PerturbationKind::Insertion] {
        let exact = total_powerset_error(logit, &x, &alpha, kind)?;
        let zero = total_powerset_error(logit, &x, &[0.0; 6], kind)?;
        println!("{kind:?} powerset error: theta*x {exact:.3}, zero attribution {zero:.3}");
    }

    let ranking = ranking_from_attribution(&alpha);
    let ins = insertion_curve(prob, &x, &ranking, 1)?;
    let del = deletion_curve(prob, &x, &ranking, 1)?;
    println!("ranking {ranking:?}");
    println!("insertion auc {:.4}\n{}", ins.auc, ins.to_csv());
    println!("deletion auc {:.4}", del.auc);

    let groups = ScoredGroups::from_sets(
        6,
        &[vec![0, 2], vec![2, 5], vec![1, 3, 4]],
        vec![0.6, 0.3, 0.1],
    )?;
    let grouped = grouped_curve(prob, &x, &groups, PerturbationKind::Insertion)?;
    println!("grouped insertion points {:.3?}", grouped.points);
    println!("flattened groups {:?}", flatten_grouped(&groups));
    println!("sparsity {:.3}", sparsity(&groups)?);

    let rationale = [1.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    println!(
        "rationale {{0, 2}}: comprehensiveness {:.4}, sufficiency {:.4}",
        comprehensiveness(probs, &x, &rationale, 0)?,
        sufficiency(probs, &x, &rationale, 0)?
    );
    Ok(())
}
