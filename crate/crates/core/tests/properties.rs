use proptest::prelude::*;
use sop_core::faithfulness::{
    flatten_grouped, ranking_from_attribution, trapezoid_auc, ScoredGroups,
};
use sop_core::math::{round_sig, sparsemax, sparsemax_threshold};
use sop_core::Segmentation;

fn finite_vec(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 1..max)
}

proptest! {
    #[test]
    fn sparsemax_lands_on_the_simplex(v in finite_vec(12)) {
        let p = sparsemax(&v).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // output is the clipped shift by the threshold
        let tau = sparsemax_threshold(&v).unwrap();
        for (pi, vi) in p.iter().zip(&v) {
            prop_assert!((pi - (vi - tau).max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn sparsemax_is_shift_invariant_and_idempotent(v in finite_vec(8), c in -10.0f64..10.0) {
        let p = sparsemax(&v).unwrap();
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let q = sparsemax(&shifted).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let again = sparsemax(&p).unwrap();
        for (a, b) in p.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn ranking_is_a_descending_permutation(v in finite_vec(16)) {
        let r = ranking_from_attribution(&v);
        let mut sorted = r.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..v.len()).collect::<Vec<_>>());
        for w in r.windows(2) {
            prop_assert!(v[w[0]] > v[w[1]] || (v[w[0]] == v[w[1]] && w[0] < w[1]));
        }
    }

    #[test]
    fn constant_curves_integrate_to_the_constant(c in 0.0f64..1.0, n in 1usize..20) {
        let pts: Vec<(f64, f64)> = (0..=n).map(|i| (i as f64 / n as f64, c)).collect();
        prop_assert!((trapezoid_auc(&pts) - c).abs() < 1e-12);
    }

    #[test]
    fn flattening_preserves_score_mass(
        sets in prop::collection::vec(prop::collection::btree_set(0usize..6, 1..4), 1..5),
        scale in 0.1f64..2.0,
    ) {
        let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let scores: Vec<f64> = (0..sets.len()).map(|i| scale * (i + 1) as f64).collect();
        let beta = ScoredGroups::from_sets(6, &sets, scores.clone()).unwrap();
        let alpha = flatten_grouped(&beta);
        let expected: f64 = sets.iter().zip(&scores).map(|(s, c)| s.len() as f64 * c).sum();
        prop_assert!((alpha.iter().sum::<f64>() - expected).abs() < 1e-9);
    }

    #[test]
    fn segment_broadcast_then_reduce_counts_members(
        assignment in prop::collection::vec(0usize..4, 1..20),
        weights in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let Ok(seg) = Segmentation::with_count(4, assignment.clone()) else {
            return Ok(());
        };
        let wide = seg.broadcast(&weights);
        prop_assert_eq!(wide.len(), assignment.len());
        let back = seg.reduce(&wide);
        for s in 0..4 {
            let n = seg.members(s).len() as f64;
            prop_assert!((back[s] - n * weights[s]).abs() < 1e-9);
        }
    }

    #[test]
    fn rounding_is_idempotent(v in -1e12f64..1e12) {
        let r = round_sig(v);
        prop_assert_eq!(round_sig(r), r);
        prop_assert!((r - v).abs() <= 1e-8 * v.abs().max(1e-300));
    }
}
