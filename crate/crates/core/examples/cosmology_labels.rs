//! Label the groups of a synthetic convergence map as voids, clusters or neither, and
//! report how much score mass each label receives.
//!
//! cargo run --example cosmology_labels

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sop_core::math::sparsemax;
use sop_core::structures::{group_intensity, label_group, score_mass_by_label, IntensityMap};
use sop_core::{DenseMatrix, GroupedAttribution, Segmentation};

const SIDE: usize = 16;

fn main() -> sop_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut raw: Vec<f64> = (0..SIDE * SIDE)
        .map(|_| rng.random_range(-0.3..0.3))
        .collect();
    // one peak and one underdense patch
    for (r, c) in [(3, 4), (3, 5), (4, 4), (4, 5)] {
        raw[r * SIDE + c] += 4.0;
    }
    for r in 10..14 {
        for c in 9..14 {
            raw[r * SIDE + c] -= 0.6;
        }
    }
    let map = IntensityMap::new(SIDE, SIDE, raw)?;
    println!("map sigma {:.4}, offset {:.4}", map.sigma(), map.offset());

    let seg = Segmentation::grid_patches(SIDE, SIDE, 2)?;
    let masks: Vec<Vec<f64>> = (0..seg.n_segments())
        .map(|s| {
            (0..SIDE * SIDE)
                .map(|f| f64::from(u8::from(seg.segment_of(f) == s)))
                .collect()
        })
        .collect();
    // a stand-in attribution that prefers bright patches
    let affinity: Vec<f64> = masks
        .iter()
        .map(|m| group_intensity(&map, m).map(|v| v / map.sigma()))
        .collect::<sop_core::Result<_>>()?;
    let col = sparsemax(&affinity)?;
    let g = masks.len();
    let scores = DenseMatrix::from_fn(g, 1, |i, _| col[i]);
    let attr = GroupedAttribution::new(masks, scores, DenseMatrix::zeros(g, 1))?;

    for sigma in [2.0, 3.0] {
        let clusters = attr
            .masks
            .iter()
            .filter(|m| label_group(&map, m, sigma).is_ok_and(|l| l.kind.as_str() == "cluster"))
            .count();
        println!("threshold {sigma}: {clusters} cluster groups");
    }
    let report = score_mass_by_label(&[(&map, &attr)], 3.0)?;
    let mass = &report.targets[0].mean;
    println!(
        "score mass: void {:.3}, cluster {:.3}, other {:.3}",
        mass.void, mass.cluster, mass.other
    );
    Ok(())
}
