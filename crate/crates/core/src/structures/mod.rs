//! Void and cluster labels for groups on intensity maps, and how much score mass each
//! kind of structure receives.

mod labels;
mod map;

pub use labels::{
    group_intensity, label_group, score_mass_by_label, LabelMass, ScoreMassReport, StructureKind,
    StructureLabel, TargetMass, DEFAULT_CLUSTER_SIGMA, HISTOGRAM_BINS,
};
pub use map::{load_segmentation, segmentation_from_csv_str, IntensityMap};
