//! Perturbation-based faithfulness metrics. Perturbations zero features out; grouped
//! metrics treat a feature as a member of a group when its mask weight is positive.

mod curves;
mod grouped;
mod powerset;
mod rationale;

pub use curves::{
    deletion_curve, feature_curve, grouped_curve, insertion_curve, ranking_from_attribution,
    trapezoid_auc, PerturbationReport,
};
pub use grouped::{flatten_grouped, sparsity, ScoredGroups};
pub use powerset::{
    del_err, group_del_err, group_ins_err, grouped_powerset_error, ins_err, total_powerset_error,
    PerturbationKind, PowersetSummary, MAX_POWERSET_DIM,
};
pub use rationale::{comprehensiveness, sufficiency};

/// Per-feature attribution vector.
pub type FeatureAttribution = Vec<f64>;
