//! Synthetic networks, ground truth files and scoring.

mod metrics;
mod sweep;
mod synthetic;
mod truth;

pub use metrics::{
    align_labels, fraction_correct, fraction_correct_sets, jaccard_overlap, jaccard_overlap_sets, nmi_cover_variant,
    nmi_cover_variant_sets, nmi_partition, score, Score,
};
pub use sweep::{parse_grid, run_benchmark_sweep, write_table, SweepAxis, SweepRow, SweepSpec};
pub use synthetic::{generate_two_community, SyntheticSpec};
pub use truth::{read_ground_truth, read_ground_truth_for, GroundTruth};
