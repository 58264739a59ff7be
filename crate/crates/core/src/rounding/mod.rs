//! Threshold rounding of Δk-valued fields and PTF extraction.

mod field;
mod pipeline;
mod threshold;

pub use field::{smooth_partition, smooth_partition_with, smooth_pointwise, FieldCallback, FieldFn, GridField, GridResolution};
pub use pipeline::{
    centered_expansion, ptf_from_truncation, stability_of_rounding, PipelineReport, RoundingReport, TruncationReport,
    DEFAULT_MAX_ITER,
};
pub use threshold::{
    check_field, find_matching_threshold, find_matching_threshold_cached, threshold_round, FieldSample, ThresholdSearch,
    ThresholdVector, SIMPLEX_TOL,
};
