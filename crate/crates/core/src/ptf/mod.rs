//! k-ary partitions of Gaussian space, PTFs, and Monte Carlo estimators.

mod balance;
mod estimate;
mod partition;
pub mod random;

pub use balance::{balance, balance_bound};
pub use estimate::{
    binomial_se, collision_probability, estimate_cross_stability, estimate_disagreement, estimate_joint_labels,
    estimate_measures, estimate_stability, JointLabels, MeasureVector, StabEstimate,
};
pub use partition::{argmax_shifted, is_collision, ptf_label, Evaluator, LabelCallback, MultiPtf, PartitionFn, PartitionKind};
