//! Symmetric tensors and Wiener chaos algebra.

mod eigen;
mod family;
mod ito;
mod lift;
pub mod multiset;
mod poly;
mod symmetric;
mod variance;

pub use eigen::{eigenregularity, tensor_flattenings, EigenReport, FlatteningValue, POWER_MAX_ITER, POWER_TOL};
pub use family::{
    block_count, gram_factor, matched_family, matched_family_rotated, product_expectation_mc,
    product_expectation_mc_pair, GramLevel, GramSpec, MatchedFamily, McEstimate, PSD_TOL,
};
pub use ito::{ito_eval, ito_product};
pub use lift::{multilinear_lift, MultilinearLift};
pub use poly::{eval_monomials, CompiledFamily, PolyGauss};
pub use symmetric::{contract, contract_symmetrized, symmetrize, DenseTensor, SymmetricTensor, MAX_DENSE_ENTRIES};
pub use variance::{log_schedule_bound, variance_bounds, VarianceBounds};
