//! Hermite expansions on low-dimensional Gaussian space and the Ornstein–Uhlenbeck operator.

mod expansion;
mod ou;

pub use expansion::{
    expand, expand_with_mass, spectral_weights, HermiteExpansion, SpectralWeights, TailReport, DROP_TOL, TAIL_FLAG_TOL,
};
pub use ou::{apply_ou, gradient_tail_bound, gradient_tail_bound_with, ou_pointwise};
