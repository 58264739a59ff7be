//! Hermite polynomials, Gauss–Hermite quadrature and seeded Gaussian sampling.

mod normal;
mod poly;
mod quadrature;
mod sampler;

pub use normal::{norm_cdf, norm_pdf, norm_ppf, norm_sf, orthant_probability};
pub use poly::{hermite_all, hermite_eval, hermite_multi_eval, HermiteIndex};
pub use quadrature::{gauss_hermite_rule, QuadratureRule, TensorGrid, DEFAULT_QUAD_ORDER, MAX_QUADRATURE_DIM};
pub use sampler::{
    derive_seed, fill_normal, fold_points, par_chunked, sample_points, stream_rng, CorrelatedSampler, CHUNK,
};
