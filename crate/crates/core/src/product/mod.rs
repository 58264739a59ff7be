//! Finite product spaces: maximal-correlation bases, tensorized Fourier
//! expansions and block strategies built from Gaussian partitions.

mod fourier;
mod joint;
mod strategy;

pub use fourier::{
    correlation, correlation_bruteforce, digits, influence, noise_table, smooth, table_norm_sq, tensor_fourier, ProductFourier,
    ProductTable, Side, MAX_TABLE,
};
pub use joint::{correlation_basis, CorrelationBasis, JointDist};
pub use strategy::{block_strategy, estimate_discrete_corr, BlockStrategy, DiscreteCorr, DiscreteStrategy, TableStrategy};
