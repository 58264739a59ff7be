pub mod cli;
pub mod cube;
pub mod error;
pub mod gauss;
pub mod hermite;
pub mod product;
pub mod ptf;
pub mod rounding;
pub mod search;
pub mod tensor;

pub use error::{Error, Result};
