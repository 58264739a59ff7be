//! Stability maximization over PTF covers and a one-sided
//! non-interactive-correlation decider.

mod cover;
mod ncd;
mod optimize;

pub use cover::{basis_indices, constant_partitions, enumerate_cover, poly_from_coeffs, CoverGrid};
pub use ncd::{ncd_brute_oracle, ncd_decide, NcdConfig, NcdResult, Verdict, Witness, MARGINAL_SLACK, MAX_PAIRS};
pub use optimize::{optimize_stability, write_trace_csv, SearchConfig, SearchMode, SearchResult, TraceEntry};
