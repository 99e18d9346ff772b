//! Shared domain types: datasets, Gram-matrix blocks, partitions of the
//! predictor set, correlation structures and deterministic RNG streams.

mod correlation;
mod dataset;
mod gram;
mod partition;
mod rng;

pub use correlation::{equicorrelation_matrix, CorrelationSpec, Structure};
pub use dataset::{standardize, Dataset, Standardization, STANDARDIZED_TOL};
pub use gram::{gram_blocks, GramBlocks};
pub use partition::Partition;
pub use rng::{derive_stream, RngStream, StreamRng};
