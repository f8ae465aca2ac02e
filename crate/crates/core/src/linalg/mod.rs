//! Sparse storage, matrix-vector products, spectral-norm estimation and the
//! dense factorization used only by the splitting baseline.

mod cholesky;
mod power;
mod sparse;

pub use cholesky::{Cholesky, DenseMatrix};
pub use power::{estimate_spectral_norm, PowerIterationConfig};
pub use sparse::{LinearMap, SparseMatrix};
