//! Matrix-free conic optimization with infeasibility detection.
//!
//! Solves
//!
//! ```text
//!     minimize    ½ zᵀ P z + qᵀ z
//!     subject to  H z − g ∈ K,   z ∈ D
//! ```
//!
//! with the proportional-integral projected gradient method. The iteration
//! only needs products with `P`, `H`, `Hᵀ` and projections onto `D` and the
//! polar cone `K°`. Consecutive iterate differences either vanish, in which
//! case the iterates approach a primal-dual optimal pair, or converge to a
//! nonzero vector that certifies primal or dual infeasibility.
//!
//! A Douglas-Rachford baseline, certificate checks and two trajectory
//! optimization drivers (minimum-time landing by bisection, binary
//! elimination in a corridor) are built on top.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

// `!(a <= b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod certificates;
pub mod drs;
mod error;
pub mod linalg;
pub mod meta;
pub mod ocp;
pub mod pipg;
mod scalar;
pub mod sets;

pub use error::{Error, Result};
pub use scalar::{vecops, Scalar};

pub type SparseMatrix = linalg::SparseMatrix<f64>;
pub type ConvexSet = sets::ConvexSet<f64>;
pub type Cone = sets::Cone<f64>;
pub type ConicProblem = pipg::ConicProblem<f64>;
pub type SolverConfig = pipg::SolverConfig<f64>;
pub type SolveOutcome = pipg::SolveOutcome<f64>;
pub type IterateState = pipg::IterateState<f64>;
pub type QuadrotorParams = ocp::QuadrotorParams<f64>;
pub type CorridorParams = ocp::CorridorParams<f64>;
pub type CertificateReport = certificates::CertificateReport<f64>;
pub type ResidualReport = certificates::ResidualReport<f64>;
pub type FeasibilityVerdict = meta::FeasibilityVerdict<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type SparseMatrix = crate::linalg::SparseMatrix<f32>;
    pub type ConvexSet = crate::sets::ConvexSet<f32>;
    pub type Cone = crate::sets::Cone<f32>;
    pub type ConicProblem = crate::pipg::ConicProblem<f32>;
    pub type SolverConfig = crate::pipg::SolverConfig<f32>;
    pub type SolveOutcome = crate::pipg::SolveOutcome<f32>;
}
