//! The proportional-integral projected gradient method.
//!
//! Each step needs two products with `H`, one with `Hᵀ`, one with `P`, a
//! projection onto `D` and a projection onto the polar cone `K°`. No linear
//! system is ever solved.

mod config;
mod problem;
mod solve;
mod step;

pub use config::{compute_step_size, SolverConfig, StepSizes};
pub use problem::ConicProblem;
pub use solve::{
    classify, pipg_solve, pipg_solve_from, Diagnostics, HistoryRecord, SolveOutcome, SolveStatus,
};
pub use step::{normal_cone_residuals, one_step_map, IterateState};

#[cfg(test)]
mod tests;
