use std::fmt;

use super::{ConicProblem, IterateState, SolverConfig, StepSizes};
use crate::certificates::fixed_point_residuals;
use crate::error::{check_len, Result};
use crate::scalar::Scalar;

/// Classification of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    /// Too few steps were taken to form consecutive differences.
    MaxIterations,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Optimal => "Optimal",
            Self::PrimalInfeasible => "PrimalInfeasible",
            Self::DualInfeasible => "DualInfeasible",
            Self::MaxIterations => "MaxIterations",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded history row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRecord<T> {
    pub iteration: usize,
    pub norm_dz: T,
    pub norm_dw: T,
    pub fp_residual_primal: T,
    pub fp_residual_dual: T,
    pub objective: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T> {
    pub step: StepSizes<T>,
    /// Both difference norms exceeded `epsilon` at the cap; the status then
    /// follows the primal-first branch order.
    pub ambiguous: bool,
    /// True when the run stopped before the cap on the optimality test.
    pub early_exit: bool,
    /// Step at which the classification was made.
    pub decided_at: usize,
    pub final_dz_norm: T,
    pub final_dw_norm: T,
}

/// Result of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<T> {
    pub status: SolveStatus,
    pub z: Vec<T>,
    pub w: Vec<T>,
    /// Last consecutive difference of `z`, estimating the limit `z̄`.
    pub z_bar: Vec<T>,
    /// Last consecutive difference of `w`, estimating the limit `w̄`.
    pub w_bar: Vec<T>,
    /// Steps taken.
    pub iterations: usize,
    pub history: Vec<HistoryRecord<T>>,
    pub diagnostics: Diagnostics<T>,
}

/// Applies the end-of-run test: optimal if both differences are at most
/// `eps`, else primal infeasible if the `w` difference is large, else dual
/// infeasible. Returns the status and the ambiguity flag.
pub fn classify<T: Scalar>(dz: T, dw: T, eps: T) -> (SolveStatus, bool) {
    if dz.max(dw) <= eps {
        (SolveStatus::Optimal, false)
    } else if dw > eps {
        (SolveStatus::PrimalInfeasible, dz > eps)
    } else {
        (SolveStatus::DualInfeasible, false)
    }
}

/// Runs the method from `z¹ = 0`, `v¹ = 0`.
pub fn pipg_solve<T: Scalar>(prob: &ConicProblem<T>, cfg: &SolverConfig<T>) -> Result<SolveOutcome<T>> {
    pipg_solve_from(prob, cfg, &vec![T::zero(); prob.n()], &vec![T::zero(); prob.m()])
}

/// Runs the method from the given start.
///
/// Stops early once both difference norms are at most `epsilon`; otherwise
/// classifies at the iteration cap.
pub fn pipg_solve_from<T: Scalar>(
    prob: &ConicProblem<T>,
    cfg: &SolverConfig<T>,
    z1: &[T],
    v1: &[T],
) -> Result<SolveOutcome<T>> {
    check_len("initial z", prob.n(), z1.len())?;
    check_len("initial v", prob.m(), v1.len())?;
    let step = cfg.resolve_step(prob)?;
    let alpha = step.alpha;
    let mut state = IterateState::new(prob, z1.to_vec(), v1.to_vec())?;
    let mut history = Vec::new();
    let max_steps = cfg.max_iters.saturating_sub(1);
    let mut early_exit = false;

    while state.steps() < max_steps {
        state.step(prob, alpha)?;
        let j = state.steps();
        // w differences exist from the second step on.
        let ready = j >= 2;
        let (dz, dw) = (state.z_diff_norm(), state.w_diff_norm());
        let converged = ready && dz.max(dw) <= cfg.epsilon;
        if cfg.history_stride > 0 && (j % cfg.history_stride == 0 || converged || j == max_steps) {
            history.push(record(prob, alpha, &state));
        }
        if converged {
            early_exit = true;
            break;
        }
    }

    let j = state.steps();
    let (dz, dw) = (state.z_diff_norm(), state.w_diff_norm());
    let (status, ambiguous) = if j >= 2 {
        classify(dz, dw, cfg.epsilon)
    } else {
        (SolveStatus::MaxIterations, false)
    };
    Ok(SolveOutcome {
        status,
        z_bar: state.z_diff(),
        w_bar: state.w_diff(),
        z: state.z().to_vec(),
        w: state.w().to_vec(),
        iterations: j,
        history,
        diagnostics: Diagnostics {
            step,
            ambiguous,
            early_exit,
            decided_at: j,
            final_dz_norm: dz,
            final_dw_norm: dw,
        },
    })
}

fn record<T: Scalar>(prob: &ConicProblem<T>, alpha: T, st: &IterateState<T>) -> HistoryRecord<T> {
    let res = fixed_point_residuals(prob, alpha, st.z(), st.w())
        .expect("iterate dimensions match the problem");
    HistoryRecord {
        iteration: st.steps(),
        norm_dz: st.z_diff_norm(),
        norm_dw: st.w_diff_norm(),
        fp_residual_primal: res.primal_fp_residual,
        fp_residual_dual: res.dual_fp_residual,
        objective: res.objective,
    }
}
