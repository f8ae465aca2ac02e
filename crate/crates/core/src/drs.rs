//! Douglas-Rachford splitting baseline.
//!
//! The problem is rewritten with `H̄ = [H; I]` and `D̄ = (g + K) × D` so that
//! each step needs one projection onto `D̄` and one solve with the fixed
//! matrix `I + P + H̄ᵀH̄`, which is factored once up front. Differences of `z`
//! and of `w = y − π_{D̄}[y]` are classified exactly as in [`crate::pipg`].

use crate::error::{check_len, Error, Result};
use crate::linalg::{Cholesky, DenseMatrix, LinearMap, SparseMatrix};
use crate::pipg::{classify, ConicProblem, Diagnostics, HistoryRecord, SolveOutcome, SolveStatus, SolverConfig, StepSizes};
use crate::scalar::{vecops, Scalar};
use crate::certificates::fixed_point_residuals;
use crate::sets::ConvexSet;

#[derive(Debug, Clone)]
pub struct DrsEmbedding<T> {
    h_bar: SparseMatrix<T>,
    d_bar: ConvexSet<T>,
    factor: Cholesky<T>,
    alpha: T,
}

impl<T: Scalar> DrsEmbedding<T> {
    pub fn h_bar(&self) -> &SparseMatrix<T> {
        &self.h_bar
    }

    pub fn d_bar(&self) -> &ConvexSet<T> {
        &self.d_bar
    }

    pub fn factor(&self) -> &Cholesky<T> {
        &self.factor
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
}

/// Dense `I + P + H̄ᵀH̄ = 2I + P + HᵀH`.
pub fn assemble_system<T: Scalar>(prob: &ConicProblem<T>) -> DenseMatrix<T> {
    let n = prob.n();
    let mut m = DenseMatrix::identity(n);
    for i in 0..n {
        m[(i, i)] += T::one();
    }
    for (i, j, v) in prob.p().triplets() {
        m[(i, j)] += v;
    }
    let h = prob.h();
    for r in 0..h.rows() {
        let row: Vec<(usize, T)> = h.row(r).collect();
        for &(i, a) in &row {
            for &(j, b) in &row {
                m[(i, j)] += a * b;
            }
        }
    }
    m
}

pub fn build_embedding<T: Scalar>(prob: &ConicProblem<T>, alpha: T) -> Result<DrsEmbedding<T>> {
    if !(alpha > T::zero() && alpha < T::lit(2.0)) {
        return Err(Error::InvalidInput(format!(
            "relaxation parameter must lie in (0, 2), got {alpha}"
        )));
    }
    let (n, m) = (prob.n(), prob.m());
    let mut trip = prob.h().triplets();
    trip.extend((0..n).map(|i| (m + i, i, T::one())));
    let h_bar = SparseMatrix::from_triplets(m + n, n, &trip)?;
    let d_bar = ConvexSet::product(vec![
        ConvexSet::translate(prob.cone().as_set().clone(), prob.g().to_vec())?,
        prob.set().clone(),
    ])?;
    let factor = Cholesky::factor(&assemble_system(prob))?;
    Ok(DrsEmbedding {
        h_bar,
        d_bar,
        factor,
        alpha,
    })
}

#[derive(Debug, Clone)]
pub struct DrsState<T> {
    pub z: Vec<T>,
    pub y: Vec<T>,
    /// `y − π_{D̄}[y]` from the latest step.
    pub w: Vec<T>,
    pub z_prev: Vec<T>,
    pub w_prev: Vec<T>,
    pub steps: usize,
}

impl<T: Scalar> DrsState<T> {
    pub fn zeros(prob: &ConicProblem<T>) -> Self {
        let (n, l) = (prob.n(), prob.m() + prob.n());
        Self {
            z: vec![T::zero(); n],
            y: vec![T::zero(); l],
            w: vec![T::zero(); l],
            z_prev: vec![T::zero(); n],
            w_prev: vec![T::zero(); l],
            steps: 0,
        }
    }

    pub fn z_diff_norm(&self) -> T {
        vecops::dist(&self.z, &self.z_prev)
    }

    pub fn w_diff_norm(&self) -> T {
        vecops::dist(&self.w, &self.w_prev)
    }
}

/// One step:
///
/// ```text
/// ỹ = π_{D̄}[y],  w = y − ỹ
/// z̃ = (I + P + H̄ᵀH̄)⁻¹ (z − q + H̄ᵀ(2ỹ − y))
/// z⁺ = z + α(z̃ − z),  y⁺ = y + α(H̄z̃ − ỹ)
/// ```
pub fn drs_step<T: Scalar>(
    emb: &DrsEmbedding<T>,
    prob: &ConicProblem<T>,
    state: &DrsState<T>,
) -> Result<DrsState<T>> {
    let (n, l) = (prob.n(), prob.m() + prob.n());
    check_len("splitting z", n, state.z.len())?;
    check_len("splitting y", l, state.y.len())?;
    let iteration = state.steps + 1;
    let alpha = emb.alpha;

    let y_t = emb.d_bar.project(&state.y)?;
    let w = vecops::sub(&state.y, &y_t);
    let u: Vec<T> = y_t
        .iter()
        .zip(&state.y)
        .map(|(&a, &b)| T::lit(2.0) * a - b)
        .collect();
    let mut rhs = vec![T::zero(); n];
    emb.h_bar.apply_transpose_into(&u, &mut rhs);
    for ((r, &z), &q) in rhs.iter_mut().zip(&state.z).zip(prob.q()) {
        *r += z - q;
    }
    emb.factor.solve_in_place(&mut rhs);
    let z_t = rhs;
    let mut hz = vec![T::zero(); l];
    emb.h_bar.apply_into(&z_t, &mut hz);

    let z: Vec<T> = state
        .z
        .iter()
        .zip(&z_t)
        .map(|(&a, &b)| a + alpha * (b - a))
        .collect();
    let y: Vec<T> = (0..l).map(|i| state.y[i] + alpha * (hz[i] - y_t[i])).collect();
    for (component, v) in [("w", &w), ("z", &z), ("y", &y)] {
        if !vecops::all_finite(v) {
            return Err(Error::NonFinite {
                component,
                iteration,
            });
        }
    }
    Ok(DrsState {
        z_prev: state.z.clone(),
        w_prev: state.w.clone(),
        z,
        y,
        w,
        steps: iteration,
    })
}

/// Runs the baseline from `z = 0`, `y = 0` with relaxation `cfg.drs_alpha`.
///
/// The returned `w` and `w_bar` have length `m + n`: the first `m` entries
/// belong to the cone block. History residuals are evaluated at `z` and
/// that cone block, with the projected-gradient step size for scale.
pub fn drs_solve<T: Scalar>(prob: &ConicProblem<T>, cfg: &SolverConfig<T>) -> Result<SolveOutcome<T>> {
    cfg.validate()?;
    let emb = build_embedding(prob, cfg.drs_alpha)?;
    let step = if cfg.history_stride > 0 {
        cfg.resolve_step(prob)?
    } else {
        StepSizes {
            lambda: T::zero(),
            nu: T::one(),
            alpha: cfg.drs_alpha,
            alpha_max: cfg.drs_alpha,
        }
    };
    let mut state = DrsState::zeros(prob);
    let mut history = Vec::new();
    let max_steps = cfg.max_iters.saturating_sub(1);
    let mut early_exit = false;
    let m = prob.m();

    while state.steps < max_steps {
        state = drs_step(&emb, prob, &state)?;
        let j = state.steps;
        let (dz, dw) = (state.z_diff_norm(), state.w_diff_norm());
        let converged = j >= 2 && dz.max(dw) <= cfg.epsilon;
        if cfg.history_stride > 0 && (j.is_multiple_of(cfg.history_stride) || converged || j == max_steps) {
            let res = fixed_point_residuals(prob, step.alpha, &state.z, &state.w[..m])?;
            history.push(HistoryRecord {
                iteration: j,
                norm_dz: dz,
                norm_dw: dw,
                fp_residual_primal: res.primal_fp_residual,
                fp_residual_dual: res.dual_fp_residual,
                objective: res.objective,
            });
        }
        if converged {
            early_exit = true;
            break;
        }
    }

    let j = state.steps;
    let (dz, dw) = (state.z_diff_norm(), state.w_diff_norm());
    let (status, ambiguous) = if j >= 2 {
        classify(dz, dw, cfg.epsilon)
    } else {
        (SolveStatus::MaxIterations, false)
    };
    Ok(SolveOutcome {
        status,
        z_bar: vecops::sub(&state.z, &state.z_prev),
        w_bar: vecops::sub(&state.w, &state.w_prev),
        z: state.z,
        w: state.w,
        iterations: j,
        history,
        diagnostics: Diagnostics {
            step: StepSizes {
                alpha: cfg.drs_alpha,
                ..step
            },
            ambiguous,
            early_exit,
            decided_at: j,
            final_dz_norm: dz,
            final_dw_norm: dw,
        },
    })
}
