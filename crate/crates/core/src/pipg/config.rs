use super::ConicProblem;
use crate::error::{Error, Result};
use crate::linalg::{estimate_spectral_norm, PowerIterationConfig};
use crate::scalar::Scalar;

/// Solver settings shared by the projected-gradient method and the
/// splitting baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Averaging parameter in `(½, 1)`.
    pub gamma: T,
    /// Upper bound on `‖P‖₂`; estimated by power iteration when absent.
    pub lambda_bound: Option<T>,
    /// Upper bound on `‖H‖₂`; estimated by power iteration when absent.
    pub nu_bound: Option<T>,
    /// Step size override; defaults to the largest admissible value.
    pub alpha: Option<T>,
    /// Iteration cap `k`: at most `k − 1` steps are taken.
    pub max_iters: usize,
    /// Absolute threshold on consecutive-difference norms.
    pub epsilon: T,
    /// Record history every this many steps; 0 disables history.
    pub history_stride: usize,
    pub seed: u64,
    /// Power-iteration settings (its seed is replaced by `seed`).
    pub power: PowerIterationConfig,
    /// Relaxation parameter of the splitting baseline, in `(0, 2)`.
    pub drs_alpha: T,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            gamma: T::lit(0.9),
            lambda_bound: None,
            nu_bound: None,
            alpha: None,
            max_iters: 200_000,
            epsilon: T::lit(1e-9),
            history_stride: 10,
            seed: 0,
            power: PowerIterationConfig::default(),
            drs_alpha: T::one(),
        }
    }
}

/// Step size together with the norm bounds it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes<T> {
    pub lambda: T,
    pub nu: T,
    pub alpha: T,
    /// Largest step admissible for `(gamma, lambda, nu)`.
    pub alpha_max: T,
}

/// Largest step size admissible for the averaged-operator guarantee:
/// `(8 − 4/γ) / (√(λ² + 16ν²) + λ)`.
pub fn compute_step_size<T: Scalar>(gamma: T, lambda: T, nu: T) -> Result<T> {
    if !(gamma > T::lit(0.5) && gamma < T::one()) {
        return Err(Error::InvalidInput(format!("gamma must lie in (1/2, 1), got {gamma}")));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu must be > 0, got {nu}")));
    }
    let numer = T::lit(8.0) - T::lit(4.0) / gamma;
    let denom = (lambda * lambda + T::lit(16.0) * nu * nu).sqrt() + lambda;
    Ok(numer / denom)
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        if !(self.epsilon >= T::zero()) {
            return Err(Error::InvalidInput("epsilon must be >= 0".into()));
        }
        if !(self.drs_alpha > T::zero() && self.drs_alpha < T::lit(2.0)) {
            return Err(Error::InvalidInput(format!(
                "splitting relaxation must lie in (0, 2), got {}",
                self.drs_alpha
            )));
        }
        Ok(())
    }

    /// Resolves `λ`, `ν` (estimating them when not supplied) and `α`.
    ///
    /// An all-zero `H` has `‖H‖ = 0`, and any positive `ν` bounds it; `ν = 1`
    /// is used in that case.
    pub fn resolve_step(&self, prob: &ConicProblem<T>) -> Result<StepSizes<T>> {
        self.validate()?;
        let power = PowerIterationConfig {
            seed: self.seed,
            ..self.power
        };
        let lambda = match self.lambda_bound {
            Some(l) => l,
            None if prob.p().nnz() == 0 => T::zero(),
            None => estimate_spectral_norm(prob.p(), &power)?,
        };
        let nu = match self.nu_bound {
            Some(v) => v,
            None => {
                let est = if prob.h().nnz() == 0 {
                    T::zero()
                } else {
                    estimate_spectral_norm(prob.h(), &power)?
                };
                if est > T::zero() {
                    est
                } else {
                    T::one()
                }
            }
        };
        let alpha_max = compute_step_size(self.gamma, lambda, nu)?;
        let alpha = match self.alpha {
            Some(a) if a > T::zero() && a <= alpha_max => a,
            Some(a) => {
                return Err(Error::InvalidInput(format!(
                    "step size {a} outside (0, {alpha_max}] for gamma={}, lambda={lambda}, nu={nu}",
                    self.gamma
                )))
            }
            None => alpha_max,
        };
        Ok(StepSizes {
            lambda,
            nu,
            alpha,
            alpha_max,
        })
    }
}
