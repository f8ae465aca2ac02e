//! Spectral-norm estimation by power iteration on `AᵀA`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::LinearMap;
use crate::error::{Error, Result};
use crate::scalar::{vecops, Scalar};

/// Settings for [`estimate_spectral_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationConfig {
    pub seed: u64,
    /// Stop once the relative change of the estimate drops below this.
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Multiplier (≥ 1) applied to the converged estimate so the result is an
    /// upper bound rather than a lower bound on `‖A‖₂`.
    pub safety: f64,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            rel_tol: 1e-12,
            max_iters: 10_000,
            safety: 1.001,
        }
    }
}

const MAX_RESTARTS: usize = 8;

/// Estimates the largest singular value of `a`, multiplied by `cfg.safety`.
///
/// Runs `z ← AᵀA z / ‖z‖` from a seeded random start. The estimate tracked is
/// the Rayleigh quotient `‖Az‖/‖z‖`, which never exceeds `‖A‖₂`, so with
/// `safety == 1` the result is a lower bound and with `safety > 1` it is an
/// upper bound once the iteration has converged. An all-zero operator yields 0.
pub fn estimate_spectral_norm<T: Scalar, M: LinearMap<T>>(
    a: &M,
    cfg: &PowerIterationConfig,
) -> Result<T> {
    if !(cfg.safety >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "power iteration safety factor must be >= 1, got {}",
            cfg.safety
        )));
    }
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return Ok(T::zero());
    }
    let rel_tol = T::lit(cfg.rel_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut az = vec![T::zero(); m];
    let mut z_next = vec![T::zero(); n];

    'restart: for restart in 0..=MAX_RESTARTS {
        let mut z: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        let nz = vecops::norm(&z);
        if nz == T::zero() {
            continue;
        }
        z.iter_mut().for_each(|v| *v /= nz);

        let mut estimate = T::zero();
        for iter in 0..cfg.max_iters {
            a.apply_into(&z, &mut az);
            let z_norm = vecops::norm(&z);
            let rayleigh = vecops::norm(&az) / z_norm;
            a.apply_transpose_into(&az, &mut z_next);
            let next_norm = vecops::norm(&z_next);
            if next_norm == T::zero() || !next_norm.is_finite() {
                if iter == 0 && restart == 0 && probe_is_zero_operator(a, &mut rng) {
                    return Ok(T::zero());
                }
                continue 'restart;
            }
            // z ← AᵀA z / ‖z‖, rescaled to unit length to keep magnitudes tame.
            for (zi, &ni) in z.iter_mut().zip(&z_next) {
                *zi = ni / next_norm;
            }
            let change = (rayleigh - estimate).abs();
            estimate = rayleigh;
            if iter > 0 && change <= rel_tol * estimate {
                break;
            }
        }
        return Ok(estimate * T::lit(cfg.safety));
    }
    Err(Error::PowerIterationCollapse {
        restarts: MAX_RESTARTS,
    })
}

/// Applies `a` to a few random vectors; true when every image is exactly zero.
fn probe_is_zero_operator<T: Scalar, M: LinearMap<T>>(a: &M, rng: &mut ChaCha8Rng) -> bool {
    let mut out = vec![T::zero(); a.nrows()];
    (0..3).all(|_| {
        let x: Vec<T> = (0..a.ncols()).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        a.apply_into(&x, &mut out);
        out.iter().all(|v| *v == T::zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    fn exact() -> PowerIterationConfig {
        PowerIterationConfig {
            safety: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn diagonal_matrix() {
        let a = SparseMatrix::<f64>::diagonal(&[3.0, 1.0]);
        let s = estimate_spectral_norm(&a, &exact()).unwrap();
        assert!((s - 3.0).abs() < 1e-9);
        let s = estimate_spectral_norm(&a, &PowerIterationConfig::default()).unwrap();
        assert!((s - 3.0 * 1.001).abs() < 1e-9);
    }

    #[test]
    fn nilpotent_two_by_two() {
        let a = SparseMatrix::<f64>::from_dense(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let s = estimate_spectral_norm(&a, &exact()).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_gives_zero() {
        let a = SparseMatrix::<f64>::zeros(4, 3);
        assert_eq!(estimate_spectral_norm(&a, &exact()).unwrap(), 0.0);
        let empty = SparseMatrix::<f64>::from_triplets(3, 3, &[]).unwrap();
        assert_eq!(estimate_spectral_norm(&empty, &exact()).unwrap(), 0.0);
    }

    #[test]
    fn linear_in_safety_and_deterministic() {
        let a = SparseMatrix::<f64>::from_dense(2, 3, &[1.0, -2.0, 0.5, 0.0, 3.0, 1.0]).unwrap();
        let base = estimate_spectral_norm(&a, &exact()).unwrap();
        for safety in [1.0, 1.001, 1.5, 2.0] {
            let cfg = PowerIterationConfig {
                safety,
                ..Default::default()
            };
            let s = estimate_spectral_norm(&a, &cfg).unwrap();
            assert!((s - safety * base).abs() <= 1e-14 * s);
            assert_eq!(s, estimate_spectral_norm(&a, &cfg).unwrap());
        }
    }

    #[test]
    fn rejects_safety_below_one() {
        let a = SparseMatrix::<f64>::identity(2);
        let cfg = PowerIterationConfig {
            safety: 0.5,
            ..Default::default()
        };
        assert!(estimate_spectral_norm(&a, &cfg).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = SparseMatrix::<f32>::diagonal(&[2.0, 0.5, 1.0]);
        let cfg = PowerIterationConfig {
            rel_tol: 1e-6,
            safety: 1.0,
            ..Default::default()
        };
        let s = estimate_spectral_norm(&a, &cfg).unwrap();
        assert!((s - 2.0).abs() < 1e-4);
    }
}
