//! Quadrotor trajectory problems transcribed into conic form.
//!
//! The state is `x = (r, ṙ) ∈ ℝ⁶` (position, velocity) under double-integrator
//! dynamics with thrust input `u ∈ ℝ³` and gravity along the third axis.
//! Both builders order the decision vector as
//! `z = (x₁, …, x_{τ−1}, u₀, …, u_{τ−1}[, b₁, …, b_{τ−1}])`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::pipg::ConicProblem;
use crate::scalar::Scalar;
use crate::sets::{Cone, ConvexSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorParams<T> {
    pub mass: T,
    pub gravity: T,
    /// Sampling period.
    pub delta: T,
    /// Lower bound on the vertical thrust component.
    pub rho1: T,
    /// Upper bound on the thrust magnitude.
    pub rho2: T,
    /// Thrust cone half-angle.
    pub theta: T,
    /// Approach cone half-angle.
    pub beta: T,
    /// Speed bound.
    pub eta: T,
}

impl<T: Scalar> Default for QuadrotorParams<T> {
    fn default() -> Self {
        Self {
            mass: T::lit(0.35),
            gravity: T::lit(9.8),
            delta: T::lit(0.2),
            rho1: T::lit(2.0),
            rho2: T::lit(5.0),
            theta: T::FRAC_PI_4(),
            beta: T::FRAC_PI_4(),
            eta: T::lit(5.0),
        }
    }
}

impl<T: Scalar> QuadrotorParams<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("mass", self.mass),
            ("gravity", self.gravity),
            ("delta", self.delta),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("eta", self.eta),
        ];
        for (name, v) in pos {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.rho1 < self.rho2) {
            return Err(Error::InvalidInput("rho1 must be below rho2".into()));
        }
        for (name, a) in [("theta", self.theta), ("beta", self.beta)] {
            if !(a > T::zero() && a < T::FRAC_PI_2()) {
                return Err(Error::InvalidInput(format!("{name} must lie in (0, pi/2), got {a}")));
            }
        }
        Ok(())
    }
}

/// `x⁺ = Ax + Bu + h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteDynamics<T> {
    pub a: [[T; 6]; 6],
    pub b: [[T; 3]; 6],
    pub h: [T; 6],
}

impl<T: Scalar> DiscreteDynamics<T> {
    pub fn step(&self, x: &[T; 6], u: &[T; 3]) -> [T; 6] {
        let mut out = self.h;
        for (r, o) in out.iter_mut().enumerate() {
            for c in 0..6 {
                *o += self.a[r][c] * x[c];
            }
            for c in 0..3 {
                *o += self.b[r][c] * u[c];
            }
        }
        out
    }
}

/// Zero-order-hold discretization. The continuous drift matrix is
/// nilpotent (`A_c² = 0`), so `exp(A_cΔ) = I + A_cΔ` and
/// `∫₀^Δ exp(A_cs) ds = ΔI + A_cΔ²/2` are exact.
pub fn discretize<T: Scalar>(params: &QuadrotorParams<T>) -> Result<DiscreteDynamics<T>> {
    let d = params.delta;
    if !(d > T::zero() && d.is_finite()) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {d}")));
    }
    let z = T::zero();
    let mut a = [[z; 6]; 6];
    let mut b = [[z; 3]; 6];
    let half_d2 = d * d / T::lit(2.0);
    for i in 0..6 {
        a[i][i] = T::one();
    }
    for i in 0..3 {
        a[i][i + 3] = d;
        b[i][i] = half_d2 / params.mass;
        b[i + 3][i] = d / params.mass;
    }
    let mut h = [z; 6];
    h[2] = -params.gravity * half_d2;
    h[5] = -params.gravity * d;
    Ok(DiscreteDynamics { a, b, h })
}

/// The two axis-aligned boxes making up an L-shaped corridor. Position `r`
/// lies in box 1 when the binary is 0 and in box 2 when it is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorridorParams<T> {
    pub r_lo1: [T; 3],
    pub r_hi1: [T; 3],
    pub r_lo2: [T; 3],
    pub r_hi2: [T; 3],
}

impl<T: Scalar> Default for CorridorParams<T> {
    fn default() -> Self {
        let v = |a: f64, b: f64, c: f64| [T::lit(a), T::lit(b), T::lit(c)];
        Self {
            r_lo1: v(0.0, -2.0, 0.0),
            r_hi1: v(2.0, 9.0, 3.0),
            r_lo2: v(2.0, -2.0, 0.0),
            r_hi2: v(12.0, 0.0, 3.0),
        }
    }
}

impl<T: Scalar> CorridorParams<T> {
    pub fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if !(self.r_lo1[k] <= self.r_hi1[k]) || !(self.r_lo2[k] <= self.r_hi2[k]) {
                return Err(Error::InvalidInput(format!("corridor box is empty along axis {k}")));
            }
        }
        Ok(())
    }
}

/// Divides each nonzero row of `H` and the matching entry of `g` by the
/// row's Euclidean norm. Zero rows are left alone.
pub fn row_normalize<T: Scalar>(h: &SparseMatrix<T>, g: &[T]) -> Result<(SparseMatrix<T>, Vec<T>)> {
    crate::error::check_len("row_normalize g", h.rows(), g.len())?;
    let scale: Vec<T> = h
        .row_norms()
        .into_iter()
        .map(|r| if r > T::zero() { T::one() / r } else { T::one() })
        .collect();
    let g = g.iter().zip(&scale).map(|(&a, &s)| a * s).collect();
    Ok((h.scale_rows(&scale)?, g))
}

pub fn landing_dims(tau: usize) -> (usize, usize) {
    (9 * tau - 6, 7 * tau)
}

pub fn corridor_dims(tau: usize) -> (usize, usize) {
    (10 * tau - 7, 13 * tau - 6)
}

fn state_col(t: usize) -> usize {
    6 * (t - 1)
}

fn input_col(tau: usize, t: usize) -> usize {
    6 * (tau - 1) + 3 * t
}

/// Dynamics and thrust-floor rows shared by both problems:
/// `x_{t+1} − Ax_t − Bu_t = h` for `t = 0..τ−1` (with `x₀`, `x_τ` moved to
/// `g`), then `[u_t]₃ ≥ ρ₁`.
fn dynamics_rows<T: Scalar>(
    tau: usize,
    x0: &[T; 6],
    x_tau: &[T; 6],
    params: &QuadrotorParams<T>,
    trip: &mut Vec<(usize, usize, T)>,
    g: &mut Vec<T>,
) -> Result<()> {
    let dyn_ = discretize(params)?;
    for t in 0..tau {
        let row0 = 6 * t;
        for r in 0..6 {
            if t + 1 < tau {
                trip.push((row0 + r, state_col(t + 1) + r, T::one()));
            }
            if t >= 1 {
                for c in 0..6 {
                    let a = dyn_.a[r][c];
                    if a != T::zero() {
                        trip.push((row0 + r, state_col(t) + c, -a));
                    }
                }
            }
            for c in 0..3 {
                let b = dyn_.b[r][c];
                if b != T::zero() {
                    trip.push((row0 + r, input_col(tau, t) + c, -b));
                }
            }
            let mut rhs = dyn_.h[r];
            if t == 0 {
                rhs += (0..6).fold(T::zero(), |s, c| s + dyn_.a[r][c] * x0[c]);
            }
            if t + 1 == tau {
                rhs -= x_tau[r];
            }
            g.push(rhs);
        }
    }
    for t in 0..tau {
        trip.push((6 * tau + t, input_col(tau, t) + 2, T::one()));
        g.push(params.rho1);
    }
    Ok(())
}

fn thrust_set<T: Scalar>(params: &QuadrotorParams<T>) -> Result<ConvexSet<T>> {
    ConvexSet::intersection(vec![
        ConvexSet::soc(3, params.theta.tan())?,
        ConvexSet::ball(vec![T::zero(); 3], params.rho2)?,
    ])
}

/// Builds the landing feasibility problem for landing step `i`: states
/// `x_i, …, x_{τ−1}` are pinned to the origin, earlier states stay in the
/// approach cone with bounded speed, and the objective is `½Σ‖u_t‖²`.
pub fn build_landing_problem<T: Scalar>(
    tau: usize,
    i: usize,
    x0: &[T; 6],
    params: &QuadrotorParams<T>,
) -> Result<ConicProblem<T>> {
    build_landing_problem_with(tau, i, x0, params, true)
}

/// As [`build_landing_problem`], optionally without row normalization.
pub fn build_landing_problem_with<T: Scalar>(
    tau: usize,
    i: usize,
    x0: &[T; 6],
    params: &QuadrotorParams<T>,
    normalize_rows: bool,
) -> Result<ConicProblem<T>> {
    params.validate()?;
    if tau < 2 {
        return Err(Error::InvalidInput(format!("horizon must be at least 2, got {tau}")));
    }
    if i < 1 || i > tau - 1 {
        return Err(Error::InvalidInput(format!(
            "landing step must lie in [1, {}], got {i}",
            tau - 1
        )));
    }
    let (n, m) = landing_dims(tau);
    let mut trip = Vec::new();
    let mut g = Vec::with_capacity(m);
    let origin = [T::zero(); 6];
    dynamics_rows(tau, x0, &origin, params, &mut trip, &mut g)?;
    let h = SparseMatrix::from_triplets(m, n, &trip)?;
    let (h, g) = if normalize_rows {
        row_normalize(&h, &g)?
    } else {
        (h, g)
    };

    let approach = ConvexSet::product(vec![
        ConvexSet::soc(3, params.beta.tan())?,
        ConvexSet::ball(vec![T::zero(); 3], params.eta)?,
    ])?;
    let pinned = ConvexSet::singleton(origin.to_vec())?;
    let mut parts = Vec::with_capacity(2 * tau);
    parts.extend(std::iter::repeat_n(approach, i - 1));
    parts.extend(std::iter::repeat_n(pinned, tau - i));
    parts.extend(std::iter::repeat_n(thrust_set(params)?, tau));
    let d = ConvexSet::product(parts)?;

    let p = input_weight(n, tau);
    let k = Cone::new(ConvexSet::product(vec![
        ConvexSet::zeros(6 * tau),
        ConvexSet::nonneg(tau),
    ])?)?;
    ConicProblem::new(p, vec![T::zero(); n], h, g, k, d)
}

fn input_weight<T: Scalar>(n: usize, tau: usize) -> SparseMatrix<T> {
    let mut diag = vec![T::zero(); n];
    for v in &mut diag[6 * (tau - 1)..9 * tau - 6] {
        *v = T::one();
    }
    SparseMatrix::diagonal(&diag)
}

/// Builds the relaxed corridor problem. Each `b_t` (`t = 1..τ−1`) selects the
/// corridor box for `x_t`; indices in `fixes` are pinned to 0 or 1, the rest
/// are relaxed to `[0, 1]`.
pub fn build_corridor_problem<T: Scalar>(
    tau: usize,
    fixes: &BTreeMap<usize, u8>,
    x0: &[T; 6],
    x_tau: &[T; 6],
    params: &QuadrotorParams<T>,
    corridor: &CorridorParams<T>,
) -> Result<ConicProblem<T>> {
    build_corridor_problem_with(tau, fixes, x0, x_tau, params, corridor, true)
}

/// As [`build_corridor_problem`], optionally without row normalization.
pub fn build_corridor_problem_with<T: Scalar>(
    tau: usize,
    fixes: &BTreeMap<usize, u8>,
    x0: &[T; 6],
    x_tau: &[T; 6],
    params: &QuadrotorParams<T>,
    corridor: &CorridorParams<T>,
    normalize_rows: bool,
) -> Result<ConicProblem<T>> {
    params.validate()?;
    corridor.validate()?;
    if tau < 2 {
        return Err(Error::InvalidInput(format!("horizon must be at least 2, got {tau}")));
    }
    for (&t, &v) in fixes {
        if t < 1 || t > tau - 1 {
            return Err(Error::InvalidInput(format!(
                "binary index {t} outside [1, {}]",
                tau - 1
            )));
        }
        if v > 1 {
            return Err(Error::InvalidInput(format!("binary b_{t} fixed to {v}, expected 0 or 1")));
        }
    }
    let (n, m) = corridor_dims(tau);
    let mut trip = Vec::new();
    let mut g = Vec::with_capacity(m);
    dynamics_rows(tau, x0, x_tau, params, &mut trip, &mut g)?;

    let b0 = 9 * tau - 6;
    let c = corridor;
    for t in 1..tau {
        let row0 = 7 * tau + 6 * (t - 1);
        let bcol = b0 + t - 1;
        for k in 0..3 {
            // r ≥ r_lo1 + b (r_lo2 − r_lo1)
            trip.push((row0 + k, state_col(t) + k, T::one()));
            trip.push((row0 + k, bcol, c.r_lo1[k] - c.r_lo2[k]));
            g.push(c.r_lo1[k]);
        }
        for k in 0..3 {
            // r ≤ r_hi1 + b (r_hi2 − r_hi1)
            trip.push((row0 + 3 + k, state_col(t) + k, -T::one()));
            trip.push((row0 + 3 + k, bcol, c.r_hi2[k] - c.r_hi1[k]));
            g.push(-c.r_hi1[k]);
        }
    }
    let h = SparseMatrix::from_triplets(m, n, &trip)?;
    let (h, g) = if normalize_rows {
        row_normalize(&h, &g)?
    } else {
        (h, g)
    };

    let state_set = ConvexSet::product(vec![
        ConvexSet::reals(3),
        ConvexSet::ball(vec![T::zero(); 3], params.eta)?,
    ])?;
    let mut parts = Vec::with_capacity(3 * tau);
    parts.extend(std::iter::repeat_n(state_set, tau - 1));
    parts.extend(std::iter::repeat_n(thrust_set(params)?, tau));
    for t in 1..tau {
        parts.push(match fixes.get(&t) {
            Some(&v) => ConvexSet::singleton(vec![T::from_count(v as usize)])?,
            None => ConvexSet::interval(T::zero(), T::one())?,
        });
    }
    let d = ConvexSet::product(parts)?;

    let mut diag = vec![T::zero(); n];
    for v in &mut diag[6 * (tau - 1)..b0] {
        *v = T::one();
    }
    let k = Cone::new(ConvexSet::product(vec![
        ConvexSet::zeros(6 * tau),
        ConvexSet::nonneg(tau + 6 * (tau - 1)),
    ])?)?;
    ConicProblem::new(SparseMatrix::diagonal(&diag), vec![T::zero(); n], h, g, k, d)
}
