use super::ConicProblem;
use crate::error::{check_len, Error, Result};
use crate::linalg::LinearMap;
use crate::scalar::{vecops, Scalar};

/// Iterates `(z, v, w)` of the projected-gradient method plus the previous
/// `z` and `w` needed for difference norms.
#[derive(Debug, Clone)]
pub struct IterateState<T> {
    z: Vec<T>,
    v: Vec<T>,
    w: Vec<T>,
    z_prev: Vec<T>,
    w_prev: Vec<T>,
    steps: usize,
    scratch: Scratch<T>,
}

#[derive(Debug, Clone)]
struct Scratch<T> {
    hz: Vec<T>,
    pz: Vec<T>,
    htw: Vec<T>,
    dz: Vec<T>,
}

impl<T: Scalar> IterateState<T> {
    /// Starts from `(z¹, v¹)`. `w` is undefined until the first step and is
    /// held at zero.
    pub fn new(prob: &ConicProblem<T>, z1: Vec<T>, v1: Vec<T>) -> Result<Self> {
        let (n, m) = (prob.n(), prob.m());
        check_len("initial z", n, z1.len())?;
        check_len("initial v", m, v1.len())?;
        Ok(Self {
            z_prev: z1.clone(),
            z: z1,
            v: v1,
            w: vec![T::zero(); m],
            w_prev: vec![T::zero(); m],
            steps: 0,
            scratch: Scratch {
                hz: vec![T::zero(); m],
                pz: vec![T::zero(); n],
                htw: vec![T::zero(); n],
                dz: vec![T::zero(); n],
            },
        })
    }

    pub fn zeros(prob: &ConicProblem<T>) -> Self {
        Self::new(prob, vec![T::zero(); prob.n()], vec![T::zero(); prob.m()])
            .expect("zero start has matching dimensions")
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    pub fn w(&self) -> &[T] {
        &self.w
    }

    pub fn z_prev(&self) -> &[T] {
        &self.z_prev
    }

    pub fn w_prev(&self) -> &[T] {
        &self.w_prev
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn z_diff(&self) -> Vec<T> {
        vecops::sub(&self.z, &self.z_prev)
    }

    pub fn w_diff(&self) -> Vec<T> {
        vecops::sub(&self.w, &self.w_prev)
    }

    pub fn z_diff_norm(&self) -> T {
        vecops::dist(&self.z, &self.z_prev)
    }

    pub fn w_diff_norm(&self) -> T {
        vecops::dist(&self.w, &self.w_prev)
    }

    /// One step using the problem's own matrices.
    pub fn step(&mut self, prob: &ConicProblem<T>, alpha: T) -> Result<()> {
        self.step_with(prob.p(), prob.h(), prob, alpha)
    }

    /// One step with `P` and `H` supplied as operators; the problem provides
    /// `q`, `g`, `K` and `D`.
    ///
    /// ```text
    /// w⁺ = π_{K°}[v + α(Hz − g)]
    /// z⁺ = π_D[z − α(Pz + q + Hᵀw⁺)]
    /// v⁺ = w⁺ + αH(z⁺ − z)
    /// ```
    ///
    /// Uses two products with `H`, one with `Hᵀ` and one with `P`.
    pub fn step_with<MP, MH>(
        &mut self,
        p: &MP,
        h: &MH,
        prob: &ConicProblem<T>,
        alpha: T,
    ) -> Result<()>
    where
        MP: LinearMap<T>,
        MH: LinearMap<T>,
    {
        let iteration = self.steps + 1;
        let s = &mut self.scratch;

        h.apply_into(&self.z, &mut s.hz);
        std::mem::swap(&mut self.w, &mut self.w_prev);
        for ((w, &v), (&hz, &g)) in self
            .w
            .iter_mut()
            .zip(&self.v)
            .zip(s.hz.iter().zip(prob.g()))
        {
            *w = v + alpha * (hz - g);
        }
        prob.cone().project_polar_in_place(&mut self.w);
        if !vecops::all_finite(&self.w) {
            return Err(Error::NonFinite {
                component: "w",
                iteration,
            });
        }

        p.apply_into(&self.z, &mut s.pz);
        h.apply_transpose_into(&self.w, &mut s.htw);
        std::mem::swap(&mut self.z, &mut self.z_prev);
        for (i, z) in self.z.iter_mut().enumerate() {
            *z = self.z_prev[i] - alpha * (s.pz[i] + prob.q()[i] + s.htw[i]);
        }
        prob.set().project_in_place(&mut self.z)?;
        if !vecops::all_finite(&self.z) {
            return Err(Error::NonFinite {
                component: "z",
                iteration,
            });
        }

        for ((d, &z), &zp) in s.dz.iter_mut().zip(&self.z).zip(&self.z_prev) {
            *d = z - zp;
        }
        h.apply_into(&s.dz, &mut s.hz);
        for ((v, &w), &hd) in self.v.iter_mut().zip(&self.w).zip(&s.hz) {
            *v = w + alpha * hd;
        }
        if !vecops::all_finite(&self.v) {
            return Err(Error::NonFinite {
                component: "v",
                iteration,
            });
        }
        self.steps = iteration;
        Ok(())
    }
}

/// The one-step map `T(z, v) = (z⁺, v⁺)` whose fixed-point iteration the
/// method runs.
pub fn one_step_map<T: Scalar>(
    prob: &ConicProblem<T>,
    alpha: T,
    z: &[T],
    v: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let mut st = IterateState::new(prob, z.to_vec(), v.to_vec())?;
    st.step(prob, alpha)?;
    Ok((st.z, st.v))
}

/// Checks the normal-cone elements implied by one step, given three
/// consecutive `z` iterates and two consecutive `w` iterates:
///
/// ```text
/// ζ = (z_prev − z)/α − P z_prev − q − Hᵀw        ∈ N_D(z)
/// ω = (w_prev − w)/α + H(2 z_prev − z_prev2) − g ∈ N_{K°}(w)
/// ```
///
/// Membership is tested through `π_D[z + ζ] = z` and `π_{K°}[w + ω] = w`.
/// Returns both distances, divided by `max(1, ‖z‖)` and `max(1, ‖w‖)`.
pub fn normal_cone_residuals<T: Scalar>(
    prob: &ConicProblem<T>,
    alpha: T,
    z_prev2: &[T],
    z_prev: &[T],
    z: &[T],
    w_prev: &[T],
    w: &[T],
) -> Result<(T, T)> {
    let (n, m) = (prob.n(), prob.m());
    for (name, len, want) in [
        ("z_prev2", z_prev2.len(), n),
        ("z_prev", z_prev.len(), n),
        ("z", z.len(), n),
        ("w_prev", w_prev.len(), m),
        ("w", w.len(), m),
    ] {
        check_len(name, want, len)?;
    }
    let inv = T::one() / alpha;
    let pz = prob.p().spmv(z_prev)?;
    let htw = prob.h().spmv_t(w)?;
    let mut shifted: Vec<T> = (0..n)
        .map(|i| z[i] + inv * (z_prev[i] - z[i]) - pz[i] - prob.q()[i] - htw[i])
        .collect();
    prob.set().project_in_place(&mut shifted)?;
    let rz = vecops::dist(&shifted, z) / vecops::norm(z).max(T::one());

    let extrap: Vec<T> = z_prev.iter().zip(z_prev2).map(|(&a, &b)| a + a - b).collect();
    let hx = prob.h().spmv(&extrap)?;
    let shifted: Vec<T> = (0..m)
        .map(|i| w[i] + inv * (w_prev[i] - w[i]) + hx[i] - prob.g()[i])
        .collect();
    let proj = prob.cone().project_polar(&shifted)?;
    let rw = vecops::dist(&proj, w) / vecops::norm(w).max(T::one());
    Ok((rz, rw))
}
