//! Checks for the three possible outcomes of a run: approximate optimality,
//! a primal infeasibility certificate `w̄`, or a dual infeasibility
//! certificate `z̄`.
//!
//! Optimality is measured through fixed-point residuals. For `t > 0`,
//! `v ∈ N_S(z)` exactly when `π_S[z + t v] = z`, so the residuals vanish
//! precisely at points satisfying the primal-dual optimality conditions.

use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::linalg::LinearMap;
use crate::pipg::{one_step_map, ConicProblem};
use crate::scalar::{vecops, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport<T> {
    /// `‖π_D[z − α(Pz + q + Hᵀw)] − z‖`
    pub primal_fp_residual: T,
    /// `‖π_{K°}[w + α(Hz − g)] − w‖`
    pub dual_fp_residual: T,
    pub objective: T,
}

impl<T: Scalar> ResidualReport<T> {
    pub fn max_residual(&self) -> T {
        self.primal_fp_residual.max(self.dual_fp_residual)
    }
}

pub fn fixed_point_residuals<T: Scalar>(
    prob: &ConicProblem<T>,
    alpha: T,
    z: &[T],
    w: &[T],
) -> Result<ResidualReport<T>> {
    check_len("residual z", prob.n(), z.len())?;
    check_len("residual w", prob.m(), w.len())?;
    let (n, m) = (prob.n(), prob.m());

    let mut pz = vec![T::zero(); n];
    prob.p().apply_into(z, &mut pz);
    let mut htw = vec![T::zero(); n];
    prob.h().apply_transpose_into(w, &mut htw);
    let mut zs: Vec<T> = (0..n)
        .map(|i| z[i] - alpha * (pz[i] + prob.q()[i] + htw[i]))
        .collect();
    prob.set().project_in_place(&mut zs)?;

    let mut hz = vec![T::zero(); m];
    prob.h().apply_into(z, &mut hz);
    let mut ws: Vec<T> = (0..m).map(|i| w[i] + alpha * (hz[i] - prob.g()[i])).collect();
    prob.cone().project_polar_in_place(&mut ws);

    let objective = T::lit(0.5) * vecops::dot(z, &pz) + vecops::dot(prob.q(), z);
    Ok(ResidualReport {
        primal_fp_residual: vecops::dist(&zs, z),
        dual_fp_residual: vecops::dist(&ws, w),
        objective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// Separating hyperplane: `w̄ ∈ K°` with `inf_{z∈D} ⟨Hz − g, w̄⟩ > 0`.
    Primal,
    /// Improving direction: `Hz̄ ∈ K`, `Pz̄ = 0`, `z̄ ∈ rec D`, `⟨q, z̄⟩ < 0`.
    Dual,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Primal => "PrimalCert",
            Self::Dual => "DualCert",
        })
    }
}

/// Outcome of checking a candidate certificate.
///
/// Residuals and the margin are reported raw; acceptance compares them after
/// dividing by the certificate's norm, since only its direction matters.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport<T> {
    pub kind: CertificateKind,
    pub margin: T,
    pub membership_residuals: Vec<(&'static str, T)>,
    /// Residual of the limit identity tying the certificate to the step
    /// size; present only when `alpha` was supplied.
    pub identity_gap: Option<T>,
    /// Norm of the certificate vector.
    pub scale: T,
    pub accept_tol: T,
    pub accepted: bool,
    pub explanation: Option<String>,
}

impl<T: Scalar> CertificateReport<T> {
    pub fn normalized_margin(&self) -> T {
        self.margin / self.scale
    }

    pub fn residual(&self, name: &str) -> Option<T> {
        self.membership_residuals
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

fn decide<T: Scalar>(report: &mut CertificateReport<T>) {
    let tol = report.accept_tol;
    let bad = report
        .membership_residuals
        .iter()
        .find(|(_, r)| !(*r / report.scale <= tol));
    if let Some((name, r)) = bad {
        report.accepted = false;
        report.explanation = Some(format!(
            "{name} residual {:e} exceeds tolerance (relative {:e})",
            r.as_f64(),
            (*r / report.scale).as_f64()
        ));
        return;
    }
    let nm = report.normalized_margin();
    if !nm.is_finite() {
        report.accepted = false;
        report.explanation = Some(
            "support function is infinite: D is unbounded in the certificate direction".into(),
        );
    } else if nm > tol {
        report.accepted = true;
    } else {
        report.accepted = false;
        report.explanation = Some(format!(
            "margin {:e} (relative {:e}) is not positive beyond tolerance",
            report.margin.as_f64(),
            nm.as_f64()
        ));
    }
}

/// Checks `w̄` as a separating-hyperplane certificate of primal infeasibility.
///
/// The margin is `inf_{z∈D} ⟨Hz − g, w̄⟩ = −σ_D(−Hᵀw̄) − ⟨g, w̄⟩`; membership is
/// `‖π_{K°}[w̄] − w̄‖`. With `alpha` the gap `|σ_D(−Hᵀw̄) + ⟨g, w̄⟩ + ‖w̄‖²/α|`
/// is also reported.
pub fn check_primal_certificate<T: Scalar>(
    prob: &ConicProblem<T>,
    w_bar: &[T],
    accept_tol: T,
    alpha: Option<T>,
) -> Result<CertificateReport<T>> {
    check_len("primal certificate", prob.m(), w_bar.len())?;
    let scale = vecops::norm(w_bar);
    if !(scale > T::zero()) {
        return Err(Error::Precondition(
            "primal certificate must be a nonzero vector".into(),
        ));
    }
    let mut polar = w_bar.to_vec();
    prob.cone().project_polar_in_place(&mut polar);
    let polar_res = vecops::dist(&polar, w_bar);

    let mut htw = vec![T::zero(); prob.n()];
    prob.h().apply_transpose_into(w_bar, &mut htw);
    htw.iter_mut().for_each(|v| *v = -*v);
    let support = prob.set().support_with_tol(&htw, accept_tol)?;
    let gw = vecops::dot(prob.g(), w_bar);
    let margin = -support - gw;
    let identity_gap = alpha.map(|a| (support + gw + scale * scale / a).abs());

    let mut report = CertificateReport {
        kind: CertificateKind::Primal,
        margin,
        membership_residuals: vec![("polar_cone", polar_res)],
        identity_gap,
        scale,
        accept_tol,
        accepted: false,
        explanation: None,
    };
    decide(&mut report);
    Ok(report)
}

/// Checks `z̄` as an improving-direction certificate of dual infeasibility.
///
/// Membership residuals are `‖π_K[Hz̄] − Hz̄‖`, `‖Pz̄‖` and the distance of
/// `z̄` to `rec D`; the margin is `−⟨q, z̄⟩`. With `alpha` the gap
/// `|⟨q, z̄⟩ + ‖z̄‖²/α|` is also reported.
pub fn check_dual_certificate<T: Scalar>(
    prob: &ConicProblem<T>,
    z_bar: &[T],
    accept_tol: T,
    alpha: Option<T>,
) -> Result<CertificateReport<T>> {
    check_len("dual certificate", prob.n(), z_bar.len())?;
    let scale = vecops::norm(z_bar);
    if !(scale > T::zero()) {
        return Err(Error::Precondition(
            "dual certificate must be a nonzero vector".into(),
        ));
    }
    let mut hz = vec![T::zero(); prob.m()];
    prob.h().apply_into(z_bar, &mut hz);
    let mut proj = hz.clone();
    prob.cone().project_in_place(&mut proj);
    let cone_res = vecops::dist(&proj, &hz);

    let mut pz = vec![T::zero(); prob.n()];
    prob.p().apply_into(z_bar, &mut pz);
    let p_res = vecops::norm(&pz);

    let rec_res = prob.set().recession_distance(z_bar)?;
    let qz = vecops::dot(prob.q(), z_bar);
    let identity_gap = alpha.map(|a| (qz + scale * scale / a).abs());

    let mut report = CertificateReport {
        kind: CertificateKind::Dual,
        margin: -qz,
        membership_residuals: vec![("cone", cone_res), ("p_null", p_res), ("recession", rec_res)],
        identity_gap,
        scale,
        accept_tol,
        accepted: false,
        explanation: None,
    };
    decide(&mut report);
    Ok(report)
}

/// Left side minus right side of the averaged-operator inequality for the
/// one-step map `T` on `ξ = (z, v)`:
///
/// ```text
/// ‖z₂⁺ − z₁⁺‖² + c‖z₁ − z₁⁺ − z₂ + z₂⁺‖² + ‖v₂⁺ − v₁⁺‖² + c‖v₁ − v₁⁺ − v₂ + v₂⁺‖²
///   − ‖z₂ − z₁‖² − ‖v₂ − v₁‖²,          c = (1 − γ)/γ
/// ```
///
/// Nonpositive (up to rounding) whenever `alpha` is admissible for `gamma`.
pub fn averaged_inequality_gap<T: Scalar>(
    prob: &ConicProblem<T>,
    alpha: T,
    gamma: T,
    xi1: (&[T], &[T]),
    xi2: (&[T], &[T]),
) -> Result<T> {
    let (z1, v1) = xi1;
    let (z2, v2) = xi2;
    let (z1p, v1p) = one_step_map(prob, alpha, z1, v1)?;
    let (z2p, v2p) = one_step_map(prob, alpha, z2, v2)?;
    let c = (T::one() - gamma) / gamma;
    let sq = |a: &[T], b: &[T]| {
        let d = vecops::dist(a, b);
        d * d
    };
    let resid = |x: &[T], xp: &[T], y: &[T], yp: &[T]| {
        let s = x
            .iter()
            .zip(xp)
            .zip(y.iter().zip(yp))
            .fold(T::zero(), |acc, ((&a, &ap), (&b, &bp))| {
                let e = a - ap - b + bp;
                acc + e * e
            });
        s
    };
    let lhs = sq(&z2p, &z1p) + c * resid(z1, &z1p, z2, &z2p) + sq(&v2p, &v1p)
        + c * resid(v1, &v1p, v2, &v2p);
    let rhs = sq(z2, z1) + sq(v2, v1);
    Ok(lhs - rhs)
}
