//! Drivers built on infeasibility detection: bisection on the landing step
//! and elimination of corridor binaries.
//!
//! Independent solves may run on scoped threads; the count is capped by the
//! `PIPG_THREADS` environment variable (default 1).

use std::collections::BTreeMap;
use std::fmt;

use crate::certificates::{
    check_dual_certificate, check_primal_certificate, fixed_point_residuals, CertificateReport,
};
use crate::error::{Error, Result};
use crate::ocp::{build_corridor_problem, build_landing_problem, CorridorParams, QuadrotorParams};
use crate::pipg::{pipg_solve, ConicProblem, SolveOutcome, SolveStatus, SolverConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Feasible,
    PrimalInfeasible,
    DualInfeasible,
    Inconclusive,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Feasible => "Feasible",
            Self::PrimalInfeasible => "PrimalInfeasible",
            Self::DualInfeasible => "DualInfeasible",
            Self::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict<T> {
    pub kind: VerdictKind,
    pub outcome: SolveOutcome<T>,
    pub certificate: Option<CertificateReport<T>>,
    /// Larger of the two fixed-point residuals at the final iterate.
    pub fp_residual: T,
    /// Why the solver's status was downgraded or how it was confirmed.
    pub note: Option<String>,
}

/// Tolerances applied on top of the solver's own classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictTolerances<T> {
    /// Bound on the fixed-point residuals for a `Feasible` verdict.
    pub residual_tol: T,
    /// Relative acceptance tolerance for certificates.
    pub accept_tol: T,
}

impl<T: Scalar> Default for VerdictTolerances<T> {
    fn default() -> Self {
        Self {
            residual_tol: T::lit(1e-6),
            accept_tol: T::lit(1e-6),
        }
    }
}

/// Runs the solver and confirms its classification: optimality by the
/// fixed-point residuals, infeasibility by checking the certificate built
/// from the final differences. Anything unconfirmed is `Inconclusive`.
///
/// On infeasible problems the `z` differences typically decay only like
/// `1/j`, so the solver's ambiguity flag is often set at the cap. The
/// certificate check, not the flag, decides the verdict.
pub fn classify_feasibility<T: Scalar>(
    prob: &ConicProblem<T>,
    cfg: &SolverConfig<T>,
) -> Result<FeasibilityVerdict<T>> {
    classify_feasibility_with(prob, cfg, &VerdictTolerances::default())
}

pub fn classify_feasibility_with<T: Scalar>(
    prob: &ConicProblem<T>,
    cfg: &SolverConfig<T>,
    tol: &VerdictTolerances<T>,
) -> Result<FeasibilityVerdict<T>> {
    let outcome = pipg_solve(prob, cfg)?;
    let alpha = outcome.diagnostics.step.alpha;
    let fp = fixed_point_residuals(prob, alpha, &outcome.z, &outcome.w)?.max_residual();
    let mut note = None;
    let mut certificate = None;
    let kind = match outcome.status {
        SolveStatus::Optimal if fp <= tol.residual_tol => VerdictKind::Feasible,
        SolveStatus::Optimal => {
            note = Some(format!("fixed-point residual {:e} above tolerance", fp.as_f64()));
            VerdictKind::Inconclusive
        }
        SolveStatus::PrimalInfeasible => {
            let rep = check_primal_certificate(prob, &outcome.w_bar, tol.accept_tol, Some(alpha))?;
            let kind = if rep.accepted {
                VerdictKind::PrimalInfeasible
            } else {
                note.clone_from(&rep.explanation);
                VerdictKind::Inconclusive
            };
            certificate = Some(rep);
            kind
        }
        SolveStatus::DualInfeasible => {
            let rep = check_dual_certificate(prob, &outcome.z_bar, tol.accept_tol, Some(alpha))?;
            let kind = if rep.accepted {
                VerdictKind::DualInfeasible
            } else {
                note = rep.explanation.clone();
                VerdictKind::Inconclusive
            };
            certificate = Some(rep);
            kind
        }
        SolveStatus::MaxIterations => VerdictKind::Inconclusive,
    };
    Ok(FeasibilityVerdict {
        kind,
        outcome,
        certificate,
        fp_residual: fp,
        note,
    })
}

/// Worker cap from `PIPG_THREADS`; unset, unparsable or zero means 1.
pub fn thread_cap() -> usize {
    std::env::var("PIPG_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

/// Evaluates `f` on every job, on up to `threads` scoped workers. Results
/// come back in job order.
fn run_all<J, R, F>(jobs: &[J], threads: usize, f: F) -> Vec<R>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> R + Sync,
{
    if threads <= 1 || jobs.len() <= 1 {
        return jobs.iter().map(&f).collect();
    }
    let mut out = Vec::with_capacity(jobs.len());
    for chunk in jobs.chunks(threads) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|j| s.spawn(|| f(j))).collect();
            out.extend(handles.into_iter().map(|h| h.join().expect("solver worker panicked")));
        });
    }
    out
}

/// One classification performed by a driver.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub index: usize,
    /// Candidate binary value; `None` for landing probes.
    pub value: Option<u8>,
    pub kind: VerdictKind,
    pub iterations: usize,
    /// Iteration cap the decisive solve ran with.
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionReport {
    /// Smallest feasible landing step.
    pub minimum: usize,
    /// Every solve, in order, including entry checks and retries.
    pub probes: Vec<Probe>,
}

impl BisectionReport {
    pub fn solves(&self) -> usize {
        self.probes.len()
    }
}

/// How inconclusive verdicts are retried: each retry multiplies the
/// iteration cap by `growth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub growth: usize,
    pub max_retries: usize,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            growth: 4,
            max_retries: 2,
        }
    }
}

impl RetryPolicy {
    /// Iteration cap of the last allowed attempt.
    pub fn final_cap(&self, base: usize) -> usize {
        (0..self.max_retries).fold(base, |k, _| k.saturating_mul(self.growth))
    }
}

/// Classifies with `cfg`, retrying with larger caps while the verdict is
/// inconclusive.
fn classify_with_retry<T: Scalar>(
    prob: &ConicProblem<T>,
    cfg: &SolverConfig<T>,
    retry: RetryPolicy,
    index: usize,
    value: Option<u8>,
    probes: &mut Vec<Probe>,
) -> Result<VerdictKind> {
    let mut cfg = cfg.clone();
    let mut attempt = 0;
    loop {
        let v = classify_feasibility(prob, &cfg)?;
        probes.push(Probe {
            index,
            value,
            kind: v.kind,
            iterations: v.outcome.iterations,
            max_iters: cfg.max_iters,
        });
        if v.kind != VerdictKind::Inconclusive || attempt == retry.max_retries {
            return Ok(v.kind);
        }
        attempt += 1;
        cfg.max_iters = cfg.max_iters.saturating_mul(retry.growth);
    }
}

/// Smallest landing step `i ∈ [lo, hi]` for which the landing problem is
/// feasible. See [`min_time_bisection_with`].
pub fn min_time_bisection<T: Scalar>(
    x0: &[T; 6],
    tau: usize,
    params: &QuadrotorParams<T>,
    cfg: &SolverConfig<T>,
    lo: usize,
    hi: usize,
) -> Result<BisectionReport> {
    min_time_bisection_with(x0, tau, params, cfg, lo, hi, RetryPolicy::default())
}

/// Bisection on the invariant "`lo` infeasible or untested, `hi` feasible".
///
/// `hi` is checked first and must be feasible. `lo` is only solved if the
/// search narrows down to `lo + 1`. Inconclusive probes are retried per
/// `retry` and abort the search if still inconclusive.
pub fn min_time_bisection_with<T: Scalar>(
    x0: &[T; 6],
    tau: usize,
    params: &QuadrotorParams<T>,
    cfg: &SolverConfig<T>,
    lo: usize,
    hi: usize,
    retry: RetryPolicy,
) -> Result<BisectionReport> {
    if !(1 <= lo && lo <= hi && hi < tau) {
        return Err(Error::InvalidInput(format!(
            "bracket [{lo}, {hi}] must satisfy 1 <= lo <= hi <= {}",
            tau.saturating_sub(1)
        )));
    }
    let mut probes = Vec::new();
    let mut decide = |i: usize| -> Result<VerdictKind> {
        let prob = build_landing_problem(tau, i, x0, params)?;
        match classify_with_retry(&prob, cfg, retry, i, None, &mut probes)? {
            VerdictKind::Inconclusive => Err(Error::Precondition(format!(
                "landing step {i} could not be classified within {} iterations",
                retry.final_cap(cfg.max_iters)
            ))),
            k => Ok(k),
        }
    };

    let top = decide(hi)?;
    if top != VerdictKind::Feasible {
        return Err(Error::Precondition(format!(
            "upper end {hi} of the bracket is {top}, expected Feasible"
        )));
    }
    let (lo0, mut lo, mut hi) = (lo, lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if decide(mid)? == VerdictKind::Feasible {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if lo == lo0 && lo < hi && decide(lo)? == VerdictKind::Feasible {
        hi = lo;
    }
    Ok(BisectionReport { minimum: hi, probes })
}

/// Order in which candidate values are tried at each index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOrder {
    OneFirst,
    ZeroFirst,
}

impl CandidateOrder {
    fn values(self) -> [u8; 2] {
        match self {
            Self::OneFirst => [1, 0],
            Self::ZeroFirst => [0, 1],
        }
    }
}

/// Whether fixes found at earlier indices apply when testing later ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixCarry {
    /// Each index is tested with every other binary relaxed.
    Independent,
    /// Earlier fixes stay in force.
    #[default]
    Accumulate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationLedger {
    pub fixed: BTreeMap<usize, u8>,
    pub solves_used: usize,
    pub remaining_free: Vec<usize>,
    pub probes: Vec<Probe>,
}

/// Fixes corridor binaries one index at a time with earlier fixes carried
/// forward. See [`eliminate_binaries_with`].
pub fn eliminate_binaries<T: Scalar>(
    x0: &[T; 6],
    x_tau: &[T; 6],
    tau: usize,
    params: &QuadrotorParams<T>,
    corridor: &CorridorParams<T>,
    cfg: &SolverConfig<T>,
    order: CandidateOrder,
) -> Result<EliminationLedger> {
    eliminate_binaries_with(x0, x_tau, tau, params, corridor, cfg, order, FixCarry::Accumulate)
}

/// Fixes corridor binaries one index at a time. At index `t` each candidate
/// `v` is tested with the binaries not yet fixed relaxed to `[0, 1]`; an
/// infeasible candidate fixes `b_t = 1 − v`. An index where no candidate is
/// infeasible stays free. With [`FixCarry::Independent`] no earlier fix is
/// applied during a test.
#[allow(clippy::too_many_arguments)]
pub fn eliminate_binaries_with<T: Scalar>(
    x0: &[T; 6],
    x_tau: &[T; 6],
    tau: usize,
    params: &QuadrotorParams<T>,
    corridor: &CorridorParams<T>,
    cfg: &SolverConfig<T>,
    order: CandidateOrder,
    carry: FixCarry,
) -> Result<EliminationLedger> {
    if tau < 2 {
        return Err(Error::InvalidInput(format!("horizon must be at least 2, got {tau}")));
    }
    let threads = thread_cap();
    let mut fixed = BTreeMap::new();
    let mut probes = Vec::new();
    let mut free = Vec::new();

    let empty = BTreeMap::new();
    let classify = |fixes: &BTreeMap<usize, u8>, t: usize, v: u8| -> Result<(VerdictKind, Vec<Probe>)> {
        let mut trial = match carry {
            FixCarry::Accumulate => fixes.clone(),
            FixCarry::Independent => empty.clone(),
        };
        trial.insert(t, v);
        let prob = build_corridor_problem(tau, &trial, x0, x_tau, params, corridor)?;
        let v0 = classify_feasibility(&prob, cfg)?;
        let probe = Probe {
            index: t,
            value: Some(v),
            kind: v0.kind,
            iterations: v0.outcome.iterations,
            max_iters: cfg.max_iters,
        };
        Ok((v0.kind, vec![probe]))
    };

    for t in 1..tau {
        let cands = order.values();
        let kinds: Vec<VerdictKind> = if threads >= 2 {
            let results = run_all(&cands, threads, |&v| classify(&fixed, t, v));
            let mut kinds = Vec::new();
            for r in results {
                let (k, p) = r?;
                probes.extend(p);
                kinds.push(k);
            }
            kinds
        } else {
            let (k, p) = classify(&fixed, t, cands[0])?;
            probes.extend(p);
            if k == VerdictKind::PrimalInfeasible {
                vec![k]
            } else {
                let (k2, p) = classify(&fixed, t, cands[1])?;
                probes.extend(p);
                vec![k, k2]
            }
        };
        let infeasible: Vec<u8> = kinds
            .iter()
            .zip(cands)
            .filter(|(k, _)| **k == VerdictKind::PrimalInfeasible)
            .map(|(_, v)| v)
            .collect();
        match infeasible.as_slice() {
            [] => free.push(t),
            [v] => {
                fixed.insert(t, 1 - v);
            }
            _ => {
                return Err(Error::Precondition(format!(
                    "both values of b_{t} are infeasible given fixes {fixed:?}"
                )))
            }
        }
    }
    Ok(EliminationLedger {
        solves_used: probes.len(),
        fixed,
        remaining_free: free,
        probes,
    })
}
