//! History CSV and result JSON.

use std::collections::BTreeMap;

use serde::Serialize;

use pipg_core::certificates::CertificateReport;
use pipg_core::meta::{BisectionReport, EliminationLedger, FeasibilityVerdict, Probe};
use pipg_core::pipg::{HistoryRecord, SolveOutcome};
use pipg_core::vecops;

pub const HISTORY_HEADER: &str = "iter,norm_dz,norm_dw,fp_residual_primal,fp_residual_dual,objective";

/// 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn history_csv(records: &[HistoryRecord<f64>]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(HISTORY_HEADER);
    out.push('\n');
    for r in records {
        let fields = [r.norm_dz, r.norm_dw, r.fp_residual_primal, r.fp_residual_dual, r.objective];
        out.push_str(&r.iteration.to_string());
        for f in fields {
            out.push(',');
            out.push_str(&fmt_float(f));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateJson {
    pub kind: String,
    pub accepted: bool,
    pub margin: f64,
    pub normalized_margin: f64,
    pub scale: f64,
    pub accept_tol: f64,
    pub identity_gap: Option<f64>,
    pub membership_residuals: BTreeMap<String, f64>,
    pub explanation: Option<String>,
}

impl From<&CertificateReport<f64>> for CertificateJson {
    fn from(r: &CertificateReport<f64>) -> Self {
        Self {
            kind: r.kind.to_string(),
            accepted: r.accepted,
            margin: r.margin,
            normalized_margin: r.normalized_margin(),
            scale: r.scale,
            accept_tol: r.accept_tol,
            identity_gap: r.identity_gap,
            membership_residuals: r
                .membership_residuals
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            explanation: r.explanation.clone(),
        }
    }
}

/// Result of a single solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveJson {
    pub method: String,
    pub status: String,
    /// Confirmed classification; absent for the splitting baseline.
    pub verdict: Option<String>,
    pub iterations: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub nu: f64,
    pub z_bar_norm: f64,
    pub w_bar_norm: f64,
    pub ambiguous: bool,
    pub early_exit: bool,
    pub objective: Option<f64>,
    pub fp_residual: Option<f64>,
    pub certificate: Option<CertificateJson>,
    pub note: Option<String>,
    pub wall_clock_seconds: f64,
}

impl SolveJson {
    pub fn from_outcome(method: &str, out: &SolveOutcome<f64>, objective: Option<f64>, secs: f64) -> Self {
        let d = &out.diagnostics;
        Self {
            method: method.to_string(),
            status: out.status.to_string(),
            verdict: None,
            iterations: out.iterations,
            alpha: d.step.alpha,
            lambda: d.step.lambda,
            nu: d.step.nu,
            z_bar_norm: vecops::norm(&out.z_bar),
            w_bar_norm: vecops::norm(&out.w_bar),
            ambiguous: d.ambiguous,
            early_exit: d.early_exit,
            objective,
            fp_residual: None,
            certificate: None,
            note: None,
            wall_clock_seconds: secs,
        }
    }

    pub fn from_verdict(v: &FeasibilityVerdict<f64>, objective: Option<f64>, secs: f64) -> Self {
        Self {
            verdict: Some(v.kind.to_string()),
            fp_residual: Some(v.fp_residual),
            certificate: v.certificate.as_ref().map(CertificateJson::from),
            note: v.note.clone(),
            ..Self::from_outcome("pipg", &v.outcome, objective, secs)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeJson {
    pub index: usize,
    pub value: Option<u8>,
    pub verdict: String,
    pub iterations: usize,
    pub max_iters: usize,
}

impl From<&Probe> for ProbeJson {
    fn from(p: &Probe) -> Self {
        Self {
            index: p.index,
            value: p.value,
            verdict: p.kind.to_string(),
            iterations: p.iterations,
            max_iters: p.max_iters,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BisectionJson {
    pub minimum: usize,
    pub solves: usize,
    pub probes: Vec<ProbeJson>,
    pub wall_clock_seconds: f64,
}

impl BisectionJson {
    pub fn new(r: &BisectionReport, secs: f64) -> Self {
        Self {
            minimum: r.minimum,
            solves: r.solves(),
            probes: r.probes.iter().map(ProbeJson::from).collect(),
            wall_clock_seconds: secs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EliminationJson {
    /// Time index to fixed value, keyed by the decimal index.
    pub fixed: BTreeMap<usize, u8>,
    pub remaining_free: Vec<usize>,
    pub solves_used: usize,
    pub probes: Vec<ProbeJson>,
    pub wall_clock_seconds: f64,
}

impl EliminationJson {
    pub fn new(l: &EliminationLedger, secs: f64) -> Self {
        Self {
            fixed: l.fixed.clone(),
            remaining_free: l.remaining_free.clone(),
            solves_used: l.solves_used,
            probes: l.probes.iter().map(ProbeJson::from).collect(),
            wall_clock_seconds: secs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormJson {
    pub lambda: f64,
    pub nu: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub seed: u64,
}
