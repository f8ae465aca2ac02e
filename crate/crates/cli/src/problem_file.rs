//! JSON problem files.
//!
//! ```json
//! {
//!   "n": 1, "m": 1,
//!   "P": {"rows": 1, "cols": 1, "entries": []},
//!   "q": [1.0],
//!   "H": {"rows": 1, "cols": 1, "entries": [[0, 0, 1.0]]},
//!   "g": [0.0],
//!   "cone": {"type": "zeros", "dim": 1},
//!   "set": {"type": "reals", "dim": 1}
//! }
//! ```
//!
//! Infinite box bounds are written as `null`.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use pipg_core::linalg::SparseMatrix;
use pipg_core::pipg::ConicProblem;
use pipg_core::sets::{Cone, ConvexSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "P")]
    pub p: Triplets,
    pub q: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Triplets,
    pub g: Vec<f64>,
    pub cone: ConeDesc,
    pub set: SetDesc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triplets {
    pub rows: usize,
    pub cols: usize,
    /// `[row, col, value]`; duplicates are summed.
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConeDesc {
    Zeros { dim: usize },
    Nonneg { dim: usize },
    Soc { dim: usize, slope: f64 },
    Product { parts: Vec<ConeDesc> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetDesc {
    Reals { dim: usize },
    Zeros { dim: usize },
    Nonneg { dim: usize },
    Box { lower: Vec<Option<f64>>, upper: Vec<Option<f64>> },
    Interval { lo: Option<f64>, hi: Option<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Singleton { point: Vec<f64> },
    Soc { dim: usize, slope: f64 },
    Translate { base: Box<SetDesc>, offset: Vec<f64> },
    Intersection { members: Vec<SetDesc> },
    Product { parts: Vec<SetDesc> },
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow!("malformed problem file: {e}"))
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Builds and validates the problem. Errors name the offending field.
    pub fn to_problem(&self) -> Result<ConicProblem<f64>> {
        let p = self.p.to_matrix("P")?;
        let h = self.h.to_matrix("H")?;
        if p.rows() != self.n || p.cols() != self.n {
            bail!("P: expected {0}x{0} for n = {0}, found {1}x{2}", self.n, p.rows(), p.cols());
        }
        if h.rows() != self.m || h.cols() != self.n {
            bail!("H: expected {}x{} for (m, n), found {}x{}", self.m, self.n, h.rows(), h.cols());
        }
        if self.q.len() != self.n {
            bail!("q: expected length n = {}, found {}", self.n, self.q.len());
        }
        if self.g.len() != self.m {
            bail!("g: expected length m = {}, found {}", self.m, self.g.len());
        }
        let cone = self.cone.to_set("cone")?;
        if cone.dim() != self.m {
            bail!("cone: dimension {} does not match m = {}", cone.dim(), self.m);
        }
        let cone = Cone::new(cone).map_err(|e| anyhow!("cone: {e}"))?;
        let set = self.set.to_set("set")?;
        if set.dim() != self.n {
            bail!("set: dimension {} does not match n = {}", set.dim(), self.n);
        }
        ConicProblem::new(p, self.q.clone(), h, self.g.clone(), cone, set).map_err(|e| anyhow!("problem: {e}"))
    }

    pub fn from_problem(prob: &ConicProblem<f64>) -> Result<Self> {
        Ok(Self {
            n: prob.n(),
            m: prob.m(),
            p: Triplets::from_matrix(prob.p()),
            q: prob.q().to_vec(),
            h: Triplets::from_matrix(prob.h()),
            g: prob.g().to_vec(),
            cone: ConeDesc::from_set(prob.cone().as_set())?,
            set: SetDesc::from_set(prob.set()),
        })
    }
}

impl Triplets {
    fn to_matrix(&self, field: &str) -> Result<SparseMatrix<f64>> {
        SparseMatrix::from_triplets(self.rows, self.cols, &self.entries).map_err(|e| anyhow!("{field}: {e}"))
    }

    fn from_matrix(a: &SparseMatrix<f64>) -> Self {
        Self {
            rows: a.rows(),
            cols: a.cols(),
            entries: a.triplets(),
        }
    }
}

impl ConeDesc {
    fn to_set(&self, path: &str) -> Result<ConvexSet<f64>> {
        Ok(match self {
            Self::Zeros { dim } => ConvexSet::zeros(*dim),
            Self::Nonneg { dim } => ConvexSet::nonneg(*dim),
            Self::Soc { dim, slope } => ConvexSet::soc(*dim, *slope).map_err(|e| anyhow!("{path}: {e}"))?,
            Self::Product { parts } => {
                let parts = parts
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.to_set(&format!("{path}.parts[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                ConvexSet::product(parts).map_err(|e| anyhow!("{path}: {e}"))?
            }
        })
    }

    fn from_set(s: &ConvexSet<f64>) -> Result<Self> {
        Ok(match s {
            ConvexSet::Zeros(dim) => Self::Zeros { dim: *dim },
            ConvexSet::NonnegOrthant(dim) => Self::Nonneg { dim: *dim },
            ConvexSet::Soc { dim, slope } => Self::Soc {
                dim: *dim,
                slope: *slope,
            },
            ConvexSet::Product(parts) => Self::Product {
                parts: parts.iter().map(Self::from_set).collect::<Result<_>>()?,
            },
            other => bail!("cone of kind {} has no file representation", other.kind()),
        })
    }
}

fn bound(x: Option<f64>, inf: f64) -> f64 {
    x.unwrap_or(inf)
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl SetDesc {
    fn to_set(&self, path: &str) -> Result<ConvexSet<f64>> {
        let at = |e: pipg_core::Error| anyhow!("{path}: {e}");
        Ok(match self {
            Self::Reals { dim } => ConvexSet::reals(*dim),
            Self::Zeros { dim } => ConvexSet::zeros(*dim),
            Self::Nonneg { dim } => ConvexSet::nonneg(*dim),
            Self::Box { lower, upper } => ConvexSet::boxed(
                lower.iter().map(|&x| bound(x, f64::NEG_INFINITY)).collect(),
                upper.iter().map(|&x| bound(x, f64::INFINITY)).collect(),
            )
            .map_err(at)?,
            Self::Interval { lo, hi } => {
                ConvexSet::interval(bound(*lo, f64::NEG_INFINITY), bound(*hi, f64::INFINITY)).map_err(at)?
            }
            Self::Ball { center, radius } => ConvexSet::ball(center.clone(), *radius).map_err(at)?,
            Self::Singleton { point } => ConvexSet::singleton(point.clone()).map_err(at)?,
            Self::Soc { dim, slope } => ConvexSet::soc(*dim, *slope).map_err(at)?,
            Self::Translate { base, offset } => {
                ConvexSet::translate(base.to_set(&format!("{path}.base"))?, offset.clone()).map_err(at)?
            }
            Self::Intersection { members } => ConvexSet::intersection(
                members
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.to_set(&format!("{path}.members[{i}]")))
                    .collect::<Result<_>>()?,
            )
            .map_err(at)?,
            Self::Product { parts } => ConvexSet::product(
                parts
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.to_set(&format!("{path}.parts[{i}]")))
                    .collect::<Result<_>>()?,
            )
            .map_err(at)?,
        })
    }

    fn from_set(s: &ConvexSet<f64>) -> Self {
        match s {
            ConvexSet::Zeros(dim) => Self::Zeros { dim: *dim },
            ConvexSet::NonnegOrthant(dim) => Self::Nonneg { dim: *dim },
            ConvexSet::Reals(dim) => Self::Reals { dim: *dim },
            ConvexSet::Soc { dim, slope } => Self::Soc {
                dim: *dim,
                slope: *slope,
            },
            ConvexSet::Ball { center, radius } => Self::Ball {
                center: center.clone(),
                radius: *radius,
            },
            ConvexSet::Box { lower, upper } => Self::Box {
                lower: lower.iter().map(|&x| finite_or_null(x)).collect(),
                upper: upper.iter().map(|&x| finite_or_null(x)).collect(),
            },
            ConvexSet::Singleton(point) => Self::Singleton { point: point.clone() },
            ConvexSet::Translate { base, offset } => Self::Translate {
                base: Box::new(Self::from_set(base)),
                offset: offset.clone(),
            },
            ConvexSet::Product(parts) => Self::Product {
                parts: parts.iter().map(Self::from_set).collect(),
            },
            ConvexSet::Intersection(members) => Self::Intersection {
                members: members.iter().map(Self::from_set).collect(),
            },
        }
    }
}
