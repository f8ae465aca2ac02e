use crate::error::{check_len, Error, Result};
use crate::linalg::{LinearMap, SparseMatrix};
use crate::scalar::{vecops, Scalar};
use crate::sets::{Cone, ConvexSet};

/// `minimize ½ zᵀPz + qᵀz  subject to  Hz − g ∈ K, z ∈ D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem<T> {
    p: SparseMatrix<T>,
    q: Vec<T>,
    h: SparseMatrix<T>,
    g: Vec<T>,
    k: Cone<T>,
    d: ConvexSet<T>,
}

impl<T: Scalar> ConicProblem<T> {
    /// Validates dimensions, finiteness and the symmetry of `P`.
    pub fn new(
        p: SparseMatrix<T>,
        q: Vec<T>,
        h: SparseMatrix<T>,
        g: Vec<T>,
        k: Cone<T>,
        d: ConvexSet<T>,
    ) -> Result<Self> {
        let n = q.len();
        let m = g.len();
        check_len("P rows", n, p.rows())?;
        check_len("P columns", n, p.cols())?;
        check_len("H rows", m, h.rows())?;
        check_len("H columns", n, h.cols())?;
        check_len("cone dimension", m, k.dim())?;
        check_len("set dimension", n, d.dim())?;
        d.validate()?;
        if !vecops::all_finite(&q) || !vecops::all_finite(&g) {
            return Err(Error::InvalidInput("q and g must be finite".into()));
        }
        if !p.is_symmetric(T::lit(1e-12)) {
            return Err(Error::InvalidMatrix("P must be symmetric".into()));
        }
        Ok(Self { p, q, h, g, k, d })
    }

    /// Variable dimension `n`.
    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Constraint dimension `m`.
    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn p(&self) -> &SparseMatrix<T> {
        &self.p
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn h(&self) -> &SparseMatrix<T> {
        &self.h
    }

    pub fn g(&self) -> &[T] {
        &self.g
    }

    pub fn cone(&self) -> &Cone<T> {
        &self.k
    }

    pub fn set(&self) -> &ConvexSet<T> {
        &self.d
    }

    /// `½ zᵀPz + qᵀz`
    pub fn objective(&self, z: &[T]) -> T {
        let mut pz = vec![T::zero(); self.n()];
        self.p.apply_into(z, &mut pz);
        T::lit(0.5) * vecops::dot(z, &pz) + vecops::dot(&self.q, z)
    }

    /// Same problem with a replaced set `D`.
    pub fn with_set(&self, d: ConvexSet<T>) -> Result<Self> {
        Self::new(
            self.p.clone(),
            self.q.clone(),
            self.h.clone(),
            self.g.clone(),
            self.k.clone(),
            d,
        )
    }
}
