//! Closed convex sets and cones with Euclidean projections.
//!
//! [`ConvexSet`] is a recursive descriptor. Every variant supports
//! projection, a support function and a recession-cone membership test.
//! Sets that are cones can be wrapped in [`Cone`], which additionally
//! provides projection onto the polar cone through the Moreau decomposition
//! `x = π_K[x] + π_{K°}[x]`.

mod dykstra;

pub use dykstra::{dykstra_project, DykstraSettings};

use crate::error::{check_len, Error, Result};
use crate::scalar::{vecops, Scalar};

/// Nonempty closed convex subset of `ℝⁿ`.
///
/// Build values through the checked constructors ([`ConvexSet::soc`],
/// [`ConvexSet::ball`], ...) or call [`ConvexSet::validate`] after building a
/// variant by hand.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet<T> {
    /// The single point `{0}`.
    Zeros(usize),
    NonnegOrthant(usize),
    Reals(usize),
    /// `{x : ‖x[..dim-1]‖ ≤ slope · x[dim-1]}`; the axis is the last coordinate.
    Soc { dim: usize, slope: T },
    Ball { center: Vec<T>, radius: T },
    /// Coordinatewise bounds; infinite bounds are allowed.
    Box { lower: Vec<T>, upper: Vec<T> },
    Singleton(Vec<T>),
    /// `{offset + y : y ∈ base}`
    Translate { base: Box<ConvexSet<T>>, offset: Vec<T> },
    Product(Vec<ConvexSet<T>>),
    Intersection(Vec<ConvexSet<T>>),
}

impl<T: Scalar> ConvexSet<T> {
    pub fn zeros(dim: usize) -> Self {
        Self::Zeros(dim)
    }

    pub fn nonneg(dim: usize) -> Self {
        Self::NonnegOrthant(dim)
    }

    pub fn reals(dim: usize) -> Self {
        Self::Reals(dim)
    }

    pub fn soc(dim: usize, slope: T) -> Result<Self> {
        let s = Self::Soc { dim, slope };
        s.validate()?;
        Ok(s)
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        let s = Self::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn boxed(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let s = Self::Box { lower, upper };
        s.validate()?;
        Ok(s)
    }

    /// One-dimensional box `[lo, hi]`.
    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::boxed(vec![lo], vec![hi])
    }

    pub fn singleton(point: Vec<T>) -> Result<Self> {
        let s = Self::Singleton(point);
        s.validate()?;
        Ok(s)
    }

    pub fn translate(base: ConvexSet<T>, offset: Vec<T>) -> Result<Self> {
        let s = Self::Translate {
            base: Box::new(base),
            offset,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn product(parts: Vec<ConvexSet<T>>) -> Result<Self> {
        let s = Self::Product(parts);
        s.validate()?;
        Ok(s)
    }

    pub fn intersection(members: Vec<ConvexSet<T>>) -> Result<Self> {
        let s = Self::Intersection(members);
        s.validate()?;
        Ok(s)
    }

    /// Checks the per-variant invariants recursively.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        match self {
            Self::Zeros(_) | Self::NonnegOrthant(_) | Self::Reals(_) => Ok(()),
            Self::Soc { dim, slope } => {
                if *dim == 0 {
                    Err(Error::InvalidSet("second-order cone needs dimension >= 1".into()))
                } else if !(*slope > T::zero()) || !slope.is_finite() {
                    Err(Error::InvalidSet(format!(
                        "second-order cone slope must be positive and finite, got {slope}"
                    )))
                } else {
                    Ok(())
                }
            }
            Self::Ball { center, radius } => {
                if !finite(center) {
                    Err(Error::InvalidSet("ball center must be finite".into()))
                } else if !(*radius >= T::zero()) || !radius.is_finite() {
                    Err(Error::InvalidSet(format!("ball radius must be >= 0, got {radius}")))
                } else {
                    Ok(())
                }
            }
            Self::Box { lower, upper } => {
                check_len("box bounds", lower.len(), upper.len())?;
                for (i, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                    if lo.is_nan() || hi.is_nan() || !(lo <= hi) {
                        return Err(Error::InvalidSet(format!(
                            "box coordinate {i} has lower {lo} > upper {hi}"
                        )));
                    }
                    if *lo == T::infinity() || *hi == T::neg_infinity() {
                        return Err(Error::InvalidSet(format!("box coordinate {i} is empty")));
                    }
                }
                Ok(())
            }
            Self::Singleton(p) => {
                if finite(p) {
                    Ok(())
                } else {
                    Err(Error::InvalidSet("singleton point must be finite".into()))
                }
            }
            Self::Translate { base, offset } => {
                base.validate()?;
                check_len("translation offset", base.dim(), offset.len())?;
                if finite(offset) {
                    Ok(())
                } else {
                    Err(Error::InvalidSet("translation offset must be finite".into()))
                }
            }
            Self::Product(parts) => parts.iter().try_for_each(|p| p.validate()),
            Self::Intersection(members) => {
                let first = members.first().ok_or_else(|| {
                    Error::InvalidSet("intersection needs at least one member".into())
                })?;
                for m in members {
                    m.validate()?;
                    check_len("intersection member", first.dim(), m.dim())?;
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zeros(n) | Self::NonnegOrthant(n) | Self::Reals(n) => *n,
            Self::Soc { dim, .. } => *dim,
            Self::Ball { center, .. } => center.len(),
            Self::Box { lower, .. } => lower.len(),
            Self::Singleton(p) => p.len(),
            Self::Translate { offset, .. } => offset.len(),
            Self::Product(parts) => parts.iter().map(Self::dim).sum(),
            Self::Intersection(members) => members.first().map_or(0, Self::dim),
        }
    }

    /// True for the variants that carry the cone marker: zeros, orthant,
    /// reals, second-order cones and products of those.
    pub fn is_cone(&self) -> bool {
        match self {
            Self::Zeros(_) | Self::NonnegOrthant(_) | Self::Reals(_) | Self::Soc { .. } => true,
            Self::Product(parts) => parts.iter().all(Self::is_cone),
            _ => false,
        }
    }

    /// Euclidean projection of `x`.
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        let mut out = x.to_vec();
        self.project_in_place(&mut out)?;
        Ok(out)
    }

    /// Projects `x` in place using the default Dykstra settings for intersections.
    pub fn project_in_place(&self, x: &mut [T]) -> Result<()> {
        self.project_in_place_with(x, &DykstraSettings::default())
    }

    pub fn project_in_place_with(&self, x: &mut [T], dykstra: &DykstraSettings) -> Result<()> {
        check_len("projection input", self.dim(), x.len())?;
        self.project_unchecked(x, dykstra)
    }

    fn project_unchecked(&self, x: &mut [T], dykstra: &DykstraSettings) -> Result<()> {
        match self {
            Self::Zeros(_) => x.iter_mut().for_each(|v| *v = T::zero()),
            Self::NonnegOrthant(_) => x.iter_mut().for_each(|v| *v = v.max(T::zero())),
            Self::Reals(_) => {}
            Self::Soc { slope, .. } => project_soc(*slope, x),
            Self::Ball { center, radius } => project_ball(center, *radius, x),
            Self::Box { lower, upper } => {
                for ((v, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
                    if *v < lo {
                        *v = lo;
                    } else if *v > hi {
                        *v = hi;
                    }
                }
            }
            Self::Singleton(p) => x.copy_from_slice(p),
            Self::Translate { base, offset } => {
                for (v, &o) in x.iter_mut().zip(offset) {
                    *v -= o;
                }
                base.project_unchecked(x, dykstra)?;
                for (v, &o) in x.iter_mut().zip(offset) {
                    *v += o;
                }
            }
            Self::Product(parts) => {
                let mut start = 0;
                for p in parts {
                    let end = start + p.dim();
                    p.project_unchecked(&mut x[start..end], dykstra)?;
                    start = end;
                }
            }
            Self::Intersection(members) => {
                if let Some((slope, radius)) = cone_ball_pair(members) {
                    // Exact: the ball is centered at the cone apex.
                    project_soc(slope, x);
                    project_ball_at_origin(radius, x);
                } else if members.len() == 1 {
                    members[0].project_unchecked(x, dykstra)?;
                } else {
                    let y = dykstra_project(members, x, dykstra.tol, dykstra.max_iters)?;
                    x.copy_from_slice(&y);
                }
            }
        }
        Ok(())
    }

    /// Distance from `x` to the set.
    pub fn distance(&self, x: &[T]) -> Result<T> {
        let p = self.project(x)?;
        Ok(vecops::dist(&p, x))
    }

    /// Membership up to `tol` in Euclidean distance.
    pub fn contains(&self, x: &[T], tol: T) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// Support function `σ(d) = sup_{y ∈ S} ⟨y, d⟩`, possibly `+∞`.
    ///
    /// Cone components are treated as containing `d` in their polar when
    /// `‖π_K[d]‖ ≤ 1e-12 · max(1, ‖d‖)`; see [`ConvexSet::support_with_tol`].
    pub fn support(&self, d: &[T]) -> Result<T> {
        self.support_with_tol(d, T::lit(1e-12))
    }

    /// Support function with an explicit relative tolerance for deciding
    /// whether the cone components of `d` lie in the polar cone.
    pub fn support_with_tol(&self, d: &[T], polar_tol: T) -> Result<T> {
        check_len("support direction", self.dim(), d.len())?;
        self.support_unchecked(d, polar_tol)
    }

    fn support_unchecked(&self, d: &[T], polar_tol: T) -> Result<T> {
        let inf = T::infinity();
        let cone_support = |s: &Self| -> Result<T> {
            let mut p = d.to_vec();
            s.project_unchecked(&mut p, &DykstraSettings::default())?;
            let scale = vecops::norm(d).max(T::one());
            Ok(if vecops::norm(&p) <= polar_tol * scale {
                T::zero()
            } else {
                inf
            })
        };
        Ok(match self {
            Self::Zeros(_) => T::zero(),
            Self::Reals(_) | Self::NonnegOrthant(_) | Self::Soc { .. } => cone_support(self)?,
            Self::Ball { center, radius } => vecops::dot(center, d) + *radius * vecops::norm(d),
            Self::Box { lower, upper } => {
                let mut s = T::zero();
                for ((&di, &lo), &hi) in d.iter().zip(lower).zip(upper) {
                    if di > T::zero() {
                        s += di * hi;
                    } else if di < T::zero() {
                        s += di * lo;
                    }
                }
                s
            }
            Self::Singleton(p) => vecops::dot(p, d),
            Self::Translate { base, offset } => {
                vecops::dot(offset, d) + base.support_unchecked(d, polar_tol)?
            }
            Self::Product(parts) => {
                let mut start = 0;
                let mut s = T::zero();
                for p in parts {
                    let end = start + p.dim();
                    s += p.support_unchecked(&d[start..end], polar_tol)?;
                    start = end;
                }
                s
            }
            Self::Intersection(members) => {
                if let Some((slope, radius)) = cone_ball_pair(members) {
                    // sup over C ∩ B(0, r) of ⟨y, d⟩ is r‖π_C[d]‖.
                    let mut p = d.to_vec();
                    project_soc(slope, &mut p);
                    radius * vecops::norm(&p)
                } else if members.len() == 1 {
                    members[0].support_unchecked(d, polar_tol)?
                } else {
                    self.support_by_ascent(d, SUPPORT_ASCENT_ITERS)?
                }
            }
        })
    }

    /// Projected-gradient ascent on `⟨y, d⟩` over the set. Only meaningful for
    /// bounded sets; unbounded intersections are rejected.
    pub fn support_by_ascent(&self, d: &[T], iters: usize) -> Result<T> {
        check_len("support direction", self.dim(), d.len())?;
        if !self.is_bounded() {
            return Err(Error::InvalidInput(
                "support by ascent requires a bounded set".into(),
            ));
        }
        let nd = vecops::norm(d);
        if nd == T::zero() {
            return Ok(T::zero());
        }
        let step = T::one() / nd;
        let mut y = vec![T::zero(); d.len()];
        self.project_in_place(&mut y)?;
        for _ in 0..iters {
            vecops::axpy(step, d, &mut y);
            self.project_in_place(&mut y)?;
        }
        Ok(vecops::dot(&y, d))
    }

    /// Conservative boundedness test (true only when provably bounded).
    pub fn is_bounded(&self) -> bool {
        match self {
            Self::Zeros(_) | Self::Ball { .. } | Self::Singleton(_) => true,
            Self::Reals(n) | Self::NonnegOrthant(n) | Self::Soc { dim: n, .. } => *n == 0,
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .all(|(l, u)| l.is_finite() && u.is_finite()),
            Self::Translate { base, .. } => base.is_bounded(),
            Self::Product(parts) => parts.iter().all(Self::is_bounded),
            Self::Intersection(members) => members.iter().any(Self::is_bounded),
        }
    }

    /// Distance from `d` to the recession cone, computed structurally.
    ///
    /// For intersections this is the largest distance to any member's
    /// recession cone.
    pub fn recession_distance(&self, d: &[T]) -> Result<T> {
        check_len("recession direction", self.dim(), d.len())?;
        Ok(self.recession_distance_unchecked(d))
    }

    fn recession_distance_unchecked(&self, d: &[T]) -> T {
        match self {
            Self::Reals(_) => T::zero(),
            Self::Zeros(_) | Self::Ball { .. } | Self::Singleton(_) => vecops::norm(d),
            Self::NonnegOrthant(_) | Self::Soc { .. } => {
                let mut p = d.to_vec();
                // Cone projections never fail.
                let _ = self.project_unchecked(&mut p, &DykstraSettings::default());
                vecops::dist(&p, d)
            }
            Self::Box { lower, upper } => d
                .iter()
                .zip(lower)
                .zip(upper)
                .fold(T::zero(), |acc, ((&di, lo), hi)| {
                    let lo_free = lo.is_infinite();
                    let hi_free = hi.is_infinite();
                    let excess = match (lo_free, hi_free) {
                        (true, true) => T::zero(),
                        (false, true) => (-di).max(T::zero()),
                        (true, false) => di.max(T::zero()),
                        (false, false) => di.abs(),
                    };
                    acc + excess * excess
                })
                .sqrt(),
            Self::Translate { base, .. } => base.recession_distance_unchecked(d),
            Self::Product(parts) => {
                let mut start = 0;
                let mut s = T::zero();
                for p in parts {
                    let end = start + p.dim();
                    let r = p.recession_distance_unchecked(&d[start..end]);
                    s += r * r;
                    start = end;
                }
                s.sqrt()
            }
            Self::Intersection(members) => members
                .iter()
                .map(|m| m.recession_distance_unchecked(d))
                .fold(T::zero(), T::max),
        }
    }

    /// `d ∈ rec S` up to `tol`.
    pub fn recession_contains(&self, d: &[T], tol: T) -> Result<bool> {
        Ok(self.recession_distance(d)? <= tol)
    }

    /// Projection onto the polar cone. Fails unless the set is a cone.
    pub fn project_polar(&self, x: &[T]) -> Result<Vec<T>> {
        if !self.is_cone() {
            return Err(Error::NotACone(format!("{:?}", self.kind())));
        }
        check_len("polar projection input", self.dim(), x.len())?;
        let mut out = x.to_vec();
        project_polar_cone(self, &mut out);
        Ok(out)
    }

    /// Short name of the variant, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Zeros(_) => "zeros",
            Self::NonnegOrthant(_) => "nonneg",
            Self::Reals(_) => "reals",
            Self::Soc { .. } => "soc",
            Self::Ball { .. } => "ball",
            Self::Box { .. } => "box",
            Self::Singleton(_) => "singleton",
            Self::Translate { .. } => "translate",
            Self::Product(_) => "product",
            Self::Intersection(_) => "intersection",
        }
    }
}

const SUPPORT_ASCENT_ITERS: usize = 2_000;

/// A [`ConvexSet`] known to be a closed convex cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone<T>(ConvexSet<T>);

impl<T: Scalar> Cone<T> {
    pub fn new(set: ConvexSet<T>) -> Result<Self> {
        set.validate()?;
        if set.is_cone() {
            Ok(Self(set))
        } else {
            Err(Error::NotACone(set.kind().into()))
        }
    }

    pub fn as_set(&self) -> &ConvexSet<T> {
        &self.0
    }

    pub fn into_set(self) -> ConvexSet<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn project_in_place(&self, x: &mut [T]) {
        debug_assert_eq!(x.len(), self.dim());
        // Cone variants never reach Dykstra.
        let _ = self.0.project_unchecked(x, &DykstraSettings::default());
    }

    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        self.0.project(x)
    }

    /// `π_{K°}[x]` in place.
    pub fn project_polar_in_place(&self, x: &mut [T]) {
        debug_assert_eq!(x.len(), self.dim());
        project_polar_cone(&self.0, x);
    }

    pub fn project_polar(&self, x: &[T]) -> Result<Vec<T>> {
        self.0.project_polar(x)
    }
}

fn project_polar_cone<T: Scalar>(set: &ConvexSet<T>, x: &mut [T]) {
    match set {
        // Polar of {0} is the whole space.
        ConvexSet::Zeros(_) => {}
        ConvexSet::Reals(_) => x.iter_mut().for_each(|v| *v = T::zero()),
        ConvexSet::NonnegOrthant(_) => x.iter_mut().for_each(|v| *v = v.min(T::zero())),
        ConvexSet::Soc { slope, .. } => {
            let mut p = x.to_vec();
            project_soc(*slope, &mut p);
            for (v, pi) in x.iter_mut().zip(p) {
                *v -= pi;
            }
        }
        ConvexSet::Product(parts) => {
            let mut start = 0;
            for p in parts {
                let end = start + p.dim();
                project_polar_cone(p, &mut x[start..end]);
                start = end;
            }
        }
        _ => unreachable!("polar projection requires a cone"),
    }
}

/// Recognizes `Soc ∩ Ball(0, r)` in either order.
fn cone_ball_pair<T: Scalar>(members: &[ConvexSet<T>]) -> Option<(T, T)> {
    if members.len() != 2 {
        return None;
    }
    let pick = |a: &ConvexSet<T>, b: &ConvexSet<T>| match (a, b) {
        (ConvexSet::Soc { slope, dim }, ConvexSet::Ball { center, radius })
            if *dim >= 1 && center.iter().all(|c| *c == T::zero()) =>
        {
            Some((*slope, *radius))
        }
        _ => None,
    };
    pick(&members[0], &members[1]).or_else(|| pick(&members[1], &members[0]))
}

/// Projection onto `{x : ‖x[..n-1]‖ ≤ s · x[n-1]}`.
pub(crate) fn project_soc<T: Scalar>(slope: T, x: &mut [T]) {
    let n = x.len();
    if n == 0 {
        return;
    }
    let (head, tail) = x.split_at_mut(n - 1);
    let t = tail[0];
    let nu = vecops::norm(head);
    if nu <= slope * t {
        return;
    }
    if slope * nu <= -t {
        head.iter_mut().for_each(|v| *v = T::zero());
        tail[0] = T::zero();
        return;
    }
    let coef = (slope * nu + t) / (T::one() + slope * slope);
    let radial = coef * slope / nu;
    head.iter_mut().for_each(|v| *v *= radial);
    tail[0] = coef;
}

fn project_ball<T: Scalar>(center: &[T], radius: T, x: &mut [T]) {
    let d = vecops::dist(x, center);
    if d <= radius {
        return;
    }
    let s = radius / d;
    for (v, &c) in x.iter_mut().zip(center) {
        *v = c + s * (*v - c);
    }
}

fn project_ball_at_origin<T: Scalar>(radius: T, x: &mut [T]) {
    let d = vecops::norm(x);
    if d > radius {
        let s = radius / d;
        x.iter_mut().for_each(|v| *v *= s);
    }
}
