use super::ConvexSet;
use crate::error::{check_len, Error, Result};
use crate::scalar::{vecops, Scalar};

/// Stopping rule for Dykstra's alternating projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraSettings {
    /// Sweep-to-sweep change below which the iteration stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for DykstraSettings {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 10_000,
        }
    }
}

/// Projects `x` onto the intersection of `members` with Dykstra's algorithm.
///
/// Iterates full sweeps over the members until neither the iterate nor the
/// correction increments move more than `tol · max(1, ‖x‖)` in one sweep.
/// The iterate alone can stall for a sweep while the increments are still
/// changing, so both are tested. Fails with the best iterate attached if
/// `max_iters` sweeps are not enough.
pub fn dykstra_project<T: Scalar>(
    members: &[ConvexSet<T>],
    x: &[T],
    tol: f64,
    max_iters: usize,
) -> Result<Vec<T>> {
    let first = members
        .first()
        .ok_or_else(|| Error::InvalidSet("intersection needs at least one member".into()))?;
    let n = first.dim();
    check_len("Dykstra input", n, x.len())?;
    for m in members {
        check_len("Dykstra member", n, m.dim())?;
    }
    let tol = T::lit(tol);
    let mut cur = x.to_vec();
    let mut increments = vec![vec![T::zero(); n]; members.len()];
    let mut prev = cur.clone();
    let mut buf = vec![T::zero(); n];
    let mut change = T::infinity();

    for _ in 0..max_iters {
        prev.copy_from_slice(&cur);
        let mut inc_change = T::zero();
        for (set, inc) in members.iter().zip(increments.iter_mut()) {
            for i in 0..n {
                buf[i] = cur[i] + inc[i];
            }
            let shifted = buf.clone();
            set.project_in_place(&mut buf)?;
            for i in 0..n {
                let d = shifted[i] - buf[i];
                inc_change += (d - inc[i]) * (d - inc[i]);
                inc[i] = d;
            }
            cur.copy_from_slice(&buf);
        }
        change = vecops::dist(&cur, &prev).max(inc_change.sqrt());
        if change <= tol * vecops::norm(&cur).max(T::one()) {
            return Ok(cur);
        }
    }
    Err(Error::DykstraNotConverged {
        iterations: max_iters,
        residual: change.as_f64(),
        best: cur.iter().map(|v| v.as_f64()).collect(),
    })
}
