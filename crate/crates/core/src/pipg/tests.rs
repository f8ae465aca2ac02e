use std::cell::Cell;

use super::*;
use crate::certificates::{check_dual_certificate, check_primal_certificate};
use crate::linalg::{LinearMap, SparseMatrix};
use crate::scalar::vecops;
use crate::sets::{Cone, ConvexSet};

fn primal_toy() -> ConicProblem<f64> {
    ConicProblem::new(
        SparseMatrix::zeros(1, 1),
        vec![0.0],
        SparseMatrix::identity(1),
        vec![1.0],
        Cone::new(ConvexSet::nonneg(1)).unwrap(),
        ConvexSet::boxed(vec![f64::NEG_INFINITY], vec![0.0]).unwrap(),
    )
    .unwrap()
}

fn dual_toy() -> ConicProblem<f64> {
    ConicProblem::new(
        SparseMatrix::zeros(1, 1),
        vec![1.0],
        SparseMatrix::zeros(1, 1),
        vec![0.0],
        Cone::new(ConvexSet::zeros(1)).unwrap(),
        ConvexSet::reals(1),
    )
    .unwrap()
}

/// A small problem with every kind of block: a PSD `P`, a mixed cone and a
/// bounded set.
fn mixed_problem() -> ConicProblem<f64> {
    let p = SparseMatrix::from_dense(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let h = SparseMatrix::from_dense(
        4,
        3,
        &[1.0, 0.0, 1.0, 0.0, 1.0, -1.0, 1.0, 1.0, 0.0, 0.5, 0.0, 2.0],
    )
    .unwrap();
    let k = ConvexSet::product(vec![ConvexSet::nonneg(1), ConvexSet::soc(3, 1.0).unwrap()]).unwrap();
    let d = ConvexSet::product(vec![
        ConvexSet::ball(vec![0.0, 0.0], 3.0).unwrap(),
        ConvexSet::interval(-1.0, 2.0).unwrap(),
    ])
    .unwrap();
    ConicProblem::new(p, vec![1.0, -1.0, 0.5], h, vec![0.2, -0.1, 0.3, 0.0], Cone::new(k).unwrap(), d)
        .unwrap()
}

#[test]
fn zero_problem_stays_at_zero() {
    let prob = ConicProblem::new(
        SparseMatrix::zeros(2, 2),
        vec![0.0; 2],
        SparseMatrix::zeros(2, 2),
        vec![0.0; 2],
        Cone::new(ConvexSet::nonneg(2)).unwrap(),
        ConvexSet::reals(2),
    )
    .unwrap();
    let mut st = IterateState::zeros(&prob);
    for _ in 0..10 {
        st.step(&prob, 0.5).unwrap();
        assert!(st.z().iter().chain(st.v()).chain(st.w()).all(|&x| x == 0.0));
    }
}

#[test]
fn dual_toy_recursion_matches_hand_iteration() {
    let prob = dual_toy();
    let alpha = 0.4;
    let mut st = IterateState::zeros(&prob);
    for j in 1..=20 {
        st.step(&prob, alpha).unwrap();
        assert!((st.z()[0] + alpha * j as f64).abs() < 1e-12);
        assert_eq!(st.w()[0], 0.0);
    }
    let z_bar = st.z_diff();
    assert!((z_bar[0] + alpha).abs() < 1e-12);
    // ⟨q, z̄⟩ = −‖z̄‖²/α
    assert!((z_bar[0] + z_bar[0] * z_bar[0] / alpha).abs() < 1e-12);
}

#[test]
fn primal_toy_recursion_matches_hand_iteration() {
    let prob = primal_toy();
    let alpha = 0.5;
    let mut st = IterateState::zeros(&prob);
    for j in 1..=20 {
        st.step(&prob, alpha).unwrap();
        assert!((st.w()[0] + alpha * j as f64).abs() < 1e-12);
        assert_eq!(st.z()[0], 0.0);
    }
    let rep = check_primal_certificate(&prob, &st.w_diff(), 1e-6, Some(alpha)).unwrap();
    assert!(rep.accepted);
    assert!((rep.margin - alpha).abs() < 1e-12);
    assert!(rep.identity_gap.unwrap() < 1e-12);
}

#[test]
fn solver_classifies_toys() {
    let cfg = SolverConfig {
        max_iters: 1000,
        ..SolverConfig::default()
    };
    let out = pipg_solve(&dual_toy(), &cfg).unwrap();
    assert_eq!(out.status, SolveStatus::DualInfeasible);
    let alpha = out.diagnostics.step.alpha;
    assert!((alpha - compute_step_size(0.9, 0.0, 1.0).unwrap()).abs() < 1e-15);
    assert!((out.z_bar[0] + alpha).abs() < 1e-6);
    let rep = check_dual_certificate(&dual_toy(), &out.z_bar, 1e-6, Some(alpha)).unwrap();
    assert!(rep.accepted && rep.identity_gap.unwrap() <= 1e-6);

    let out = pipg_solve(&primal_toy(), &cfg).unwrap();
    assert_eq!(out.status, SolveStatus::PrimalInfeasible);
    assert!(!out.diagnostics.ambiguous);
    let alpha = out.diagnostics.step.alpha;
    assert!((out.w_bar[0] + alpha).abs() < 1e-6);
}

#[test]
fn feasible_problem_exits_early_with_small_residuals() {
    // minimize ½z² s.t. z ≥ 1.
    let prob = ConicProblem::new(
        SparseMatrix::identity(1),
        vec![0.0],
        SparseMatrix::identity(1),
        vec![1.0],
        Cone::new(ConvexSet::nonneg(1)).unwrap(),
        ConvexSet::reals(1),
    )
    .unwrap();
    let out = pipg_solve(&prob, &SolverConfig::<f64>::default()).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert!(out.diagnostics.early_exit);
    assert!((out.z[0] - 1.0).abs() < 1e-7);
    assert!((out.w[0] + 1.0).abs() < 1e-7);
    let last = out.history.last().unwrap();
    assert_eq!(last.iteration, out.iterations);
    assert!(last.fp_residual_primal < 1e-7 && last.fp_residual_dual < 1e-7);
}

#[test]
fn classification_branch_order() {
    assert_eq!(classify(0.0, 0.0, 1e-9), (SolveStatus::Optimal, false));
    assert_eq!(classify(1.0, 1.0, 1e-9), (SolveStatus::PrimalInfeasible, true));
    assert_eq!(classify(0.0, 1.0, 1e-9), (SolveStatus::PrimalInfeasible, false));
    assert_eq!(classify(1.0, 0.0, 1e-9), (SolveStatus::DualInfeasible, false));
}

#[test]
fn one_iteration_cap_reports_max_iterations() {
    let cfg = SolverConfig {
        max_iters: 2,
        ..SolverConfig::default()
    };
    let out = pipg_solve(&dual_toy(), &cfg).unwrap();
    assert_eq!(out.iterations, 1);
    assert_eq!(out.status, SolveStatus::MaxIterations);
}

#[test]
fn history_stride_and_monotone_iterations() {
    let cfg = SolverConfig {
        max_iters: 101,
        history_stride: 7,
        ..SolverConfig::default()
    };
    let out = pipg_solve(&mixed_problem(), &cfg).unwrap();
    let iters: Vec<usize> = out.history.iter().map(|r| r.iteration).collect();
    assert!(iters.windows(2).all(|w| w[0] < w[1]));
    assert!(iters.iter().all(|&i| i % 7 == 0 || i == out.iterations));
    assert!(out
        .history
        .iter()
        .all(|r| r.norm_dz >= 0.0 && r.norm_dw >= 0.0 && r.fp_residual_primal >= 0.0));
}

struct CountingMap<'a> {
    inner: &'a SparseMatrix<f64>,
    forward: Cell<usize>,
    adjoint: Cell<usize>,
}

impl<'a> CountingMap<'a> {
    fn new(inner: &'a SparseMatrix<f64>) -> Self {
        Self {
            inner,
            forward: Cell::new(0),
            adjoint: Cell::new(0),
        }
    }
}

impl LinearMap<f64> for CountingMap<'_> {
    fn nrows(&self) -> usize {
        self.inner.rows()
    }

    fn ncols(&self) -> usize {
        self.inner.cols()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.forward.set(self.forward.get() + 1);
        self.inner.apply_into(x, y);
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        self.adjoint.set(self.adjoint.get() + 1);
        self.inner.apply_transpose_into(x, y);
    }
}

#[test]
fn each_step_uses_three_h_products_and_one_p_product() {
    let prob = mixed_problem();
    let p = CountingMap::new(prob.p());
    let h = CountingMap::new(prob.h());
    let mut st = IterateState::zeros(&prob);
    let steps = 25;
    for _ in 0..steps {
        st.step_with(&p, &h, &prob, 0.1).unwrap();
    }
    assert_eq!(h.forward.get(), 2 * steps);
    assert_eq!(h.adjoint.get(), steps);
    assert_eq!(p.forward.get() + p.adjoint.get(), steps);

    let mut plain = IterateState::zeros(&prob);
    for _ in 0..steps {
        plain.step(&prob, 0.1).unwrap();
    }
    assert_eq!(plain.z(), st.z());
    assert_eq!(plain.w(), st.w());
}

#[test]
fn difference_norms_are_nonincreasing() {
    let prob = mixed_problem();
    let cfg = SolverConfig::default();
    let alpha = cfg.resolve_step(&prob).unwrap().alpha;
    let mut st = IterateState::zeros(&prob);
    let mut prev = f64::INFINITY;
    for _ in 0..500 {
        let (z0, v0) = (st.z().to_vec(), st.v().to_vec());
        st.step(&prob, alpha).unwrap();
        let d = (vecops::dist(st.z(), &z0).powi(2) + vecops::dist(st.v(), &v0).powi(2)).sqrt();
        assert!(d <= prev + 1e-10, "{d} > {prev}");
        prev = d;
    }
}

#[test]
fn iterates_stay_in_their_sets() {
    let prob = mixed_problem();
    let mut st = IterateState::zeros(&prob);
    for _ in 0..50 {
        st.step(&prob, 0.2).unwrap();
        let polar = prob.cone().project_polar(st.w()).unwrap();
        assert!(vecops::dist(&polar, st.w()) <= 1e-9);
        assert!(prob.set().contains(st.z(), 1e-12).unwrap());
    }
}

#[test]
fn warm_start_dimensions_are_checked() {
    let cfg = SolverConfig::default();
    assert!(pipg_solve_from(&dual_toy(), &cfg, &[0.0, 0.0], &[0.0]).is_err());
    assert!(pipg_solve_from(&dual_toy(), &cfg, &[0.0], &[]).is_err());
}

#[test]
fn alpha_override_must_be_admissible() {
    let cfg = SolverConfig {
        alpha: Some(10.0),
        ..SolverConfig::default()
    };
    assert!(pipg_solve(&primal_toy(), &cfg).is_err());
    let cfg = SolverConfig {
        alpha: Some(0.1),
        max_iters: 50,
        ..SolverConfig::default()
    };
    assert_eq!(pipg_solve(&primal_toy(), &cfg).unwrap().diagnostics.step.alpha, 0.1);
}

#[test]
fn f32_solver_runs() {
    use crate::f32 as s;
    let prob: s::ConicProblem = ConicProblem::new(
        SparseMatrix::identity(1),
        vec![0.0f32],
        SparseMatrix::identity(1),
        vec![1.0f32],
        Cone::new(ConvexSet::nonneg(1)).unwrap(),
        ConvexSet::reals(1),
    )
    .unwrap();
    let cfg = s::SolverConfig {
        epsilon: 1e-5,
        ..Default::default()
    };
    let out = pipg_solve(&prob, &cfg).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert!((out.z[0] - 1.0).abs() < 1e-3);
}

#[test]
fn step_normal_cone_elements_are_members() {
    let prob = mixed_problem();
    let alpha = 0.2;
    let mut st = IterateState::zeros(&prob);
    let mut zs = vec![st.z().to_vec()];
    for j in 1..=40 {
        st.step(&prob, alpha).unwrap();
        zs.push(st.z().to_vec());
        if j >= 3 {
            let (rz, rw) = normal_cone_residuals(
                &prob,
                alpha,
                &zs[j - 2],
                st.z_prev(),
                st.z(),
                st.w_prev(),
                st.w(),
            )
            .unwrap();
            assert!(rz <= 1e-12 && rw <= 1e-12, "{j}: {rz} {rw}");
        }
    }
    // A wrong step size breaks the identity.
    let (rz, _) =
        normal_cone_residuals(&prob, 0.3, &zs[38], st.z_prev(), st.z(), st.w_prev(), st.w()).unwrap();
    assert!(rz > 1e-6);
}
