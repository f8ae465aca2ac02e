//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a nonzero status if any criterion fails.
//!
//! Positional arguments filter criteria by substring of their key.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pipg_core::certificates::{
    averaged_inequality_gap, check_dual_certificate, check_primal_certificate,
};
use pipg_core::drs::drs_solve;
use pipg_core::linalg::{estimate_spectral_norm, LinearMap, PowerIterationConfig, SparseMatrix};
use pipg_core::meta::{classify_feasibility, eliminate_binaries, min_time_bisection, CandidateOrder};
use pipg_core::ocp::{build_corridor_problem, build_landing_problem, CorridorParams, QuadrotorParams};
use pipg_core::pipg::{
    compute_step_size, normal_cone_residuals, pipg_solve, ConicProblem, IterateState, SolveStatus,
    SolverConfig,
};
use pipg_core::sets::{dykstra_project, Cone, ConvexSet};
use pipg_core::vecops;

const LANDING_X0: [f64; 6] = [6.0, 6.0, 15.0, 2.0, 2.0, 2.0];
const LANDING_TAU: usize = 40;
const CORRIDOR_TAU: usize = 22;
const CORRIDOR_X0: [f64; 6] = [1.0, 9.0, 2.5, 0.0, 0.0, 0.0];
const CORRIDOR_XTAU: [f64; 6] = [12.0, -1.0, 0.5, 0.0, 0.0, 0.0];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 9] = [
        ("landing_classification", landing_classification),
        ("landing_bisection", landing_bisection),
        ("corridor_elimination", corridor_elimination),
        ("analytic_identities", analytic_identities),
        ("averaged_operator", averaged_operator),
        ("projection_suites", projection_suites),
        ("spectral_norm", spectral_norm),
        ("normal_cone_membership", normal_cone_membership),
        ("matrix_free_audit", matrix_free_audit),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (key, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| key.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        ran += 1;
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {key} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn quiet() -> SolverConfig<f64> {
    SolverConfig {
        history_stride: 0,
        ..SolverConfig::default()
    }
}

fn landing(i: usize) -> ConicProblem<f64> {
    build_landing_problem(LANDING_TAU, i, &LANDING_X0, &QuadrotorParams::default()).unwrap()
}

fn landing_classification() -> Verdict {
    let cfg = quiet();
    let start = Instant::now();
    let mut got = Vec::new();
    for i in [24, 26] {
        let prob = landing(i);
        let p = pipg_solve(&prob, &cfg).unwrap().status;
        let d = drs_solve(&prob, &cfg).unwrap().status;
        got.push((i, p, d));
    }
    let elapsed = start.elapsed();
    let want = [SolveStatus::PrimalInfeasible, SolveStatus::Optimal];
    let statuses_ok = got.iter().zip(want).all(|(&(_, p, d), w)| p == w && d == w);
    let detail = got
        .iter()
        .map(|(i, p, d)| format!("i={i} pipg={p} drs={d}"))
        .collect::<Vec<_>>()
        .join(", ");
    Verdict::new(
        statuses_ok && elapsed < Duration::from_secs(60),
        format!("{detail}; {:.1}s total (limit 60s)", elapsed.as_secs_f64()),
    )
}

fn landing_bisection() -> Verdict {
    let start = Instant::now();
    let rep = min_time_bisection(
        &LANDING_X0,
        LANDING_TAU,
        &QuadrotorParams::default(),
        &quiet(),
        1,
        LANDING_TAU - 1,
    );
    let elapsed = start.elapsed();
    match rep {
        Ok(rep) => {
            let mut distinct: Vec<usize> = rep.probes.iter().map(|p| p.index).collect();
            distinct.dedup();
            Verdict::new(
                rep.minimum == 25 && elapsed < Duration::from_secs(300),
                format!(
                    "minimum {} (want 25); {} solves on {} instances; {:.1}s (limit 300s)",
                    rep.minimum,
                    rep.solves(),
                    distinct.len(),
                    elapsed.as_secs_f64()
                ),
            )
        }
        Err(e) => Verdict::new(false, format!("bisection failed: {e}")),
    }
}

fn corridor_elimination() -> Verdict {
    let params = QuadrotorParams::default();
    let corridor = CorridorParams::default();
    let start = Instant::now();
    let led = match eliminate_binaries(
        &CORRIDOR_X0,
        &CORRIDOR_XTAU,
        CORRIDOR_TAU,
        &params,
        &corridor,
        &quiet(),
        CandidateOrder::OneFirst,
    ) {
        Ok(l) => l,
        Err(e) => return Verdict::new(false, format!("elimination failed: {e}")),
    };
    let elapsed = start.elapsed();
    let want: BTreeMap<usize, u8> = (1..=7).map(|t| (t, 0)).chain((12..=21).map(|t| (t, 1))).collect();
    let want_free: Vec<usize> = (8..=11).collect();
    let sound = build_corridor_problem(
        CORRIDOR_TAU,
        &led.fixed,
        &CORRIDOR_X0,
        &CORRIDOR_XTAU,
        &params,
        &corridor,
    )
    .and_then(|p| classify_feasibility(&p, &quiet()))
    .map(|v| v.kind);
    let pass = led.fixed == want
        && led.remaining_free == want_free
        && led.solves_used <= 42
        && elapsed < Duration::from_secs(900);
    let zeros: Vec<usize> = led.fixed.iter().filter(|(_, &v)| v == 0).map(|(&t, _)| t).collect();
    let ones: Vec<usize> = led.fixed.iter().filter(|(_, &v)| v == 1).map(|(&t, _)| t).collect();
    Verdict::new(
        pass,
        format!(
            "fixed 0 at {zeros:?}, fixed 1 at {ones:?}, free {:?} (want 0 at 1..=7, 1 at 12..=21, free 8..=11); \
             {} solves (limit 42); all fixes applied -> {}; {:.1}s",
            led.remaining_free,
            led.solves_used,
            sound.map(|k| k.to_string()).unwrap_or_else(|e| e.to_string()),
            elapsed.as_secs_f64()
        ),
    )
}

fn analytic_identities() -> Verdict {
    let cfg = SolverConfig {
        max_iters: 1000,
        ..quiet()
    };
    // Primal: H = 1, g = 1, K = ℝ₊, D = (−∞, 0]; w̄ = −α.
    let primal = ConicProblem::new(
        SparseMatrix::zeros(1, 1),
        vec![0.0],
        SparseMatrix::identity(1),
        vec![1.0],
        Cone::new(ConvexSet::nonneg(1)).unwrap(),
        ConvexSet::boxed(vec![f64::NEG_INFINITY], vec![0.0]).unwrap(),
    )
    .unwrap();
    // Dual: q = 1, H = 0, K = {0}, D = ℝ; z̄ = −αq.
    let q = 1.0;
    let dual = ConicProblem::new(
        SparseMatrix::zeros(1, 1),
        vec![q],
        SparseMatrix::zeros(1, 1),
        vec![0.0],
        Cone::new(ConvexSet::zeros(1)).unwrap(),
        ConvexSet::reals(1),
    )
    .unwrap();

    let op = pipg_solve(&primal, &cfg).unwrap();
    let ap = op.diagnostics.step.alpha;
    let rp = check_primal_certificate(&primal, &op.w_bar, 1e-6, Some(ap)).unwrap();
    let ew = (op.w_bar[0] + ap).abs();
    let gp = rp.identity_gap.unwrap();

    let od = pipg_solve(&dual, &cfg).unwrap();
    let ad = od.diagnostics.step.alpha;
    let rd = check_dual_certificate(&dual, &od.z_bar, 1e-6, Some(ad)).unwrap();
    let ez = (od.z_bar[0] + ad * q).abs();
    let gd = rd.identity_gap.unwrap();

    let pass = op.status == SolveStatus::PrimalInfeasible
        && od.status == SolveStatus::DualInfeasible
        && ew <= 1e-6
        && ez <= 1e-6
        && gp <= 1e-6
        && gd <= 1e-6
        && rp.accepted
        && rd.accepted;
    Verdict::new(
        pass,
        format!(
            "|w̄+α| = {ew:.1e}, |z̄+αq| = {ez:.1e}, gaps {gp:.1e} / {gd:.1e} (limit 1e-6); certificates accepted: {} / {}",
            rp.accepted, rd.accepted
        ),
    )
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows * cols)
        .map(|_| if rng.gen_bool(0.7) { rng.gen_range(-2.0..2.0) } else { 0.0 })
        .collect()
}

/// Random problem with PSD `P`, orthant × SOC cone and box × ball set.
fn random_problem(rng: &mut ChaCha8Rng) -> ConicProblem<f64> {
    let nb = rng.gen_range(1..=3);
    let nr = rng.gen_range(2..=4);
    let n = nb + nr;
    let ma = rng.gen_range(0..=3);
    let ms = rng.gen_range(2..=4);
    let m = ma + ms;

    let r = rng.gen_range(1..=n);
    let b = random_dense(rng, r, n);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (0..r).map(|k| b[k * n + i] * b[k * n + j]).sum();
        }
    }
    let p = SparseMatrix::from_dense(n, n, &p).unwrap();
    let h = SparseMatrix::from_dense(m, n, &random_dense(rng, m, n)).unwrap();

    let mut cone_parts = Vec::new();
    if ma > 0 {
        cone_parts.push(ConvexSet::nonneg(ma));
    }
    cone_parts.push(ConvexSet::soc(ms, rng.gen_range(0.2..3.0)).unwrap());
    let cone = Cone::new(ConvexSet::product(cone_parts).unwrap()).unwrap();

    let lo: Vec<f64> = (0..nb).map(|_| rng.gen_range(-3.0..0.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.1..4.0)).collect();
    let set = ConvexSet::product(vec![
        ConvexSet::boxed(lo, hi).unwrap(),
        ConvexSet::ball(random_vec(rng, nr, 1.0), rng.gen_range(0.5..3.0)).unwrap(),
    ])
    .unwrap();
    ConicProblem::new(p, random_vec(rng, n, 2.0), h, random_vec(rng, m, 2.0), cone, set).unwrap()
}

fn averaged_operator() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let power = PowerIterationConfig::default();
    let mut worst = f64::NEG_INFINITY;
    let samples = 1000;
    for _ in 0..samples {
        let prob = random_problem(&mut rng);
        let lambda: f64 = estimate_spectral_norm(prob.p(), &power).unwrap();
        let nu: f64 = estimate_spectral_norm(prob.h(), &power).unwrap();
        let gamma = rng.gen_range(0.55..0.99);
        let alpha_max = compute_step_size(gamma, lambda, nu).unwrap();
        let alpha = alpha_max * rng.gen_range(0.1..=1.0);
        let (n, m) = (prob.n(), prob.m());
        let z1 = prob.set().project(&random_vec(&mut rng, n, 5.0)).unwrap();
        let v1 = random_vec(&mut rng, m, 5.0);
        // Half the pairs are close together, where the gap approaches zero.
        let spread = if rng.gen_bool(0.5) { 5.0 } else { 1e-3 };
        let z2 = prob.set().project(&vecops::add(&z1, &random_vec(&mut rng, n, spread))).unwrap();
        let v2 = vecops::add(&v1, &random_vec(&mut rng, m, spread));
        let gap = averaged_inequality_gap(&prob, alpha, gamma, (&z1, &v1), (&z2, &v2)).unwrap();
        worst = worst.max(gap);
    }
    Verdict::new(
        worst <= 1e-9,
        format!("largest gap over {samples} samples {worst:.3e} (limit 1e-9)"),
    )
}

fn projection_suites() -> Verdict {
    const CHECKS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();

    let cones: Vec<(&str, ConvexSet<f64>)> = vec![
        ("zeros", ConvexSet::zeros(4)),
        ("nonneg", ConvexSet::nonneg(5)),
        ("soc", ConvexSet::soc(4, 1.0).unwrap()),
        ("soc_steep", ConvexSet::soc(3, 0.3).unwrap()),
        ("soc_wide", ConvexSet::soc(5, 2.5).unwrap()),
        (
            "cone_product",
            ConvexSet::product(vec![
                ConvexSet::zeros(2),
                ConvexSet::nonneg(2),
                ConvexSet::soc(3, 1.0).unwrap(),
            ])
            .unwrap(),
        ),
    ];
    let mut worst_moreau = 0.0f64;
    for (name, k) in &cones {
        let mut worst = 0.0f64;
        for _ in 0..CHECKS {
            let x = random_vec(&mut rng, k.dim(), 10.0);
            let p = k.project(&x).unwrap();
            let q = k.project_polar(&x).unwrap();
            let recon = vecops::dist(&vecops::add(&p, &q), &x);
            let orth = vecops::dot(&p, &q).abs();
            worst = worst.max(recon).max(orth);
        }
        if worst > 1e-10 {
            failures.push(format!("{name} Moreau {worst:.1e}"));
        }
        worst_moreau = worst_moreau.max(worst);
    }

    let soc = ConvexSet::soc(3, 1.0).unwrap();
    let sets: Vec<(&str, ConvexSet<f64>)> = vec![
        ("reals", ConvexSet::reals(3)),
        ("box", ConvexSet::boxed(vec![-1.0, f64::NEG_INFINITY, 0.0], vec![1.0, 2.0, f64::INFINITY]).unwrap()),
        ("interval", ConvexSet::interval(-0.5, 2.0).unwrap()),
        ("ball", ConvexSet::ball(vec![1.0, -1.0, 0.5], 2.0).unwrap()),
        ("singleton", ConvexSet::singleton(vec![0.3, -0.2, 1.0]).unwrap()),
        ("soc", soc.clone()),
        ("translate", ConvexSet::translate(soc.clone(), vec![1.0, 2.0, 3.0]).unwrap()),
        (
            "product",
            ConvexSet::product(vec![ConvexSet::nonneg(1), ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap()])
                .unwrap(),
        ),
        (
            "cone_ball",
            ConvexSet::intersection(vec![soc.clone(), ConvexSet::ball(vec![0.0; 3], 5.0).unwrap()]).unwrap(),
        ),
        (
            "intersection",
            ConvexSet::intersection(vec![
                soc.clone(),
                ConvexSet::ball(vec![0.0; 3], 5.0).unwrap(),
                ConvexSet::boxed(vec![f64::NEG_INFINITY, f64::NEG_INFINITY, 2.0], vec![f64::INFINITY; 3])
                    .unwrap(),
            ])
            .unwrap(),
        ),
    ];
    let mut worst_vi = f64::NEG_INFINITY;
    for (name, s) in &sets {
        let checks = if *name == "intersection" { CHECKS / 10 } else { CHECKS };
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..checks {
            let x = random_vec(&mut rng, s.dim(), 10.0);
            let y = random_vec(&mut rng, s.dim(), 10.0);
            let p = s.project(&x).unwrap();
            let yp = s.project(&y).unwrap();
            // ⟨x − π(x), y′ − π(x)⟩ ≤ 0 for y′ in the set.
            let vi = vecops::dot(&vecops::sub(&x, &p), &vecops::sub(&yp, &p));
            worst = worst.max(vi);
        }
        if worst > 1e-9 {
            failures.push(format!("{name} variational inequality {worst:.1e}"));
        }
        worst_vi = worst_vi.max(worst);
    }

    let members = vec![soc.clone(), ConvexSet::ball(vec![0.0; 3], 5.0).unwrap()];
    let fast = ConvexSet::intersection(members.clone()).unwrap();
    let mut worst_dyk = 0.0f64;
    for _ in 0..CHECKS {
        let x = random_vec(&mut rng, 3, 10.0);
        let a = fast.project(&x).unwrap();
        let b = dykstra_project(&members, &x, 1e-12, 10_000).unwrap();
        worst_dyk = worst_dyk.max(vecops::dist(&a, &b));
    }
    if worst_dyk > 1e-6 {
        failures.push(format!("cone∩ball composition vs Dykstra {worst_dyk:.1e}"));
    }

    Verdict::new(
        failures.is_empty(),
        format!(
            "{} cones, {} sets, {CHECKS} checks each; worst Moreau {worst_moreau:.1e} (1e-10), \
             worst variational {worst_vi:.1e} (1e-9), worst Dykstra gap {worst_dyk:.1e} (1e-6){}",
            cones.len(),
            sets.len(),
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    )
}

fn spectral_norm() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = PowerIterationConfig {
        safety: 1.0,
        ..PowerIterationConfig::default()
    };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (r, c) = (rng.gen_range(1..=50), rng.gen_range(1..=50));
        let dense = random_dense(&mut rng, r, c);
        let a = SparseMatrix::from_dense(r, c, &dense).unwrap();
        let est: f64 = estimate_spectral_norm(&a, &cfg).unwrap();
        let oracle = DMatrix::from_row_slice(r, c, &dense).singular_values().max();
        let rel = if oracle == 0.0 { est } else { (est - oracle).abs() / oracle };
        worst = worst.max(rel);
    }
    Verdict::new(
        worst <= 1e-6,
        format!("worst relative error over 100 matrices {worst:.2e} (limit 1e-6)"),
    )
}

fn normal_cone_membership() -> Verdict {
    let cfg = quiet();
    let mut worst = (0.0f64, 0.0f64);
    let mut samples = 0;
    for (i, steps) in [(26, 20_000), (24, 200_000)] {
        let prob = landing(i);
        let alpha = cfg.resolve_step(&prob).unwrap().alpha;
        let mut st = IterateState::zeros(&prob);
        let mut z_prev2 = st.z().to_vec();
        for j in 1..=steps {
            if j % 1000 == 0 {
                z_prev2.copy_from_slice(st.z_prev());
            }
            st.step(&prob, alpha).unwrap();
            if j % 1000 == 0 {
                let (rz, rw) =
                    normal_cone_residuals(&prob, alpha, &z_prev2, st.z_prev(), st.z(), st.w_prev(), st.w())
                        .unwrap();
                worst = (worst.0.max(rz), worst.1.max(rw));
                samples += 1;
            }
        }
    }
    Verdict::new(
        worst.0 <= 1e-8 && worst.1 <= 1e-8,
        format!(
            "{samples} sampled steps on landing i=26 and i=24; worst relative residuals {:.1e} (set) and {:.1e} (cone), limit 1e-8",
            worst.0, worst.1
        ),
    )
}

struct CountingMap<'a> {
    inner: &'a SparseMatrix<f64>,
    forward: Cell<usize>,
    adjoint: Cell<usize>,
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

fn matrix_free_audit() -> Verdict {
    let prob = landing(26);
    let count = |m| CountingMap {
        inner: m,
        forward: Cell::new(0),
        adjoint: Cell::new(0),
    };
    let (p, h) = (count(prob.p()), count(prob.h()));
    let alpha = quiet().resolve_step(&prob).unwrap().alpha;
    let mut st = IterateState::zeros(&prob);
    let steps = 500;
    for _ in 0..steps {
        st.step_with(&p, &h, &prob, alpha).unwrap();
    }
    let h_calls = h.forward.get() + h.adjoint.get();
    let p_calls = p.forward.get() + p.adjoint.get();
    let counts_ok = h_calls == 3 * steps && p_calls == steps;

    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/src/pipg");
    let mut offending = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        for banned in ["cholesky", "Cholesky", "DenseMatrix", "factor_spd", "drs::"] {
            if text.contains(banned) {
                offending.push(format!("{} mentions {banned}", path.file_name().unwrap().to_string_lossy()));
            }
        }
    }
    Verdict::new(
        counts_ok && offending.is_empty(),
        format!(
            "{steps} steps: {h_calls} H/Hᵀ products (want {}), {p_calls} P products (want {steps}); \
             factorization references in pipg: {offending:?}",
            3 * steps
        ),
    )
}
