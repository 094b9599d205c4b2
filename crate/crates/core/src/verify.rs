//! Solver verification harness: comparison-principle and uniqueness probes,
//! manufactured-solution convergence orders, an L-infinity range check, and a
//! discrete weak-form (integration-by-parts) residual. The named suites at the
//! bottom bundle quick cross-module self-checks for the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{dot, ScalarField};
use crate::flux::{flux_catalog, regularize, RegularizedFluxSpec};
use crate::grid::GridDomain;
use crate::solver::{
    apply_grad, solve, step_implicit_with_guess, Problem, SolveResult, SolverOpts,
};

/// Comparison tolerance used to judge ordering violations: discretization
/// noise plus a multiple of the nonlinear-solve tolerance.
pub fn comparison_tolerance(opts: &SolverOpts) -> f64 {
    1e-8 + 10.0 * opts.tol_newton
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub max_violation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Solves the same flux with ordered data (f1 <= f2, u01 <= u02) and measures
/// the worst pointwise violation of u1 <= u2. The data ordering is a
/// precondition; violated ordering is an input error, not a test failure.
pub fn comparison_test(
    grid: &GridDomain,
    flux: &RegularizedFluxSpec,
    f1: &ScalarField,
    u01: &[f64],
    f2: &ScalarField,
    u02: &[f64],
    opts: &SolverOpts,
) -> Result<ComparisonReport> {
    let ordered_f = f1.values.iter().zip(&f2.values).all(|(a, b)| a <= b);
    let ordered_u0 = u01.iter().zip(u02).all(|(a, b)| a <= b);
    if !ordered_f || !ordered_u0 {
        return Err(Error::InvalidInput("comparison data must satisfy f1 <= f2 and u01 <= u02".into()));
    }
    let r1 = solve(&Problem::new(grid.clone(), flux.clone(), f1.clone(), u01.to_vec())?, opts)?;
    let r2 = solve(&Problem::new(grid.clone(), flux.clone(), f2.clone(), u02.to_vec())?, opts)?;
    let max_violation = r1
        .u
        .values
        .iter()
        .zip(&r2.u.values)
        .fold(0.0f64, |m, (a, b)| m.max(a - b));
    let tol = comparison_tolerance(opts);
    Ok(ComparisonReport { max_violation, tol, pass: max_violation <= tol })
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub restarts: usize,
    pub max_distance: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Re-solves the problem several times with randomized Newton starting points
/// at every step and reports the largest trajectory distance to the reference
/// run. A well-posed discrete problem must land on the same solution.
pub fn uniqueness_test(
    problem: &Problem,
    opts: &SolverOpts,
    restarts: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let reference = solve(problem, opts)?;
    let grid = &problem.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitude = 1.0 + reference.u.sup_norm();
    let mut max_distance = 0.0f64;
    for _ in 0..restarts {
        let mut u = ScalarField::zeros(grid);
        let mut u0 = problem.u0.clone();
        for i in 0..grid.node_count() {
            if grid.is_boundary(i) {
                u0[i] = 0.0;
            }
        }
        u.set_level(0, &u0);
        for k in 0..grid.nt {
            let prev = u.level(k).to_vec();
            let guess: Vec<f64> = prev
                .iter()
                .map(|v| v + amplitude * rng.gen_range(-0.5..0.5))
                .collect();
            let (next, _) = step_implicit_with_guess(
                grid,
                &problem.flux,
                &prev,
                problem.f.level(k + 1),
                grid.time_level(k + 1),
                grid.dt(),
                opts,
                &guess,
            )?;
            u.set_level(k + 1, &next);
        }
        max_distance = max_distance.max(reference.u.l2_space_time_distance(&u));
    }
    let tol = 100.0 * opts.tol_newton * (grid.t_final * grid.cell_volume() * grid.node_count() as f64).sqrt()
        + 1e-9;
    Ok(UniquenessReport { restarts, max_distance, tol, pass: max_distance <= tol })
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub nx_levels: Vec<usize>,
    pub space_errors: Vec<f64>,
    pub space_orders: Vec<f64>,
    pub nt_levels: Vec<usize>,
    pub time_errors: Vec<f64>,
    pub time_orders: Vec<f64>,
}

fn heat_mode_error(nx: usize, nt: usize, t_final: f64, against_discrete: bool, opts: &SolverOpts) -> Result<f64> {
    let pi = std::f64::consts::PI;
    let grid = GridDomain::unit_box(t_final, nt, 1, nx, false);
    let flux = regularize(&flux_catalog("p_laplace(2)", 1)?, 0.0)?;
    let u0: Vec<f64> = (0..grid.node_count()).map(|i| (pi * grid.node_pos(i)[0]).sin()).collect();
    let problem = Problem::new(grid.clone(), flux, ScalarField::zeros(&grid), u0)?;
    let result = solve(&problem, opts)?;
    let dx = grid.dx(0);
    // discrete spatial eigenvalue of the five-point (here three-point) operator
    let lambda_h = 4.0 / (dx * dx) * (pi * dx / 2.0).sin().powi(2);
    let lambda = if against_discrete { lambda_h } else { pi * pi };
    let mut err2 = 0.0;
    for i in 0..grid.node_count() {
        let exact = (-lambda * t_final).exp() * (pi * grid.node_pos(i)[0]).sin();
        let d = result.u.at(grid.nt, i) - exact;
        err2 += d * d;
    }
    Ok((err2 * grid.cell_volume()).sqrt())
}

/// Heat-equation manufactured test, u = exp(-pi^2 t) sin(pi x) on (0, 0.1):
/// the spatial sweep refines nx with nt ~ nx^2 (order 2 expected); the
/// temporal sweep refines nt against the semi-discrete exact solution
/// (order 1 expected for backward Euler).
pub fn manufactured_convergence(
    nx_levels: &[usize],
    nt_levels: &[usize],
    nx_fixed: usize,
    opts: &SolverOpts,
) -> Result<ConvergenceReport> {
    let t_final = 0.1;
    let mut space_errors = Vec::new();
    for &nx in nx_levels {
        let nt = (nx * nx / 8).max(16);
        space_errors.push(heat_mode_error(nx, nt, t_final, false, opts)?);
    }
    let space_orders: Vec<f64> =
        space_errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mut time_errors = Vec::new();
    for &nt in nt_levels {
        time_errors.push(heat_mode_error(nx_fixed, nt, t_final, true, opts)?);
    }
    let time_orders: Vec<f64> = time_errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ConvergenceReport {
        nx_levels: nx_levels.to_vec(),
        space_errors,
        space_orders,
        nt_levels: nt_levels.to_vec(),
        time_errors,
        time_orders,
    })
}

#[derive(Debug, Clone)]
pub struct LinfReport {
    pub sup: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks the maximum-principle style heuristic sup |u| <= ||u0||_inf +
/// T ||f||_inf (exact for the heat flow, a sound a-priori guide generally).
pub fn linf_bound_test(problem: &Problem, opts: &SolverOpts) -> Result<LinfReport> {
    let result = solve(problem, opts)?;
    let u0_sup = problem.u0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = u0_sup + problem.grid.t_final * problem.f.sup_norm();
    let sup = result.u.sup_norm();
    Ok(LinfReport { sup, bound, pass: sup <= bound * (1.0 + 1e-8) + 1e-10 })
}

/// Discrete weak-form defect of a computed trajectory against a smooth test
/// function xi with analytic time derivative:
///   -int (u - u0) dxi/dt + int A_theta(grad u) . grad xi - int f xi.
/// xi must vanish on the spatial boundary for all t and at t = T; otherwise
/// the input is rejected. The defect is first order in dt.
pub fn ibp_residual_test(
    result: &SolveResult,
    problem: &Problem,
    xi: &dyn Fn(f64, &[f64]) -> f64,
    dxi_dt: &dyn Fn(f64, &[f64]) -> f64,
) -> Result<f64> {
    let grid = &problem.grid;
    let dim = grid.dim();
    let dv = grid.cell_volume();
    let dt = grid.dt();
    // support checks
    for k in 0..=grid.nt {
        let t = grid.time_level(k);
        for i in 0..grid.node_count() {
            if grid.is_boundary(i) && xi(t, &grid.node_pos(i)).abs() > 1e-12 {
                return Err(Error::InvalidInput(
                    "test function must vanish on the spatial boundary".into(),
                ));
            }
        }
    }
    for i in 0..grid.node_count() {
        if xi(grid.t_final, &grid.node_pos(i)).abs() > 1e-12 {
            return Err(Error::InvalidInput("test function must vanish at the final time".into()));
        }
    }

    let mut defect = 0.0;
    for k in 1..=grid.nt {
        let t = grid.time_level(k);
        let level = result.u.level(k);
        // time term and source term on nodes
        for i in 0..grid.node_count() {
            let x = grid.node_pos(i);
            defect -= (level[i] - problem.u0[i]) * dxi_dt(t, &x) * dv * dt;
            defect -= problem.f.at(k, i) * xi(t, &x) * dv * dt;
        }
        // flux term on cells
        let grad_u = apply_grad(grid, level);
        let xi_level: Vec<f64> = (0..grid.node_count()).map(|i| xi(t, &grid.node_pos(i))).collect();
        let grad_xi = apply_grad(grid, &xi_level);
        for c in 0..grid.cell_count() {
            let xc = grid.cell_center(c);
            let a = problem.flux.eval(t, &xc, &grad_u[c * dim..(c + 1) * dim]);
            defect += dot(&a, &grad_xi[c * dim..(c + 1) * dim]) * dv * dt;
        }
    }
    Ok(defect.abs())
}

/// One line of suite output: (check name, pass, detail).
pub type SuiteLine = (String, bool, String);

fn line(name: &str, pass: bool, detail: String) -> SuiteLine {
    (name.to_string(), pass, detail)
}

/// Seeded (t, x, xi, eta) tuples inside the unit box with moderate magnitudes.
pub fn sample_pairs(dim: usize, count: usize, s_max: f64, seed: u64) -> Vec<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-9);
        v.iter().map(|a| a / n).collect()
    };
    (0..count)
        .map(|_| {
            let t = rng.gen_range(0.0..1.0);
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.05..0.95)).collect();
            let m1 = 10f64.powf(rng.gen_range(-1.0..s_max.log10()));
            let m2 = 10f64.powf(rng.gen_range(-1.0..s_max.log10()));
            let xi: Vec<f64> = dir(&mut rng).iter().map(|d| d * m1).collect();
            let eta: Vec<f64> = dir(&mut rng).iter().map(|d| d * m2).collect();
            (t, x, xi, eta)
        })
        .collect()
}

fn suite_nfun() -> Result<Vec<SuiteLine>> {
    use crate::catalog::default_catalog;
    use crate::nfunction::{check_axioms, fenchel_young_residual, ConjugateSearch, SamplingPlan};
    let mut out = Vec::new();
    let pairs = sample_pairs(2, 40, 10.0, 3);
    for (key, spec) in default_catalog(2) {
        let plan = SamplingPlan::default_plan(2, 1.0, 1.0, 20.0);
        let axioms = check_axioms(&spec, &plan)?;
        out.push(line(&format!("axioms[{key}]"), axioms.all_pass(), format!("{axioms:?}")));
        let fy = fenchel_young_residual(&spec, &ConjugateSearch::default(), &pairs)?;
        let ok = fy.min >= -1e-6;
        out.push(line(&format!("fenchel_young[{key}]"), ok, format!("min {:.3e}", fy.min)));
    }
    Ok(out)
}

fn suite_modular() -> Result<Vec<SuiteLine>> {
    use crate::field::VecField;
    use crate::flux::flux_catalog;
    use crate::modular::{holder_pairing_check, luxemburg_norm, poincare_check};
    let mut out = Vec::new();
    let grid = GridDomain::unit_box(1.0, 4, 2, 17, false);
    let spec = flux_catalog("p_laplace(2)", 2)?.m;
    let field = VecField::from_fn(&grid, |t, x| vec![x[0] * (1.0 - t), x[1]]);
    let norm = luxemburg_norm(&spec, &field)?;
    out.push(line("luxemburg_finite", norm.is_finite() && norm > 0.0, format!("norm {norm:.6}")));
    let norm3 = luxemburg_norm(&spec, &field.scale(3.0))?;
    out.push(line(
        "luxemburg_homogeneous",
        (norm3 - 3.0 * norm).abs() <= 1e-6 * norm3.max(1.0),
        format!("{norm3:.6} vs {:.6}", 3.0 * norm),
    ));
    let eta = VecField::from_fn(&grid, |_, x| vec![x[1], -x[0]]);
    let holder = holder_pairing_check(&spec, &field, &eta, &crate::nfunction::ConjugateSearch::default())?;
    out.push(line("holder", holder.pass, format!("lhs {:.4} rhs {:.4}", holder.lhs, holder.rhs)));
    let pgrid = GridDomain::unit_box(1.0, 2, 1, 65, false);
    let u = ScalarField::from_fn(&pgrid, |_, x| (std::f64::consts::PI * x[0]).sin());
    let p = poincare_check(&flux_catalog("p_laplace(2)", 1)?.m, &u)?;
    out.push(line("poincare", p.ratio <= 1.05 / (std::f64::consts::PI * std::f64::consts::PI), format!("ratio {:.5}", p.ratio)));
    Ok(out)
}

fn suite_balance() -> Result<Vec<SuiteLine>> {
    use crate::balance::{double_phase_closeness, GrowthMode};
    let mut out = Vec::new();
    for (q, alpha, expect) in [(2.5f64, 1.0f64, true), (3.5, 0.5, false)] {
        let c = double_phase_closeness(2.0, q, alpha, 2, GrowthMode::PowerP)?;
        out.push(line(
            &format!("double_phase[q={q},alpha={alpha}]"),
            c.pass == expect,
            format!("margin {:.3}", c.margin),
        ));
    }
    Ok(out)
}

fn suite_mollify() -> Result<Vec<SuiteLine>> {
    use crate::field::VecField;
    use crate::mollify::{space_mollify, KernelSpec};
    let grid = GridDomain::unit_box(1.0, 2, 2, 33, true);
    let field = VecField::from_fn(&grid, |_, x| vec![x[0] + 0.2, x[1] - 0.1]);
    let r = grid.inner_radius() * 0.9;
    let moll = space_mollify(&field, &KernelSpec { delta: r / 8.0 }, r)?;
    let ok = moll.sup_norm() <= field.sup_norm() * 1.05 && moll.is_finite();
    Ok(vec![line("mollify_bounded", ok, format!("sup {:.4} vs {:.4}", moll.sup_norm(), field.sup_norm()))])
}

fn suite_solver(opts: &SolverOpts) -> Result<Vec<SuiteLine>> {
    let mut out = Vec::new();
    let report = manufactured_convergence(&[33, 65], &[32, 64], 65, opts)?;
    let so = report.space_orders[0];
    let to = report.time_orders[0];
    out.push(line("space_order", (so - 2.0).abs() <= 0.4, format!("{so:.3}")));
    out.push(line("time_order", (to - 1.0).abs() <= 0.4, format!("{to:.3}")));
    let grid = GridDomain::unit_box(0.05, 10, 1, 33, false);
    let flux = regularize(&flux_catalog("p_laplace(2)", 1)?, 0.0)?;
    let pi = std::f64::consts::PI;
    let u0: Vec<f64> = (0..grid.node_count()).map(|i| (pi * grid.node_pos(i)[0]).sin()).collect();
    let problem = Problem::new(grid, flux, ScalarField::zeros(&GridDomain::unit_box(0.05, 10, 1, 33, false)), u0)?;
    let linf = linf_bound_test(&problem, opts)?;
    out.push(line("linf_bound", linf.pass, format!("sup {:.4} bound {:.4}", linf.sup, linf.bound)));
    Ok(out)
}

fn suite_comparison(opts: &SolverOpts) -> Result<Vec<SuiteLine>> {
    let grid = GridDomain::unit_box(0.05, 8, 1, 33, false);
    let flux = regularize(&flux_catalog("p_laplace(3)", 1)?, 0.05)?;
    let pi = std::f64::consts::PI;
    let f1 = ScalarField::zeros(&grid);
    let f2 = ScalarField::from_fn(&grid, |_, _| 0.5);
    let u01: Vec<f64> = (0..grid.node_count()).map(|i| 0.3 * (pi * grid.node_pos(i)[0]).sin()).collect();
    let u02: Vec<f64> = u01.iter().map(|v| v + 0.1).collect();
    let rep = comparison_test(&grid, &flux, &f1, &u01, &f2, &u02, opts)?;
    Ok(vec![line("comparison", rep.pass, format!("violation {:.3e} tol {:.3e}", rep.max_violation, rep.tol))])
}

/// Runs one named suite ("nfun", "modular", "balance", "mollify", "solver",
/// "comparison", or "all") and returns its pass/fail lines.
pub fn run_suite(name: &str, opts: &SolverOpts) -> Result<Vec<SuiteLine>> {
    match name {
        "nfun" => suite_nfun(),
        "modular" => suite_modular(),
        "balance" => suite_balance(),
        "mollify" => suite_mollify(),
        "solver" => suite_solver(opts),
        "comparison" => suite_comparison(opts),
        "all" => {
            let mut out = Vec::new();
            for s in ["nfun", "modular", "balance", "mollify", "solver", "comparison"] {
                for (n, p, d) in run_suite(s, opts)? {
                    out.push((format!("{s}/{n}"), p, d));
                }
            }
            Ok(out)
        }
        other => Err(Error::InvalidInput(format!("unknown suite '{other}'"))),
    }
}
