//! Acceptance gate: one test per criterion, each printing a single
//! `criterion N ...: PASS/FAIL` line with supporting numbers before asserting.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::Arc;
use std::time::Instant;

use musielak::balance::{double_phase_closeness, theta_scan, ExponentMode, GrowthMode, ThetaScanOpts, Verdict};
use musielak::catalog::{default_catalog, from_key, radial_profile_table};
use musielak::field::{dot, norm, ScalarField, VecField};
use musielak::flux::{flux_catalog, regularize};
use musielak::grid::GridDomain;
use musielak::modular::{luxemburg_norm, modular};
use musielak::mollify::{normalize_linf_l1, space_mollify, KernelSpec};
use musielak::nfunction::{flux_gradient, ConjugateSearch, NFunctionSpec};
use musielak::profile::biconjugate;
use musielak::solver::{
    apply_div, apply_grad, energy_residual, solve, theta_continuation, Problem, SolverOpts,
};
use musielak::verify::{comparison_test, ibp_residual_test, manufactured_convergence, sample_pairs};

fn report(n: usize, name: &str, pass: bool, detail: &str) {
    println!("criterion {n} ({name}): {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_biconjugation() {
    let t0 = Instant::now();
    let keys = ["p_laplace(1.5)", "p_laplace(2)", "p_laplace(3)", "p_laplace(5)", "llogl(1)", "exp_growth"];
    let mut worst = 0.0f64;
    let mut worst_key = "";
    for key in keys {
        let m = from_key(key, 2).unwrap();
        let table = radial_profile_table(&m, 0.0, &[0.5, 0.5], 1e3, 2048);
        let bi = biconjugate(&table).unwrap();
        for (i, (&f, &fbi)) in table.values.iter().zip(&bi.values).enumerate() {
            if !f.is_finite() {
                // overflowed exponential nodes: the biconjugate must also be
                // beyond representable growth there
                assert!(fbi > 1e100 || !fbi.is_finite(), "{key} node {i}: {fbi}");
                continue;
            }
            // a node is recoverable only if its supporting plane fits in f64:
            // near the overflow edge of the exponential profile, slope * s
            // exceeds f64::MAX and the conjugate saturates by construction
            if i > 0 {
                let slope = (f - table.values[i - 1]) / (table.nodes[i] - table.nodes[i - 1]);
                if !(slope * table.nodes[i]).is_finite() {
                    assert!(fbi > 1e100, "{key} node {i}: {fbi}");
                    continue;
                }
            }
            let rel = (fbi - f).abs() / (1.0 + f.abs());
            if rel > worst {
                worst = rel;
                worst_key = key;
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    let pass = worst <= 1e-6 && dt < 5.0;
    report(1, "biconjugation", pass, &format!("worst |f**-f| rel {worst:.3e} ({worst_key}), {dt:.2} s"));
}

#[test]
fn criterion_02_fenchel_young() {
    let search = ConjugateSearch::default();
    let mut min_res = f64::INFINITY;
    let mut worst_eq = 0.0f64;
    for (key, m) in default_catalog(2) {
        let s_max = if key == "exp_growth" { 5.0 } else { 10.0 };
        let pairs = sample_pairs(2, 1000, s_max, 11);
        let stats = musielak::nfunction::fenchel_young_residual(&m, &search, &pairs).unwrap();
        min_res = min_res.min(stats.min);
        // equality at eta = grad M(xi)
        for (t, x, xi, _) in sample_pairs(2, 100, 3.0, 13) {
            let eta = flux_gradient(&m, t, &x, &xi);
            let conj = m.conjugate(t, &x, &eta, &search).unwrap();
            if conj.truncated {
                continue;
            }
            let mv = m.eval(t, &x, &xi);
            let res = (mv + conj.value - dot(&xi, &eta)).abs() / (1.0 + mv + conj.value.abs());
            worst_eq = worst_eq.max(res);
        }
    }
    let pass = min_res >= -1e-6 && worst_eq <= 1e-5;
    report(2, "fenchel_young", pass, &format!("min residual {min_res:.3e}, worst equality defect {worst_eq:.3e}"));
}

#[test]
fn criterion_03_balance_oracle_agreement() {
    let t0 = Instant::now();
    let grid = GridDomain::unit_box(1.0, 4, 2, 17, false);
    let deltas = [0.25, 0.125, 0.0625, 0.03125];
    let opts = ThetaScanOpts::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for q in [2.5, 3.0, 3.5] {
        for alpha in [0.5, 1.0] {
            let m = from_key(&format!("double_phase(2, {q}, {alpha}, 1)"), 2).unwrap();
            let scan = theta_scan(&m, &grid, &deltas, ExponentMode::NOverP(2.0), &opts).unwrap();
            let oracle = double_phase_closeness(2.0, q, alpha, 2, GrowthMode::PowerP).unwrap();
            let scan_pass = scan.verdict == Verdict::Pass;
            let agree = if oracle.margin.abs() <= 0.05 {
                true // borderline: either verdict accepted
            } else {
                scan_pass == oracle.pass
            };
            ok &= agree;
            lines.push(format!("q={q} a={alpha}: scan {scan_pass} oracle {} margin {:.2}", oracle.pass, oracle.margin));
        }
    }
    let log_holder = from_key("variable_exponent(2 + 1/log(e + 1/abs(x1 - 0.5)))", 2).unwrap();
    let scan = theta_scan(&log_holder, &grid, &deltas, ExponentMode::NOverP(2.0), &opts).unwrap();
    ok &= scan.verdict == Verdict::Pass;
    lines.push(format!("log-holder: {:?}", scan.verdict));
    let jump = from_key("variable_exponent(2 + 0.5*min(1, max(0, (x1 - 0.5)*1000000000)))", 2).unwrap();
    let scan = theta_scan(&jump, &grid, &deltas, ExponentMode::NOverP(2.0), &opts).unwrap();
    ok &= scan.verdict == Verdict::Fail;
    lines.push(format!("jump: {:?}", scan.verdict));
    let dt = t0.elapsed().as_secs_f64();
    let pass = ok && dt < 60.0;
    report(3, "balance_oracle_agreement", pass, &format!("{}; {dt:.1} s", lines.join("; ")));
}

/// Double-phase modular whose weight vanishes on the half-space x1 <= 0.
fn half_space_double_phase(p: f64, q: f64, alpha: f64) -> NFunctionSpec {
    NFunctionSpec::isotropic(
        2,
        Arc::new(move |_t, x: &[f64], s: f64| {
            let a = x[0].max(0.0).powf(alpha);
            s.powf(p) / p + a * s.powf(q) / q
        }),
    )
}

#[test]
fn criterion_04_mollification_uniform_bound() {
    // Corpus: 20 bump fields concentrated in the weight-free half at widths
    // matched to the delta ladder; smoothing pushes them into the weighted
    // half, which the close (passing) parameters absorb and the distant
    // (failing) parameters do not.
    let grid = GridDomain::unit_box(1.0, 1, 2, 129, true);
    let r = grid.inner_radius() * 0.9;
    let deltas: Vec<f64> = (0..4).map(|i| r / (8.0 * f64::powi(2.0, i))).collect();
    let mut corpus = Vec::new();
    for &w in &deltas {
        for v in 0..5 {
            let yc = -0.25 + 0.5 * (v as f64 + 0.5) / 5.0;
            let cx = -1.05 * w;
            let mag = 1.0 / (w * w);
            corpus.push(normalize_linf_l1(&VecField::from_fn(&grid, move |_t, x| {
                let dx = x[0] - cx;
                let dy = x[1] - yc;
                let r2 = (dx * dx + dy * dy) / (w * w);
                vec![if r2 < 1.0 { mag * (1.0 - r2) } else { 0.0 }, 0.0]
            })));
        }
    }
    let m_pass = half_space_double_phase(2.0, 2.25, 1.0);
    let m_fail = half_space_double_phase(2.0, 4.0, 0.5);
    // one mollification per (field, delta), shared between both modulars
    let mut c_pass = vec![0.0f64; deltas.len()];
    let mut c_fail = vec![0.0f64; deltas.len()];
    for xi in &corpus {
        let d_pass = 1.0 + modular(&m_pass, xi);
        let d_fail = 1.0 + modular(&m_fail, xi);
        for (i, &delta) in deltas.iter().enumerate() {
            let s = space_mollify(xi, &KernelSpec::new(delta).unwrap(), r).unwrap();
            c_pass[i] = c_pass[i].max(modular(&m_pass, &s) / d_pass);
            c_fail[i] = c_fail[i].max(modular(&m_fail, &s) / d_fail);
        }
    }
    let pass_ratio = c_pass.iter().fold(0.0f64, |m, &v| m.max(v)) / c_pass[0];
    let fail_ratio = c_fail.iter().fold(0.0f64, |m, &v| m.max(v)) / c_fail[0];
    let pass = pass_ratio <= 4.0 && fail_ratio > 10.0;
    report(
        4,
        "mollification_uniform_bound",
        pass,
        &format!(
            "passing params max/coarsest {pass_ratio:.2} (C {c_pass:.3?}); failing params {fail_ratio:.1} (C {c_fail:.3?})"
        ),
    );
}

#[test]
fn criterion_05_manufactured_heat() {
    let t0 = Instant::now();
    let opts = SolverOpts::default();
    let rep = manufactured_convergence(&[65, 129, 257], &[64, 128, 256], 129, &opts).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let so_ok = rep.space_orders.iter().all(|o| (o - 2.0).abs() <= 0.3);
    let to_ok = rep.time_orders.iter().all(|o| (o - 1.0).abs() <= 0.3);
    let final_err = *rep.space_errors.last().unwrap();
    let pass = so_ok && to_ok && final_err <= 1e-4 && dt < 30.0;
    report(
        5,
        "manufactured_heat",
        pass,
        &format!(
            "space orders {:.2?}, time orders {:.2?}, final L2 error {final_err:.2e}, {dt:.1} s",
            rep.space_orders, rep.time_orders
        ),
    );
}

#[test]
fn criterion_06_energy_residual_halving() {
    let pi = std::f64::consts::PI;
    let mut lines = Vec::new();
    let mut ok = true;
    for key in ["p_laplace(2)", "p_laplace(3)", "double_phase(2, 2.5, 0.5, 1)"] {
        let theta = if key == "p_laplace(2)" { 0.0 } else { 0.05 };
        for f_val in [0.0, 1.0] {
            let run = |nt: usize| -> f64 {
                let grid = GridDomain::unit_box(0.05, nt, 1, 33, false);
                let flux = regularize(&flux_catalog(key, 1).unwrap(), theta).unwrap();
                let f = ScalarField::from_fn(&grid, |_, _| f_val);
                let u0: Vec<f64> =
                    (0..grid.node_count()).map(|i| (pi * grid.node_pos(i)[0]).sin()).collect();
                let p = Problem::new(grid.clone(), flux, f, u0).unwrap();
                let r = solve(&p, &SolverOpts::default()).unwrap();
                energy_residual(&r, grid.nt)
            };
            let ratio = run(20) / run(40);
            let good = (1.6..=2.4).contains(&ratio);
            ok &= good;
            lines.push(format!("{key} f={f_val}: {ratio:.2}"));
        }
    }
    report(6, "energy_residual_halving", ok, &lines.join("; "));
}

#[test]
fn criterion_07_comparison_principle() {
    let pi = std::f64::consts::PI;
    let opts = SolverOpts::default();
    let grid = GridDomain::unit_box(0.05, 8, 1, 33, false);
    let keys = [
        ("p_laplace(2)", 0.0),
        ("p_laplace(3)", 0.05),
        ("p_laplace(1.5)", 0.1),
        ("variable_exponent(2 + 0.5*x1)", 0.05),
        ("double_phase(2, 2.5, 0.5, 1)", 0.05),
    ];
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut count = 0;
    for (key, theta) in keys {
        let flux = regularize(&flux_catalog(key, 1).unwrap(), theta).unwrap();
        for case in 0..2 {
            let (f_lo, f_hi, shift) = if case == 0 { (0.0, 0.5, 0.1) } else { (-0.5, 0.0, 0.2) };
            let f1 = ScalarField::from_fn(&grid, |_, _| f_lo);
            let f2 = ScalarField::from_fn(&grid, |_, _| f_hi);
            let u01: Vec<f64> =
                (0..grid.node_count()).map(|i| 0.3 * (pi * grid.node_pos(i)[0]).sin()).collect();
            let u02: Vec<f64> = u01.iter().map(|v| v + shift).collect();
            let rep = comparison_test(&grid, &flux, &f1, &u01, &f2, &u02, &opts).unwrap();
            worst = worst.max(rep.max_violation);
            ok &= rep.pass;
            count += 1;
        }
    }
    report(
        7,
        "comparison_principle",
        ok && count == 10,
        &format!("{count} cases, worst violation {worst:.3e} (tol {:.1e})", 1e-8 + 10.0 * opts.tol_newton),
    );
}

#[test]
fn criterion_08_theta_continuation() {
    let t0 = Instant::now();
    let pi = std::f64::consts::PI;
    // borderline double phase in 1D: alpha = N (q - p) / p with N=1, p=2, q=2.5
    let grid = GridDomain::unit_box(0.1, 32, 1, 65, false);
    let base = flux_catalog("double_phase(2, 2.5, 0.5, 1)", 1).unwrap();
    let f = ScalarField::from_fn(&grid, |_, _| 1.0);
    let u0: Vec<f64> = (0..grid.node_count()).map(|i| (pi * grid.node_pos(i)[0]).sin()).collect();
    let cont = theta_continuation(&grid, &base, &[0.1, 0.05, 0.025, 0.0125], &f, &u0, &SolverOpts::default())
        .unwrap();
    let cauchy_dec = cont.cauchy.windows(2).all(|w| w[1] < w[0]);
    let penalty_dec = cont.penalties.windows(2).all(|w| w[1] < w[0]);
    let dt = t0.elapsed().as_secs_f64();
    let pass = cauchy_dec && penalty_dec && dt < 120.0;
    report(
        8,
        "theta_continuation",
        pass,
        &format!("cauchy {:?}, penalties {:?}, {dt:.1} s", cont.cauchy, cont.penalties),
    );
}

#[test]
fn criterion_09_luxemburg_closed_form() {
    let grid = GridDomain::unit_box(1.0, 2, 2, 9, false);
    let c = 0.7;
    let field = VecField::from_fn(&grid, |_, _| vec![c, 0.0]);
    let mut worst = 0.0f64;
    for p in [1.5f64, 2.0, 3.0] {
        let m = from_key(&format!("p_laplace({p})"), 2).unwrap();
        // rho(lambda) = (c/lambda)^p / p over measure T*V = 1 -> lambda = c p^(-1/p)
        let exact = c * p.powf(-1.0 / p);
        let got = luxemburg_norm(&m, &field).unwrap();
        worst = worst.max((got - exact).abs() / exact);
    }
    report(9, "luxemburg_closed_form", worst <= 1e-8, &format!("worst relative error {worst:.3e}"));
}

#[test]
fn criterion_10_sbp_and_ibp() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut worst_sbp = 0.0f64;
    for &(dim, nodes) in &[(1usize, 17usize), (1, 33), (1, 65), (2, 9), (2, 17), (3, 5), (3, 9)] {
        let g = GridDomain::unit_box(1.0, 1, dim, nodes, false);
        for _ in 0..3 {
            let w: Vec<f64> = (0..g.node_count())
                .map(|i| if g.is_boundary(i) { 0.0 } else { rng.gen_range(-1.0..1.0) })
                .collect();
            let v: Vec<f64> = (0..g.cell_count() * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs: f64 = apply_div(&g, &v).iter().zip(&w).map(|(a, b)| a * b).sum();
            let rhs: f64 = -apply_grad(&g, &w).iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            worst_sbp = worst_sbp.max((lhs - rhs).abs() / (norm(&v) * norm(&w) + 1.0));
        }
    }
    // weak-form defect halves with dt
    let pi = std::f64::consts::PI;
    let run = |nt: usize| -> f64 {
        let grid = GridDomain::unit_box(0.1, nt, 1, 33, false);
        let flux = regularize(&flux_catalog("p_laplace(2)", 1).unwrap(), 0.0).unwrap();
        let u0: Vec<f64> =
            (0..grid.node_count()).map(|i| (pi * grid.node_pos(i)[0]).sin()).collect();
        let problem = Problem::new(grid.clone(), flux, ScalarField::zeros(&grid), u0).unwrap();
        let result = solve(&problem, &SolverOpts::default()).unwrap();
        let t_final = grid.t_final;
        let xi = move |t: f64, x: &[f64]| (t_final - t) * (pi * x[0]).sin();
        let dxi = move |_t: f64, x: &[f64]| -(pi * x[0]).sin();
        ibp_residual_test(&result, &problem, &xi, &dxi).unwrap()
    };
    let (r1, r2, r3) = (run(10), run(20), run(40));
    let o1 = (r1 / r2).log2();
    let o2 = (r2 / r3).log2();
    let pass = worst_sbp <= 1e-13 && (o1 - 1.0).abs() <= 0.4 && (o2 - 1.0).abs() <= 0.4;
    report(
        10,
        "sbp_and_ibp",
        pass,
        &format!("worst SBP defect {worst_sbp:.2e}; ibp orders {o1:.2}, {o2:.2}"),
    );
}
