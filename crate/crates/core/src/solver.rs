//! Backward-Euler solver for du/dt - div A_theta(t, x, grad u) = f with
//! homogeneous Dirichlet data: staggered-cell gradient/divergence pair with
//! exact summation-by-parts duality, damped Newton with matrix-free CG and a
//! Picard fallback, energy accounting, and theta-continuation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{cell_gradient, dot, ScalarField};
use crate::flux::{regularize, FluxSpec, RegularizedFluxSpec};
use crate::grid::GridDomain;
use crate::modular::modular;

/// Cell-centered gradient of one node level (the `G` in the SBP pair).
pub fn apply_grad(grid: &GridDomain, level: &[f64]) -> Vec<f64> {
    let dim = grid.dim();
    let nc = grid.cell_count();
    let mut out = vec![0.0; nc * dim];
    for c in 0..nc {
        let g = cell_gradient(grid, level, c);
        out[c * dim..(c + 1) * dim].copy_from_slice(&g);
    }
    out
}

/// Node divergence of a cell vector field: exactly -G^T, so that
/// sum (div V) w dV = -sum V . (grad w) dV for every interior w.
pub fn apply_div(grid: &GridDomain, v: &[f64]) -> Vec<f64> {
    let dim = grid.dim();
    let nc = grid.cell_count();
    let corners = 1usize << dim;
    let cnt = (corners >> 1) as f64;
    let mut out = vec![0.0; grid.node_count()];
    for c in 0..nc {
        let multi = grid.cell_multi(c);
        for a in 0..dim {
            let w = v[c * dim + a] / (grid.dx(a) * cnt);
            for corner in 0..corners {
                if corner & (1 << a) != 0 {
                    continue;
                }
                let mut lo = multi.clone();
                let mut hi = multi.clone();
                for b in 0..dim {
                    let off = (corner >> b) & 1;
                    lo[b] += off;
                    hi[b] += off;
                }
                hi[a] += 1;
                out[grid.node_index(&lo)] += w;
                out[grid.node_index(&hi)] -= w;
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SolverOpts {
    pub tol_newton: f64,
    pub max_newton: usize,
    pub max_cg: usize,
    /// Enable the Picard (lagged-diffusivity) fallback when Newton stalls.
    pub picard: bool,
}

impl Default for SolverOpts {
    fn default() -> Self {
        Self { tol_newton: 1e-10, max_newton: 40, max_cg: 600, picard: true }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StepStats {
    pub newton_iters: usize,
    pub cg_iters: usize,
    pub residual: f64,
    pub used_picard: bool,
}

struct StepContext<'a> {
    grid: &'a GridDomain,
    flux: &'a RegularizedFluxSpec,
    t_new: f64,
    dt: f64,
    u_prev: &'a [f64],
    f_new: &'a [f64],
    interior: &'a [usize],
}

impl StepContext<'_> {
    /// A_theta applied to the gradient of `level`, cell by cell (parallel).
    fn flux_of(&self, level: &[f64]) -> Vec<f64> {
        let dim = self.grid.dim();
        let nc = self.grid.cell_count();
        let grad = apply_grad(self.grid, level);
        let mut out = vec![0.0; nc * dim];
        out.par_chunks_mut(dim).enumerate().for_each(|(c, chunk)| {
            let x = self.grid.cell_center(c);
            let a = self.flux.eval(self.t_new, &x, &grad[c * dim..(c + 1) * dim]);
            chunk.copy_from_slice(&a);
        });
        out
    }

    /// Backward-Euler residual, zero on boundary nodes.
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let div = apply_div(self.grid, &self.flux_of(u));
        let mut res = vec![0.0; u.len()];
        for &i in self.interior {
            res[i] = (u[i] - self.u_prev[i]) / self.dt - div[i] - self.f_new[i];
        }
        res
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Matrix-free CG on the finite-difference Jacobian-vector product of `res`
/// around `u`. Returns (direction, iterations used).
fn newton_cg(
    ctx: &StepContext<'_>,
    u: &[f64],
    res0: &[f64],
    max_cg: usize,
    forcing: f64,
) -> (Vec<f64>, usize) {
    let n = u.len();
    let jvp = |v: &[f64]| -> Vec<f64> {
        let vn = inf_norm(v);
        if vn == 0.0 {
            return vec![0.0; n];
        }
        let h = 1e-7 * (1.0 + inf_norm(u)) / vn;
        let probe: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let r = ctx.residual(&probe);
        r.iter().zip(res0).map(|(a, b)| (a - b) / h).collect()
    };
    // solve J d = -res0
    let b: Vec<f64> = res0.iter().map(|v| -v).collect();
    let mut d = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = forcing * forcing * rr;
    let mut iters = 0;
    for _ in 0..max_cg {
        if rr <= target || rr == 0.0 {
            break;
        }
        let jp = jvp(&p);
        let pjp = dot(&p, &jp);
        if pjp <= 0.0 {
            break; // indefinite direction: stop with the current iterate
        }
        let alpha = rr / pjp;
        for i in 0..n {
            d[i] += alpha * p[i];
            r[i] -= alpha * jp[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        iters += 1;
    }
    (d, iters)
}

/// Picard sweep: replaces the flux by the lagged scalar diffusivity
/// gamma = (A . xi)/|xi|^2 and solves the resulting SPD linear system by CG.
fn picard_sweep(ctx: &StepContext<'_>, u: &[f64], opts: &SolverOpts) -> (Vec<f64>, usize) {
    let grid = ctx.grid;
    let dim = grid.dim();
    let nc = grid.cell_count();
    let grad = apply_grad(grid, u);
    let mut gamma = vec![0.0; nc];
    for c in 0..nc {
        let xi = &grad[c * dim..(c + 1) * dim];
        let r2 = dot(xi, xi);
        let x = grid.cell_center(c);
        gamma[c] = if r2 > 1e-14 {
            (dot(&ctx.flux.eval(ctx.t_new, &x, xi), xi) / r2).max(1e-10)
        } else {
            // limiting diffusivity at a flat gradient: probe a small magnitude
            let probe = vec![1e-6; dim];
            (dot(&ctx.flux.eval(ctx.t_new, &x, &probe), &probe) / dot(&probe, &probe)).max(1e-10)
        };
    }
    let apply = |w: &[f64]| -> Vec<f64> {
        let mut gw = apply_grad(grid, w);
        for c in 0..nc {
            for a in 0..dim {
                gw[c * dim + a] *= gamma[c];
            }
        }
        let div = apply_div(grid, &gw);
        let mut out = vec![0.0; w.len()];
        for &i in ctx.interior {
            out[i] = w[i] / ctx.dt - div[i];
        }
        out
    };
    // right-hand side: u_prev/dt + f on the interior
    let mut b = vec![0.0; u.len()];
    for &i in ctx.interior {
        b[i] = ctx.u_prev[i] / ctx.dt + ctx.f_new[i];
    }
    // CG from the current iterate
    let mut x = u.to_vec();
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let tol2 = (opts.tol_newton * opts.tol_newton) * (1.0 + dot(&b, &b));
    let mut iters = 0;
    for _ in 0..opts.max_cg {
        if rr <= tol2 {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..x.len() {
            p[i] = r[i] + beta * p[i];
        }
        iters += 1;
    }
    (x, iters)
}

/// One backward-Euler step. `u_prev`/`f_new` are node vectors; the result is
/// zero on the boundary and satisfies the nonlinear system to `tol_newton` in
/// the max norm.
pub fn step_implicit(
    grid: &GridDomain,
    flux: &RegularizedFluxSpec,
    u_prev: &[f64],
    f_new: &[f64],
    t_new: f64,
    dt: f64,
    opts: &SolverOpts,
) -> Result<(Vec<f64>, StepStats)> {
    step_implicit_with_guess(grid, flux, u_prev, f_new, t_new, dt, opts, u_prev)
}

/// Same as [`step_implicit`] but with an explicit Newton starting point
/// (used by warm starts and by restart-based uniqueness probes).
#[allow(clippy::too_many_arguments)]
pub fn step_implicit_with_guess(
    grid: &GridDomain,
    flux: &RegularizedFluxSpec,
    u_prev: &[f64],
    f_new: &[f64],
    t_new: f64,
    dt: f64,
    opts: &SolverOpts,
    guess: &[f64],
) -> Result<(Vec<f64>, StepStats)> {
    let interior: Vec<usize> = (0..grid.node_count()).filter(|&i| !grid.is_boundary(i)).collect();
    let ctx = StepContext { grid, flux, t_new, dt, u_prev, f_new, interior: &interior };

    let mut u: Vec<f64> = guess.to_vec();
    for i in 0..u.len() {
        if grid.is_boundary(i) {
            u[i] = 0.0;
        }
    }
    let mut stats = StepStats::default();
    let mut res = ctx.residual(&u);
    let mut rnorm = inf_norm(&res);
    let mut stalls = 0usize;
    while rnorm > opts.tol_newton && stats.newton_iters < opts.max_newton {
        let (d, cg) = newton_cg(&ctx, &u, &res, opts.max_cg, 0.01);
        stats.cg_iters += cg;
        // Armijo backtracking on the residual max norm
        let mut lambda = 1.0f64;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + lambda * b).collect();
            let rt = ctx.residual(&trial);
            let rtn = inf_norm(&rt);
            if rtn <= (1.0 - 1e-4 * lambda) * rnorm {
                u = trial;
                res = rt;
                rnorm = rtn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        stats.newton_iters += 1;
        if !accepted {
            stalls += 1;
            if !opts.picard || stalls > 2 {
                break;
            }
            let (pu, pcg) = picard_sweep(&ctx, &u, opts);
            stats.cg_iters += pcg;
            stats.used_picard = true;
            let pres = ctx.residual(&pu);
            let pn = inf_norm(&pres);
            if pn < rnorm {
                u = pu;
                res = pres;
                rnorm = pn;
            }
        }
    }
    stats.residual = rnorm;
    if rnorm > opts.tol_newton {
        // final Picard rescue before giving up
        if opts.picard {
            for _ in 0..20 {
                let (pu, pcg) = picard_sweep(&ctx, &u, opts);
                stats.cg_iters += pcg;
                stats.used_picard = true;
                let pres = ctx.residual(&pu);
                let pn = inf_norm(&pres);
                if pn >= rnorm * 0.999 {
                    break;
                }
                u = pu;
                rnorm = pn;
                if rnorm <= opts.tol_newton {
                    break;
                }
            }
            stats.residual = rnorm;
        }
        if rnorm > opts.tol_newton {
            return Err(Error::NonConvergence { residual: rnorm, iterations: stats.newton_iters });
        }
    }
    Ok((u, stats))
}

/// Cumulative energy-ledger entry after a step.
#[derive(Debug, Clone)]
pub struct EnergyRow {
    /// half the squared L^2 norm of u at this time level
    pub half_l2: f64,
    /// cumulative integral of A_theta(grad u) . grad u
    pub flux_cum: f64,
    /// cumulative integral of f u
    pub source_cum: f64,
    /// integral of M(grad u) over this slab (coercivity minorant)
    pub modular_slab: f64,
}

#[derive(Debug, Clone)]
pub struct Apriori {
    /// sup over time levels of the squared L^2 norm
    pub sup_l2_sq: f64,
    /// integral of M(grad u) over the cylinder
    pub modular_grad: f64,
    /// theta times the integral of m*(grad m(grad u))
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    pub initial_half_l2: f64,
    pub ledger: Vec<EnergyRow>,
    pub apriori: Apriori,
    pub stats: Vec<StepStats>,
    /// Discrete coercivity A . grad u >= M(grad u) held at every step.
    pub coercivity_ok: bool,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: GridDomain,
    pub flux: RegularizedFluxSpec,
    pub f: ScalarField,
    pub u0: Vec<f64>,
}

impl Problem {
    pub fn new(grid: GridDomain, flux: RegularizedFluxSpec, f: ScalarField, u0: Vec<f64>) -> Result<Self> {
        if u0.len() != grid.node_count() {
            return Err(Error::InvalidInput("u0 length must match the node count".into()));
        }
        if !f.is_finite() || u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("problem data".into()));
        }
        Ok(Self { grid, flux, f, u0 })
    }
}

fn half_l2_sq(grid: &GridDomain, level: &[f64]) -> f64 {
    0.5 * level.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()
}

/// Time loop of implicit steps with the energy ledger and a-priori monitors.
pub fn solve(problem: &Problem, opts: &SolverOpts) -> Result<SolveResult> {
    let grid = &problem.grid;
    let dim = grid.dim();
    let nc = grid.cell_count();
    let dv = grid.cell_volume();
    let mut u = ScalarField::zeros(grid);
    let mut u0 = problem.u0.clone();
    for i in 0..grid.node_count() {
        if grid.is_boundary(i) {
            u0[i] = 0.0;
        }
    }
    u.set_level(0, &u0);
    let initial_half_l2 = half_l2_sq(grid, &u0);

    let mut ledger = Vec::with_capacity(grid.nt);
    let mut stats = Vec::with_capacity(grid.nt);
    let mut coercivity_ok = true;
    let mut flux_cum = 0.0;
    let mut source_cum = 0.0;
    let mut penalty = 0.0;
    let mut sup_l2_sq = 2.0 * initial_half_l2;

    for k in 0..grid.nt {
        let t_new = grid.time_level(k + 1);
        let f_new = problem.f.level(k + 1).to_vec();
        let prev = u.level(k).to_vec();
        let (next, st) =
            step_implicit(grid, &problem.flux, &prev, &f_new, t_new, grid.dt(), opts)?;

        // ledger terms for this slab
        let grad = apply_grad(grid, &next);
        let mut flux_slab = 0.0;
        let mut modular_slab = 0.0;
        let mut penalty_slab = 0.0;
        for c in 0..nc {
            let xi = &grad[c * dim..(c + 1) * dim];
            let x = grid.cell_center(c);
            let a = problem.flux.eval(t_new, &x, xi);
            flux_slab += dot(&a, xi) * dv;
            modular_slab += problem.flux.base.m.eval(t_new, &x, xi) * dv;
            penalty_slab += problem.flux.penalty(xi) * dv;
        }
        if flux_slab < modular_slab - 1e-9 * (1.0 + modular_slab) || modular_slab < -1e-12 {
            coercivity_ok = false;
        }
        flux_cum += flux_slab * grid.dt();
        penalty += problem.flux.theta * penalty_slab * grid.dt();
        source_cum += f_new.iter().zip(&next).map(|(f, v)| f * v).sum::<f64>() * dv * grid.dt();

        let half = half_l2_sq(grid, &next);
        sup_l2_sq = sup_l2_sq.max(2.0 * half);
        ledger.push(EnergyRow { half_l2: half, flux_cum, source_cum, modular_slab: modular_slab * grid.dt() });
        stats.push(st);
        u.set_level(k + 1, &next);
    }

    let modular_grad = modular(&problem.flux.base.m, &u.gradient());
    Ok(SolveResult {
        u,
        initial_half_l2,
        ledger,
        apriori: Apriori { sup_l2_sq, modular_grad, penalty },
        stats,
        coercivity_ok,
    })
}

/// Defect of the discrete energy equality at time index tau (1-based steps):
/// |1/2 ||u(tau)||^2 - 1/2 ||u0||^2 + int A_theta . grad u - int f u|.
pub fn energy_residual(result: &SolveResult, tau: usize) -> f64 {
    assert!(tau >= 1 && tau <= result.ledger.len());
    let row = &result.ledger[tau - 1];
    (row.half_l2 - result.initial_half_l2 + row.flux_cum - row.source_cum).abs()
}

#[derive(Debug, Clone)]
pub struct ThetaContinuation {
    pub thetas: Vec<f64>,
    pub runs: Vec<SolveResult>,
    /// L^2(Omega_T) distances between consecutive rungs.
    pub cauchy: Vec<f64>,
    /// theta-weighted penalty per rung.
    pub penalties: Vec<f64>,
    /// Whether the Cauchy tail is decreasing (diagnostic, not fatal).
    pub cauchy_ok: bool,
}

/// Solves along a decreasing theta ladder and reports the Cauchy table and the
/// vanishing-penalty monitor.
pub fn theta_continuation(
    grid: &GridDomain,
    base: &FluxSpec,
    thetas: &[f64],
    f: &ScalarField,
    u0: &[f64],
    opts: &SolverOpts,
) -> Result<ThetaContinuation> {
    if thetas.len() < 2 || thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("theta ladder must be decreasing with >= 2 rungs".into()));
    }
    let mut runs = Vec::new();
    for &theta in thetas {
        let flux = regularize(base, theta)?;
        let problem = Problem::new(grid.clone(), flux, f.clone(), u0.to_vec())?;
        runs.push(solve(&problem, opts)?);
    }
    let cauchy: Vec<f64> = runs
        .windows(2)
        .map(|w| w[0].u.l2_space_time_distance(&w[1].u))
        .collect();
    let penalties: Vec<f64> = runs.iter().map(|r| r.apriori.penalty).collect();
    let cauchy_ok = cauchy.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    Ok(ThetaContinuation { thetas: thetas.to_vec(), runs, cauchy, penalties, cauchy_ok })
}

/// Symmetric truncation of a trajectory (clamps to [-k, k]).
pub fn truncate(u: &ScalarField, k: f64) -> ScalarField {
    u.truncate(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::norm;
    use crate::flux::flux_catalog;
    use rand::{Rng, SeedableRng};

    fn heat_flux(dim: usize) -> RegularizedFluxSpec {
        regularize(&flux_catalog("p_laplace(2)", dim).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn sbp_adjointness_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for &(dim, nodes) in &[(1usize, 17usize), (2, 9), (2, 16), (3, 5)] {
            let g = GridDomain::unit_box(1.0, 1, dim, nodes, false);
            let w: Vec<f64> = (0..g.node_count())
                .map(|i| if g.is_boundary(i) { 0.0 } else { rng.gen_range(-1.0..1.0) })
                .collect();
            let v: Vec<f64> = (0..g.cell_count() * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs: f64 = apply_div(&g, &v).iter().zip(&w).map(|(a, b)| a * b).sum();
            let rhs: f64 = -apply_grad(&g, &w).iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            let scale = norm(&v) * norm(&w) + 1.0;
            assert!((lhs - rhs).abs() <= 1e-13 * scale, "dim {dim}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = GridDomain::unit_box(0.1, 4, 1, 17, false);
        let p = Problem::new(g.clone(), heat_flux(1), ScalarField::zeros(&g), vec![0.0; g.node_count()])
            .unwrap();
        let r = solve(&p, &SolverOpts::default()).unwrap();
        assert!(r.u.sup_norm() == 0.0);
        assert_eq!(energy_residual(&r, g.nt), 0.0);
    }

    #[test]
    fn one_step_heat_matches_discrete_eigenmode() {
        let pi = std::f64::consts::PI;
        let g = GridDomain::unit_box(0.01, 1, 1, 65, false);
        let dx = g.dx(0);
        let lambda_h = 4.0 / (dx * dx) * (pi * dx / 2.0).sin().powi(2);
        let u0: Vec<f64> = (0..g.node_count()).map(|i| (pi * g.node_pos(i)[0]).sin()).collect();
        let f = vec![0.0; g.node_count()];
        let flux = heat_flux(1);
        let (u1, st) = step_implicit(&g, &flux, &u0, &f, g.dt(), g.dt(), &SolverOpts::default()).unwrap();
        let damp = 1.0 / (1.0 + g.dt() * lambda_h);
        for i in 0..g.node_count() {
            assert!((u1[i] - damp * u0[i]).abs() < 1e-8, "node {i}");
        }
        assert!(st.residual <= 1e-10);
    }

    #[test]
    fn heat_solution_decays_like_the_exact_mode() {
        let pi = std::f64::consts::PI;
        let g = GridDomain::unit_box(0.1, 400, 1, 129, false);
        let u0: Vec<f64> = (0..g.node_count()).map(|i| (pi * g.node_pos(i)[0]).sin()).collect();
        let p = Problem::new(g.clone(), heat_flux(1), ScalarField::zeros(&g), u0).unwrap();
        let r = solve(&p, &SolverOpts::default()).unwrap();
        let decay = (-pi * pi * 0.1).exp();
        let mid = g.node_count() / 2;
        let got = r.u.at(g.nt, mid);
        let expect = decay * (pi * g.node_pos(mid)[0]).sin();
        assert!((got - expect).abs() < 2e-3, "{got} vs {expect}");
        assert!(r.coercivity_ok);
        // initial kinetic term: 1/2 int sin^2 = 1/4
        assert!((r.initial_half_l2 - 0.25).abs() < 1e-3);
    }

    #[test]
    fn energy_residual_is_first_order() {
        let pi = std::f64::consts::PI;
        let run = |nt: usize| -> f64 {
            let g = GridDomain::unit_box(0.05, nt, 1, 65, false);
            let u0: Vec<f64> = (0..g.node_count()).map(|i| (pi * g.node_pos(i)[0]).sin()).collect();
            let p = Problem::new(g.clone(), heat_flux(1), ScalarField::zeros(&g), u0).unwrap();
            let r = solve(&p, &SolverOpts::default()).unwrap();
            energy_residual(&r, g.nt)
        };
        let e1 = run(40);
        let e2 = run(80);
        let order = (e1 / e2).log2();
        assert!((order - 1.0).abs() < 0.3, "observed order {order} ({e1} -> {e2})");
    }

    #[test]
    fn p_laplace_p3_step_converges() {
        let g = GridDomain::unit_box(0.02, 2, 1, 33, false);
        let flux = regularize(&flux_catalog("p_laplace(3)", 1).unwrap(), 0.05).unwrap();
        let f = ScalarField::from_fn(&g, |_, x| (3.0 * x[0]).cos());
        let u0: Vec<f64> = (0..g.node_count())
            .map(|i| {
                let x = g.node_pos(i)[0];
                0.3 * (std::f64::consts::PI * x).sin()
            })
            .collect();
        let p = Problem::new(g.clone(), flux, f, u0).unwrap();
        let r = solve(&p, &SolverOpts::default()).unwrap();
        for st in &r.stats {
            assert!(st.residual <= 1e-10, "{st:?}");
            assert!(st.newton_iters <= 25);
        }
        assert!(r.coercivity_ok);
    }

    #[test]
    fn double_phase_small_data_converges() {
        let g = GridDomain::unit_box(0.02, 2, 2, 9, false);
        let flux = regularize(&flux_catalog("double_phase(2, 3, 1, 1)", 2).unwrap(), 0.1).unwrap();
        let f = ScalarField::from_fn(&g, |t, x| 0.4 * (7.0 * x[0] + 3.0 * x[1] + t).sin());
        let u0 = vec![0.0; g.node_count()];
        let p = Problem::new(g.clone(), flux, f, u0).unwrap();
        let r = solve(&p, &SolverOpts::default()).unwrap();
        for st in &r.stats {
            assert!(st.residual <= 1e-10, "{st:?}");
        }
    }

    #[test]
    fn linf_stays_in_the_initial_range() {
        // f = 0, 0 <= u0 <= 1: the p-Laplace trajectory stays inside [0, 1]
        let pi = std::f64::consts::PI;
        let g = GridDomain::unit_box(0.05, 20, 1, 33, false);
        let u0: Vec<f64> = (0..g.node_count())
            .map(|i| (pi * g.node_pos(i)[0]).sin().max(0.0))
            .collect();
        let p = Problem::new(g.clone(), heat_flux(1), ScalarField::zeros(&g), u0).unwrap();
        let r = solve(&p, &SolverOpts::default()).unwrap();
        for v in &r.u.values {
            assert!(*v >= -1e-9 && *v <= 1.0 + 1e-9, "{v}");
        }
    }

    #[test]
    fn theta_ladder_on_zero_data_is_flat() {
        let g = GridDomain::unit_box(0.05, 4, 1, 9, false);
        let base = flux_catalog("p_laplace(2)", 1).unwrap();
        let f = ScalarField::zeros(&g);
        let u0 = vec![0.0; g.node_count()];
        let c = theta_continuation(&g, &base, &[0.1, 0.05, 0.025, 0.0125], &f, &u0, &SolverOpts::default())
            .unwrap();
        assert!(c.cauchy.iter().all(|&d| d == 0.0));
        assert!(c.penalties.iter().all(|&p| p == 0.0));
        assert!(c.cauchy_ok);
    }
}
