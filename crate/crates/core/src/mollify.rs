//! Approximation operators: spatial mollification with domain shrinking,
//! forward/backward sliding time averages, uniform modular bound tables, and
//! modular-convergence experiments.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VecField};
use crate::grid::GridDomain;
use crate::modular::{modular, modular_convergence_test};
use crate::nfunction::NFunctionSpec;

/// The standard bump kernel exp(-1/(1-r^2)) on the unit ball, scaled to
/// radius `delta` and normalized discretely on the target grid.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub delta: f64,
}

impl KernelSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::InvalidInput("kernel radius must be positive".into()));
        }
        Ok(Self { delta })
    }

    fn profile(r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - r * r)).exp()
        }
    }

    /// Lattice taps on the grid: integer offsets within the support ball and
    /// weights summing to exactly 1.
    pub fn taps(&self, grid: &GridDomain) -> (Vec<Vec<isize>>, Vec<f64>) {
        let dim = grid.dim();
        let radii: Vec<isize> = (0..dim).map(|a| (self.delta / grid.dx(a)).floor() as isize).collect();
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let total: usize = radii.iter().map(|&r| (2 * r + 1) as usize).product();
        for flat in 0..total {
            let mut rem = flat;
            let mut off = vec![0isize; dim];
            let mut r2 = 0.0;
            for a in 0..dim {
                let span = (2 * radii[a] + 1) as usize;
                off[a] = rem as isize % span as isize - radii[a];
                rem /= span;
                let d = off[a] as f64 * grid.dx(a) / self.delta;
                r2 += d * d;
            }
            let w = Self::profile(r2.sqrt());
            if w > 0.0 {
                offsets.push(off);
                weights.push(w);
            }
        }
        let mass: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= mass;
        }
        (offsets, weights)
    }
}

/// Multilinear interpolation of one node level at an arbitrary point; zero
/// outside the box (extension by zero).
fn interp_nodes(grid: &GridDomain, level: &[f64], x: &[f64]) -> f64 {
    let dim = grid.dim();
    let mut base = vec![0usize; dim];
    let mut frac = vec![0.0f64; dim];
    for a in 0..dim {
        let rel = (x[a] - grid.origin[a]) / grid.dx(a);
        if rel < 0.0 || rel > (grid.nx[a] - 1) as f64 {
            return 0.0;
        }
        let i = (rel.floor() as usize).min(grid.nx[a] - 2);
        base[a] = i;
        frac[a] = rel - i as f64;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dim) {
        let mut node = base.clone();
        let mut w = 1.0;
        for a in 0..dim {
            if (corner >> a) & 1 == 1 {
                node[a] += 1;
                w *= frac[a];
            } else {
                w *= 1.0 - frac[a];
            }
        }
        acc += w * level[grid.node_index(&node)];
    }
    acc
}

/// Multilinear interpolation of one slab of a vector component on the
/// cell-center lattice; zero outside the cell-center hull. `scratch` holds
/// `2 * dim` working floats (kept outside the hot loops to avoid allocation).
fn interp_cells(grid: &GridDomain, xi: &VecField, slab: usize, comp: usize, x: &[f64], scratch: &mut [f64]) -> f64 {
    let dim = grid.dim();
    let (base, frac) = scratch.split_at_mut(dim);
    for a in 0..dim {
        let ncells = grid.cells_per_axis(a);
        let rel = (x[a] - grid.origin[a]) / grid.dx(a) - 0.5;
        if rel < 0.0 || rel > (ncells - 1) as f64 {
            return 0.0;
        }
        let i = (rel.floor() as usize).min(ncells.saturating_sub(2));
        base[a] = i as f64;
        frac[a] = rel - i as f64;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dim) {
        let mut w = 1.0;
        let mut idx = 0usize;
        for a in 0..dim {
            let mut cell = base[a] as usize;
            if (corner >> a) & 1 == 1 {
                cell += 1;
                w *= frac[a];
            } else {
                w *= 1.0 - frac[a];
            }
            idx = idx * grid.cells_per_axis(a) + cell;
        }
        acc += w * xi.at(slab, idx)[comp];
    }
    acc
}

fn check_mollify_inputs(grid: &GridDomain, delta: f64, r_ball: f64) -> Result<f64> {
    if r_ball <= 0.0 || r_ball > grid.inner_radius() + 1e-12 {
        // boxes are star-shaped w.r.t. their incircle; a larger ball is not inside
        return Err(Error::UnsupportedDomain);
    }
    if delta >= r_ball / 4.0 {
        return Err(Error::InvalidInput(format!(
            "mollification radius {delta} must stay below R/4 = {}",
            r_ball / 4.0
        )));
    }
    Ok(1.0 - delta / r_ball)
}

/// Spatial mollification of a vector field: convolves each slab with the
/// kernel after pulling the field back through the shrinking map
/// y -> c + (y - c)/kappa, kappa = 1 - delta/R, c the star center.
pub fn space_mollify(xi: &VecField, kernel: &KernelSpec, r_ball: f64) -> Result<VecField> {
    let grid = &xi.grid;
    let kappa = check_mollify_inputs(grid, kernel.delta, r_ball)?;
    let center = grid.box_center();
    let (offsets, weights) = kernel.taps(grid);
    let dim = grid.dim();
    let nc = grid.cell_count();
    let mut out = VecField::zeros(grid);
    let mut y = vec![0.0f64; dim];
    let mut val = vec![0.0f64; dim];
    let mut scratch = vec![0.0f64; 2 * dim];
    for k in 0..grid.nt {
        for c in 0..nc {
            let x = grid.cell_center(c);
            val.iter_mut().for_each(|v| *v = 0.0);
            for (off, &w) in offsets.iter().zip(&weights) {
                // y = x - offset; sample xi at c + (y - c)/kappa
                for a in 0..dim {
                    let ya = x[a] - off[a] as f64 * grid.dx(a);
                    y[a] = center[a] + (ya - center[a]) / kappa;
                }
                for (a, v) in val.iter_mut().enumerate() {
                    *v += w * interp_cells(grid, xi, k, a, &y, &mut scratch);
                }
            }
            out.at_mut(k, c).copy_from_slice(&val);
        }
    }
    Ok(out)
}

/// Spatial mollification of a scalar field, level by level on the node grid.
pub fn space_mollify_scalar(u: &ScalarField, kernel: &KernelSpec, r_ball: f64) -> Result<ScalarField> {
    let grid = &u.grid;
    let kappa = check_mollify_inputs(grid, kernel.delta, r_ball)?;
    let center = grid.box_center();
    let (offsets, weights) = kernel.taps(grid);
    let dim = grid.dim();
    let nn = grid.node_count();
    let mut out = ScalarField::zeros(grid);
    for k in 0..=grid.nt {
        let level = u.level(k).to_vec();
        for i in 0..nn {
            let x = grid.node_pos(i);
            let mut acc = 0.0;
            for (off, &w) in offsets.iter().zip(&weights) {
                let y: Vec<f64> = (0..dim)
                    .map(|a| {
                        let ya = x[a] - off[a] as f64 * grid.dx(a);
                        center[a] + (ya - center[a]) / kappa
                    })
                    .collect();
                acc += w * interp_nodes(grid, &level, &y);
            }
            *out.at_mut(k, i) = acc;
        }
    }
    Ok(out)
}

/// Snaps epsilon to a positive multiple of dt; the flag reports whether
/// snapping changed the requested value.
fn snap_eps(grid: &GridDomain, eps: f64) -> (usize, bool) {
    let steps = (eps / grid.dt()).round().max(1.0) as usize;
    let snapped = (steps as f64 * grid.dt() - eps).abs() > 1e-12 * grid.dt();
    (steps, snapped)
}

/// Forward sliding mean over [t, t + eps] (trapezoid weights, extension by
/// zero beyond T). Returns the averaged field and whether eps was snapped.
pub fn time_average_forward(u: &ScalarField, eps: f64) -> (ScalarField, bool) {
    time_average(u, eps, true)
}

/// Backward sliding mean over [t - eps, t] (extension by zero below 0).
pub fn time_average_backward(u: &ScalarField, eps: f64) -> (ScalarField, bool) {
    time_average(u, eps, false)
}

fn time_average(u: &ScalarField, eps: f64, forward: bool) -> (ScalarField, bool) {
    let grid = &u.grid;
    let (j, snapped) = snap_eps(grid, eps);
    let nn = grid.node_count();
    let mut out = ScalarField::zeros(grid);
    let zero = vec![0.0; nn];
    for k in 0..=grid.nt {
        let mut acc = vec![0.0; nn];
        for step in 0..=j {
            let w = if step == 0 || step == j { 0.5 } else { 1.0 };
            let level_idx = if forward {
                k.checked_add(step).filter(|&l| l <= grid.nt)
            } else {
                k.checked_sub(step)
            };
            let level = match level_idx {
                Some(l) => u.level(l),
                None => &zero,
            };
            for (a, v) in acc.iter_mut().zip(level) {
                *a += w * v;
            }
        }
        for (o, a) in out.level_mut(k).iter_mut().zip(&acc) {
            *o = a / j as f64;
        }
    }
    (out, snapped)
}

/// Scales a vector field so that sup_t ||xi(t)||_{L^1} = 2^{-N} (the working
/// normalization of the uniform modular bound); zero fields pass through.
pub fn normalize_linf_l1(xi: &VecField) -> VecField {
    let target = 0.5f64.powi(xi.grid.dim() as i32);
    let current = xi.sup_time_l1_space();
    if current == 0.0 {
        xi.clone()
    } else {
        xi.scale(target / current)
    }
}

#[derive(Debug, Clone)]
pub struct ModularBoundRow {
    pub delta: f64,
    /// max over the corpus of modular(S_delta xi) / modular(xi)
    pub c_delta: f64,
    pub excluded_zero_modular: usize,
}

/// Table of the uniform modular bound constants over a delta ladder; corpus
/// fields are normalized to the working L^inf-L^1 bound first.
pub fn uniform_modular_bound_space(
    m: &NFunctionSpec,
    corpus: &[VecField],
    deltas: &[f64],
    r_ball: f64,
) -> Result<Vec<ModularBoundRow>> {
    let normalized: Vec<VecField> = corpus.iter().map(normalize_linf_l1).collect();
    let mut rows = Vec::new();
    for &delta in deltas {
        let kernel = KernelSpec::new(delta)?;
        let mut worst = 0.0f64;
        let mut excluded = 0usize;
        for xi in &normalized {
            let denom = modular(m, xi);
            if denom == 0.0 {
                excluded += 1;
                continue;
            }
            let smoothed = space_mollify(xi, &kernel, r_ball)?;
            worst = worst.max(modular(m, &smoothed) / denom);
        }
        rows.push(ModularBoundRow { delta, c_delta: worst, excluded_zero_modular: excluded });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ApproximationReport {
    /// (delta, L^1 distance of S_delta phi to phi)
    pub space_rows: Vec<(f64, f64)>,
    /// (eps, L^1 distance of phi_eps to phi)
    pub time_rows: Vec<(f64, f64)>,
    /// Modular-convergence witness lambda for the mollified gradients, if found.
    pub gradient_lambda: Option<f64>,
}

/// Runs the space/time approximation experiment on a Dirichlet-admissible
/// field: L^1 errors along both ladders plus a modular-convergence witness for
/// the gradient sequence.
pub fn approximation_experiment(
    m: &NFunctionSpec,
    phi: &ScalarField,
    deltas: &[f64],
    epsilons: &[f64],
    r_ball: f64,
    tol: f64,
) -> Result<ApproximationReport> {
    if !phi.is_dirichlet_admissible(1e-9) {
        return Err(Error::InvalidInput("field must vanish on the boundary".into()));
    }
    let mut space_rows = Vec::new();
    let mut grads = Vec::new();
    for &delta in deltas {
        let kernel = KernelSpec::new(delta)?;
        let smoothed = space_mollify_scalar(phi, &kernel, r_ball)?;
        space_rows.push((delta, smoothed.l1_space_time_distance(phi)));
        grads.push(smoothed.gradient());
    }
    let mut time_rows = Vec::new();
    for &eps in epsilons {
        let (avg, _) = time_average_forward(phi, eps);
        time_rows.push((eps, avg.l1_space_time_distance(phi)));
    }
    let limit = phi.gradient();
    let conv = modular_convergence_test(m, &grads, &limit, tol)?;
    Ok(ApproximationReport { space_rows, time_rows, gradient_lambda: conv.lambda })
}
