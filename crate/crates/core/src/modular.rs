//! Discrete modulars, Luxemburg norms, modular convergence, and the Hölder /
//! Poincaré checks on grid fields.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{dot, norm, ScalarField, VecField};
use crate::nfunction::{ConjugateSearch, NFunctionSpec};

/// Modular of a vector field: sum over space-time cells of M(t, x, xi) times
/// the cell volume (midpoint rule). Per-slab partial sums are computed in
/// parallel and reduced in slab order, so the result is deterministic.
pub fn modular(m: &NFunctionSpec, xi: &VecField) -> f64 {
    let g = &xi.grid;
    let nc = g.cell_count();
    let w = g.slab_cell_volume();
    let per_slab: Vec<f64> = (0..g.nt)
        .into_par_iter()
        .map(|k| {
            let t = g.slab_time(k);
            let mut s = 0.0;
            for c in 0..nc {
                s += m.eval(t, &g.cell_center(c), xi.at(k, c));
            }
            s
        })
        .collect();
    per_slab.iter().sum::<f64>() * w
}

/// Modular of the conjugate function M* applied to a vector field.
pub fn modular_conjugate(m: &NFunctionSpec, eta: &VecField, search: &ConjugateSearch) -> Result<f64> {
    let g = &eta.grid;
    let nc = g.cell_count();
    let w = g.slab_cell_volume();
    let per_slab: Vec<Result<f64>> = (0..g.nt)
        .into_par_iter()
        .map(|k| {
            let t = g.slab_time(k);
            let mut s = 0.0;
            for c in 0..nc {
                s += m.conjugate(t, &g.cell_center(c), eta.at(k, c), search)?.value;
            }
            Ok(s)
        })
        .collect();
    let mut total = 0.0;
    for r in per_slab {
        total += r?;
    }
    Ok(total * w)
}

/// Modular of an isotropic profile applied to |u| at cell centers; `u` is
/// interpolated from the corner nodes of each cell (upper time level, matching
/// the gradient's backward-Euler association).
pub fn modular_scalar(b: &NFunctionSpec, u: &ScalarField) -> f64 {
    let g = &u.grid;
    let dim = g.dim();
    let nc = g.cell_count();
    let corners = 1usize << dim;
    let w = g.slab_cell_volume();
    let per_slab: Vec<f64> = (0..g.nt)
        .into_par_iter()
        .map(|k| {
            let t = g.slab_time(k);
            let level = u.level(k + 1);
            let mut s = 0.0;
            for c in 0..nc {
                let multi = g.cell_multi(c);
                let mut avg = 0.0;
                for corner in 0..corners {
                    let mut node = multi.clone();
                    for a in 0..dim {
                        node[a] += (corner >> a) & 1;
                    }
                    avg += level[g.node_index(&node)];
                }
                avg /= corners as f64;
                s += b.radial_profile(t, &g.cell_center(c), avg.abs());
            }
            s
        })
        .collect();
    per_slab.iter().sum::<f64>() * w
}

const LUX_LO: f64 = 1e-12;
const LUX_HI: f64 = 1e12;
const LUX_TOL: f64 = 1e-8;

/// Luxemburg norm inf{lambda > 0 : modular(M, xi/lambda) <= 1} by bisection in
/// [1e-12, 1e12] to 1e-8 relative; 0 for the zero field.
pub fn luxemburg_norm(m: &NFunctionSpec, xi: &VecField) -> Result<f64> {
    if xi.values.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let rho = |lambda: f64| modular(m, &xi.scale(1.0 / lambda));
    if !(rho(LUX_HI) <= 1.0) {
        return Err(Error::UnboundedNorm { limit: LUX_HI });
    }
    if rho(LUX_LO) <= 1.0 {
        return Ok(LUX_LO);
    }
    let (mut lo, mut hi) = (LUX_LO, LUX_HI);
    // invariant: rho(lo) > 1 >= rho(hi)
    while (hi - lo) > LUX_TOL * hi {
        let mid = (lo * hi).sqrt(); // geometric: the bracket spans 24 decades
        if rho(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Generalised Hölder inequality: |integral of xi . eta| <= 2 ||xi||_M ||eta||_{M*}.
pub fn holder_pairing_check(
    m: &NFunctionSpec,
    xi: &VecField,
    eta: &VecField,
    search: &ConjugateSearch,
) -> Result<HolderCheck> {
    let g = &xi.grid;
    let w = g.slab_cell_volume();
    let mut pairing = 0.0;
    for k in 0..g.nt {
        for c in 0..g.cell_count() {
            pairing += dot(xi.at(k, c), eta.at(k, c));
        }
    }
    let lhs = (pairing * w).abs();

    let norm_xi = luxemburg_norm(m, xi)?;
    // Luxemburg norm under M*: reuse the bisection against the conjugate modular.
    let norm_eta = {
        if eta.values.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            let rho = |lambda: f64| modular_conjugate(m, &eta.scale(1.0 / lambda), search);
            if !(rho(LUX_HI)? <= 1.0) {
                return Err(Error::UnboundedNorm { limit: LUX_HI });
            }
            let (mut lo, mut hi) = (LUX_LO, LUX_HI);
            if rho(lo)? <= 1.0 {
                lo = 0.0;
                hi = LUX_LO;
            }
            while hi > 0.0 && (hi - lo) > LUX_TOL * hi {
                let mid = if lo == 0.0 { hi / 2.0 } else { (lo * hi).sqrt() };
                if rho(mid)? <= 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    let rhs = 2.0 * norm_xi * norm_eta;
    Ok(HolderCheck { lhs, rhs, pass: lhs <= rhs + 1e-9 * (1.0 + rhs) })
}

#[derive(Debug, Clone)]
pub struct ModularConvergence {
    /// Smallest dyadic lambda witnessing modular convergence, if any.
    pub lambda: Option<f64>,
    /// (lambda, modular of (xi_i - limit)/lambda per sequence index).
    pub table: Vec<(f64, Vec<f64>)>,
}

/// Searches lambda over {2^0, ..., 2^20} for a witness of modular convergence:
/// the modulars of (xi_i - limit)/lambda must be nonincreasing over the tail
/// (second half) and end below `tol`.
pub fn modular_convergence_test(
    m: &NFunctionSpec,
    sequence: &[VecField],
    limit: &VecField,
    tol: f64,
) -> Result<ModularConvergence> {
    if sequence.is_empty() {
        return Err(Error::InvalidInput("empty sequence".into()));
    }
    let diffs: Vec<VecField> = sequence.iter().map(|xi| xi.sub(limit)).collect();
    let mut table = Vec::new();
    let mut found = None;
    for k in 0..=20u32 {
        let lambda = f64::from(2u32.pow(k));
        let moduli: Vec<f64> = diffs.iter().map(|d| modular(m, &d.scale(1.0 / lambda))).collect();
        let tail = &moduli[moduli.len() / 2..];
        let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0]));
        let small = tail.last().is_some_and(|&v| v <= tol);
        table.push((lambda, moduli));
        if nonincreasing && small {
            found = Some(lambda);
            break;
        }
    }
    Ok(ModularConvergence { lambda: found, table })
}

#[derive(Debug, Clone)]
pub struct PoincareCheck {
    /// integral of B(|g|)
    pub lhs: f64,
    /// integral of B(|grad g|)
    pub rhs: f64,
    /// lhs/rhs; 0 when both vanish
    pub ratio: f64,
}

/// Modular Poincaré probe with unit probe constants: compares the modular of
/// |g| against the modular of |grad g| and reports the empirical ratio.
pub fn poincare_check(b: &NFunctionSpec, g: &ScalarField) -> Result<PoincareCheck> {
    if !b.isotropic {
        return Err(Error::InvalidInput("Poincaré probe needs an isotropic modular function".into()));
    }
    if !g.is_dirichlet_admissible(1e-10) {
        return Err(Error::InvalidInput("field is not zero on the boundary".into()));
    }
    let lhs = modular_scalar(b, g);
    let rhs = modular(b, &g.gradient());
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(PoincareCheck { lhs, rhs, ratio })
}

/// Tail mass sup over the family of the integral of |xi| over {|xi| >= r}.
/// Used to probe uniform integrability of modular-bounded families.
pub fn tail_mass(fields: &[VecField], r: f64) -> f64 {
    let mut worst = 0.0f64;
    for xi in fields {
        let g = &xi.grid;
        let w = g.slab_cell_volume();
        let mut s = 0.0;
        for k in 0..g.nt {
            for c in 0..g.cell_count() {
                let n = norm(xi.at(k, c));
                if n >= r {
                    s += n * w;
                }
            }
        }
        worst = worst.max(s);
    }
    worst
}
