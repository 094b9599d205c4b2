//! Discrete scalar and vector fields on a [`GridDomain`].

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::GridDomain;

/// Scalar function on space-time nodes: `nt + 1` time levels, nodes include the boundary.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: GridDomain,
    /// Layout `[time_level][node]`, row-major nodes.
    pub values: Vec<f64>,
}

/// Vector field sampled at space-time cell centers: `nt` slabs, `dim` components per cell.
#[derive(Debug, Clone)]
pub struct VecField {
    pub grid: GridDomain,
    /// Layout `[slab][cell][component]`.
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &GridDomain) -> Self {
        let n = (grid.nt + 1) * grid.node_count();
        Self { grid: grid.clone(), values: vec![0.0; n] }
    }

    pub fn from_fn(grid: &GridDomain, f: impl Fn(f64, &[f64]) -> f64) -> Self {
        let nn = grid.node_count();
        let mut values = Vec::with_capacity((grid.nt + 1) * nn);
        for k in 0..=grid.nt {
            let t = grid.time_level(k);
            for i in 0..nn {
                values.push(f(t, &grid.node_pos(i)));
            }
        }
        Self { grid: grid.clone(), values }
    }

    pub fn at(&self, level: usize, node: usize) -> f64 {
        self.values[level * self.grid.node_count() + node]
    }

    pub fn at_mut(&mut self, level: usize, node: usize) -> &mut f64 {
        let nn = self.grid.node_count();
        &mut self.values[level * nn + node]
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let nn = self.grid.node_count();
        &self.values[k * nn..(k + 1) * nn]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        let nn = self.grid.node_count();
        &mut self.values[k * nn..(k + 1) * nn]
    }

    pub fn set_level(&mut self, k: usize, data: &[f64]) {
        self.level_mut(k).copy_from_slice(data);
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Zero on the boundary at every time level.
    pub fn is_dirichlet_admissible(&self, tol: f64) -> bool {
        let nn = self.grid.node_count();
        (0..=self.grid.nt).all(|k| {
            (0..nn).all(|i| !self.grid.is_boundary(i) || self.at(k, i).abs() <= tol)
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// L^2(Omega) norm of one time level (node quadrature, boundary weights are harmless
    /// for Dirichlet fields).
    pub fn l2_level(&self, k: usize) -> f64 {
        let dv = self.grid.cell_volume();
        self.level(k).iter().map(|v| v * v * dv).sum::<f64>().sqrt()
    }

    /// L^2(Omega_T) distance to another field on the same grid.
    pub fn l2_space_time_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        let w = self.grid.cell_volume() * self.grid.dt();
        let mut acc = 0.0;
        // trapezoid in time over levels
        for k in 0..=self.grid.nt {
            let tw = if k == 0 || k == self.grid.nt { 0.5 } else { 1.0 };
            let a = self.level(k);
            let b = other.level(k);
            let mut s = 0.0;
            for (x, y) in a.iter().zip(b) {
                let d = x - y;
                s += d * d;
            }
            acc += tw * s * w;
        }
        acc.sqrt()
    }

    pub fn l1_space_time_distance(&self, other: &Self) -> f64 {
        let w = self.grid.cell_volume() * self.grid.dt();
        let mut acc = 0.0;
        for k in 0..=self.grid.nt {
            let tw = if k == 0 || k == self.grid.nt { 0.5 } else { 1.0 };
            let a = self.level(k);
            let b = other.level(k);
            acc += tw * w * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        }
        acc
    }

    /// Symmetric truncation clamping values to [-k, k].
    pub fn truncate(&self, k: f64) -> Self {
        assert!(k >= 0.0);
        let values = self.values.iter().map(|&v| v.clamp(-k, k)).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Space-time gradient sampled at cell centers. Slab `k` differentiates the
    /// upper time level `k + 1` (the backward-Euler association).
    pub fn gradient(&self) -> VecField {
        let g = &self.grid;
        let dim = g.dim();
        let nc = g.cell_count();
        let mut out = vec![0.0; g.nt * nc * dim];
        for k in 0..g.nt {
            let u = self.level(k + 1);
            for c in 0..nc {
                let grad = cell_gradient(g, u, c);
                let base = (k * nc + c) * dim;
                out[base..base + dim].copy_from_slice(&grad);
            }
        }
        VecField { grid: g.clone(), values: out }
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let g = &self.grid;
        write!(w, "t")?;
        for a in 0..g.dim() {
            write!(w, ",x{}", a + 1)?;
        }
        writeln!(w, ",value")?;
        for k in 0..=g.nt {
            let t = g.time_level(k);
            for i in 0..g.node_count() {
                let pos = g.node_pos(i);
                write!(w, "{:.16e}", t)?;
                for p in &pos {
                    write!(w, ",{:.16e}", p)?;
                }
                writeln!(w, ",{:.16e}", self.at(k, i))?;
            }
        }
        Ok(())
    }

    /// Binary dump: header of u64 dims (nt+1, nodes per axis...), then row-major f64 values.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        let g = &self.grid;
        w.write_all(&(g.dim() as u64 + 1).to_le_bytes())?;
        w.write_all(&((g.nt + 1) as u64).to_le_bytes())?;
        for &n in &g.nx {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Central-difference gradient of a node level at the center of cell `c`.
/// Along axis `a` the exact staggered differences over the cell's `a`-edges are
/// averaged, which lands on the cell center at second order.
pub fn cell_gradient(g: &GridDomain, level: &[f64], c: usize) -> Vec<f64> {
    let dim = g.dim();
    let multi = g.cell_multi(c);
    let mut grad = vec![0.0; dim];
    // iterate over the 2^dim cell corners
    let corners = 1usize << dim;
    for a in 0..dim {
        let dx = g.dx(a);
        let mut acc = 0.0;
        let mut cnt = 0.0;
        for corner in 0..corners {
            if corner & (1 << a) != 0 {
                continue; // pair each corner with its +a neighbour once
            }
            let mut lo = multi.clone();
            let mut hi = multi.clone();
            for b in 0..dim {
                let off = (corner >> b) & 1;
                lo[b] += off;
                hi[b] += off;
            }
            hi[a] += 1;
            acc += (level[g.node_index(&hi)] - level[g.node_index(&lo)]) / dx;
            cnt += 1.0;
        }
        grad[a] = acc / cnt;
    }
    grad
}

impl VecField {
    pub fn zeros(grid: &GridDomain) -> Self {
        let n = grid.nt * grid.cell_count() * grid.dim();
        Self { grid: grid.clone(), values: vec![0.0; n] }
    }

    pub fn from_fn(grid: &GridDomain, f: impl Fn(f64, &[f64]) -> Vec<f64>) -> Self {
        let dim = grid.dim();
        let nc = grid.cell_count();
        let mut values = Vec::with_capacity(grid.nt * nc * dim);
        for k in 0..grid.nt {
            let t = grid.slab_time(k);
            for c in 0..nc {
                let v = f(t, &grid.cell_center(c));
                assert_eq!(v.len(), dim);
                values.extend_from_slice(&v);
            }
        }
        Self { grid: grid.clone(), values }
    }

    pub fn constant(grid: &GridDomain, v: &[f64]) -> Self {
        Self::from_fn(grid, |_, _| v.to_vec())
    }

    pub fn at(&self, slab: usize, cell: usize) -> &[f64] {
        let dim = self.grid.dim();
        let base = (slab * self.grid.cell_count() + cell) * dim;
        &self.values[base..base + dim]
    }

    pub fn at_mut(&mut self, slab: usize, cell: usize) -> &mut [f64] {
        let dim = self.grid.dim();
        let base = (slab * self.grid.cell_count() + cell) * dim;
        &mut self.values[base..base + dim]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        let dim = self.grid.dim();
        let mut m = 0.0f64;
        for chunk in self.values.chunks_exact(dim) {
            m = m.max(norm(chunk));
        }
        m
    }

    /// sup over time slabs of the spatial L^1 norm of |xi|.
    pub fn sup_time_l1_space(&self) -> f64 {
        let dim = self.grid.dim();
        let nc = self.grid.cell_count();
        let dv = self.grid.cell_volume();
        let mut worst = 0.0f64;
        for k in 0..self.grid.nt {
            let mut s = 0.0;
            for c in 0..nc {
                let base = (k * nc + c) * dim;
                s += norm(&self.values[base..base + dim]) * dv;
            }
            worst = worst.max(s);
        }
        worst
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks the V_T^{M,inf} membership conjunction for a discrete field: finite
/// gradient modular, finite sup-in-time L^2 norm, zero trace on the boundary.
pub fn check_energy_class(
    u: &ScalarField,
    gradient_modular: f64,
) -> Result<()> {
    if !u.is_finite() {
        return Err(Error::NonFinite("field values".into()));
    }
    if !u.is_dirichlet_admissible(1e-12) {
        return Err(Error::InvalidInput("field is not zero on the boundary".into()));
    }
    if !gradient_modular.is_finite() {
        return Err(Error::NonFinite("gradient modular".into()));
    }
    let sup_l2 = (0..=u.grid.nt).map(|k| u.l2_level(k)).fold(0.0f64, f64::max);
    if !sup_l2.is_finite() {
        return Err(Error::NonFinite("sup-in-time L2 norm".into()));
    }
    Ok(())
}
