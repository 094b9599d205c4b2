//! Uniform tensor grids over the space-time cylinder (0,T) x Omega.
//!
//! Scalar fields live on nodes (boundary included, `nt + 1` time levels).
//! Vector fields live on space-time cell centers, which is where midpoint
//! quadrature samples the integrand.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    pub t_final: f64,
    pub nt: usize,
    /// Lower corner of the spatial box.
    pub origin: Vec<f64>,
    /// Edge lengths of the spatial box.
    pub lengths: Vec<f64>,
    /// Nodes per axis, boundary included (>= 2 each).
    pub nx: Vec<usize>,
}

impl GridDomain {
    pub fn new(t_final: f64, nt: usize, origin: &[f64], lengths: &[f64], nx: &[usize]) -> Result<Self> {
        if t_final <= 0.0 || nt == 0 {
            return Err(Error::InvalidInput("need T > 0 and nt >= 1".into()));
        }
        if origin.len() != lengths.len() || origin.len() != nx.len() || origin.is_empty() {
            return Err(Error::InvalidInput("axis descriptions must agree and be nonempty".into()));
        }
        if lengths.iter().any(|&l| l <= 0.0) || nx.iter().any(|&n| n < 2) {
            return Err(Error::InvalidInput("need positive edge lengths and >= 2 nodes per axis".into()));
        }
        Ok(Self {
            t_final,
            nt,
            origin: origin.to_vec(),
            lengths: lengths.to_vec(),
            nx: nx.to_vec(),
        })
    }

    /// Unit box (0,1)^dim centered at the origin candidate given by `origin`.
    /// Convenience for tests: box [-1/2, 1/2]^dim when `centered`, else [0,1]^dim.
    pub fn unit_box(t_final: f64, nt: usize, dim: usize, nodes: usize, centered: bool) -> Self {
        let origin = if centered { vec![-0.5; dim] } else { vec![0.0; dim] };
        Self::new(t_final, nt, &origin, &vec![1.0; dim], &vec![nodes; dim]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.nx.len()
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.lengths[axis] / (self.nx[axis] - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        self.nx.iter().product()
    }

    pub fn cells_per_axis(&self, axis: usize) -> usize {
        self.nx[axis] - 1
    }

    pub fn cell_count(&self) -> usize {
        self.nx.iter().map(|n| n - 1).product()
    }

    /// Spatial cell volume (product of grid spacings).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.dx(a)).product()
    }

    /// Space-time cell volume dt * dx^N.
    pub fn slab_cell_volume(&self) -> f64 {
        self.dt() * self.cell_volume()
    }

    pub fn spatial_measure(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &i) in multi.iter().enumerate() {
            idx = idx * self.nx[a] + i;
        }
        idx
    }

    pub fn node_multi(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0usize; self.dim()];
        for a in (0..self.dim()).rev() {
            multi[a] = idx % self.nx[a];
            idx /= self.nx[a];
        }
        multi
    }

    pub fn node_pos(&self, idx: usize) -> Vec<f64> {
        let multi = self.node_multi(idx);
        multi
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + i as f64 * self.dx(a))
            .collect()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let multi = self.node_multi(idx);
        multi.iter().enumerate().any(|(a, &i)| i == 0 || i == self.nx[a] - 1)
    }

    pub fn cell_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &i) in multi.iter().enumerate() {
            idx = idx * (self.nx[a] - 1) + i;
        }
        idx
    }

    pub fn cell_multi(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0usize; self.dim()];
        for a in (0..self.dim()).rev() {
            multi[a] = idx % (self.nx[a] - 1);
            idx /= self.nx[a] - 1;
        }
        multi
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        let multi = self.cell_multi(idx);
        multi
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + (i as f64 + 0.5) * self.dx(a))
            .collect()
    }

    /// Time of node level k (k = 0..=nt).
    pub fn time_level(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Midpoint time of slab k (k = 0..nt).
    pub fn slab_time(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dt()
    }

    /// Center of the spatial box; the star center for mollification.
    pub fn box_center(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.origin[a] + 0.5 * self.lengths[a]).collect()
    }

    /// Radius of the inscribed ball around the box center.
    pub fn inner_radius(&self) -> f64 {
        self.lengths.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(a, &xi)| xi >= self.origin[a] && xi <= self.origin[a] + self.lengths[a])
    }
}
