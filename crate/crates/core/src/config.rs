//! Problem definitions from a TOML file with nested tables: `[grid]`,
//! `[flux]`, `[data]`, `[solver]`, `[balance]`. Data fields `f` and `u0` are
//! either arithmetic expressions in `t, x1..xN` or paths to CSV files with one
//! node value per line (levels concatenated for `f`).

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::ScalarField;
use crate::flux::{flux_catalog, regularize, FluxSpec};
use crate::grid::GridDomain;
use crate::solver::{Problem, SolverOpts};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_final: f64,
    pub nt: usize,
    pub nx: Vec<usize>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    pub key: String,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub theta_ladder: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default)]
    pub f_csv: Option<String>,
    #[serde(default)]
    pub u0: Option<String>,
    #[serde(default)]
    pub u0_csv: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_newton: f64,
    pub max_newton: usize,
    pub max_cg: usize,
    pub picard: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOpts::default();
        Self { tol_newton: o.tol_newton, max_newton: o.max_newton, max_cg: o.max_cg, picard: o.picard }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BalanceConfig {
    /// "arbitrary" probes s = delta^-N; "power_p" probes s = delta^(-N/p).
    pub growth: String,
    pub p: f64,
    pub deltas: Vec<f64>,
    pub seed: u64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        Self {
            growth: "power_p".into(),
            p: 2.0,
            deltas: vec![0.25, 0.125, 0.0625, 0.03125],
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridConfig,
    pub flux: FluxConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub balance: BalanceConfig,
}

fn read_csv_column(path: &str, expected: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut vals = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        // accept one value per line, or the last column of a comma row
        let cell = line.rsplit(',').next().unwrap().trim();
        vals.push(
            cell.parse::<f64>()
                .map_err(|_| Error::Config(format!("{path}:{}: bad number '{cell}'", ln + 1)))?,
        );
    }
    if vals.len() != expected {
        return Err(Error::Config(format!(
            "{path}: expected {expected} values, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

impl Config {
    pub fn from_str_toml(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_str_toml(&text)
    }

    pub fn build_grid(&self) -> Result<GridDomain> {
        let g = &self.grid;
        let dim = g.nx.len();
        let origin = g.origin.clone().unwrap_or_else(|| vec![0.0; dim]);
        let lengths = g.lengths.clone().unwrap_or_else(|| vec![1.0; dim]);
        if origin.len() != dim || lengths.len() != dim {
            return Err(Error::Config("origin/lengths must match the nx dimension".into()));
        }
        GridDomain::new(g.t_final, g.nt, &origin, &lengths, &g.nx)
    }

    pub fn build_flux(&self) -> Result<FluxSpec> {
        flux_catalog(&self.flux.key, self.grid.nx.len())
    }

    /// The theta ladder: explicit list if given, otherwise four halvings of
    /// `theta` (or the single value 0 when theta = 0).
    pub fn theta_ladder(&self) -> Vec<f64> {
        if let Some(l) = &self.flux.theta_ladder {
            return l.clone();
        }
        if self.flux.theta == 0.0 {
            return vec![0.0];
        }
        (0..4).map(|i| self.flux.theta / f64::powi(2.0, i)).collect()
    }

    pub fn solver_opts(&self) -> SolverOpts {
        SolverOpts {
            tol_newton: self.solver.tol_newton,
            max_newton: self.solver.max_newton,
            max_cg: self.solver.max_cg,
            picard: self.solver.picard,
        }
    }

    pub fn build_source(&self, grid: &GridDomain) -> Result<ScalarField> {
        match (&self.data.f, &self.data.f_csv) {
            (Some(_), Some(_)) => Err(Error::Config("give f as expression or CSV, not both".into())),
            (Some(src), None) => {
                let e = Expr::parse_spacetime(src, grid.dim())?;
                Ok(ScalarField::from_fn(grid, |t, x| e.eval_spacetime(t, x)))
            }
            (None, Some(path)) => {
                let vals = read_csv_column(path, (grid.nt + 1) * grid.node_count())?;
                let mut f = ScalarField::zeros(grid);
                f.values = vals;
                Ok(f)
            }
            (None, None) => Ok(ScalarField::zeros(grid)),
        }
    }

    pub fn build_initial(&self, grid: &GridDomain) -> Result<Vec<f64>> {
        match (&self.data.u0, &self.data.u0_csv) {
            (Some(_), Some(_)) => Err(Error::Config("give u0 as expression or CSV, not both".into())),
            (Some(src), None) => {
                let e = Expr::parse_spacetime(src, grid.dim())?;
                Ok((0..grid.node_count())
                    .map(|i| e.eval_spacetime(0.0, &grid.node_pos(i)))
                    .collect())
            }
            (None, Some(path)) => read_csv_column(path, grid.node_count()),
            (None, None) => Ok(vec![0.0; grid.node_count()]),
        }
    }

    /// Assembles the full problem at the configured theta.
    pub fn build_problem(&self) -> Result<Problem> {
        let grid = self.build_grid()?;
        let flux = regularize(&self.build_flux()?, self.flux.theta)?;
        let f = self.build_source(&grid)?;
        let u0 = self.build_initial(&grid)?;
        Problem::new(grid, flux, f, u0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"
        [grid]
        t_final = 0.1
        nt = 16
        nx = [33]

        [flux]
        key = "p_laplace(2)"

        [data]
        u0 = "sin(pi*x1)"
    "#;

    #[test]
    fn parses_and_builds_heat_problem() {
        let cfg = Config::from_str_toml(HEAT).unwrap();
        let p = cfg.build_problem().unwrap();
        assert_eq!(p.grid.nt, 16);
        assert_eq!(p.grid.dim(), 1);
        assert_eq!(p.f.sup_norm(), 0.0);
        let mid = p.grid.node_count() / 2;
        assert!((p.u0[mid] - 1.0).abs() < 1e-2);
        assert_eq!(cfg.theta_ladder(), vec![0.0]);
        assert_eq!(cfg.solver_opts().tol_newton, 1e-10);
    }

    #[test]
    fn theta_ladder_defaults_to_halvings() {
        let mut cfg = Config::from_str_toml(HEAT).unwrap();
        cfg.flux.theta = 0.2;
        assert_eq!(cfg.theta_ladder(), vec![0.2, 0.1, 0.05, 0.025]);
        cfg.flux.theta_ladder = Some(vec![0.3, 0.1]);
        assert_eq!(cfg.theta_ladder(), vec![0.3, 0.1]);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_dims() {
        let bad = HEAT.replace("[data]", "[data]\n        bogus = 1");
        assert!(Config::from_str_toml(&bad).is_err());
        let mut cfg = Config::from_str_toml(HEAT).unwrap();
        cfg.grid.origin = Some(vec![0.0, 0.0]);
        assert!(matches!(cfg.build_grid(), Err(Error::Config(_))));
    }

    #[test]
    fn csv_data_roundtrip() {
        let dir = std::env::temp_dir().join("musielak-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u0.csv");
        let cfg = Config::from_str_toml(HEAT).unwrap();
        let grid = cfg.build_grid().unwrap();
        let rows: Vec<String> = (0..grid.node_count()).map(|i| format!("{}", i as f64)).collect();
        std::fs::write(&path, rows.join("\n")).unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.data.u0 = None;
        cfg2.data.u0_csv = Some(path.to_string_lossy().into_owned());
        let u0 = cfg2.build_initial(&grid).unwrap();
        assert_eq!(u0[5], 5.0);
        // wrong length is rejected
        std::fs::write(&path, "1.0\n2.0").unwrap();
        assert!(cfg2.build_initial(&grid).is_err());
    }
}
