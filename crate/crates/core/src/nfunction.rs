//! Generalized N-functions M(t, x, xi): axiom checks, Fenchel conjugation,
//! gradients, and doubling-constant estimation.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::profile::conjugate_scan;

pub type EvalFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(f64, &[f64], f64) -> f64 + Send + Sync>;

/// A modular function M(t, x, xi) with the metadata the toolkit needs to pick
/// evaluation strategies.
#[derive(Clone)]
pub struct NFunctionSpec {
    pub dim: usize,
    pub isotropic: bool,
    pub homogeneous: bool,
    eval: EvalFn,
    /// Radial profile for isotropic functions: M(t, x, s e) for any unit e.
    radial: Option<RadialFn>,
    /// Per-coordinate profiles when M(t,x,xi) = sum_i m_i(t,x,|xi_i|).
    separable: Option<Vec<RadialFn>>,
    pub analytic_conjugate: Option<EvalFn>,
    /// (p, c_gr) when the power-type lower bound M >= c_gr |xi|^p is claimed.
    pub growth_exponent_p: Option<(f64, f64)>,
}

impl std::fmt::Debug for NFunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NFunctionSpec")
            .field("dim", &self.dim)
            .field("isotropic", &self.isotropic)
            .field("homogeneous", &self.homogeneous)
            .field("growth_exponent_p", &self.growth_exponent_p)
            .finish()
    }
}

impl NFunctionSpec {
    pub fn new(dim: usize, eval: EvalFn) -> Self {
        Self {
            dim,
            isotropic: false,
            homogeneous: false,
            eval,
            radial: None,
            separable: None,
            analytic_conjugate: None,
            growth_exponent_p: None,
        }
    }

    /// Isotropic constructor from a radial profile s -> M(t, x, s).
    pub fn isotropic(dim: usize, radial: RadialFn) -> Self {
        let r = radial.clone();
        let eval: EvalFn = Arc::new(move |t, x, xi| {
            let s = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            r(t, x, s)
        });
        Self {
            dim,
            isotropic: true,
            homogeneous: false,
            eval,
            radial: Some(radial),
            separable: None,
            analytic_conjugate: None,
            growth_exponent_p: None,
        }
    }

    /// Separable constructor: M(t,x,xi) = sum_i m_i(t,x,|xi_i|).
    pub fn separable(parts: Vec<RadialFn>) -> Self {
        let dim = parts.len();
        let p = parts.clone();
        let eval: EvalFn = Arc::new(move |t, x, xi| {
            xi.iter().zip(&p).map(|(&v, m)| m(t, x, v.abs())).sum()
        });
        Self {
            dim,
            isotropic: false,
            homogeneous: false,
            eval,
            radial: None,
            separable: Some(parts),
            analytic_conjugate: None,
            growth_exponent_p: None,
        }
    }

    pub fn with_homogeneous(mut self, yes: bool) -> Self {
        self.homogeneous = yes;
        self
    }

    pub fn with_analytic_conjugate(mut self, conj: EvalFn) -> Self {
        self.analytic_conjugate = Some(conj);
        self
    }

    pub fn with_growth_exponent(mut self, p: f64, c_gr: f64) -> Self {
        self.growth_exponent_p = Some((p, c_gr));
        self
    }

    pub fn eval(&self, t: f64, x: &[f64], xi: &[f64]) -> f64 {
        (self.eval)(t, x, xi)
    }

    pub fn radial_profile(&self, t: f64, x: &[f64], s: f64) -> f64 {
        match &self.radial {
            Some(r) => r(t, x, s),
            None => {
                let mut xi = vec![0.0; self.dim];
                xi[0] = s;
                self.eval(t, x, &xi)
            }
        }
    }

    pub fn is_separable(&self) -> bool {
        self.separable.is_some()
    }

    /// Conjugate M*(t, x, eta) through the best available route:
    /// analytic > separable (per-coordinate 1D) > isotropic radial > brute force.
    pub fn conjugate(&self, t: f64, x: &[f64], eta: &[f64], search: &ConjugateSearch) -> Result<Conjugate> {
        if let Some(c) = &self.analytic_conjugate {
            let v = c(t, x, eta);
            if !v.is_finite() {
                return Err(Error::NonFinite("analytic conjugate".into()));
            }
            return Ok(Conjugate { value: v, truncated: false });
        }
        if let Some(parts) = &self.separable {
            let mut value = 0.0;
            let mut truncated = false;
            for (i, m) in parts.iter().enumerate() {
                let (v, tr) = conjugate_scan(|s| m(t, x, s), eta[i].abs(), search.radius, search.resolution);
                value += v;
                truncated |= tr;
            }
            return Ok(Conjugate { value, truncated });
        }
        if self.isotropic {
            let r = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
            let (value, truncated) =
                conjugate_scan(|s| self.radial_profile(t, x, s), r, search.radius, search.resolution);
            return Ok(Conjugate { value, truncated });
        }
        conjugate_nd(self, t, x, eta, search)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Conjugate {
    pub value: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ConjugateSearch {
    pub radius: f64,
    pub resolution: usize,
}

impl Default for ConjugateSearch {
    fn default() -> Self {
        Self { radius: 1e3, resolution: 2048 }
    }
}

/// Brute-force conjugate over a sampled ball; dim <= 3 only.
pub fn conjugate_nd(
    m: &NFunctionSpec,
    t: f64,
    x: &[f64],
    eta: &[f64],
    search: &ConjugateSearch,
) -> Result<Conjugate> {
    if m.dim > 3 {
        return Err(Error::InvalidInput(format!("brute-force conjugation limited to dim <= 3, got {}", m.dim)));
    }
    if eta.iter().all(|&e| e == 0.0) {
        return Ok(Conjugate { value: 0.0, truncated: false });
    }
    let n = search.resolution.max(8);
    let h = 2.0 * search.radius / n as f64;
    let mut best = 0.0f64;
    let mut boundary = false;
    let mut xi = vec![0.0f64; m.dim];
    let total: usize = (n + 1).pow(m.dim as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut on_edge = false;
        for c in xi.iter_mut() {
            let i = rem % (n + 1);
            rem /= n + 1;
            *c = -search.radius + i as f64 * h;
            on_edge |= i == 0 || i == n;
        }
        let v = m.eval(t, x, &xi);
        if !v.is_finite() {
            continue;
        }
        let cand = xi.iter().zip(eta).map(|(a, b)| a * b).sum::<f64>() - v;
        if cand > best {
            best = cand;
            boundary = on_edge;
        }
    }
    Ok(Conjugate { value: best, truncated: boundary })
}

/// Where axioms and residuals get sampled.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// Radial magnitudes for xi probes; must include a near-zero shell and s_max.
    pub magnitudes: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl SamplingPlan {
    /// Default plan over [0,T] x a box around the origin, magnitudes log-spaced
    /// in [s_min, s_max], axis + diagonal directions.
    pub fn default_plan(dim: usize, t_final: f64, half_width: f64, s_max: f64) -> Self {
        let times = (0..4).map(|i| t_final * i as f64 / 3.0).collect();
        let mut points = Vec::new();
        let steps = 3usize;
        let total = (steps + 1).pow(dim as u32);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = vec![0.0; dim];
            for c in p.iter_mut() {
                let i = rem % (steps + 1);
                rem /= steps + 1;
                *c = -half_width + 2.0 * half_width * i as f64 / steps as f64;
            }
            points.push(p);
        }
        let s_min = 1e-4 * s_max.min(1.0);
        let magnitudes = (0..16)
            .map(|i| s_min * (s_max / s_min).powf(i as f64 / 15.0))
            .collect();
        Self { times, points, magnitudes, directions: default_directions(dim, 0) }
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty() || self.points.is_empty() || self.magnitudes.is_empty() || self.directions.is_empty()
    }

    pub fn s_max(&self) -> f64 {
        self.magnitudes.iter().cloned().fold(0.0, f64::max)
    }

    pub fn s_min(&self) -> f64 {
        self.magnitudes.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Coordinate axes, the main diagonal, and `extra` seeded random unit vectors.
pub fn default_directions(dim: usize, extra: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for a in 0..dim {
        let mut d = vec![0.0; dim];
        d[a] = 1.0;
        dirs.push(d);
    }
    if dim > 1 {
        let v = 1.0 / (dim as f64).sqrt();
        dirs.push(vec![v; dim]);
        let mut alt = vec![v; dim];
        alt[0] = -v;
        dirs.push(alt);
    }
    if extra > 0 {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..extra {
            let mut d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = crate::field::norm(&d);
            if n > 1e-9 {
                d.iter_mut().for_each(|c| *c /= n);
                dirs.push(d);
            }
        }
    }
    dirs
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxiomOutcome {
    Pass,
    Fail { witness: (f64, Vec<f64>, Vec<f64>), detail: String },
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub zero_at_origin: AxiomOutcome,
    pub symmetry: AxiomOutcome,
    pub convexity: AxiomOutcome,
    pub sublinear_at_zero: AxiomOutcome,
    pub superlinear_at_infinity: AxiomOutcome,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        [
            &self.zero_at_origin,
            &self.symmetry,
            &self.convexity,
            &self.sublinear_at_zero,
            &self.superlinear_at_infinity,
        ]
        .iter()
        .all(|a| matches!(a, AxiomOutcome::Pass))
    }
}

/// Samples the N-function axioms. Caratheodory measurability is not checkable;
/// the remaining axioms are verified on the plan's (t, x, xi) product grid.
pub fn check_axioms(m: &NFunctionSpec, plan: &SamplingPlan) -> Result<AxiomReport> {
    if plan.is_empty() {
        return Err(Error::InvalidInput("empty sampling plan".into()));
    }
    let mut zero = AxiomOutcome::Pass;
    let mut sym = AxiomOutcome::Pass;
    let mut convex = AxiomOutcome::Pass;
    let mut sub = AxiomOutcome::Pass;
    let mut sup = AxiomOutcome::Pass;

    let s_min = plan.s_min();
    let s_max = plan.s_max();
    for &t in &plan.times {
        for x in &plan.points {
            let origin = vec![0.0; m.dim];
            let v0 = m.eval(t, x, &origin);
            if v0.abs() > 1e-12 && matches!(zero, AxiomOutcome::Pass) {
                zero = AxiomOutcome::Fail {
                    witness: (t, x.clone(), origin.clone()),
                    detail: format!("M(t,x,0) = {v0:.3e}"),
                };
            }
            for dir in &plan.directions {
                for &s in &plan.magnitudes {
                    let xi: Vec<f64> = dir.iter().map(|d| d * s).collect();
                    let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
                    let v = m.eval(t, x, &xi);
                    let vn = m.eval(t, x, &neg);
                    if v.is_finite()
                        && vn.is_finite()
                        && (v - vn).abs() > 1e-9 * (1.0 + v.abs())
                        && matches!(sym, AxiomOutcome::Pass)
                    {
                        sym = AxiomOutcome::Fail {
                            witness: (t, x.clone(), xi.clone()),
                            detail: format!("M(xi) = {v:.6e} but M(-xi) = {vn:.6e}"),
                        };
                    }
                }
                // midpoint convexity along the ray and across the origin
                for w in plan.magnitudes.windows(2) {
                    let (s1, s2) = (w[0], w[1]);
                    let a: Vec<f64> = dir.iter().map(|d| d * s1).collect();
                    let b: Vec<f64> = dir.iter().map(|d| d * s2).collect();
                    let mid: Vec<f64> = dir.iter().map(|d| d * 0.5 * (s1 + s2)).collect();
                    let (va, vb, vm) = (m.eval(t, x, &a), m.eval(t, x, &b), m.eval(t, x, &mid));
                    if va.is_finite()
                        && vb.is_finite()
                        && vm > 0.5 * (va + vb) + 1e-9 * (1.0 + va.abs() + vb.abs())
                        && matches!(convex, AxiomOutcome::Pass)
                    {
                        convex = AxiomOutcome::Fail {
                            witness: (t, x.clone(), mid.clone()),
                            detail: "midpoint convexity violated".into(),
                        };
                    }
                }
                // growth-ratio proxies at the ends of the ladder
                let small: Vec<f64> = dir.iter().map(|d| d * s_min).collect();
                let large: Vec<f64> = dir.iter().map(|d| d * s_max).collect();
                let r_small = m.eval(t, x, &small) / s_min;
                let r_large = m.eval(t, x, &large) / s_max;
                if r_small > 0.1 && matches!(sub, AxiomOutcome::Pass) {
                    sub = AxiomOutcome::Fail {
                        witness: (t, x.clone(), small.clone()),
                        detail: format!("M(xi)/|xi| = {r_small:.3e} at |xi| = {s_min:.1e}"),
                    };
                }
                if r_large.is_finite() && r_large < r_small + 1e-9 && matches!(sup, AxiomOutcome::Pass) {
                    sup = AxiomOutcome::Fail {
                        witness: (t, x.clone(), large.clone()),
                        detail: format!(
                            "M(xi)/|xi| did not grow: {r_large:.3e} at s_max vs {r_small:.3e} at s_min"
                        ),
                    };
                }
            }
        }
    }
    Ok(AxiomReport {
        zero_at_origin: zero,
        symmetry: sym,
        convexity: convex,
        sublinear_at_zero: sub,
        superlinear_at_infinity: sup,
    })
}

#[derive(Debug, Clone)]
pub struct ResidualStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub excluded_truncated: usize,
    pub count: usize,
}

/// Residual r = M(xi) + M*(eta) - xi . eta over the given pairs. Nonnegative up
/// to the conjugate's grid error; truncated conjugate values are excluded.
pub fn fenchel_young_residual(
    m: &NFunctionSpec,
    search: &ConjugateSearch,
    pairs: &[(f64, Vec<f64>, Vec<f64>, Vec<f64>)],
) -> Result<ResidualStats> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut excluded = 0usize;
    let mut count = 0usize;
    for (t, x, xi, eta) in pairs {
        let conj = m.conjugate(*t, x, eta, search)?;
        if conj.truncated {
            excluded += 1;
            continue;
        }
        let r = m.eval(*t, x, xi) + conj.value - crate::field::dot(xi, eta);
        if !r.is_finite() {
            continue;
        }
        min = min.min(r);
        max = max.max(r);
        sum += r;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidInput("no usable pairs (all truncated or non-finite)".into()));
    }
    Ok(ResidualStats { min, max, mean: sum / count as f64, excluded_truncated: excluded, count })
}

/// Gradient of the modular function in xi by central differences with
/// h = 1e-5 (1 + |xi|); returns zero at xi = 0 (subgradient selection).
pub fn flux_gradient(m: &NFunctionSpec, t: f64, x: &[f64], xi: &[f64]) -> Vec<f64> {
    let r = crate::field::norm(xi);
    if r == 0.0 {
        return vec![0.0; m.dim];
    }
    let h = 1e-5 * (1.0 + r);
    let mut g = vec![0.0; m.dim];
    let mut probe = xi.to_vec();
    for a in 0..m.dim {
        probe[a] = xi[a] + h;
        let fp = m.eval(t, x, &probe);
        probe[a] = xi[a] - h;
        let fm = m.eval(t, x, &probe);
        probe[a] = xi[a];
        g[a] = (fp - fm) / (2.0 * h);
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub enum Delta2Verdict {
    Bounded(f64),
    Unbounded { last_ratio: f64 },
}

/// Estimates sup M(t,x,2 xi)/M(t,x,xi) on a log ladder. The verdict is
/// "unbounded" if the ratio keeps growing by more than a factor 4 across the
/// top two decades of the ladder.
pub fn delta2_estimate(m: &NFunctionSpec, plan: &SamplingPlan) -> Result<Delta2Verdict> {
    if plan.is_empty() {
        return Err(Error::InvalidInput("empty sampling plan".into()));
    }
    let mags: Vec<f64> = plan.magnitudes.iter().cloned().filter(|&s| s > 0.0).collect();
    let mut sup_ratio = 0.0f64;
    let mut ratio_by_mag: Vec<f64> = Vec::new();
    for &s in &mags {
        let mut worst = 0.0f64;
        for &t in &plan.times {
            for x in &plan.points {
                for dir in &plan.directions {
                    let xi: Vec<f64> = dir.iter().map(|d| d * s).collect();
                    let xi2: Vec<f64> = dir.iter().map(|d| d * 2.0 * s).collect();
                    let denom = m.eval(t, x, &xi);
                    let numer = m.eval(t, x, &xi2);
                    if denom > 0.0 && numer.is_finite() {
                        worst = worst.max(numer / denom);
                    } else if denom > 0.0 && numer.is_infinite() {
                        worst = f64::INFINITY;
                    }
                }
            }
        }
        ratio_by_mag.push(worst);
        sup_ratio = sup_ratio.max(worst);
    }
    // growth check across the top two decades of the ladder
    let s_max = mags.iter().cloned().fold(0.0, f64::max);
    let decade_idx = |s: f64| (s_max / s).log10();
    let top: Vec<f64> = mags
        .iter()
        .zip(&ratio_by_mag)
        .filter(|(s, _)| decade_idx(**s) <= 2.0)
        .map(|(_, r)| *r)
        .collect();
    if sup_ratio.is_infinite() {
        return Ok(Delta2Verdict::Unbounded { last_ratio: f64::INFINITY });
    }
    if top.len() >= 2 {
        let grew = top.windows(2).all(|w| w[1] >= w[0]);
        let factor = top.last().unwrap() / top.first().unwrap().max(1e-300);
        if grew && factor > 4.0 {
            return Ok(Delta2Verdict::Unbounded { last_ratio: *top.last().unwrap() });
        }
    }
    Ok(Delta2Verdict::Bounded(sup_ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(dim: usize) -> NFunctionSpec {
        NFunctionSpec::isotropic(dim, Arc::new(|_, _, s| s * s)).with_homogeneous(true)
    }

    #[test]
    fn quadratic_passes_all_axioms() {
        let m = quadratic(2);
        let plan = SamplingPlan::default_plan(2, 1.0, 0.5, 10.0);
        let rep = check_axioms(&m, &plan).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn linear_fails_superlinearity() {
        let m = NFunctionSpec::isotropic(1, Arc::new(|_, _, s| s));
        let plan = SamplingPlan::default_plan(1, 1.0, 0.5, 10.0);
        let rep = check_axioms(&m, &plan).unwrap();
        assert!(matches!(rep.superlinear_at_infinity, AxiomOutcome::Fail { .. }));
    }

    #[test]
    fn anisotropic_powers_pass() {
        let m = NFunctionSpec::separable(vec![
            Arc::new(|_, _, s: f64| s.powi(3)),
            Arc::new(|_, _, s: f64| s.powf(1.5)),
        ]);
        let plan = SamplingPlan::default_plan(2, 1.0, 0.5, 10.0);
        let rep = check_axioms(&m, &plan).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn empty_plan_is_rejected() {
        let m = quadratic(1);
        let plan = SamplingPlan { times: vec![], points: vec![], magnitudes: vec![], directions: vec![] };
        assert!(check_axioms(&m, &plan).is_err());
    }

    #[test]
    fn conjugate_nd_of_square() {
        // M = |xi|^2, eta = (2,0): sup = |eta|^2/4 = 1 at xi = (1,0)
        let m = quadratic(2);
        let search = ConjugateSearch { radius: 5.0, resolution: 200 };
        let c = conjugate_nd(&m, 0.0, &[0.0, 0.0], &[2.0, 0.0], &search).unwrap();
        assert!(!c.truncated);
        assert!((c.value - 1.0).abs() < 1e-3, "got {}", c.value);
    }

    #[test]
    fn conjugate_nd_zero_eta() {
        let m = quadratic(2);
        let search = ConjugateSearch { radius: 5.0, resolution: 64 };
        let c = conjugate_nd(&m, 0.0, &[0.0, 0.0], &[0.0, 0.0], &search).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn conjugate_nd_separable_matches_sum_of_1d() {
        // M = xi1^2 + xi2^4, eta = (0,4)
        let m = NFunctionSpec::new(
            2,
            Arc::new(|_, _, xi: &[f64]| xi[0] * xi[0] + xi[1].powi(4)),
        );
        let search = ConjugateSearch { radius: 6.0, resolution: 600 };
        let c = conjugate_nd(&m, 0.0, &[0.0], &[0.0, 4.0], &search).unwrap();
        let (g1, _) = conjugate_scan(|s| s * s, 0.0, 6.0, 600);
        let (g2, _) = conjugate_scan(|s| s.powi(4), 4.0, 6.0, 600);
        assert!((c.value - (g1 + g2)).abs() < 1e-2, "{} vs {}", c.value, g1 + g2);
    }

    #[test]
    fn gradient_identity_for_half_square() {
        let m = NFunctionSpec::isotropic(2, Arc::new(|_, _, s| s * s / 2.0));
        let g = flux_gradient(&m, 0.0, &[0.0, 0.0], &[3.0, 4.0]);
        assert!((g[0] - 3.0).abs() < 1e-6);
        assert!((g[1] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn gradient_of_quartic() {
        let m = NFunctionSpec::isotropic(2, Arc::new(|_, _, s: f64| s.powi(4) / 4.0));
        let g = flux_gradient(&m, 0.0, &[0.0, 0.0], &[1.0, 0.0]);
        assert!((g[0] - 1.0).abs() < 1e-6, "{g:?}");
        assert!(g[1].abs() < 1e-6);
    }

    #[test]
    fn gradient_at_zero_is_zero() {
        let m = quadratic(2);
        assert_eq!(flux_gradient(&m, 0.0, &[0.0, 0.0], &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn delta2_of_powers() {
        let plan = SamplingPlan::default_plan(1, 1.0, 0.5, 100.0);
        match delta2_estimate(&quadratic(1), &plan).unwrap() {
            Delta2Verdict::Bounded(r) => assert!((r - 4.0).abs() < 1e-9),
            v => panic!("{v:?}"),
        }
        let cubic = NFunctionSpec::isotropic(1, Arc::new(|_, _, s: f64| s.powi(3)));
        match delta2_estimate(&cubic, &plan).unwrap() {
            Delta2Verdict::Bounded(r) => assert!((r - 8.0).abs() < 1e-9),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn delta2_exponential_is_unbounded() {
        // exp(s) - 1 + s, the irregular-growth example
        let m = NFunctionSpec::isotropic(1, Arc::new(|_, _, s: f64| s.exp() - 1.0 + s));
        let plan = SamplingPlan::default_plan(1, 1.0, 0.5, 100.0);
        assert!(matches!(delta2_estimate(&m, &plan).unwrap(), Delta2Verdict::Unbounded { .. }));
    }
}
