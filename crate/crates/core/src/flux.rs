//! Flux operators A(t, x, xi) paired with their governing modular functions,
//! the randomized growth/coercivity/monotonicity checks, and the
//! regularization A_theta = A + theta * grad m.

use std::sync::Arc;

use rand::{Rng, SeedableRng};

use crate::catalog::parse_key;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{dot, norm};
use crate::nfunction::{flux_gradient, ConjugateSearch, NFunctionSpec, RadialFn};

pub type FluxFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Regularization guard for the degenerate |xi|^{p-2} factor at p < 2.
const EPS_FLUX: f64 = 1e-10;

fn power_factor(r: f64, p: f64) -> f64 {
    if p < 2.0 {
        (r * r + EPS_FLUX * EPS_FLUX).sqrt().powf(p - 2.0)
    } else if r == 0.0 {
        0.0
    } else {
        r.powf(p - 2.0)
    }
}

#[derive(Clone)]
pub struct FluxSpec {
    pub a: FluxFn,
    /// Governing modular function M.
    pub m: NFunctionSpec,
    /// Coercivity constant in the sampled bound c_A M*(A(xi)) <= M(xi).
    pub c_a: f64,
    pub key: String,
}

impl std::fmt::Debug for FluxSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FluxSpec")
            .field("key", &self.key)
            .field("c_a", &self.c_a)
            .finish()
    }
}

impl FluxSpec {
    pub fn eval(&self, t: f64, x: &[f64], xi: &[f64]) -> Vec<f64> {
        (self.a)(t, x, xi)
    }

    /// Randomized check of the growth/coercivity and weak-monotonicity sample
    /// bounds on (t, x) in [0,1] x [0,1]^N and |xi| <= s_max.
    pub fn validate(&self, samples: usize, s_max: f64, seed: u64) -> Result<()> {
        let dim = self.m.dim;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let search = ConjugateSearch { radius: 4.0 * s_max, resolution: 512 };
        let rand_point = |rng: &mut rand_chacha::ChaCha8Rng| -> (f64, Vec<f64>, Vec<f64>) {
            let t = rng.gen_range(0.0..1.0);
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
            let scale = 10f64.powf(rng.gen_range(-2.0..s_max.log10()));
            let mut xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm(&xi).max(1e-9);
            xi.iter_mut().for_each(|c| *c *= scale / n);
            (t, x, xi)
        };
        for i in 0..samples {
            let (t, x, xi) = rand_point(&mut rng);
            let a = self.eval(t, &x, &xi);
            let pairing = dot(&a, &xi);
            let mv = self.m.eval(t, &x, &xi);
            if pairing < mv - 1e-9 * (1.0 + mv) {
                return Err(Error::FluxInvariant(format!(
                    "growth bound failed at sample {i}: A.xi = {pairing:.6e} < M = {mv:.6e} (t={t:.3}, x={x:?}, xi={xi:?})"
                )));
            }
            let conj = self.m.conjugate(t, &x, &a, &search)?;
            if !conj.truncated && self.c_a * conj.value > mv + 1e-6 * (1.0 + mv) {
                return Err(Error::FluxInvariant(format!(
                    "coercivity failed at sample {i}: c_A M*(A) = {:.6e} > M = {mv:.6e} (xi={xi:?})",
                    self.c_a * conj.value
                )));
            }
            // weak monotonicity against an independent point
            let (_, _, eta) = rand_point(&mut rng);
            let b = self.eval(t, &x, &eta);
            let d: Vec<f64> = xi.iter().zip(&eta).map(|(p, q)| p - q).collect();
            let mono = dot(&a, &d) - dot(&b, &d);
            if mono < -1e-8 * (1.0 + norm(&a) * norm(&d)) {
                return Err(Error::FluxInvariant(format!(
                    "monotonicity failed at sample {i}: {mono:.6e} (xi={xi:?}, eta={eta:?})"
                )));
            }
        }
        Ok(())
    }
}

/// c_A estimate: 0.9 times the sampled minimum of M / M*(A), clamped to (0, 1].
fn estimate_c_a(a: &FluxFn, m: &NFunctionSpec, s_max: f64, seed: u64) -> Result<f64> {
    let dim = m.dim;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let search = ConjugateSearch { radius: 4.0 * s_max, resolution: 512 };
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let t = rng.gen_range(0.0..1.0);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let scale = 10f64.powf(rng.gen_range(-1.0..s_max.log10()));
        let mut xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&xi).max(1e-9);
        xi.iter_mut().for_each(|c| *c *= scale / n);
        let av = a(t, &x, &xi);
        let conj = m.conjugate(t, &x, &av, &search)?;
        if conj.truncated || conj.value <= 0.0 {
            continue;
        }
        worst = worst.min(m.eval(t, &x, &xi) / conj.value);
    }
    if !worst.is_finite() || worst <= 0.0 {
        return Err(Error::FluxInvariant("could not estimate a positive coercivity constant".into()));
    }
    Ok((0.9 * worst).min(1.0))
}

/// Builds a flux from a catalog key. Supported: `p_laplace(p)`,
/// `weighted_p_laplace(p, w)`, `llogl(alpha)`, `variable_exponent(pexpr)`,
/// `double_phase(p,q,alpha,a0)`, `orlicz_double_phase(m1,m2,a)`.
/// Every constructed flux passes its randomized invariant check.
pub fn flux_catalog(key: &str, dim: usize) -> Result<FluxSpec> {
    let (name, args) = parse_key(key)?;
    let spec = match name.as_str() {
        "p_laplace" => {
            let p: f64 = args
                .first()
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| Error::InvalidInput("p_laplace(p) needs a numeric p > 1".into()))?;
            if p <= 1.0 {
                return Err(Error::InvalidInput("p_laplace needs p > 1".into()));
            }
            let a: FluxFn = Arc::new(move |_, _, xi| {
                let f = power_factor(norm(xi), p);
                xi.iter().map(|&c| f * c).collect()
            });
            let radial: RadialFn = Arc::new(move |_, _, s| s.powf(p) / p);
            let pc = p / (p - 1.0);
            let conj = Arc::new(move |_: f64, _: &[f64], eta: &[f64]| norm(eta).powf(pc) / pc);
            let m = NFunctionSpec::isotropic(dim, radial)
                .with_homogeneous(true)
                .with_analytic_conjugate(conj)
                .with_growth_exponent(p, 1.0 / p);
            // M*(A(xi)) = (p-1) M(xi), so c_A = min(1, 1/(p-1))
            FluxSpec { a, m, c_a: (1.0 / (p - 1.0)).min(1.0), key: key.to_string() }
        }
        "weighted_p_laplace" => {
            if args.len() != 2 {
                return Err(Error::InvalidInput("weighted_p_laplace needs (p, w)".into()));
            }
            let p: f64 = args[0]
                .parse()
                .map_err(|_| Error::InvalidInput("weighted_p_laplace p must be numeric".into()))?;
            if p <= 1.0 {
                return Err(Error::InvalidInput("weighted_p_laplace needs p > 1".into()));
            }
            let w = Expr::parse_spacetime(&args[1], dim)?;
            let w2 = w.clone();
            let a: FluxFn = Arc::new(move |t, x, xi| {
                let c = w.eval_spacetime(t, x).max(0.0) * power_factor(norm(xi), p);
                xi.iter().map(|&v| c * v).collect()
            });
            let radial: RadialFn =
                Arc::new(move |t, x, s| w2.eval_spacetime(t, x).max(0.0) * s.powf(p) / p);
            let m = NFunctionSpec::isotropic(dim, radial).with_growth_exponent(p, 0.0);
            let c_a = (1.0 / (p - 1.0)).min(1.0);
            FluxSpec { a, m, c_a, key: key.to_string() }
        }
        "variable_exponent" => {
            let pexpr = args
                .first()
                .ok_or_else(|| Error::InvalidInput("variable_exponent needs p(t,x)".into()))?;
            let p = Expr::parse_spacetime(pexpr, dim)?;
            let p2 = p.clone();
            let p3 = p.clone();
            let a: FluxFn = Arc::new(move |t, x, xi| {
                let pv = p.eval_spacetime(t, x);
                let f = power_factor(norm(xi), pv);
                xi.iter().map(|&c| f * c).collect()
            });
            let radial: RadialFn = Arc::new(move |t, x, s| {
                let pv = p2.eval_spacetime(t, x);
                s.powf(pv) / pv
            });
            let conj = Arc::new(move |t: f64, x: &[f64], eta: &[f64]| {
                let pv = p3.eval_spacetime(t, x);
                let pc = pv / (pv - 1.0);
                norm(eta).powf(pc) / pc
            });
            let m = NFunctionSpec::isotropic(dim, radial).with_analytic_conjugate(conj);
            // c_A from the sampled worst exponent
            let c_a = estimate_c_a(&a, &m, 10.0, 17)?;
            FluxSpec { a, m, c_a, key: key.to_string() }
        }
        "double_phase" => {
            if args.len() != 4 {
                return Err(Error::InvalidInput("double_phase needs (p, q, alpha, a0)".into()));
            }
            let nums: Vec<f64> = args
                .iter()
                .map(|a| a.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidInput("double_phase arguments must be numeric".into()))?;
            let (p, q, alpha, a0) = (nums[0], nums[1], nums[2], nums[3]);
            if p <= 1.0 || q <= 1.0 || alpha <= 0.0 || a0 < 0.0 {
                return Err(Error::InvalidInput("double_phase needs p,q > 1, alpha > 0, a0 >= 0".into()));
            }
            let a: FluxFn = Arc::new(move |_, x, xi| {
                let r = norm(xi);
                let w = a0 * norm(x).powf(alpha);
                let f = power_factor(r, p) + w * power_factor(r, q);
                xi.iter().map(|&c| f * c).collect()
            });
            let radial: RadialFn = Arc::new(move |_, x, s| {
                let w = a0 * norm(x).powf(alpha);
                s.powf(p) / p + w * s.powf(q) / q
            });
            let m = NFunctionSpec::isotropic(dim, radial).with_growth_exponent(p, 1.0 / p);
            let c_a = estimate_c_a(&a, &m, 10.0, 17)?;
            FluxSpec { a, m, c_a, key: key.to_string() }
        }
        "orlicz_double_phase" | "llogl" => {
            // gradient flux of the catalog modular function
            let m = crate::catalog::from_key(key, dim)?;
            let m2 = m.clone();
            let a: FluxFn = Arc::new(move |t, x, xi| flux_gradient(&m2, t, x, xi));
            // the gradient flux satisfies A.xi = M + M*(A) >= M automatically
            let c_a = estimate_c_a(&a, &m, 10.0, 17)?;
            FluxSpec { a, m, c_a, key: key.to_string() }
        }
        other => Err(Error::InvalidInput(format!("unknown flux key '{other}'")))?,
    };
    spec.validate(1000, 10.0, 23)?;
    Ok(spec)
}

/// The regularizing profile m(s): either s^r / r or exp(s) - 1 - s, both with
/// closed-form gradients and conjugates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MProfile {
    Power(f64),
    Exp,
}

impl MProfile {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            MProfile::Power(r) => s.powf(*r) / r,
            MProfile::Exp => s.exp() - 1.0 - s,
        }
    }

    /// Derivative of the radial profile.
    pub fn slope(&self, s: f64) -> f64 {
        match self {
            MProfile::Power(r) => s.powf(r - 1.0),
            MProfile::Exp => s.exp() - 1.0,
        }
    }

    /// Conjugate profile m*(t).
    pub fn conjugate(&self, t: f64) -> f64 {
        match self {
            MProfile::Power(r) => {
                let rc = r / (r - 1.0);
                t.powf(rc) / rc
            }
            // conjugate of exp(s) - 1 - s is (1 + t) log(1 + t) - t
            MProfile::Exp => (1.0 + t) * (1.0 + t).ln() - t,
        }
    }

    /// Gradient of m(|xi|) in xi; zero at the origin.
    pub fn gradient(&self, xi: &[f64]) -> Vec<f64> {
        let r = norm(xi);
        if r == 0.0 {
            return vec![0.0; xi.len()];
        }
        let f = self.slope(r) / r;
        xi.iter().map(|&c| f * c).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RegularizedFluxSpec {
    pub base: FluxSpec,
    pub m_profile: MProfile,
    pub theta: f64,
    /// theta = 0 is allowed only as a comparison stub and flagged here.
    pub stub: bool,
}

impl RegularizedFluxSpec {
    /// A_theta(t, x, xi) = A(t, x, xi) + theta * grad m(xi).
    pub fn eval(&self, t: f64, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let mut a = self.base.eval(t, x, xi);
        if self.theta > 0.0 {
            let g = self.m_profile.gradient(xi);
            for (av, gv) in a.iter_mut().zip(&g) {
                *av += self.theta * gv;
            }
        }
        a
    }

    /// Penalty integrand m*(|grad m(xi)|) entering the vanishing-penalty monitor.
    pub fn penalty(&self, xi: &[f64]) -> f64 {
        self.m_profile.conjugate(self.m_profile.slope(norm(xi)))
    }
}

/// Empirical growth exponent of the governing modular function: the largest
/// log-log slope over a ladder of magnitudes and a handful of sample points.
fn empirical_growth(m: &NFunctionSpec, s_lo: f64, s_hi: f64) -> f64 {
    let steps = 16;
    let xs: Vec<Vec<f64>> = vec![vec![0.25; m.dim], vec![0.5; m.dim], vec![0.9; m.dim]];
    let mut worst: f64 = 1.0;
    for x in &xs {
        for i in 0..steps {
            let s0 = s_lo * (s_hi / s_lo).powf(i as f64 / steps as f64);
            let s1 = s_lo * (s_hi / s_lo).powf((i + 1) as f64 / steps as f64);
            let v0 = m.radial_profile(0.5, x, s0);
            let v1 = m.radial_profile(0.5, x, s1);
            if v0 > 0.0 && v1 > v0 && v1.is_finite() {
                worst = worst.max((v1 / v0).ln() / (s1 / s0).ln());
            }
        }
    }
    worst
}

/// Builds A_theta with an auto-selected regularizing profile: power r =
/// 2 * (empirical growth exponent), capped at 8; the exponential profile when
/// no admissible power dominates. The domination check requires the ratio
/// sup_x M / m to decay along a log ladder.
pub fn regularize(base: &FluxSpec, theta: f64) -> Result<RegularizedFluxSpec> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidInput(format!("theta must lie in [0, 1], got {theta}")));
    }
    let growth = empirical_growth(&base.m, 1.0, 100.0);
    let candidates = [MProfile::Power((2.0 * growth).clamp(2.5, 8.0)), MProfile::Exp];
    for profile in candidates {
        if dominates(&profile, &base.m) {
            return Ok(RegularizedFluxSpec {
                base: base.clone(),
                m_profile: profile,
                theta,
                stub: theta == 0.0,
            });
        }
    }
    Err(Error::FluxInvariant(
        "no regularizing profile dominates the governing modular function".into(),
    ))
}

/// True when sup_x M(., x, s) / m(s) decays by at least 4x over s in [1, 100].
fn dominates(profile: &MProfile, m: &NFunctionSpec) -> bool {
    let xs: Vec<Vec<f64>> = vec![vec![0.25; m.dim], vec![0.5; m.dim], vec![0.9; m.dim]];
    let ladder: Vec<f64> = (0..9).map(|i| 10f64.powf(i as f64 / 4.0)).collect();
    let mut ratios = Vec::new();
    for &s in &ladder {
        let sup = xs.iter().map(|x| m.radial_profile(0.5, x, s)).fold(0.0f64, f64::max);
        let mv = profile.value(s);
        if !mv.is_finite() || mv <= 0.0 {
            return false;
        }
        ratios.push(sup / mv);
    }
    let nonincreasing_tail = ratios.windows(2).skip(2).all(|w| w[1] <= w[0] * 1.05);
    nonincreasing_tail && *ratios.last().unwrap() <= 0.25 * ratios[2]
}

/// Sampled strict-monotonicity margin of the regularized flux:
/// min over pairs of (A_theta(xi) - A_theta(eta)) . (xi - eta) / |xi - eta|^2.
pub fn monotonicity_margin(reg: &RegularizedFluxSpec, pairs: usize, seed: u64) -> f64 {
    let dim = reg.base.m.dim;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let t = rng.gen_range(0.0..1.0);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let eta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let d: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| a - b).collect();
        let d2 = dot(&d, &d);
        if d2 < 1e-12 {
            continue;
        }
        let fa = reg.eval(t, &x, &xi);
        let fb = reg.eval(t, &x, &eta);
        let m = (dot(&fa, &d) - dot(&fb, &d)) / d2;
        worst = worst.min(m);
    }
    worst
}
