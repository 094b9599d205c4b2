//! The modular-function catalog, addressable by string keys as they appear in
//! config files:
//!
//! - `p_laplace(p)` — M(xi) = |xi|^p / p
//! - `variable_exponent(pexpr)` — M(t,x,xi) = |xi|^{p(t,x)}, p given as an
//!   expression in `t, x1..xN`
//! - `double_phase(p,q,alpha,a0)` — M(x,xi) = |xi|^p + a0 |x|^alpha |xi|^q
//! - `orlicz_double_phase(m1,m2,a)` — M = m1(|xi|) + a(t,x) m2(|xi|), the
//!   profiles given as expressions in `s`
//! - `llogl(alpha)` — M(xi) = |xi| log^alpha(1 + |xi|)
//! - `exp_growth` — M(xi) = exp(|xi|) − 1 − |xi|

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::nfunction::{EvalFn, NFunctionSpec, RadialFn};
use crate::profile::{conjugate_1d, log_nodes, SampledProfile1D};

/// Splits `"name(a, b, c)"` into the name and top-level comma-separated
/// argument strings. A bare `"name"` yields no arguments.
pub fn parse_key(key: &str) -> Result<(String, Vec<String>)> {
    let key = key.trim();
    let Some(open) = key.find('(') else {
        if key.is_empty() {
            return Err(Error::InvalidInput("empty catalog key".into()));
        }
        return Ok((key.to_string(), Vec::new()));
    };
    if !key.ends_with(')') {
        return Err(Error::InvalidInput(format!("unbalanced parentheses in key '{key}'")));
    }
    let name = key[..open].trim().to_string();
    let body = &key[open + 1..key.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in body.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.checked_sub(1).ok_or_else(|| {
                    Error::InvalidInput(format!("unbalanced parentheses in key '{key}'"))
                })?;
                current.push(c);
            }
            ',' if depth == 0 => {
                args.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if depth != 0 {
        return Err(Error::InvalidInput(format!("unbalanced parentheses in key '{key}'")));
    }
    if !current.trim().is_empty() {
        args.push(current.trim().to_string());
    }
    Ok((name, args))
}

fn num_arg(args: &[String], i: usize, key: &str) -> Result<f64> {
    let a = args
        .get(i)
        .ok_or_else(|| Error::InvalidInput(format!("'{key}' is missing argument {}", i + 1)))?;
    a.parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("'{key}' argument {} is not a number: '{a}'", i + 1)))
}

/// M(xi) = |xi|^p / p with analytic conjugate |eta|^{p'} / p'.
pub fn p_laplace(dim: usize, p: f64) -> Result<NFunctionSpec> {
    if p <= 1.0 {
        return Err(Error::InvalidInput(format!("p_laplace needs p > 1, got {p}")));
    }
    let radial: RadialFn = Arc::new(move |_, _, s| s.powf(p) / p);
    let pc = p / (p - 1.0);
    let conj: EvalFn = Arc::new(move |_, _, eta| {
        let r = crate::field::norm(eta);
        r.powf(pc) / pc
    });
    Ok(NFunctionSpec::isotropic(dim, radial)
        .with_homogeneous(true)
        .with_analytic_conjugate(conj)
        .with_growth_exponent(p, 1.0 / p))
}

/// M(t,x,xi) = |xi|^{p(t,x)} with the pointwise power conjugate.
pub fn variable_exponent(dim: usize, p_expr: &str) -> Result<NFunctionSpec> {
    let p = Expr::parse_spacetime(p_expr, dim)?;
    let p2 = p.clone();
    let radial: RadialFn = Arc::new(move |t, x, s| {
        let pv = p.eval_spacetime(t, x);
        s.powf(pv)
    });
    // Conjugate of s^p is (p-1) (t/p)^{p/(p-1)}, valid pointwise in (t,x).
    let conj: EvalFn = Arc::new(move |t, x, eta| {
        let pv = p2.eval_spacetime(t, x);
        let r = crate::field::norm(eta);
        if r == 0.0 {
            return 0.0;
        }
        (pv - 1.0) * (r / pv).powf(pv / (pv - 1.0))
    });
    Ok(NFunctionSpec::isotropic(dim, radial).with_analytic_conjugate(conj))
}

/// M(x,xi) = |xi|^p + a0 |x|^alpha |xi|^q.
pub fn double_phase(dim: usize, p: f64, q: f64, alpha: f64, a0: f64) -> Result<NFunctionSpec> {
    if p <= 1.0 || q <= 1.0 {
        return Err(Error::InvalidInput("double_phase needs p, q > 1".into()));
    }
    if alpha <= 0.0 || a0 < 0.0 {
        return Err(Error::InvalidInput("double_phase needs alpha > 0, a0 >= 0".into()));
    }
    let radial: RadialFn = Arc::new(move |_, x, s| {
        let a = a0 * crate::field::norm(x).powf(alpha);
        s.powf(p) + a * s.powf(q)
    });
    Ok(NFunctionSpec::isotropic(dim, radial).with_growth_exponent(p, 1.0))
}

/// M(t,x,xi) = m1(|xi|) + a(t,x) m2(|xi|) with expression-defined profiles.
pub fn orlicz_double_phase(dim: usize, m1: &str, m2: &str, a: &str) -> Result<NFunctionSpec> {
    let m1 = Expr::parse_profile(m1)?;
    let m2 = Expr::parse_profile(m2)?;
    let a = Expr::parse_spacetime(a, dim)?;
    for (name, e) in [("m1", &m1), ("m2", &m2)] {
        if e.eval(&[0.0]).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "orlicz_double_phase profile {name} must vanish at s=0"
            )));
        }
    }
    let radial: RadialFn =
        Arc::new(move |t, x, s| m1.eval(&[s]) + a.eval_spacetime(t, x).max(0.0) * m2.eval(&[s]));
    Ok(NFunctionSpec::isotropic(dim, radial))
}

/// M(xi) = |xi| log^alpha(1 + |xi|), the L log^alpha L scale.
pub fn llogl(dim: usize, alpha: f64) -> Result<NFunctionSpec> {
    if alpha <= 0.0 {
        return Err(Error::InvalidInput(format!("llogl needs alpha > 0, got {alpha}")));
    }
    let radial: RadialFn = Arc::new(move |_, _, s| s * (1.0 + s).ln().powf(alpha));
    Ok(NFunctionSpec::isotropic(dim, radial).with_homogeneous(true))
}

/// M(xi) = exp(|xi|) − 1 − |xi|, the irregular-growth example (not Delta_2).
pub fn exp_growth(dim: usize) -> Result<NFunctionSpec> {
    let radial: RadialFn = Arc::new(|_, _, s| s.exp() - 1.0 - s);
    Ok(NFunctionSpec::isotropic(dim, radial).with_homogeneous(true))
}

/// Instantiates a catalog key like `"double_phase(2, 3, 1, 1)"`.
pub fn from_key(key: &str, dim: usize) -> Result<NFunctionSpec> {
    let (name, args) = parse_key(key)?;
    match name.as_str() {
        "p_laplace" => p_laplace(dim, num_arg(&args, 0, key)?),
        "variable_exponent" => {
            let e = args
                .first()
                .ok_or_else(|| Error::InvalidInput("variable_exponent needs p(t,x)".into()))?;
            variable_exponent(dim, e)
        }
        "double_phase" => double_phase(
            dim,
            num_arg(&args, 0, key)?,
            num_arg(&args, 1, key)?,
            num_arg(&args, 2, key)?,
            num_arg(&args, 3, key)?,
        ),
        "orlicz_double_phase" => {
            if args.len() != 3 {
                return Err(Error::InvalidInput("orlicz_double_phase needs (m1, m2, a)".into()));
            }
            orlicz_double_phase(dim, &args[0], &args[1], &args[2])
        }
        "llogl" => llogl(dim, num_arg(&args, 0, key)?),
        "exp_growth" => exp_growth(dim),
        other => Err(Error::InvalidInput(format!("unknown catalog key '{other}'"))),
    }
}

/// A representative instantiation of every catalog family; drives the
/// catalog-wide property checks.
pub fn default_catalog(dim: usize) -> Vec<(String, NFunctionSpec)> {
    let keys = [
        "p_laplace(2)".to_string(),
        "p_laplace(3)".to_string(),
        "p_laplace(1.5)".to_string(),
        "variable_exponent(2 + 0.5*x1)".to_string(),
        "double_phase(2, 3, 1, 1)".to_string(),
        "orlicz_double_phase(s^2/2, s^3/3, abs(x1))".to_string(),
        "llogl(1)".to_string(),
        "exp_growth".to_string(),
    ];
    keys.into_iter()
        .map(|k| {
            let m = from_key(&k, dim).expect("default catalog keys are valid");
            (k, m)
        })
        .collect()
}

/// Radial restriction of M at (t, x) sampled on the default log ladder.
pub fn radial_profile_table(m: &NFunctionSpec, t: f64, x: &[f64], s_max: f64, k: usize) -> SampledProfile1D {
    let nodes = log_nodes(s_max, k);
    let values = nodes.iter().map(|&s| m.radial_profile(t, x, s)).collect();
    SampledProfile1D::new(nodes, values).expect("log ladder is a valid node set")
}

/// Two-column (node, value) conjugate table of the radial profile at (t, x).
pub fn conjugate_table(m: &NFunctionSpec, t: f64, x: &[f64], s_max: f64, k: usize) -> Result<SampledProfile1D> {
    conjugate_1d(&radial_profile_table(m, t, x, s_max, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunction::{check_axioms, SamplingPlan};

    #[test]
    fn key_parsing() {
        let (n, a) = parse_key("double_phase(2, 3, 1, 1)").unwrap();
        assert_eq!(n, "double_phase");
        assert_eq!(a, vec!["2", "3", "1", "1"]);
        let (n, a) = parse_key("exp_growth").unwrap();
        assert_eq!(n, "exp_growth");
        assert!(a.is_empty());
        let (_, a) = parse_key("orlicz_double_phase(s^2/2, min(s, s^3), abs(x1))").unwrap();
        assert_eq!(a[1], "min(s, s^3)");
        assert!(parse_key("broken(1").is_err());
        assert!(parse_key("").is_err());
    }

    #[test]
    fn p_laplace_values() {
        let m = from_key("p_laplace(2)", 2).unwrap();
        assert!((m.eval(0.0, &[0.0, 0.0], &[1.0, 0.0]) - 0.5).abs() < 1e-15);
        // conjugate of s^2/2 is itself
        let c = m
            .conjugate(0.0, &[0.0, 0.0], &[3.0, 4.0], &Default::default())
            .unwrap();
        assert!((c.value - 12.5).abs() < 1e-12);
    }

    #[test]
    fn double_phase_value() {
        let m = from_key("double_phase(2, 3, 1, 1)", 2).unwrap();
        // at x = (1, 0): a = 1, M = s^2 + s^3; s = 2 -> 12
        assert!((m.eval(0.0, &[1.0, 0.0], &[2.0, 0.0]) - 12.0).abs() < 1e-12);
        // at x = 0 the q-phase is off
        assert!((m.eval(0.0, &[0.0, 0.0], &[2.0, 0.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn variable_exponent_value() {
        let m = from_key("variable_exponent(2 + x1)", 1).unwrap();
        assert!((m.eval(0.0, &[1.0], &[2.0]) - 8.0).abs() < 1e-12);
        // analytic conjugate at p=2: eta^2/4
        let c = m.conjugate(0.0, &[0.0], &[2.0], &Default::default()).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_catalog_entries_pass_axioms() {
        for (key, m) in default_catalog(2) {
            // keep magnitudes modest so exp_growth stays finite
            let plan = SamplingPlan::default_plan(2, 1.0, 0.5, 20.0);
            let rep = check_axioms(&m, &plan).unwrap();
            assert!(rep.all_pass(), "axioms fail for {key}: {rep:?}");
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(from_key("bogus(1)", 2).is_err());
    }

    #[test]
    fn conjugate_table_matches_power_formula() {
        let m = from_key("p_laplace(2)", 1).unwrap();
        let table = conjugate_table(&m, 0.0, &[0.0], 100.0, 512).unwrap();
        for (&t, &v) in table.nodes.iter().zip(&table.values) {
            if t <= 50.0 {
                // secant error of the piecewise-linear profile: O((ds/s)^2)
                assert!((v - t * t / 2.0).abs() <= 1e-3 * (1.0 + t * t / 2.0), "t={t}, v={v}");
            }
        }
    }
}
