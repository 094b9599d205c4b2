//! Sampled 1D profiles and their convex calculus: the discrete Legendre
//! transform and the greatest convex minorant (lower convex hull).
//!
//! Values may be `+inf`; such nodes never attain a supremum and sit above any
//! hull, so the transforms simply skip them. This keeps exponential-growth
//! profiles usable on wide node ranges where f64 overflows.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SampledProfile1D {
    /// Strictly increasing, nodes[0] == 0.
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Set when a conjugate was evaluated past the largest finite-difference
    /// slope of its input; values beyond that slope are boundary-attained.
    pub truncated: bool,
}

impl SampledProfile1D {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidInput("profile needs >= 2 matching nodes/values".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidInput("profile must start at s = 0".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("profile nodes must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidInput("profile values must be nonnegative (inf allowed)".into()));
        }
        Ok(Self { nodes, values, truncated: false })
    }

    /// Samples a scalar function on `{0} + K log-spaced nodes up to s_max`.
    pub fn sample(f: impl Fn(f64) -> f64, s_max: f64, k: usize) -> Self {
        let nodes = log_nodes(s_max, k);
        let values = nodes.iter().map(|&s| f(s)).collect();
        Self::new(nodes, values).expect("log node plan is valid")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Piecewise-linear interpolation; clamped at the node range ends.
    pub fn interpolate(&self, s: f64) -> f64 {
        if s <= self.nodes[0] {
            return self.values[0];
        }
        if s >= *self.nodes.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let j = self.nodes.partition_point(|&n| n <= s);
        let (s0, s1) = (self.nodes[j - 1], self.nodes[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        if !v0.is_finite() || !v1.is_finite() {
            return f64::INFINITY;
        }
        v0 + (v1 - v0) * (s - s0) / (s1 - s0)
    }

    /// Largest finite-difference slope over the finite part of the profile.
    pub fn max_slope(&self) -> f64 {
        let mut best = 0.0f64;
        let mut prev: Option<(f64, f64)> = None;
        for (&s, &v) in self.nodes.iter().zip(&self.values) {
            if !v.is_finite() {
                continue;
            }
            if let Some((ps, pv)) = prev {
                best = best.max((v - pv) / (s - ps));
            }
            prev = Some((s, v));
        }
        best
    }

    fn is_convex(&self) -> bool {
        // slope monotonicity over finite nodes
        let mut prev_slope = f64::NEG_INFINITY;
        let mut prev: Option<(f64, f64)> = None;
        for (&s, &v) in self.nodes.iter().zip(&self.values) {
            if !v.is_finite() {
                continue;
            }
            if let Some((ps, pv)) = prev {
                let slope = (v - pv) / (s - ps);
                if slope < prev_slope - 1e-12 * (1.0 + slope.abs()) {
                    return false;
                }
                prev_slope = slope;
            }
            prev = Some((s, v));
        }
        true
    }
}

/// `{0} + k` log-spaced nodes spanning six decades below `s_max`.
pub fn log_nodes(s_max: f64, k: usize) -> Vec<f64> {
    assert!(s_max > 0.0 && k >= 1);
    let lo = (s_max * 1e-6).ln();
    let hi = s_max.ln();
    let mut nodes = vec![0.0];
    for i in 0..k {
        let f = if k == 1 { 1.0 } else { i as f64 / (k - 1) as f64 };
        nodes.push((lo + f * (hi - lo)).exp());
    }
    nodes.dedup_by(|a, b| *a <= *b);
    nodes
}

/// Discrete Legendre transform value `max_s (s t - f(s))` over the profile nodes.
/// Returns the value and whether the maximizer was the right endpoint.
pub fn conjugate_value(f: &SampledProfile1D, t: f64) -> (f64, bool) {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    let mut last_finite = 0;
    for (i, (&s, &v)) in f.nodes.iter().zip(&f.values).enumerate() {
        if !v.is_finite() {
            continue;
        }
        last_finite = i;
        let cand = s * t - v;
        if cand > best {
            best = cand;
            best_idx = i;
        }
    }
    (best, best_idx == last_finite)
}

/// Conjugate of `f` evaluated on an explicit dual grid.
pub fn conjugate_on(f: &SampledProfile1D, dual_nodes: &[f64]) -> Result<SampledProfile1D> {
    if dual_nodes.len() < 2 {
        return Err(Error::InvalidInput("dual grid needs >= 2 nodes".into()));
    }
    let max_slope = f.max_slope();
    let convex = f.is_convex();
    let mut values = Vec::with_capacity(dual_nodes.len());
    let mut truncated = false;
    let mut cursor = 0usize; // monotone argmax pruning for convex inputs
    for &t in dual_nodes {
        if t > max_slope + 1e-12 * (1.0 + max_slope) {
            truncated = true;
        }
        if convex {
            // argmax of s*t - f(s) is nondecreasing in t
            while cursor + 1 < f.len() {
                let next = &f.values[cursor + 1];
                let here = &f.values[cursor];
                if !next.is_finite() {
                    break;
                }
                let gain = f.nodes[cursor + 1] * t - next;
                let cur = if here.is_finite() { f.nodes[cursor] * t - here } else { f64::NEG_INFINITY };
                if gain >= cur {
                    cursor += 1;
                } else {
                    break;
                }
            }
            let v = f.nodes[cursor] * t - f.values[cursor];
            values.push(v);
        } else {
            values.push(conjugate_value(f, t).0);
        }
    }
    let mut out = SampledProfile1D::new(dual_nodes.to_vec(), values.iter().map(|v| v.max(0.0)).collect())?;
    out.truncated = truncated;
    Ok(out)
}

/// Conjugate on the natural dual grid: zero plus the sorted finite-difference
/// slopes of the input's lower hull. On this grid the transform of a
/// piecewise-linear profile is exact, which makes biconjugation recover the
/// convex envelope nodewise.
pub fn conjugate_1d(f: &SampledProfile1D) -> Result<SampledProfile1D> {
    let hull = convex_envelope_1d(f)?;
    let mut dual = vec![0.0f64];
    let mut prev: Option<(f64, f64)> = None;
    for (&s, &v) in hull.nodes.iter().zip(&hull.values) {
        if !v.is_finite() {
            continue;
        }
        if let Some((ps, pv)) = prev {
            let slope = (v - pv) / (s - ps);
            if slope > *dual.last().unwrap() + 1e-300 {
                dual.push(slope);
            }
        }
        prev = Some((s, v));
    }
    if dual.len() < 2 {
        dual.push(1.0);
    }
    conjugate_on(f, &dual)
}

/// Second conjugate evaluated back on the original nodes; equals the convex
/// envelope up to round-off.
pub fn biconjugate(f: &SampledProfile1D) -> Result<SampledProfile1D> {
    let g = conjugate_1d(f)?;
    conjugate_on(&g, &f.nodes)
}

/// Greatest convex minorant of the piecewise-linear interpolant, evaluated on
/// the input nodes (lower convex hull of the sampled graph).
pub fn convex_envelope_1d(f: &SampledProfile1D) -> Result<SampledProfile1D> {
    if f.len() < 2 {
        return Err(Error::InvalidInput("envelope needs >= 2 nodes".into()));
    }
    // monotone-chain lower hull over the finite points
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (&s, &v) in f.nodes.iter().zip(&f.values) {
        if !v.is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (ax, ay) = hull[hull.len() - 2];
            let (bx, by) = hull[hull.len() - 1];
            // drop b if it lies on or above chord a->(s,v)
            if (by - ay) * (s - ax) >= (v - ay) * (bx - ax) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((s, v));
    }
    let mut values = Vec::with_capacity(f.len());
    let mut seg = 0usize;
    for (&s, &v) in f.nodes.iter().zip(&f.values) {
        if !v.is_finite() {
            // extend the last hull segment linearly
            if hull.len() >= 2 {
                let (ax, ay) = hull[hull.len() - 2];
                let (bx, by) = hull[hull.len() - 1];
                values.push(ay + (by - ay) * (s - ax) / (bx - ax));
            } else {
                values.push(f64::INFINITY);
            }
            continue;
        }
        while seg + 1 < hull.len() && hull[seg + 1].0 < s {
            seg += 1;
        }
        if seg + 1 >= hull.len() {
            values.push(hull[seg].1.min(v));
        } else {
            let (ax, ay) = hull[seg];
            let (bx, by) = hull[seg + 1];
            let interp = ay + (by - ay) * (s - ax) / (bx - ax);
            values.push(interp.min(v));
        }
    }
    SampledProfile1D::new(f.nodes.clone(), values.iter().map(|v| v.max(0.0)).collect())
}

/// Legendre transform of a scalar closure: `sup_{0 <= s <= s_max} (s t - f(s))`
/// by coarse scan plus ternary refinement. For convex `f` the objective is
/// concave in `s`, so the refinement converges to near machine precision.
/// Returns the value and a truncation flag when the maximizer sits at `s_max`.
pub fn conjugate_scan(f: impl Fn(f64) -> f64, t: f64, s_max: f64, coarse: usize) -> (f64, bool) {
    let n = coarse.max(8);
    let mut best = -f(0.0);
    let mut best_s = 0.0;
    for i in 0..=n {
        let s = s_max * i as f64 / n as f64;
        let v = f(s);
        if !v.is_finite() {
            continue;
        }
        let cand = s * t - v;
        if cand > best {
            best = cand;
            best_s = s;
        }
    }
    let h = s_max / n as f64;
    let mut lo = (best_s - h).max(0.0);
    let mut hi = (best_s + h).min(s_max);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let g1 = m1 * t - f(m1);
        let g2 = m2 * t - f(m2);
        if g1 < g2 {
            lo = m1;
        } else {
            hi = m2;
        }
        if hi - lo < 1e-14 * (1.0 + s_max) {
            break;
        }
    }
    let s_star = 0.5 * (lo + hi);
    let v = (s_star * t - f(s_star)).max(best).max(0.0);
    (v, s_max - s_star < 1e-6 * s_max)
}
