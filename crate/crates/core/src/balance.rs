//! Balance-condition checking: cylinder infima, convex minorants, Θ-ratio
//! scans over shrinking space-time cylinders, the isotropic shortcut, and the
//! closed-form double-phase closeness criterion.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::norm;
use crate::grid::GridDomain;
use crate::nfunction::{default_directions, NFunctionSpec};
use crate::profile::{convex_envelope_1d, SampledProfile1D};

/// A space-time cylinder I x Q: a time interval of length <= delta around a
/// cube of edge 2*delta; the enlarged cube has edge 4*delta.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub t_lo: f64,
    pub t_hi: f64,
    pub center: Vec<f64>,
    pub delta: f64,
}

impl Cylinder {
    pub fn centered(t: f64, x: &[f64], delta: f64) -> Self {
        Self { t_lo: t - 0.5 * delta, t_hi: t + 0.5 * delta, center: x.to_vec(), delta }
    }

    /// Cube half-edge: delta for Q, 2*delta for the enlarged Q.
    fn half_edge(&self, enlarged: bool) -> f64 {
        if enlarged {
            2.0 * self.delta
        } else {
            self.delta
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Clips `[lo, hi]` to `[a, b]`; `None` when the intersection is empty.
fn clip(lo: f64, hi: f64, a: f64, b: f64) -> Option<(f64, f64)> {
    let l = lo.max(a);
    let h = hi.min(b);
    (l <= h).then_some((l, h))
}

/// Sampled stand-in for the essential infimum of M(., ., xi) over the cylinder
/// clipped to the space-time domain, with `per_axis` samples per axis.
/// `enlarged` selects the doubled cube used by the minorant.
pub fn cylinder_infimum(
    m: &NFunctionSpec,
    cyl: &Cylinder,
    domain: &GridDomain,
    xi: &[f64],
    per_axis: usize,
    enlarged: bool,
) -> Result<f64> {
    let (t_lo, t_hi) = clip(cyl.t_lo, cyl.t_hi, 0.0, domain.t_final)
        .ok_or_else(|| Error::InvalidInput("cylinder time interval misses [0, T]".into()))?;
    let h = cyl.half_edge(enlarged);
    let mut ranges = Vec::with_capacity(domain.dim());
    for a in 0..domain.dim() {
        let r = clip(
            cyl.center[a] - h,
            cyl.center[a] + h,
            domain.origin[a],
            domain.origin[a] + domain.lengths[a],
        )
        .ok_or_else(|| Error::InvalidInput("cylinder cube misses the spatial box".into()))?;
        ranges.push(linspace(r.0, r.1, per_axis));
    }
    let times = linspace(t_lo, t_hi, per_axis);
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; domain.dim()];
    let spatial_total: usize = per_axis.pow(domain.dim() as u32);
    for &t in &times {
        for flat in 0..spatial_total {
            let mut rem = flat;
            for (a, xa) in x.iter_mut().enumerate() {
                *xa = ranges[a][rem % per_axis];
                rem /= per_axis;
            }
            best = best.min(m.eval(t, &x, xi));
        }
    }
    Ok(best)
}

/// Greatest convex minorant of the cylinder-infimum profile along a ray: the
/// discrete (M_{I,Q})** restricted to s * direction.
pub fn minorant_profile(
    m: &NFunctionSpec,
    cyl: &Cylinder,
    domain: &GridDomain,
    direction: &[f64],
    nodes: &[f64],
    per_axis: usize,
) -> Result<SampledProfile1D> {
    let mut values = Vec::with_capacity(nodes.len());
    for &s in nodes {
        let xi: Vec<f64> = direction.iter().map(|d| d * s).collect();
        values.push(cylinder_infimum(m, cyl, domain, &xi, per_axis, true)?);
    }
    let profile = SampledProfile1D::new(nodes.to_vec(), values)?;
    convex_envelope_1d(&profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentMode {
    /// Probe magnitude delta^{-N} (arbitrary growth).
    N,
    /// Probe magnitude delta^{-N/p} (power-type lower bound with this p).
    NOverP(f64),
}

impl ExponentMode {
    fn probe(&self, delta: f64, dim: usize) -> f64 {
        match self {
            ExponentMode::N => delta.powi(-(dim as i32)),
            ExponentMode::NOverP(p) => delta.powf(-(dim as f64) / p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BalanceRow {
    pub delta: f64,
    pub s_probe: f64,
    pub ratio: f64,
    pub capped: bool,
}

#[derive(Debug, Clone)]
pub struct BalanceWitness {
    pub delta: f64,
    pub center: Vec<f64>,
    pub time: f64,
    pub direction: Vec<f64>,
    pub s_probe: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct BalanceReport {
    pub rows: Vec<BalanceRow>,
    pub verdict: Verdict,
    pub witness: Option<BalanceWitness>,
    /// True when doubling the cylinder sampling resolution at the finest delta
    /// left the verdict unchanged.
    pub refinement_stable: bool,
}

impl BalanceReport {
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        writeln!(w, "delta,s_probe,ratio,capped")?;
        for r in &self.rows {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{}", r.delta, r.s_probe, r.ratio, r.capped)?;
        }
        Ok(())
    }

    pub fn any_capped(&self) -> bool {
        self.rows.iter().any(|r| r.capped)
    }
}

#[derive(Debug, Clone)]
pub struct ThetaScanOpts {
    pub directions: Vec<Vec<f64>>,
    /// Cylinders probed per delta (heuristic subsample of the full tiling).
    pub cylinders_per_delta: usize,
    /// Samples per axis inside each cylinder (>= 8 per the sampling contract).
    pub per_axis: usize,
    /// Ray nodes for the minorant profile.
    pub s_nodes: usize,
    /// Probe magnitude cap.
    pub s_cap: f64,
    /// Ratios evaluated only for |xi| >= this floor.
    pub xi_floor: f64,
    pub seed: u64,
    /// Growth factor across the three smallest deltas above which the limsup
    /// proxy is declared unbounded.
    pub growth_limit: f64,
}

impl Default for ThetaScanOpts {
    fn default() -> Self {
        Self {
            directions: Vec::new(), // filled per dimension at scan time
            cylinders_per_delta: 40,
            per_axis: 8,
            s_nodes: 33,
            s_cap: 1e6,
            xi_floor: 1.0,
            growth_limit: 1.4,
            seed: 1,
        }
    }
}

/// One cylinder/direction job: ratio of the cylinder sup of M to the convex
/// minorant of the cylinder infimum, both at |xi| = s_probe.
fn cylinder_ratio(
    m: &NFunctionSpec,
    cyl: &Cylinder,
    domain: &GridDomain,
    direction: &[f64],
    s_probe: f64,
    xi_floor: f64,
    s_nodes: usize,
    per_axis: usize,
) -> Result<(f64, f64)> {
    // log ladder {0} + [xi_floor, s_probe]
    let mut nodes = vec![0.0];
    let k = s_nodes.max(4);
    for i in 0..k {
        nodes.push(xi_floor * (s_probe / xi_floor).powf(i as f64 / (k - 1) as f64));
    }
    nodes.dedup_by(|a, b| *a <= *b);
    let minorant = minorant_profile(m, cyl, domain, direction, &nodes, per_axis)?;
    let denom = *minorant.values.last().unwrap();

    // numerator: sup over the (non-enlarged) cylinder at s_probe
    let xi: Vec<f64> = direction.iter().map(|d| d * s_probe).collect();
    let (t_lo, t_hi) = clip(cyl.t_lo, cyl.t_hi, 0.0, domain.t_final)
        .ok_or_else(|| Error::InvalidInput("cylinder time interval misses [0, T]".into()))?;
    let h = cyl.half_edge(false);
    let mut ranges = Vec::new();
    for a in 0..domain.dim() {
        let r = clip(
            cyl.center[a] - h,
            cyl.center[a] + h,
            domain.origin[a],
            domain.origin[a] + domain.lengths[a],
        )
        .ok_or_else(|| Error::InvalidInput("cylinder cube misses the spatial box".into()))?;
        ranges.push(linspace(r.0, r.1, per_axis));
    }
    let mut numer = 0.0f64;
    let mut worst_t = t_lo;
    let mut x = vec![0.0; domain.dim()];
    for &t in &linspace(t_lo, t_hi, per_axis) {
        let spatial_total: usize = per_axis.pow(domain.dim() as u32);
        for flat in 0..spatial_total {
            let mut rem = flat;
            for (a, xa) in x.iter_mut().enumerate() {
                *xa = ranges[a][rem % per_axis];
                rem /= per_axis;
            }
            let v = m.eval(t, &x, &xi);
            if v > numer {
                numer = v;
                worst_t = t;
            }
        }
    }
    let ratio = if denom > 0.0 {
        numer / denom
    } else if numer > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok((ratio, worst_t))
}

/// Picks cylinder centers for one delta: the domain center, the locations with
/// the largest local M-variation on a coarse probe grid (where the ratio can
/// only be attained), and seeded random fill-ins.
fn select_centers(
    m: &NFunctionSpec,
    domain: &GridDomain,
    delta: f64,
    s_score: f64,
    count: usize,
    seed: u64,
) -> Vec<(f64, Vec<f64>)> {
    use rand::{Rng, SeedableRng};
    let dim = domain.dim();
    let nt = 5usize;
    let nsp = 9usize;
    let times = linspace(0.0, domain.t_final, nt);
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|a| linspace(domain.origin[a], domain.origin[a] + domain.lengths[a], nsp))
        .collect();
    let e1: Vec<f64> = (0..dim).map(|a| if a == 0 { s_score } else { 0.0 }).collect();
    let spatial_total = nsp.pow(dim as u32);
    // coarse field of M values
    let field: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            (0..spatial_total)
                .map(|flat| {
                    let mut rem = flat;
                    let x: Vec<f64> = (0..dim)
                        .map(|a| {
                            let v = axes[a][rem % nsp];
                            rem /= nsp;
                            v
                        })
                        .collect();
                    m.eval(t, &x, &e1)
                })
                .collect()
        })
        .collect();
    // score: worst ratio against axis neighbours (time and space)
    let mut scored: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, row) in field.iter().enumerate() {
        for flat in 0..spatial_total {
            let v = row[flat];
            let mut score = 0.0f64;
            let mut push = |w: f64| {
                if v > 0.0 && w > 0.0 {
                    score = score.max(w / v).max(v / w);
                } else if v != w {
                    score = f64::INFINITY;
                }
            };
            let mut rem = flat;
            let mut stride = 1usize;
            for _a in 0..dim {
                let i = rem % nsp;
                if i > 0 {
                    push(row[flat - stride]);
                }
                if i + 1 < nsp {
                    push(row[flat + stride]);
                }
                rem /= nsp;
                stride *= nsp;
            }
            if ti > 0 {
                push(field[ti - 1][flat]);
            }
            if ti + 1 < nt {
                push(field[ti + 1][flat]);
            }
            scored.push((score, ti, flat));
        }
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let decode = |ti: usize, flat: usize| -> (f64, Vec<f64>) {
        let mut rem = flat;
        let x: Vec<f64> = (0..dim)
            .map(|a| {
                let v = axes[a][rem % nsp];
                rem /= nsp;
                v
            })
            .collect();
        (times[ti], x)
    };

    let mut centers = vec![(0.5 * domain.t_final, domain.box_center())];
    let structured = (count * 2) / 3;
    // For each hot probe point, also try centers displaced by just under
    // 2*delta: the worst cylinder often keeps a singular point barely inside
    // the enlarged cube while its core cube reaches away from it.
    let shift = 1.9 * delta;
    'structured: for &(_, ti, flat) in scored.iter() {
        let (t, x) = decode(ti, flat);
        let mut cands = vec![x.clone()];
        for a in 0..dim {
            for sgn in [-1.0, 1.0] {
                let mut y = x.clone();
                y[a] += sgn * shift;
                cands.push(y);
            }
        }
        for sgn in [-1.0, 1.0] {
            cands.push(x.iter().map(|&v| v + sgn * shift).collect());
        }
        for mut y in cands {
            for a in 0..dim {
                y[a] = y[a].clamp(domain.origin[a], domain.origin[a] + domain.lengths[a]);
            }
            centers.push((t, y));
            if centers.len() >= structured {
                break 'structured;
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ delta.to_bits());
    while centers.len() < count {
        let t = rng.gen_range(0.0..domain.t_final);
        let x: Vec<f64> = (0..dim)
            .map(|a| rng.gen_range(domain.origin[a]..domain.origin[a] + domain.lengths[a]))
            .collect();
        centers.push((t, x));
    }
    centers
}

/// Scans the Θ-ratio proxy R(delta) = sup over cylinders, ray directions, and
/// cylinder points of M / (M_{I,Q})** at |xi| = delta^{-N} (or delta^{-N/p}).
/// Pass means the limsup proxy stays bounded: finite everywhere and growing by
/// less than `growth_limit` across the three smallest deltas.
pub fn theta_scan(
    m: &NFunctionSpec,
    domain: &GridDomain,
    delta_grid: &[f64],
    mode: ExponentMode,
    opts: &ThetaScanOpts,
) -> Result<BalanceReport> {
    if delta_grid.is_empty() || delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("delta grid must be decreasing and nonempty".into()));
    }
    let dim = domain.dim();
    let directions = if opts.directions.is_empty() {
        default_directions(dim, 8)
    } else {
        opts.directions.clone()
    };
    let mut rows = Vec::new();
    let mut witness: Option<BalanceWitness> = None;
    for &delta in delta_grid {
        let raw = mode.probe(delta, dim);
        let capped = raw > opts.s_cap;
        let s_probe = raw.min(opts.s_cap).max(opts.xi_floor);
        let centers = select_centers(
            m,
            domain,
            delta,
            s_probe.min(50.0),
            opts.cylinders_per_delta,
            opts.seed,
        );
        let jobs: Vec<(usize, usize)> = (0..centers.len())
            .flat_map(|c| (0..directions.len()).map(move |d| (c, d)))
            .collect();
        let ratios: Vec<Result<(f64, f64)>> = jobs
            .par_iter()
            .map(|&(c, d)| {
                let cyl = Cylinder::centered(centers[c].0, &centers[c].1, delta);
                cylinder_ratio(
                    m,
                    &cyl,
                    domain,
                    &directions[d],
                    s_probe,
                    opts.xi_floor,
                    opts.s_nodes,
                    opts.per_axis,
                )
            })
            .collect();
        let mut worst = 1.0f64;
        for (job, r) in jobs.iter().zip(ratios) {
            let (ratio, t) = r?;
            if ratio > worst {
                worst = ratio;
                let better = witness.as_ref().is_none_or(|w| ratio > w.ratio);
                if better {
                    witness = Some(BalanceWitness {
                        delta,
                        center: centers[job.0].1.clone(),
                        time: t,
                        direction: directions[job.1].clone(),
                        s_probe,
                        ratio,
                    });
                }
            }
        }
        rows.push(BalanceRow { delta, s_probe, ratio: worst, capped });
    }

    let finite = rows.iter().all(|r| r.ratio.is_finite());
    let tail_growth = if rows.len() >= 3 {
        let a = rows[rows.len() - 3].ratio;
        let b = rows[rows.len() - 1].ratio;
        if a > 0.0 {
            b / a
        } else {
            f64::INFINITY
        }
    } else {
        1.0
    };
    let verdict = if finite && tail_growth <= opts.growth_limit {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    // refinement stability: double the per-axis sampling at the finest delta
    let refinement_stable = {
        let delta = *delta_grid.last().unwrap();
        let s_probe = rows.last().unwrap().s_probe;
        let centers =
            select_centers(m, domain, delta, s_probe.min(50.0), opts.cylinders_per_delta / 2, opts.seed);
        let mut worst = 1.0f64;
        for (t, x) in &centers {
            let cyl = Cylinder::centered(*t, x, delta);
            for dir in &directions {
                let (r, _) = cylinder_ratio(
                    m,
                    &cyl,
                    domain,
                    dir,
                    s_probe,
                    opts.xi_floor,
                    opts.s_nodes,
                    2 * opts.per_axis,
                )?;
                worst = worst.max(r);
            }
        }
        let coarse = rows.last().unwrap().ratio;
        worst.is_finite() == coarse.is_finite()
            && (!worst.is_finite() || worst <= 2.0 * coarse.max(1.0))
    };

    Ok(BalanceReport { rows, verdict, witness, refinement_stable })
}

#[derive(Debug, Clone)]
pub struct IsoThetaTable {
    /// Bucket upper edges for d = |t - tau| + c_sp |x - y|.
    pub distances: Vec<f64>,
    pub s_ladder: Vec<f64>,
    /// values[i][j]: envelope estimate at (distances[i], s_ladder[j]),
    /// nondecreasing along both axes by construction.
    pub values: Vec<Vec<f64>>,
    pub excluded: usize,
}

/// Estimates the smallest envelope Θ^iso(d, s) >= M(t,x,s)/M(tau,y,s) over the
/// probe pairs, with c_sp = sqrt(N) as the spatial distance weight.
pub fn isotropic_theta(
    m: &NFunctionSpec,
    pairs: &[((f64, Vec<f64>), (f64, Vec<f64>))],
    s_ladder: &[f64],
    buckets: usize,
) -> Result<IsoThetaTable> {
    if !m.isotropic {
        return Err(Error::InvalidInput("isotropic_theta needs an isotropic modular function".into()));
    }
    if pairs.is_empty() || s_ladder.is_empty() || buckets == 0 {
        return Err(Error::InvalidInput("empty probe set".into()));
    }
    let c_sp = (pairs[0].0 .1.len() as f64).sqrt();
    let dist = |a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)| -> f64 {
        let dx: Vec<f64> = a.1.iter().zip(&b.1).map(|(p, q)| p - q).collect();
        (a.0 - b.0).abs() + c_sp * norm(&dx)
    };
    let d_max = pairs.iter().map(|(a, b)| dist(a, b)).fold(0.0f64, f64::max);
    let distances: Vec<f64> = (1..=buckets).map(|i| d_max * i as f64 / buckets as f64).collect();
    let mut values = vec![vec![1.0f64; s_ladder.len()]; buckets];
    let mut excluded = 0usize;
    for (a, b) in pairs {
        let d = dist(a, b);
        let bi = (((d / d_max) * buckets as f64).ceil() as usize).clamp(1, buckets) - 1;
        for (j, &s) in s_ladder.iter().enumerate() {
            let va = m.radial_profile(a.0, &a.1, s);
            let vb = m.radial_profile(b.0, &b.1, s);
            if va <= 0.0 || vb <= 0.0 {
                excluded += 1;
                continue;
            }
            values[bi][j] = values[bi][j].max(va / vb).max(vb / va);
        }
    }
    // enforce monotonicity in d, then in s
    for i in 1..buckets {
        for j in 0..s_ladder.len() {
            values[i][j] = values[i][j].max(values[i - 1][j]);
        }
    }
    for row in &mut values {
        for j in 1..row.len() {
            row[j] = row[j].max(row[j - 1]);
        }
    }
    Ok(IsoThetaTable { distances, s_ladder: s_ladder.to_vec(), values, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthMode {
    /// Arbitrary growth: threshold N(q - p).
    Arbitrary,
    /// Power-type lower bound: threshold N(q - p)/p.
    PowerP,
}

#[derive(Debug, Clone)]
pub struct Closeness {
    pub pass: bool,
    pub margin: f64,
    pub threshold: f64,
    /// q <= p collapses the criterion (the q-phase is dominated); flagged.
    pub trivial: bool,
}

/// Closed-form double-phase criterion: the weight exponent alpha must reach
/// N(q-p) (arbitrary growth) or N(q-p)/p (power-p growth).
pub fn double_phase_closeness(p: f64, q: f64, alpha: f64, n: usize, mode: GrowthMode) -> Result<Closeness> {
    if p <= 1.0 || q <= 1.0 {
        return Err(Error::InvalidInput("double-phase closeness needs p, q > 1".into()));
    }
    if alpha <= 0.0 || alpha > 1.0 {
        return Err(Error::InvalidInput("alpha must lie in (0, 1]".into()));
    }
    if q <= p {
        return Ok(Closeness { pass: true, margin: alpha, threshold: 0.0, trivial: true });
    }
    let threshold = match mode {
        GrowthMode::Arbitrary => n as f64 * (q - p),
        GrowthMode::PowerP => n as f64 * (q - p) / p,
    };
    let margin = alpha - threshold;
    Ok(Closeness { pass: margin >= 0.0, margin, threshold, trivial: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn unit_domain(dim: usize) -> GridDomain {
        GridDomain::unit_box(1.0, 4, dim, 9, false)
    }

    #[test]
    fn infimum_of_homogeneous_is_exact() {
        let m = catalog::p_laplace(2, 2.0).unwrap();
        let d = unit_domain(2);
        let cyl = Cylinder::centered(0.5, &[0.5, 0.5], 0.1);
        let v = cylinder_infimum(&m, &cyl, &d, &[2.0, 0.0], 8, true).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(cylinder_infimum(&m, &cyl, &d, &[0.0, 0.0], 8, true).unwrap(), 0.0);
    }

    #[test]
    fn infimum_of_variable_exponent_sits_at_smallest_power() {
        // M = s^{2 + x1} on a cube touching x1 = 0; |xi| = 10 -> 10^2
        let m = catalog::variable_exponent(2, "2 + x1").unwrap();
        let d = unit_domain(2);
        let cyl = Cylinder {
            t_lo: 0.0,
            t_hi: 0.1,
            center: vec![0.0, 0.05],
            delta: 0.05,
        };
        let v = cylinder_infimum(&m, &cyl, &d, &[10.0, 0.0], 8, false).unwrap();
        assert!((v - 100.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn infimum_monotone_under_enlargement() {
        let m = catalog::from_key("double_phase(2, 3, 1, 1)", 2).unwrap();
        let d = unit_domain(2);
        let cyl = Cylinder::centered(0.5, &[0.3, 0.3], 0.1);
        let small = cylinder_infimum(&m, &cyl, &d, &[3.0, 0.0], 8, false).unwrap();
        let large = cylinder_infimum(&m, &cyl, &d, &[3.0, 0.0], 8, true).unwrap();
        assert!(large <= small + 1e-12);
    }

    #[test]
    fn disjoint_cylinder_is_rejected() {
        let m = catalog::p_laplace(2, 2.0).unwrap();
        let d = unit_domain(2);
        let cyl = Cylinder::centered(5.0, &[0.5, 0.5], 0.1);
        assert!(cylinder_infimum(&m, &cyl, &d, &[1.0, 0.0], 8, false).is_err());
    }

    #[test]
    fn minorant_tracks_the_p_branch_when_a_vanishes() {
        // double phase with a = |x|: cylinder at the origin kills the q term
        let m = catalog::from_key("double_phase(2, 3, 1, 1)", 2).unwrap();
        let d = unit_domain(2);
        let cyl = Cylinder {
            t_lo: 0.0,
            t_hi: 0.05,
            center: vec![0.0, 0.0],
            delta: 0.05,
        };
        let nodes = [0.0, 1.0, 2.0, 4.0, 8.0];
        let prof = minorant_profile(&m, &cyl, &d, &[1.0, 0.0], &nodes, 8).unwrap();
        for (&s, &v) in prof.nodes.iter().zip(&prof.values) {
            assert!(v <= s * s + 1e-9, "minorant exceeds p-branch at s={s}: {v}");
        }
        // envelope of the convex p-branch equals it at the nodes
        assert!((prof.values[4] - 64.0).abs() < 1e-9);
    }

    #[test]
    fn homogeneous_scan_is_identically_one() {
        let m = catalog::p_laplace(2, 2.0).unwrap();
        let d = unit_domain(2);
        let opts = ThetaScanOpts { cylinders_per_delta: 6, s_nodes: 17, ..Default::default() };
        let grid = [0.125, 0.0625, 0.03125];
        let rep = theta_scan(&m, &d, &grid, ExponentMode::NOverP(2.0), &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        for row in &rep.rows {
            assert!((row.ratio - 1.0).abs() < 1e-9, "R({}) = {}", row.delta, row.ratio);
        }
        assert!(rep.refinement_stable);
    }

    #[test]
    fn jump_exponent_fails_the_scan() {
        // discontinuous p: ratio delta^{-N omega} blows up across the jump
        let m = catalog::variable_exponent(2, "2 + 0.5*min(1, max(0, (x1 - 0.5)*1e6))").unwrap();
        let d = unit_domain(2);
        let opts = ThetaScanOpts { cylinders_per_delta: 16, s_nodes: 17, ..Default::default() };
        let grid = [0.125, 0.0625, 0.03125, 0.015625];
        let rep = theta_scan(&m, &d, &grid, ExponentMode::NOverP(2.0), &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.witness.is_some());
    }

    #[test]
    fn closeness_matrix() {
        // p=2, N=2, power-p: threshold = q - 2
        let c = double_phase_closeness(2.0, 3.0, 1.0, 2, GrowthMode::PowerP).unwrap();
        assert!(c.pass && c.margin.abs() < 1e-12, "{c:?}");
        let c = double_phase_closeness(2.0, 3.5, 1.0, 2, GrowthMode::PowerP).unwrap();
        assert!(!c.pass && (c.margin + 0.5).abs() < 1e-12);
        let c = double_phase_closeness(2.0, 2.5, 0.5, 2, GrowthMode::PowerP).unwrap();
        assert!(c.pass && c.margin.abs() < 1e-12);
        // arbitrary growth mode is stricter
        let c = double_phase_closeness(2.0, 3.0, 1.0, 2, GrowthMode::Arbitrary).unwrap();
        assert!(!c.pass && (c.margin + 1.0).abs() < 1e-12);
        // q <= p trivially passes
        let c = double_phase_closeness(3.0, 2.0, 0.5, 2, GrowthMode::PowerP).unwrap();
        assert!(c.pass && c.trivial);
    }

    #[test]
    fn isotropic_theta_is_one_for_homogeneous() {
        let m = catalog::p_laplace(2, 2.0).unwrap();
        let pairs = vec![
            ((0.0, vec![0.1, 0.1]), (0.5, vec![0.9, 0.2])),
            ((0.2, vec![0.4, 0.6]), (0.9, vec![0.1, 0.8])),
        ];
        let t = isotropic_theta(&m, &pairs, &[1.0, 10.0, 100.0], 4).unwrap();
        for row in &t.values {
            for &v in row {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isotropic_theta_matches_lipschitz_exponent() {
        // M = s^{2 + x1}: ratio at distance pairs along x1 is s^{|dx|} for s > 1
        let m = catalog::variable_exponent(1, "2 + x1").unwrap();
        let pairs = vec![((0.0, vec![0.0]), (0.0, vec![0.5]))];
        let s = [10.0f64];
        let t = isotropic_theta(&m, &pairs, &s, 1).unwrap();
        let expect = 10.0f64.powf(0.5);
        assert!((t.values[0][0] - expect).abs() < 1e-9 * expect, "{}", t.values[0][0]);
    }
}
