//! Discretization on sampling sets `Z = {(h_j (beta k), h_j)}`: oscillation
//! norms, discrete coefficient norms and frame reconstruction.
//!
//! Sample points are snapped to the space grid so that every atom
//! `pi(z) psi` is exactly representable; the largest snap offset is kept in
//! the set.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cwt::{analyze_slice, HGrid};
use crate::error::{invalid, CoorbitError, Result};
use crate::grid::{Dft2, Domain, FrequencyGrid, FrequencyWindow, SampledField};
use crate::group::{AffinePoint, DilationParams, GroupFamily, Vec2};
use crate::norms::{control_weight_eval, weight_eval, WeightSpec};
use crate::wavelet::{FrequencyBall, WaveletSpec};

/// Minimum number of elements in a sampled neighborhood `U`.
pub const MIN_U_SAMPLES: usize = 27;

/// Upper limit on the frame-bound ratio `B / A` accepted as well posed.
pub const MAX_CONDITION: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    /// Multiplicative step of the scale coordinate.
    pub a_ratio: f64,
    /// Step of the second chart coordinate, in units of the footprint
    /// (angle or shear) or of `ln a_ratio` (diagonal).
    pub b_step: f64,
    /// Lattice constant of the translation lattice `beta Z^2`.
    pub beta: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            a_ratio: 2.0,
            b_step: 1.0,
            beta: 2.0,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_ratio > 1.0) || !self.a_ratio.is_finite() {
            return Err(invalid(format!("a_ratio must exceed 1, got {}", self.a_ratio)));
        }
        if !(self.b_step > 0.0) || !self.b_step.is_finite() {
            return Err(invalid(format!("b_step must be positive, got {}", self.b_step)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// Halves every step (`a_ratio -> sqrt(a_ratio)`).
    pub fn refined(&self) -> SamplingParams {
        SamplingParams {
            a_ratio: self.a_ratio.sqrt(),
            b_step: self.b_step / 2.0,
            beta: self.beta / 2.0,
        }
    }
}

/// The part of `G` a sampling set has to cover: dilations whose wavelet
/// footprint `h^{-T}(footprint)` meets `region`, with `|a|` in
/// `[a_min, a_max]` and shear coordinate at most `b_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingWindow {
    pub region: FrequencyBall,
    pub footprint: FrequencyBall,
    pub a_min: f64,
    pub a_max: f64,
    pub b_max: f64,
}

impl SamplingWindow {
    pub fn new(region: FrequencyBall, footprint: FrequencyBall) -> Self {
        SamplingWindow {
            region,
            footprint,
            a_min: 1.0 / 64.0,
            a_max: 64.0,
            b_max: 16.0,
        }
    }

    /// Default test region with the footprint of the default bump.
    pub fn default_for(family: GroupFamily) -> Result<Self> {
        let footprint = match WaveletSpec::default_bump(family)? {
            WaveletSpec::Bump { center, radius } => FrequencyBall { center, radius },
            WaveletSpec::Moment { .. } => unreachable!(),
        };
        Ok(SamplingWindow::new(FrequencyBall::default_for(family)?, footprint))
    }

    fn validate(&self) -> Result<()> {
        if !(self.region.radius > 0.0) || !(self.footprint.radius > 0.0) {
            return Err(invalid("window balls need positive radii"));
        }
        if !(self.a_min > 0.0 && self.a_max > self.a_min) || !(self.b_max > 0.0) {
            return Err(invalid("window needs 0 < a_min < a_max and b_max > 0"));
        }
        Ok(())
    }
}

/// Neighborhood `U = B(0, x_radius) x chart box of radius chart_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UParams {
    pub x_radius: f64,
    pub chart_radius: f64,
}

impl UParams {
    pub fn contains(&self, other: &UParams) -> bool {
        other.x_radius <= self.x_radius && other.chart_radius <= self.chart_radius
    }

    pub fn halved(&self) -> UParams {
        UParams {
            x_radius: self.x_radius / 2.0,
            chart_radius: self.chart_radius / 2.0,
        }
    }
}

/// Result of the covering check: the smallest `U` for which the set is
/// `U`-dense over the probed region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub required: UParams,
    pub h_probes: usize,
    pub x_probes: usize,
}

impl DensityReport {
    pub fn is_dense_for(&self, u: &UParams) -> bool {
        u.contains(&self.required)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub node: usize,
    pub k: [i32; 2],
    /// Snapped translation.
    pub x: Vec2,
    /// Flat index of `x` on the space grid.
    pub grid_index: usize,
}

/// Chart position of a mesh node: sign branch and integer steps.
type MeshKey = (u8, i32, i32);

#[derive(Debug, Clone)]
pub struct SamplingSet {
    pub family: GroupFamily,
    pub grid: FrequencyGrid,
    pub params: SamplingParams,
    pub window: SamplingWindow,
    pub nodes: Vec<DilationParams>,
    /// Point ranges per node, parallel to `nodes`.
    pub ranges: Vec<(usize, usize)>,
    pub points: Vec<SamplePoint>,
    pub max_snap_offset: f64,
    pub density: DensityReport,
    keys: Vec<MeshKey>,
}

/// Summary used in reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingSummary {
    pub family: GroupFamily,
    pub params: SamplingParams,
    pub window: SamplingWindow,
    pub nodes: usize,
    pub points: usize,
    pub max_snap_offset: f64,
    pub density: DensityReport,
}

impl SamplingSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> AffinePoint {
        let p = &self.points[i];
        AffinePoint::new(p.x, self.nodes[p.node])
    }

    /// The unsnapped lattice point `h_j (beta k)`.
    pub fn ideal_x(&self, i: usize) -> Vec2 {
        let p = &self.points[i];
        let b = self.params.beta;
        self.nodes[p.node].matrix().apply([b * p.k[0] as f64, b * p.k[1] as f64])
    }

    pub fn summary(&self) -> SamplingSummary {
        SamplingSummary {
            family: self.family,
            params: self.params,
            window: self.window,
            nodes: self.nodes.len(),
            points: self.points.len(),
            max_snap_offset: self.max_snap_offset,
            density: self.density,
        }
    }

    /// Restriction to a single dilation node (for diagnostics).
    pub fn single_node(&self, node: usize) -> Result<SamplingSet> {
        let Some(&(lo, hi)) = self.ranges.get(node) else {
            return Err(invalid(format!("node {node} out of range")));
        };
        let points: Vec<SamplePoint> = self.points[lo..hi]
            .iter()
            .map(|p| SamplePoint { node: 0, ..*p })
            .collect();
        let keys = vec![self.keys[node]];
        let nodes = vec![self.nodes[node]];
        let ranges = vec![(0, points.len())];
        let density = covering_check(self.family, &self.grid, &self.params, &self.window, &nodes, &keys, &ranges, &points)?;
        Ok(SamplingSet {
            nodes,
            ranges,
            points,
            keys,
            density,
            ..self.clone()
        })
    }
}

fn mesh_steps(family: GroupFamily, params: &SamplingParams, fp: &FrequencyBall) -> (f64, f64) {
    let dt = params.a_ratio.ln();
    let unit = match family {
        GroupFamily::Diagonal => dt,
        _ => fp.radius / fp.center[0].hypot(fp.center[1]).max(fp.radius),
    };
    let ds = match family {
        GroupFamily::Similitude => {
            let count = (2.0 * PI / (params.b_step * unit)).ceil().max(1.0);
            2.0 * PI / count
        }
        _ => params.b_step * unit,
    };
    (dt, ds)
}

fn angle_count(params: &SamplingParams, window: &SamplingWindow) -> i32 {
    let (_, ds) = mesh_steps(GroupFamily::Similitude, params, &window.footprint);
    (2.0 * PI / ds).round() as i32
}

fn branch_signs(family: GroupFamily, branch: u8) -> (f64, f64) {
    let sa = if branch & 1 == 0 { 1.0 } else { -1.0 };
    let sb = if branch & 2 == 0 { 1.0 } else { -1.0 };
    match family {
        GroupFamily::Diagonal => (sa, sb),
        GroupFamily::Shearlet { .. } => (sa, 1.0),
        _ => (1.0, 1.0),
    }
}

fn branches(family: GroupFamily) -> &'static [u8] {
    match family {
        GroupFamily::Diagonal => &[0, 1, 2, 3],
        GroupFamily::Shearlet { .. } => &[0, 1],
        _ => &[0],
    }
}

/// Element at chart coordinates `(t, s)` on a sign branch:
/// similitude `(ln rho, theta)`, diagonal `(ln|a|, ln|b|)`, shearlet
/// `(ln|a|, b/|a|)`, scalar `(ln a, -)`.
pub fn from_chart(family: GroupFamily, branch: u8, t: f64, s: f64) -> Result<DilationParams> {
    let (sa, sb) = branch_signs(family, branch);
    let r = t.exp();
    let (a, b) = match family {
        GroupFamily::Similitude => (r * s.cos(), r * s.sin()),
        GroupFamily::Diagonal => (sa * r, sb * s.exp()),
        GroupFamily::Shearlet { .. } => (sa * r, r * s),
        GroupFamily::ScalarReducible => (r, 0.0),
    };
    DilationParams::new(family, a, b)
}

/// Chart box distance of `g` from the identity; infinite off the identity
/// component.
pub fn chart_distance(g: &DilationParams) -> f64 {
    let (a, b) = (g.a, g.b);
    let (t, s) = match g.family {
        GroupFamily::Similitude => (0.5 * (a * a + b * b).ln(), b.atan2(a)),
        GroupFamily::Diagonal => {
            if a <= 0.0 || b <= 0.0 {
                return f64::INFINITY;
            }
            (a.ln(), b.ln())
        }
        GroupFamily::Shearlet { .. } => {
            if a <= 0.0 {
                return f64::INFINITY;
            }
            (a.ln(), b / a)
        }
        GroupFamily::ScalarReducible => (a.ln(), 0.0),
    };
    t.abs().max(s.abs())
}

/// Grid nodes inside `ball`.
fn ball_nodes(grid: &FrequencyGrid, ball: &FrequencyBall) -> Vec<usize> {
    (0..grid.len()).filter(|&i| ball.contains(grid.point(i))).collect()
}

fn dist(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn footprint_meets(h: &DilationParams, window: &SamplingWindow, probes: &[Vec2]) -> bool {
    let fp = &window.footprint;
    let c = h.dual_action(window.region.center);
    if dist(c, fp.center) > h.op_norm() * window.region.radius + fp.radius {
        return false;
    }
    probes.iter().any(|&xi| dist(h.dual_action(xi), fp.center) < fp.radius)
}

fn wrap(v: f64, period: f64) -> f64 {
    v - period * (v / period).round()
}

/// Builds `Z` on the chart mesh of `params`, keeping the dilations whose
/// footprint meets the region on grid nodes.
pub fn build_sampling_set(
    family: GroupFamily,
    params: SamplingParams,
    window: SamplingWindow,
    grid: FrequencyGrid,
) -> Result<SamplingSet> {
    family.require_admissible("sampling sets")?;
    params.validate()?;
    window.validate()?;
    grid.validate()?;
    let probes: Vec<Vec2> = ball_nodes(&grid, &window.region)
        .into_iter()
        .map(|i| grid.point(i))
        .collect();
    if probes.is_empty() {
        return Err(CoorbitError::InsufficientSamples(
            "region contains no grid nodes".into(),
        ));
    }
    let (dt, ds) = mesh_steps(family, &params, &window.footprint);
    let j_lo = (window.a_min.ln() / dt).ceil() as i32;
    let j_hi = (window.a_max.ln() / dt).floor() as i32;
    let m_range: (i32, i32) = match family {
        GroupFamily::Similitude => (0, angle_count(&params, &window) - 1),
        GroupFamily::Diagonal => (
            (window.a_min.ln() / ds).ceil() as i32,
            (window.a_max.ln() / ds).floor() as i32,
        ),
        _ => {
            let m = (window.b_max / ds).floor() as i32;
            (-m, m)
        }
    };

    let mut candidates = Vec::new();
    for &branch in branches(family) {
        for j in j_lo..=j_hi {
            for m in m_range.0..=m_range.1 {
                candidates.push((branch, j, m));
            }
        }
    }
    let kept: Vec<(MeshKey, DilationParams)> = candidates
        .par_iter()
        .filter_map(|&(branch, j, m)| {
            let s = match family {
                GroupFamily::Similitude => m as f64 * ds - PI,
                _ => m as f64 * ds,
            };
            let h = from_chart(family, branch, j as f64 * dt, s).ok()?;
            footprint_meets(&h, &window, &probes).then_some(((branch, j, m), h))
        })
        .collect();
    if kept.is_empty() {
        return Err(CoorbitError::InsufficientSamples(
            "no dilation of the mesh reaches the region".into(),
        ));
    }

    let period = grid.x_period();
    let half = period / 2.0;
    let beta = params.beta;
    let per_node: Vec<Vec<(usize, [i32; 2], Vec2, usize, f64)>> = kept
        .par_iter()
        .enumerate()
        .map(|(node, (_, h))| {
            let m = h.matrix();
            let reach = h.invert().op_norm() * half * 2f64.sqrt() / beta;
            let kmax = reach.ceil() as i32;
            let mut pts = Vec::new();
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    let x = m.apply([beta * k1 as f64, beta * k2 as f64]);
                    if x[0] < -half || x[0] >= half || x[1] < -half || x[1] >= half {
                        continue;
                    }
                    let (i1, i2) = (grid.nearest_x_index(x[0]), grid.nearest_x_index(x[1]));
                    let idx = i1 * grid.n + i2;
                    let xs = grid.x_point(idx);
                    let off = wrap(xs[0] - x[0], period).hypot(wrap(xs[1] - x[1], period));
                    pts.push((node, [k1, k2], xs, idx, off));
                }
            }
            pts
        })
        .collect();

    let mut points = Vec::new();
    let mut ranges = Vec::with_capacity(kept.len());
    let mut max_snap_offset: f64 = 0.0;
    for pts in per_node {
        let lo = points.len();
        for (node, k, x, grid_index, off) in pts {
            max_snap_offset = max_snap_offset.max(off);
            points.push(SamplePoint {
                node,
                k,
                x,
                grid_index,
            });
        }
        ranges.push((lo, points.len()));
    }
    if points.is_empty() {
        return Err(CoorbitError::InsufficientSamples("empty translation window".into()));
    }
    let keys: Vec<MeshKey> = kept.iter().map(|(k, _)| *k).collect();
    let nodes: Vec<DilationParams> = kept.into_iter().map(|(_, h)| h).collect();
    let density = covering_check(family, &grid, &params, &window, &nodes, &keys, &ranges, &points)?;
    Ok(SamplingSet {
        family,
        grid,
        params,
        window,
        nodes,
        ranges,
        points,
        max_snap_offset,
        density,
        keys,
    })
}

/// Direct covering check. Dilation probes sit at the centers of mesh cells
/// whose four corners all belong to `Z` (and at the nodes themselves);
/// translation probes form a mesh on the central half of the space cell.
/// Without interior cells the chart radius is infinite.
#[allow(clippy::too_many_arguments)]
fn covering_check(
    family: GroupFamily,
    grid: &FrequencyGrid,
    params: &SamplingParams,
    window: &SamplingWindow,
    nodes: &[DilationParams],
    keys: &[MeshKey],
    ranges: &[(usize, usize)],
    points: &[SamplePoint],
) -> Result<DensityReport> {
    let period = grid.x_period();
    let index: HashMap<MeshKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let wrap_m = match family {
        GroupFamily::Similitude => Some(angle_count(params, window)),
        _ => None,
    };
    let lookup = |b: u8, j: i32, m: i32| -> Option<usize> {
        let m = match wrap_m {
            Some(c) if c > 0 => m.rem_euclid(c),
            _ => m,
        };
        index.get(&(b, j, m)).copied()
    };

    // (probe element, candidate nodes)
    let mut h_probes: Vec<(DilationParams, Vec<usize>)> = Vec::new();
    let mut interior = 0usize;
    for (i, &(b, j, m)) in keys.iter().enumerate() {
        h_probes.push((nodes[i], vec![i]));
        let corners = [
            Some(i),
            lookup(b, j + 1, m),
            lookup(b, j, m + 1),
            lookup(b, j + 1, m + 1),
        ];
        if corners.iter().all(|c| c.is_some()) {
            let cs: Vec<usize> = corners.iter().map(|c| c.unwrap()).collect();
            // geometric midpoint of the four corners in absolute chart terms
            let probe = midpoint(family, &cs.iter().map(|&c| nodes[c]).collect::<Vec<_>>())?;
            h_probes.push((probe, cs));
            interior += 1;
        }
    }

    let mut chart_radius: f64 = 0.0;
    let mut best_node = Vec::with_capacity(h_probes.len());
    for (probe, cands) in &h_probes {
        let mut best = (f64::INFINITY, cands[0]);
        for &c in cands {
            let g = nodes[c].invert().compose(probe)?;
            let d = chart_distance(&g);
            if d < best.0 {
                best = (d, c);
            }
        }
        chart_radius = chart_radius.max(best.0);
        best_node.push(best.1);
    }
    if interior == 0 {
        chart_radius = f64::INFINITY;
    }

    let lattice: Vec<HashMap<[i32; 2], Vec2>> = ranges
        .iter()
        .map(|&(lo, hi)| points[lo..hi].iter().map(|p| (p.k, p.x)).collect())
        .collect();
    let xs_per_axis = 6;
    let x_probes: Vec<Vec2> = (0..xs_per_axis * xs_per_axis)
        .map(|i| {
            let f = |k: usize| period * (-0.25 + 0.5 * (k as f64 + 0.5) / xs_per_axis as f64);
            [f(i / xs_per_axis), f(i % xs_per_axis)]
        })
        .collect();
    let beta = params.beta;
    let x_radius = h_probes
        .par_iter()
        .zip(&best_node)
        .map(|((_, _), &node)| {
            let hinv = nodes[node].invert().matrix();
            let mut worst: f64 = 0.0;
            for x in &x_probes {
                let u = hinv.apply(*x);
                let k0 = [(u[0] / beta).round() as i32, (u[1] / beta).round() as i32];
                let mut best = f64::INFINITY;
                for d1 in -2..=2 {
                    for d2 in -2..=2 {
                        if let Some(xk) = lattice[node].get(&[k0[0] + d1, k0[1] + d2]) {
                            let diff = [wrap(x[0] - xk[0], period), wrap(x[1] - xk[1], period)];
                            let v = hinv.apply(diff);
                            best = best.min(v[0].hypot(v[1]));
                        }
                    }
                }
                worst = worst.max(best);
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(DensityReport {
        required: UParams {
            x_radius,
            chart_radius,
        },
        h_probes: h_probes.len(),
        x_probes: x_probes.len(),
    })
}

/// Chart midpoint of mesh neighbours (same sign branch).
fn midpoint(family: GroupFamily, hs: &[DilationParams]) -> Result<DilationParams> {
    let n = hs.len() as f64;
    let h0 = &hs[0];
    match family {
        GroupFamily::Similitude => {
            // average log-radius and unwrapped angle relative to the first corner
            let th0 = h0.b.atan2(h0.a);
            let mut t = 0.0;
            let mut s = 0.0;
            for h in hs {
                t += 0.5 * (h.a * h.a + h.b * h.b).ln();
                s += wrap(h.b.atan2(h.a) - th0, 2.0 * PI);
            }
            from_chart(family, 0, t / n, th0 + s / n)
        }
        GroupFamily::Diagonal => {
            let t = hs.iter().map(|h| h.a.abs().ln()).sum::<f64>() / n;
            let s = hs.iter().map(|h| h.b.abs().ln()).sum::<f64>() / n;
            DilationParams::new(family, h0.a.signum() * t.exp(), h0.b.signum() * s.exp())
        }
        GroupFamily::Shearlet { .. } => {
            let t = hs.iter().map(|h| h.a.abs().ln()).sum::<f64>() / n;
            let s = hs.iter().map(|h| h.b / h.a.abs()).sum::<f64>() / n;
            DilationParams::new(family, h0.a.signum() * t.exp(), t.exp() * s)
        }
        GroupFamily::ScalarReducible => {
            let t = hs.iter().map(|h| h.a.ln()).sum::<f64>() / n;
            DilationParams::new(family, t.exp(), 0.0)
        }
    }
}

/// Coefficients indexed parallel to [`SamplingSet::points`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffArray {
    pub values: Vec<Complex64>,
}

impl CoeffArray {
    pub fn zeros(len: usize) -> Self {
        CoeffArray {
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: Complex64) -> CoeffArray {
        CoeffArray {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_len(c: &CoeffArray, z: &SamplingSet) -> Result<()> {
    if c.len() != z.len() {
        return Err(invalid(format!(
            "coefficient array has {} entries, sampling set has {}",
            c.len(),
            z.len()
        )));
    }
    Ok(())
}

fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn lp_sum(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Discrete weighted `l^{p,q}` norm
/// `( sum_j |det h_j|^{q/p-1} ( sum_k (|c_jk| v(x_jk, h_j) |det h_j|^{1/p-1/q})^p )^{q/p} )^{1/q}`
/// with sups for infinite exponents.
pub fn discrete_norm(c: &CoeffArray, z: &SamplingSet, p: f64, q: f64, weight: &WeightSpec) -> Result<f64> {
    check_len(c, z)?;
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(invalid("exponents must lie in [1, inf]"));
    }
    let (ip, iq) = (recip(p), recip(q));
    let per_node: Vec<f64> = z
        .ranges
        .iter()
        .enumerate()
        .map(|(j, &(lo, hi))| {
            let h = &z.nodes[j];
            let det = h.abs_det();
            let inner = lp_sum(
                (lo..hi).map(|i| c.values[i].norm() * weight_eval(weight, z.ideal_x(i), h)),
                p,
            ) * det.powf(ip - iq);
            // |det|^{q/p-1} taken inside the outer q-th root
            inner * det.powf(ip - iq)
        })
        .collect();
    Ok(lp_sum(per_node.into_iter(), q))
}

/// Flat weighted `l^p` norm `( sum_{j,k} (|c_jk| v(x_jk, h_j))^p )^{1/p}`.
pub fn discrete_lp_norm(c: &CoeffArray, z: &SamplingSet, p: f64, weight: &WeightSpec) -> Result<f64> {
    check_len(c, z)?;
    Ok(lp_sum(
        z.points
            .iter()
            .enumerate()
            .map(|(i, pt)| c.values[i].norm() * weight_eval(weight, z.ideal_x(i), &z.nodes[pt.node])),
        p,
    ))
}

/// `|det h|^{1/2} psi_hat(h^T xi)` on its support.
struct Footprint {
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

/// Analysis and synthesis operators of one sampling set and window, with
/// the per-node frequency footprints precomputed.
pub struct FrameOperator<'a> {
    set: &'a SamplingSet,
    dft: Dft2,
    footprints: Vec<Footprint>,
    /// `(grid index, multiplicity)` of the samples of each node.
    samples: Vec<Vec<(usize, f64)>>,
}

impl<'a> FrameOperator<'a> {
    pub fn new(set: &'a SamplingSet, psi: &(impl FrequencyWindow + ?Sized)) -> Self {
        let grid = set.grid;
        let footprints = set
            .nodes
            .par_iter()
            .map(|h| {
                let s = h.abs_det().sqrt();
                let mut indices = Vec::new();
                let mut values = Vec::new();
                for i in 0..grid.len() {
                    let v = psi.eval(h.dual_action(grid.point(i)));
                    if v.re != 0.0 || v.im != 0.0 {
                        indices.push(i);
                        values.push(v * s);
                    }
                }
                Footprint { indices, values }
            })
            .collect();
        let samples = set
            .ranges
            .iter()
            .map(|&(lo, hi)| {
                let mut counts: HashMap<usize, f64> = HashMap::new();
                for p in &set.points[lo..hi] {
                    *counts.entry(p.grid_index).or_insert(0.0) += 1.0;
                }
                let mut v: Vec<(usize, f64)> = counts.into_iter().collect();
                v.sort_unstable_by_key(|e| e.0);
                v
            })
            .collect();
        FrameOperator {
            set,
            dft: Dft2::new(grid),
            footprints,
            samples,
        }
    }

    pub fn set(&self) -> &SamplingSet {
        self.set
    }

    fn check_field(&self, f: &SampledField) -> Result<()> {
        if !f.grid.compatible(&self.set.grid) {
            return Err(CoorbitError::GridMismatch(
                "field and sampling set live on different grids".into(),
            ));
        }
        if f.domain != Domain::Frequency {
            return Err(invalid("field must be given in the frequency domain"));
        }
        Ok(())
    }

    /// `W_psi f(x, h_j)` on the space grid; `None` if the footprint misses `f`.
    fn slice(&self, f: &SampledField, j: usize) -> Option<Vec<Complex64>> {
        let fp = &self.footprints[j];
        let mut data = vec![Complex64::new(0.0, 0.0); self.set.grid.len()];
        let mut any = false;
        for (&i, v) in fp.indices.iter().zip(&fp.values) {
            let w = f.values[i] * v.conj();
            if w.re != 0.0 || w.im != 0.0 {
                any = true;
            }
            data[i] = w;
        }
        if !any {
            return None;
        }
        self.dft.inverse(&mut data);
        Some(data)
    }

    /// Adds `sum_x c_x pi(x, h_j) psi` (space samples in `data`) to `acc`.
    fn add_synthesis(&self, j: usize, mut data: Vec<Complex64>, acc: &mut [Complex64]) {
        self.dft.forward(&mut data);
        let inv_cell = 1.0 / self.set.grid.x_cell_area();
        let fp = &self.footprints[j];
        for (&i, v) in fp.indices.iter().zip(&fp.values) {
            acc[i] += data[i] * v * inv_cell;
        }
    }

    /// `c_z = <f, pi(z) psi>` for every `z` in the set.
    pub fn analyze(&self, f: &SampledField) -> Result<CoeffArray> {
        self.check_field(f)?;
        let per_node: Vec<Vec<Complex64>> = (0..self.set.nodes.len())
            .into_par_iter()
            .map(|j| {
                let (lo, hi) = self.set.ranges[j];
                match self.slice(f, j) {
                    Some(s) => self.set.points[lo..hi].iter().map(|p| s[p.grid_index]).collect(),
                    None => vec![Complex64::new(0.0, 0.0); hi - lo],
                }
            })
            .collect();
        Ok(CoeffArray {
            values: per_node.into_iter().flatten().collect(),
        })
    }

    /// `sum_z c_z pi(z) psi`.
    pub fn synthesize(&self, c: &CoeffArray) -> Result<SampledField> {
        check_len(c, self.set)?;
        let grid = self.set.grid;
        let nodes: Vec<usize> = (0..self.set.nodes.len()).collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for chunk in nodes.chunks(16) {
            let parts: Vec<Option<Vec<Complex64>>> = chunk
                .par_iter()
                .map(|&j| {
                    let (lo, hi) = self.set.ranges[j];
                    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
                    let mut any = false;
                    for (p, v) in self.set.points[lo..hi].iter().zip(&c.values[lo..hi]) {
                        if v.re != 0.0 || v.im != 0.0 {
                            any = true;
                        }
                        data[p.grid_index] += v;
                    }
                    if !any {
                        return None;
                    }
                    let mut part = vec![Complex64::new(0.0, 0.0); grid.len()];
                    self.add_synthesis(j, data, &mut part);
                    Some(part)
                })
                .collect();
            for part in parts.into_iter().flatten() {
                for (a, v) in acc.iter_mut().zip(part) {
                    *a += v;
                }
            }
        }
        SampledField::new(grid, acc, Domain::Frequency)
    }

    /// Frame operator `S f = synthesize(analyze(f))` without storing
    /// coefficients.
    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        self.check_field(f)?;
        let grid = self.set.grid;
        let nodes: Vec<usize> = (0..self.set.nodes.len()).collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for chunk in nodes.chunks(16) {
            let parts: Vec<Option<Vec<Complex64>>> = chunk
                .par_iter()
                .map(|&j| {
                    let s = self.slice(f, j)?;
                    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
                    for &(i, mult) in &self.samples[j] {
                        data[i] = s[i] * mult;
                    }
                    let mut part = vec![Complex64::new(0.0, 0.0); grid.len()];
                    self.add_synthesis(j, data, &mut part);
                    Some(part)
                })
                .collect();
            for part in parts.into_iter().flatten() {
                for (a, v) in acc.iter_mut().zip(part) {
                    *a += v;
                }
            }
        }
        SampledField::new(grid, acc, Domain::Frequency)
    }
}

/// `c_{j,k} = W_psi f(x_{j,k}, h_j)`.
pub fn analyze_at(f: &SampledField, psi: &(impl FrequencyWindow + ?Sized), z: &SamplingSet) -> Result<CoeffArray> {
    FrameOperator::new(z, psi).analyze(f)
}

/// `sum_{j,k} c_{j,k} pi(x_{j,k}, h_j) psi`.
pub fn synthesize_from(c: &CoeffArray, psi: &(impl FrequencyWindow + ?Sized), z: &SamplingSet) -> Result<SampledField> {
    FrameOperator::new(z, psi).synthesize(c)
}

/// Direct frequency-domain inner product `<pi(z1) psi, pi(z2) psi>` on `grid`.
pub fn atom_inner(
    psi: &(impl FrequencyWindow + ?Sized),
    grid: &FrequencyGrid,
    z1: &AffinePoint,
    z2: &AffinePoint,
) -> Complex64 {
    let g1 = crate::cwt::RepresentedWindow::new(psi, *z1);
    let g2 = crate::cwt::RepresentedWindow::new(psi, *z2);
    let s: Complex64 = (0..grid.len())
        .map(|i| {
            let xi = grid.point(i);
            g1.eval(xi) * g2.eval(xi).conj()
        })
        .sum();
    s * grid.cell_area()
}

/// Indicator of the region on the grid: `P_V`.
fn project(f: &SampledField, mask: &[bool]) -> SampledField {
    let mut out = f.clone();
    for (v, &m) in out.values.iter_mut().zip(mask) {
        if !m {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub power_iterations: usize,
}

impl FrameBounds {
    pub fn condition(&self) -> f64 {
        if self.lower > 0.0 {
            self.upper / self.lower
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub power_iter: usize,
    pub seed: u64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            max_iter: 200,
            tol: 1e-3,
            power_iter: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub field: SampledField,
    pub rel_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub bounds: FrameBounds,
    /// Relative error after each iteration.
    pub history: Vec<f64>,
}

fn restricted_apply(op: &FrameOperator, f: &SampledField, mask: &[bool]) -> Result<SampledField> {
    Ok(project(&op.apply(&project(f, mask))?, mask))
}

/// Extreme eigenvalues of `P_V S P_V` on the region by power iteration
/// (the lower one through `B - (P_V S P_V)`).
pub fn frame_bounds(op: &FrameOperator, region: &FrequencyBall, iterations: usize, seed: u64) -> Result<FrameBounds> {
    let grid = op.set.grid;
    let mask: Vec<bool> = (0..grid.len()).map(|i| region.contains(grid.point(i))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let start = project(&SampledField::new(grid, values, Domain::Frequency)?, &mask);
    let norm = start.l2_norm();
    if norm == 0.0 {
        return Err(CoorbitError::InsufficientSamples("region contains no grid nodes".into()));
    }
    let iterations = iterations.max(1);
    let mut v = start.scaled(Complex64::new(1.0 / norm, 0.0));
    let mut upper = 0.0;
    for _ in 0..iterations {
        let w = restricted_apply(op, &v, &mask)?;
        upper = w.inner(&v)?.re;
        let n = w.l2_norm();
        if n == 0.0 {
            break;
        }
        v = w.scaled(Complex64::new(1.0 / n, 0.0));
    }
    let mut v = start.scaled(Complex64::new(1.0 / norm, 0.0));
    let mut shifted = 0.0;
    for _ in 0..iterations {
        let sv = restricted_apply(op, &v, &mask)?;
        let mut w = v.scaled(Complex64::new(upper, 0.0));
        w.add_scaled(&sv, Complex64::new(-1.0, 0.0))?;
        shifted = w.inner(&v)?.re;
        let n = w.l2_norm();
        if n == 0.0 {
            break;
        }
        v = w.scaled(Complex64::new(1.0 / n, 0.0));
    }
    Ok(FrameBounds {
        lower: (upper - shifted).max(0.0),
        upper,
        power_iterations: iterations,
    })
}

/// Richardson iteration `g <- g + lambda (P_V S f - P_V S P_V g)` with
/// `lambda = 2 / (A + B)`. Stops when the relative residual times `B / A`
/// drops below `tol / 2`, or after `max_iter` steps.
pub fn frame_reconstruct(
    f: &SampledField,
    psi: &(impl FrequencyWindow + ?Sized),
    z: &SamplingSet,
    config: &ReconstructionConfig,
) -> Result<Reconstruction> {
    let op = FrameOperator::new(z, psi);
    let bounds = frame_bounds(&op, &z.window.region, config.power_iter, config.seed)?;
    let c = op.analyze(f)?;
    reconstruct_with(&op, &c, Some(f), bounds, config)
}

/// Reconstruction from coefficients alone; `truth` only feeds the error
/// history.
pub fn reconstruct_with(
    op: &FrameOperator,
    c: &CoeffArray,
    truth: Option<&SampledField>,
    bounds: FrameBounds,
    config: &ReconstructionConfig,
) -> Result<Reconstruction> {
    let grid = op.set.grid;
    let mask: Vec<bool> = (0..grid.len())
        .map(|i| op.set.window.region.contains(grid.point(i)))
        .collect();
    let rhs = project(&op.synthesize(c)?, &mask);
    let rhs_norm = rhs.l2_norm();
    let lambda = if bounds.upper > 0.0 {
        2.0 / (bounds.lower + bounds.upper)
    } else {
        0.0
    };
    let truth_norm = truth.map(|t| t.l2_norm()).unwrap_or(0.0);
    let rel = |g: &SampledField| -> Result<f64> {
        match truth {
            Some(t) if truth_norm > 0.0 => Ok(g.sub(t)?.l2_norm() / truth_norm),
            _ => Ok(f64::NAN),
        }
    };
    let mut g = SampledField::zeros(grid, Domain::Frequency);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut residual_ok = rhs_norm == 0.0;
    let amplification = bounds.condition();
    while iterations < config.max_iter && !residual_ok && lambda > 0.0 {
        let tg = restricted_apply(op, &g, &mask)?;
        let r = rhs.sub(&tg)?;
        g.add_scaled(&r, Complex64::new(lambda, 0.0))?;
        iterations += 1;
        history.push(rel(&g)?);
        residual_ok = r.l2_norm() / rhs_norm * amplification < config.tol / 2.0;
    }
    let rel_error = rel(&g)?;
    let converged = if truth.is_some() {
        rel_error < config.tol
    } else {
        residual_ok
    };
    Ok(Reconstruction {
        field: g,
        rel_error,
        iterations,
        converged,
        bounds,
        history,
    })
}

/// Elements of `U`: translations on a circle of radius `x_radius` (8
/// directions plus the center) times chart offsets at the corners, edge
/// midpoints and center of the chart box.
pub fn u_samples(family: GroupFamily, u: &UParams) -> Result<(Vec<Vec2>, Vec<DilationParams>)> {
    if !(u.x_radius >= 0.0) || !(u.chart_radius >= 0.0) {
        return Err(invalid("U radii must be non-negative"));
    }
    let mut ys = vec![[0.0, 0.0]];
    for k in 0..8 {
        let th = k as f64 * PI / 4.0;
        ys.push([u.x_radius * th.cos(), u.x_radius * th.sin()]);
    }
    let e = u.chart_radius;
    let mut gs = Vec::new();
    for (dt, ds) in [
        (0.0, 0.0),
        (e, 0.0),
        (-e, 0.0),
        (0.0, e),
        (0.0, -e),
        (e, e),
        (e, -e),
        (-e, e),
        (-e, -e),
    ] {
        gs.push(from_chart(family, 0, dt, ds)?);
    }
    if ys.len() * gs.len() < MIN_U_SAMPLES {
        return Err(CoorbitError::InsufficientSamples("U sample too small".into()));
    }
    Ok((ys, gs))
}

/// Raises `osc2[i]` to `|S(x_i + d) - f0[i]|^2`, where `S` is the periodic
/// bilinear interpolant of `slice` and `d = shift * dx`. The fractional
/// part of the shift is the same at every node.
fn shifted_max(slice: &[Complex64], f0: &[Complex64], n: usize, shift: Vec2, osc2: &mut [f64]) {
    let (u0, v0) = (shift[0].floor(), shift[1].floor());
    let (fu, fv) = (shift[0] - u0, shift[1] - v0);
    let (w00, w10, w01, w11) = ((1.0 - fu) * (1.0 - fv), fu * (1.0 - fv), (1.0 - fu) * fv, fu * fv);
    let ni = n as i64;
    let idx = |k: usize, off: i64| (k as i64 + off).rem_euclid(ni) as usize;
    let c0: Vec<usize> = (0..n).map(|j| idx(j, v0 as i64)).collect();
    let c1: Vec<usize> = (0..n).map(|j| idx(j, v0 as i64 + 1)).collect();
    for i in 0..n {
        let r0 = idx(i, u0 as i64) * n;
        let r1 = idx(i, u0 as i64 + 1) * n;
        for j in 0..n {
            let mut v = slice[r0 + c0[j]] * w00;
            if fu != 0.0 {
                v += slice[r1 + c0[j]] * w10;
            }
            if fv != 0.0 {
                v += slice[r0 + c1[j]] * w01;
                if fu != 0.0 {
                    v += slice[r1 + c1[j]] * w11;
                }
            }
            let d = (v - f0[i * n + j]).norm_sqr();
            let o = &mut osc2[i * n + j];
            if d > *o {
                *o = d;
            }
        }
    }
}

/// `|| osc_U(W_psi psi) ||_{L^1_{v_0}}` by quadrature over the space grid
/// and `hgrid`, with `osc_U F(x, h) = sup_{(y, g) in U} |F(x + h y, h g) - F(x, h)|`
/// and `v_0` the control weight of `L^{p,q}_v`.
pub fn oscillation_norm(
    psi: &(impl FrequencyWindow + ?Sized),
    grid: FrequencyGrid,
    hgrid: &HGrid,
    u: &UParams,
    weight: &WeightSpec,
    p: f64,
    q: f64,
) -> Result<f64> {
    hgrid.family.require_admissible("oscillation norms")?;
    let (ys, gs) = u_samples(hgrid.family, u)?;
    let psi_field = SampledField::from_fn(grid, Domain::Frequency, |xi| psi.eval(xi));
    let dft = Dft2::new(grid);
    let cell = grid.x_cell_area();
    let terms: Vec<Result<f64>> = (0..hgrid.len())
        .into_par_iter()
        .map(|k| {
            let h = &hgrid.nodes[k];
            let slices: Vec<Option<Vec<Complex64>>> = gs
                .iter()
                .map(|g| Ok(analyze_slice(&psi_field, psi, &h.compose(g)?, &dft)))
                .collect::<Result<_>>()?;
            if slices.iter().all(|s| s.is_none()) {
                return Ok(0.0);
            }
            let m = h.matrix();
            let dx = grid.x_spacing();
            let n = grid.n;
            let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
            let f0: &[Complex64] = slices[0].as_deref().unwrap_or(&zero);
            let mut osc2 = vec![0.0; grid.len()];
            for s in &slices {
                let s: &[Complex64] = s.as_deref().unwrap_or(&zero);
                for y in &ys {
                    let hy = m.apply(*y);
                    shifted_max(s, f0, n, [hy[0] / dx, hy[1] / dx], &mut osc2);
                }
            }
            // control weight = (1 + |x|)^s times its value at x = 0
            let v_h = control_weight_eval(weight, p, q, [0.0, 0.0], h)?;
            let sum: f64 = osc2
                .iter()
                .enumerate()
                .filter(|(_, o)| **o > 0.0)
                .map(|(i, o)| {
                    let x = grid.x_point(i);
                    let radial = if weight.s == 0.0 {
                        1.0
                    } else {
                        (1.0 + x[0].hypot(x[1])).powf(weight.s)
                    };
                    o.sqrt() * radial * v_h
                })
                .sum();
            Ok(sum * cell * hgrid.weights[k] / h.abs_det())
        })
        .collect();
    terms.into_iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct USearch {
    /// `(U, oscillation norm)` for each tried neighborhood.
    pub steps: Vec<(UParams, f64)>,
    pub found: Option<UParams>,
}

/// Halves `U` from `start` until the oscillation norm drops below 1.
pub fn search_u(
    psi: &(impl FrequencyWindow + ?Sized),
    grid: FrequencyGrid,
    hgrid: &HGrid,
    start: UParams,
    weight: &WeightSpec,
    p: f64,
    q: f64,
    max_halvings: usize,
) -> Result<USearch> {
    let mut u = start;
    let mut steps = Vec::new();
    for _ in 0..=max_halvings {
        let v = oscillation_norm(psi, grid, hgrid, &u, weight, p, q)?;
        steps.push((u, v));
        if v < 1.0 {
            return Ok(USearch {
                steps,
                found: Some(u),
            });
        }
        u = u.halved();
    }
    Ok(USearch { steps, found: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cwt::HGridSpec;
    use crate::wavelet::AnalyticWavelet;

    fn shearlet() -> GroupFamily {
        GroupFamily::shearlet(0.5).unwrap()
    }

    fn small_grid() -> FrequencyGrid {
        FrequencyGrid::new(64, 4.0).unwrap()
    }

    fn psi(family: GroupFamily, grid: FrequencyGrid) -> AnalyticWavelet {
        AnalyticWavelet::normalized(family, WaveletSpec::default_bump(family).unwrap(), grid).unwrap()
    }

    #[test]
    fn chart_round_trip() {
        for family in [GroupFamily::Similitude, GroupFamily::Diagonal, shearlet()] {
            let g = from_chart(family, 0, 0.1, -0.05).unwrap();
            assert!((chart_distance(&g) - 0.1).abs() < 1e-12);
            assert_eq!(chart_distance(&family.identity()), 0.0);
        }
    }

    #[test]
    fn sampling_points_lie_on_lattice() {
        let family = shearlet();
        let grid = small_grid();
        let z = build_sampling_set(family, SamplingParams::default(), SamplingWindow::default_for(family).unwrap(), grid).unwrap();
        assert!(!z.nodes.is_empty());
        assert!(z.max_snap_offset <= grid.x_spacing() * 0.5f64.sqrt() + 1e-12);
        for i in (0..z.len()).step_by(37) {
            let ideal = z.ideal_x(i);
            let p = z.points[i].x;
            assert!(dist(ideal, p) <= z.max_snap_offset + 1e-12);
        }
    }

    #[test]
    fn single_coefficient_norm_is_its_modulus() {
        let family = shearlet();
        let grid = small_grid();
        let z = build_sampling_set(family, SamplingParams::default(), SamplingWindow::default_for(family).unwrap(), grid).unwrap();
        let z1 = z.single_node(0).unwrap();
        // move the node to the identity by hand
        let mut z1 = z1;
        z1.nodes[0] = family.identity();
        let mut c = CoeffArray::zeros(z1.len());
        c.values[0] = Complex64::new(3.0, -4.0);
        for (p, q) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (f64::INFINITY, 2.0)] {
            let v = discrete_norm(&c, &z1, p, q, &WeightSpec::unit()).unwrap();
            assert!((v - 5.0).abs() < 1e-12, "p={p} q={q}: {v}");
        }
    }

    #[test]
    fn zero_coefficients_synthesize_zero() {
        let family = shearlet();
        let grid = small_grid();
        let w = psi(family, grid);
        let z = build_sampling_set(family, SamplingParams::default(), SamplingWindow::default_for(family).unwrap(), grid).unwrap();
        let g = synthesize_from(&CoeffArray::zeros(z.len()), &w, &z).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        assert!(synthesize_from(&CoeffArray::zeros(z.len() + 1), &w, &z).is_err());
    }

    #[test]
    fn trivial_u_has_zero_oscillation() {
        let family = shearlet();
        let grid = small_grid();
        let w = psi(family, grid);
        let spec = HGridSpec {
            n_a: 9,
            n_b: 9,
            ..HGridSpec::default()
        };
        let hgrid = HGrid::new(family, spec).unwrap();
        let u0 = UParams {
            x_radius: 0.0,
            chart_radius: 0.0,
        };
        let v = oscillation_norm(&w, grid, &hgrid, &u0, &WeightSpec::unit(), 2.0, 2.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn frame_operator_matches_analysis_then_synthesis() {
        let family = shearlet();
        let grid = small_grid();
        let w = psi(family, grid);
        let z = build_sampling_set(family, SamplingParams::default(), SamplingWindow::default_for(family).unwrap(), grid).unwrap();
        let op = FrameOperator::new(&z, &w);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = crate::wavelet::random_test_function(grid, z.window.region, 3, 1.0, &mut rng);
        let a = op.apply(&f).unwrap();
        let b = op.synthesize(&op.analyze(&f).unwrap()).unwrap();
        assert!(a.rel_l2_error(&b).unwrap() < 1e-12);
        // <S f, f> = ||c||^2
        let c = op.analyze(&f).unwrap();
        let sff = a.inner(&f).unwrap();
        assert!((sff.re - c.l2_norm().powi(2)).abs() < 1e-10 * sff.re.abs().max(1.0));
    }
}
