//! Analyzing wavelets: smooth bumps supported inside the dual orbit,
//! vanishing-moment wavelets `P(xi)^s * gaussian`, the reducible-case pair
//! used by the window-dependence demo, and grid diagnostics (Schwartz
//! seminorms, vanishing order).

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoorbitError, Result};
use crate::grid::{Domain, FrequencyGrid, FrequencyWindow, SampledField};
use crate::group::{GroupFamily, Vec2};
use crate::orbit;
use crate::quadrature::GaussLegendre;

pub const MAX_SEMINORM_ORDER: usize = 6;

/// `exp(-1 / (1 - t^2))` for `|t| < 1`, zero otherwise.
pub fn mollifier(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveletSpec {
    Bump {
        center: Vec2,
        radius: f64,
    },
    Moment {
        order: u32,
        #[serde(default = "default_sigma")]
        envelope_sigma: f64,
    },
}

fn default_sigma() -> f64 {
    2.0
}

impl WaveletSpec {
    /// Bump at the orbit base point with radius 1/2 (distance to the
    /// complement is 1 for every admissible family).
    pub fn default_bump(family: GroupFamily) -> Result<Self> {
        let b = orbit::base_point(family)?;
        Ok(WaveletSpec::Bump {
            center: [b[0], b[1]],
            radius: 0.5,
        })
    }

    pub fn moment(order: u32) -> Self {
        WaveletSpec::Moment {
            order,
            envelope_sigma: default_sigma(),
        }
    }
}

/// A closed-form frequency-domain wavelet with a fixed amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticWavelet {
    pub family: GroupFamily,
    pub spec: WaveletSpec,
    pub amplitude: f64,
}

impl AnalyticWavelet {
    /// Validates the spec and fixes the amplitude so that the samples on
    /// `grid` have unit L2 norm.
    pub fn normalized(family: GroupFamily, spec: WaveletSpec, grid: FrequencyGrid) -> Result<Self> {
        match spec {
            WaveletSpec::Bump { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(CoorbitError::InvalidParameter(format!(
                        "bump radius must be positive, got {radius}"
                    )));
                }
                let margin = orbit::dist_complement(family, center)? - radius;
                if margin <= 0.0 {
                    return Err(CoorbitError::BallNotInOrbit { margin });
                }
            }
            WaveletSpec::Moment { envelope_sigma, .. } => {
                family.require_admissible("moment wavelets")?;
                if !(envelope_sigma > 0.0 && envelope_sigma.is_finite()) {
                    return Err(CoorbitError::InvalidParameter(format!(
                        "envelope sigma must be positive, got {envelope_sigma}"
                    )));
                }
            }
        }
        let mut w = AnalyticWavelet {
            family,
            spec,
            amplitude: 1.0,
        };
        let norm = SampledField::from_window(grid, &w).l2_norm();
        if norm == 0.0 {
            return Err(CoorbitError::InsufficientSamples(
                "wavelet vanishes on every grid node".into(),
            ));
        }
        w.amplitude = 1.0 / norm;
        Ok(w)
    }

    pub fn value(&self, xi: Vec2) -> f64 {
        match self.spec {
            WaveletSpec::Bump { center, radius } => {
                let t = (xi[0] - center[0]).hypot(xi[1] - center[1]) / radius;
                self.amplitude * mollifier(t)
            }
            WaveletSpec::Moment {
                order,
                envelope_sigma,
            } => {
                let p = orbit::orbit_polynomial(self.family, xi).unwrap_or(0.0);
                let r2 = xi[0] * xi[0] + xi[1] * xi[1];
                self.amplitude
                    * p.powi(order as i32)
                    * (-PI * r2 / (envelope_sigma * envelope_sigma)).exp()
            }
        }
    }

    pub fn sample(&self, grid: FrequencyGrid) -> SampledField {
        SampledField::from_window(grid, self)
    }
}

impl FrequencyWindow for AnalyticWavelet {
    fn eval(&self, xi: Vec2) -> Complex64 {
        Complex64::new(self.value(xi), 0.0)
    }
}

/// `psi_hat = mollifier(|xi - center| / radius)`, unit L2 norm on the grid.
pub fn bump_wavelet(family: GroupFamily, spec: WaveletSpec, grid: FrequencyGrid) -> Result<SampledField> {
    if !matches!(spec, WaveletSpec::Bump { .. }) {
        return Err(CoorbitError::InvalidParameter("expected a bump spec".into()));
    }
    Ok(AnalyticWavelet::normalized(family, spec, grid)?.sample(grid))
}

/// `psi_hat = P(xi)^s exp(-pi |xi|^2 / sigma^2)`, unit L2 norm on the grid.
pub fn moment_wavelet(family: GroupFamily, spec: WaveletSpec, grid: FrequencyGrid) -> Result<SampledField> {
    if !matches!(spec, WaveletSpec::Moment { .. }) {
        return Err(CoorbitError::InvalidParameter("expected a moment spec".into()));
    }
    Ok(AnalyticWavelet::normalized(family, spec, grid)?.sample(grid))
}

pub fn make_wavelet(family: GroupFamily, spec: WaveletSpec, grid: FrequencyGrid) -> Result<SampledField> {
    Ok(AnalyticWavelet::normalized(family, spec, grid)?.sample(grid))
}

/// Smooth radial profile supported on `[r1, r2]` with
/// `int_0^inf |profile(s)|^2 ds / s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r1: f64,
    pub r2: f64,
    pub amplitude: f64,
}

impl RadialProfile {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
            return Err(CoorbitError::InvalidParameter(format!(
                "radii must satisfy 0 < r1 < r2, got ({r1}, {r2})"
            )));
        }
        let mut p = RadialProfile {
            r1,
            r2,
            amplitude: 1.0,
        };
        p.amplitude = 1.0 / p.dilation_integral().sqrt();
        Ok(p)
    }

    pub fn value(&self, s: f64) -> f64 {
        let t = (2.0 * s - self.r1 - self.r2) / (self.r2 - self.r1);
        self.amplitude * mollifier(t)
    }

    /// `int |profile(s)|^2 / s ds` by composite Gauss-Legendre.
    pub fn dilation_integral(&self) -> f64 {
        let gl = GaussLegendre::new(16);
        let width = (self.r2 - self.r1) / 64.0;
        gl.composite(&[self.r1, self.r2], width)
            .iter()
            .map(|(s, w)| w * self.value(*s).powi(2) / s)
            .sum()
    }
}

/// `f_hat(xi) = profile(|xi|)`, optionally multiplied by `sign(xi_1)`
/// (with `sign(0) = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleWindow {
    pub profile: RadialProfile,
    pub signed: bool,
}

impl FrequencyWindow for CounterexampleWindow {
    fn eval(&self, xi: Vec2) -> Complex64 {
        let v = self.profile.value(xi[0].hypot(xi[1]));
        let s = if self.signed {
            if xi[0] > 0.0 {
                1.0
            } else if xi[0] < 0.0 {
                -1.0
            } else {
                0.0
            }
        } else {
            1.0
        };
        Complex64::new(s * v, 0.0)
    }
}

/// The pair `(f_hat, g_hat = sign(xi_1) f_hat)` for the scalar dilation group.
pub fn counterexample_pair(grid: FrequencyGrid, r1: f64, r2: f64) -> Result<(SampledField, SampledField)> {
    let (f, g) = counterexample_windows(grid, r1, r2)?;
    Ok((
        SampledField::from_window(grid, &f),
        SampledField::from_window(grid, &g),
    ))
}

pub fn counterexample_windows(
    grid: FrequencyGrid,
    r1: f64,
    r2: f64,
) -> Result<(CounterexampleWindow, CounterexampleWindow)> {
    if !(r1 > 0.0 && r1 < r2 && r2 <= grid.xi_max / 2.0) {
        return Err(CoorbitError::InvalidParameter(format!(
            "radii must satisfy 0 < r1 < r2 <= xi_max/2 = {}, got ({r1}, {r2})",
            grid.xi_max / 2.0
        )));
    }
    let profile = RadialProfile::new(r1, r2)?;
    Ok((
        CounterexampleWindow {
            profile,
            signed: false,
        },
        CounterexampleWindow {
            profile,
            signed: true,
        },
    ))
}

/// `d/dx` along one axis by the fourth-order central stencil, zero outside.
fn central_diff(values: &[Complex64], n: usize, axis: usize, h: f64) -> Vec<Complex64> {
    let at = |i: i64, j: i64| -> Complex64 {
        if i < 0 || j < 0 || i >= n as i64 || j >= n as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            values[i as usize * n + j as usize]
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    let inv = 1.0 / (12.0 * h);
    for i in 0..n as i64 {
        for j in 0..n as i64 {
            let (di, dj) = if axis == 0 { (1, 0) } else { (0, 1) };
            let v = -at(i + 2 * di, j + 2 * dj) + at(i + di, j + dj) * 8.0
                - at(i - di, j - dj) * 8.0
                + at(i - 2 * di, j - 2 * dj);
            out[(i as usize) * n + j as usize] = v * inv;
        }
    }
    out
}

/// All partial derivatives `d^alpha f` with `|alpha| <= r`, keyed by `(alpha_1, alpha_2)`.
pub fn partial_derivatives(field: &SampledField, r: usize) -> Result<Vec<((usize, usize), Vec<Complex64>)>> {
    if r > MAX_SEMINORM_ORDER {
        return Err(CoorbitError::InvalidParameter(format!(
            "derivative order {r} exceeds {MAX_SEMINORM_ORDER}"
        )));
    }
    let n = field.grid.n;
    let h = field.spacing();
    let mut out = Vec::new();
    let mut along_first = field.values.clone();
    for a1 in 0..=r {
        let mut cur = along_first.clone();
        for a2 in 0..=(r - a1) {
            if a2 > 0 {
                cur = central_diff(&cur, n, 1, h);
            }
            out.push(((a1, a2), cur.clone()));
        }
        along_first = central_diff(&along_first, n, 0, h);
    }
    Ok(out)
}

/// `|f|_{r,m} = sup_{p, |alpha| <= r} (1 + |p|)^m |d^alpha f(p)|` on the grid.
pub fn schwartz_seminorm(field: &SampledField, r: usize, m: f64) -> Result<f64> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(CoorbitError::InvalidParameter(format!(
            "seminorm weight must be nonnegative, got {m}"
        )));
    }
    let weights: Vec<f64> = (0..field.grid.len())
        .map(|i| {
            let p = field.point(i);
            (1.0 + p[0].hypot(p[1])).powf(m)
        })
        .collect();
    let mut sup: f64 = 0.0;
    for (_, d) in partial_derivatives(field, r)? {
        for (v, w) in d.iter().zip(&weights) {
            sup = sup.max(v.norm() * w);
        }
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentOrder {
    /// Least-squares decay exponent near the orbit complement.
    Finite { slope: f64, rays: usize, points: usize },
    /// Every sample in the fitting band is exactly zero.
    CompactlySupported,
}

impl MomentOrder {
    pub fn slope(&self) -> Option<f64> {
        match self {
            MomentOrder::Finite { slope, .. } => Some(*slope),
            MomentOrder::CompactlySupported => None,
        }
    }
}

/// Estimates the vanishing order of a frequency-domain field at the orbit
/// complement: the slope of `log |f|` against `log dist(xi, O^c)` over the
/// decade nearest the complement, fitted by least squares with one
/// intercept per ray normal to the complement.
pub fn moment_slope(field: &SampledField, family: GroupFamily) -> Result<MomentOrder> {
    if field.domain != Domain::Frequency {
        return Err(CoorbitError::InvalidParameter(
            "moment slope needs a frequency-domain field".into(),
        ));
    }
    family.require_admissible("moment slope")?;
    let grid = field.grid;
    let mut dmin = f64::INFINITY;
    for i in 0..grid.len() {
        let d = orbit::dist_complement(family, grid.point(i))?;
        if d > 0.0 {
            dmin = dmin.min(d);
        }
    }
    let dmax = 10.0 * dmin * (1.0 + 1e-9);
    let quant = |v: f64| (v * 1e6).round() as i64;
    let mut rays: HashMap<(i64, i64, i64, i64), Vec<(f64, f64)>> = HashMap::new();
    let mut band_points = 0usize;
    let mut inner_nonzero = false;
    for i in 0..grid.len() {
        let p = grid.point(i);
        let d = orbit::dist_complement(family, p)?;
        if d <= 0.0 || d > dmax {
            continue;
        }
        band_points += 1;
        let v = field.values[i].norm();
        if v == 0.0 {
            continue;
        }
        if d <= 2.0 * dmin * (1.0 + 1e-9) {
            inner_nonzero = true;
        }
        let foot = orbit::nearest_complement_point(family, p)?;
        let dir = [(p[0] - foot[0]) / d, (p[1] - foot[1]) / d];
        rays.entry((quant(foot[0]), quant(foot[1]), quant(dir[0]), quant(dir[1])))
            .or_default()
            .push((d.ln(), v.ln()));
    }
    if band_points == 0 {
        return Err(CoorbitError::InsufficientSamples(
            "no grid nodes near the orbit complement".into(),
        ));
    }
    if field.max_abs() == 0.0 {
        return Err(CoorbitError::InsufficientSamples("field is identically zero".into()));
    }
    // exact zeros on the shells next to the complement
    if !inner_nonzero {
        return Ok(MomentOrder::CompactlySupported);
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    let (mut used_rays, mut used_points) = (0usize, 0usize);
    let mut keys: Vec<_> = rays.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let pts = &rays[&key];
        if pts.len() < 2 {
            continue;
        }
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        for (x, y) in pts {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        used_rays += 1;
        used_points += pts.len();
    }
    if used_rays < 2 || sxx <= 0.0 {
        return Err(CoorbitError::InsufficientSamples(format!(
            "only {used_rays} usable rays near the orbit complement"
        )));
    }
    Ok(MomentOrder::Finite {
        slope: sxy / sxx,
        rays: used_rays,
        points: used_points,
    })
}

/// A ball in frequency space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBall {
    pub center: Vec2,
    pub radius: f64,
}

impl FrequencyBall {
    pub fn contains(&self, xi: Vec2) -> bool {
        (xi[0] - self.center[0]).hypot(xi[1] - self.center[1]) <= self.radius
    }

    /// Default test region for an admissible family: radius 1 around twice the
    /// base point, at distance 2 from the complement.
    pub fn default_for(family: GroupFamily) -> Result<Self> {
        let b = orbit::base_point(family)?;
        Ok(FrequencyBall {
            center: [2.0 * b[0], 2.0 * b[1]],
            radius: 1.0,
        })
    }
}

/// Random finite combination of translated bumps of varying width, all
/// supported inside `region`. Unit L2 norm on the grid.
pub fn random_test_function<R: Rng>(
    grid: FrequencyGrid,
    region: FrequencyBall,
    terms: usize,
    max_shift: f64,
    rng: &mut R,
) -> SampledField {
    struct Term {
        center: Vec2,
        radius: f64,
        shift: Vec2,
        coef: Complex64,
    }
    let terms: Vec<Term> = (0..terms.max(1))
        .map(|_| {
            let radius = region.radius * rng.gen_range(0.35..0.7);
            let room = region.radius - radius;
            let r = room * rng.gen::<f64>().sqrt();
            let th = rng.gen_range(0.0..2.0 * PI);
            Term {
                center: [region.center[0] + r * th.cos(), region.center[1] + r * th.sin()],
                radius,
                shift: [
                    rng.gen_range(-max_shift..=max_shift),
                    rng.gen_range(-max_shift..=max_shift),
                ],
                coef: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            }
        })
        .collect();
    let f = SampledField::from_fn(grid, Domain::Frequency, |xi| {
        terms
            .iter()
            .map(|t| {
                let u = (xi[0] - t.center[0]).hypot(xi[1] - t.center[1]) / t.radius;
                let phase = -2.0 * PI * (t.shift[0] * xi[0] + t.shift[1] * xi[1]);
                t.coef * Complex64::from_polar(mollifier(u), phase)
            })
            .sum()
    });
    let norm = f.l2_norm();
    f.scaled(Complex64::new(1.0 / norm, 0.0))
}

/// Fraction of the space-domain energy of `field` in the outer band
/// `|x_i| > (1/2 - band) * period` of the periodic cell.
pub fn edge_energy_fraction(field: &SampledField, band: f64) -> f64 {
    let s = field.to_space();
    let limit = (0.5 - band) * field.grid.x_period();
    let mut edge = 0.0;
    let mut total = 0.0;
    for (i, v) in s.values.iter().enumerate() {
        let x = field.grid.x_point(i);
        let e = v.norm_sqr();
        total += e;
        if x[0].abs() > limit || x[1].abs() > limit {
            edge += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

/// Largest modulus of `field` in the outer frequency band
/// `|xi_i| > (1 - band) xi_max`, relative to its overall largest modulus.
pub fn spectral_edge_fraction(field: &SampledField, band: f64) -> f64 {
    let f = field.to_frequency();
    let limit = (1.0 - band) * f.grid.xi_max;
    let mut edge: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for (i, v) in f.values.iter().enumerate() {
        let xi = f.grid.point(i);
        let m = v.norm();
        peak = peak.max(m);
        if xi[0].abs() > limit || xi[1].abs() > limit {
            edge = edge.max(m);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        edge / peak
    }
}
