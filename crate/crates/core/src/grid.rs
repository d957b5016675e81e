//! Uniform frequency/space grids, sampled fields and the centered 2D DFT
//! that maps between them.
//!
//! A [`FrequencyGrid`] with `n` samples per axis covers `[-xi_max, xi_max)^2`
//! with spacing `dxi = 2 xi_max / n`. Its space-side partner has spacing
//! `dx = 1 / (n dxi)` and nodes `x_j = (j - n/2) dx`, so that `dx * dxi = 1/n`
//! and the discrete transforms below are exactly unitary with respect to the
//! Riemann-sum inner products `sum f conj(g) dxi^2` and `sum f conj(g) dx^2`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{CoorbitError, Result};
use crate::group::{GroupFamily, Vec2};

pub const GRID_FORMAT: &str = "coorbit-grid v1";

/// Placement of frequency nodes inside their cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Nodes at `-xi_max + k dxi`; the axes `xi_i = 0` are grid lines.
    #[default]
    Node,
    /// Nodes at `-xi_max + (k + 1/2) dxi`; no node lies on an axis.
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n: usize,
    pub xi_max: f64,
    #[serde(default)]
    pub centering: Centering,
}

impl FrequencyGrid {
    pub fn new(n: usize, xi_max: f64) -> Result<Self> {
        Self::with_centering(n, xi_max, Centering::Node)
    }

    pub fn with_centering(n: usize, xi_max: f64, centering: Centering) -> Result<Self> {
        let g = FrequencyGrid {
            n,
            xi_max,
            centering,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(CoorbitError::InvalidParameter(format!(
                "grid size must be a power of two >= 16, got {}",
                self.n
            )));
        }
        if !(self.xi_max > 0.0 && self.xi_max.is_finite()) {
            return Err(CoorbitError::InvalidParameter(format!(
                "xi_max must be positive, got {}",
                self.xi_max
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.xi_max / self.n as f64
    }

    pub fn x_spacing(&self) -> f64 {
        1.0 / (2.0 * self.xi_max)
    }

    /// Side length of the periodic space cell.
    pub fn x_period(&self) -> f64 {
        self.n as f64 * self.x_spacing()
    }

    fn offset(&self) -> f64 {
        match self.centering {
            Centering::Node => 0.0,
            Centering::Cell => 0.5,
        }
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.xi_max + (k as f64 + self.offset()) * self.spacing()
    }

    pub fn x_coord(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.x_spacing()
    }

    pub fn point(&self, idx: usize) -> Vec2 {
        [self.coord(idx / self.n), self.coord(idx % self.n)]
    }

    pub fn x_point(&self, idx: usize) -> Vec2 {
        [self.x_coord(idx / self.n), self.x_coord(idx % self.n)]
    }

    /// Nearest space node index along one axis, wrapped into the cell.
    pub fn nearest_x_index(&self, x: f64) -> usize {
        let n = self.n as i64;
        let j = (x / self.x_spacing()).round() as i64 + n / 2;
        j.rem_euclid(n) as usize
    }

    /// Fractional frequency index of a coordinate.
    pub fn fractional_index(&self, xi: f64) -> f64 {
        (xi + self.xi_max) / self.spacing() - self.offset()
    }

    /// Cell area in the frequency domain.
    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    /// Cell area in the space domain.
    pub fn x_cell_area(&self) -> f64 {
        self.x_spacing() * self.x_spacing()
    }

    pub fn compatible(&self, other: &FrequencyGrid) -> bool {
        self.n == other.n && self.xi_max == other.xi_max && self.centering == other.centering
    }

    pub fn refined(&self) -> FrequencyGrid {
        FrequencyGrid {
            n: self.n * 2,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Frequency,
    Space,
}

/// Anything that can be evaluated at an arbitrary frequency.
pub trait FrequencyWindow: Sync {
    fn eval(&self, xi: Vec2) -> Complex64;
}

impl<F: Fn(Vec2) -> Complex64 + Sync> FrequencyWindow for F {
    fn eval(&self, xi: Vec2) -> Complex64 {
        self(xi)
    }
}

/// Complex samples on a grid, row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub domain: Domain,
}

impl SampledField {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoorbitError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CoorbitError::InvalidParameter("non-finite sample".into()));
        }
        Ok(SampledField {
            grid,
            values,
            domain,
        })
    }

    pub fn zeros(grid: FrequencyGrid, domain: Domain) -> Self {
        SampledField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            domain,
        }
    }

    /// Samples a window on the frequency grid.
    pub fn from_window(grid: FrequencyGrid, window: &impl FrequencyWindow) -> Self {
        let values = (0..grid.len()).map(|i| window.eval(grid.point(i))).collect();
        SampledField {
            grid,
            values,
            domain: Domain::Frequency,
        }
    }

    pub fn from_fn(grid: FrequencyGrid, domain: Domain, f: impl Fn(Vec2) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|i| match domain {
                Domain::Frequency => f(grid.point(i)),
                Domain::Space => f(grid.x_point(i)),
            })
            .collect();
        SampledField {
            grid,
            values,
            domain,
        }
    }

    pub fn point(&self, idx: usize) -> Vec2 {
        match self.domain {
            Domain::Frequency => self.grid.point(idx),
            Domain::Space => self.grid.x_point(idx),
        }
    }

    pub fn cell_area(&self) -> f64 {
        match self.domain {
            Domain::Frequency => self.grid.cell_area(),
            Domain::Space => self.grid.x_cell_area(),
        }
    }

    pub fn spacing(&self) -> f64 {
        match self.domain {
            Domain::Frequency => self.grid.spacing(),
            Domain::Space => self.grid.x_spacing(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `sum self * conj(other) * dA`.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        self.check_same(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.cell_area())
    }

    pub fn check_same(&self, other: &SampledField) -> Result<()> {
        if !self.grid.compatible(&other.grid) || self.domain != other.domain {
            return Err(CoorbitError::GridMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.grid, self.domain, other.grid, other.domain
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: Complex64) -> SampledField {
        SampledField {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn add_scaled(&mut self, other: &SampledField, s: Complex64) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * s;
        }
        Ok(())
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        let mut out = self.clone();
        out.add_scaled(other, Complex64::new(-1.0, 0.0))?;
        Ok(out)
    }

    /// Relative L2 distance `||self - other|| / ||other||`.
    pub fn rel_l2_error(&self, reference: &SampledField) -> Result<f64> {
        Ok(self.sub(reference)?.l2_norm() / reference.l2_norm())
    }

    pub fn to_space(&self) -> SampledField {
        match self.domain {
            Domain::Space => self.clone(),
            Domain::Frequency => {
                let mut values = self.values.clone();
                Dft2::new(self.grid).inverse(&mut values);
                SampledField {
                    grid: self.grid,
                    values,
                    domain: Domain::Space,
                }
            }
        }
    }

    pub fn to_frequency(&self) -> SampledField {
        match self.domain {
            Domain::Frequency => self.clone(),
            Domain::Space => {
                let mut values = self.values.clone();
                Dft2::new(self.grid).forward(&mut values);
                SampledField {
                    grid: self.grid,
                    values,
                    domain: Domain::Frequency,
                }
            }
        }
    }

    /// Bilinear interpolation with zero extension outside the grid.
    pub fn sample_bilinear(&self, p: Vec2) -> Complex64 {
        let (u, v) = match self.domain {
            Domain::Frequency => (
                self.grid.fractional_index(p[0]),
                self.grid.fractional_index(p[1]),
            ),
            Domain::Space => {
                let h = (self.grid.n / 2) as f64;
                (
                    p[0] / self.grid.x_spacing() + h,
                    p[1] / self.grid.x_spacing() + h,
                )
            }
        };
        bilinear(&self.values, self.grid.n, u, v)
    }
}

impl FrequencyWindow for SampledField {
    fn eval(&self, xi: Vec2) -> Complex64 {
        self.sample_bilinear(xi)
    }
}

fn bilinear(values: &[Complex64], n: usize, u: f64, v: f64) -> Complex64 {
    let nf = n as f64;
    if !(u > -1.0 && v > -1.0 && u < nf && v < nf) {
        return Complex64::new(0.0, 0.0);
    }
    let i0 = u.floor();
    let j0 = v.floor();
    let tu = u - i0;
    let tv = v - j0;
    let i0 = i0 as i64;
    let j0 = j0 as i64;
    let at = |i: i64, j: i64| -> Complex64 {
        if i < 0 || j < 0 || i >= n as i64 || j >= n as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            values[i as usize * n + j as usize]
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    if tu < 1.0 && tv < 1.0 {
        acc += at(i0, j0) * ((1.0 - tu) * (1.0 - tv));
    }
    if tu > 0.0 && tv < 1.0 {
        acc += at(i0 + 1, j0) * (tu * (1.0 - tv));
    }
    if tu < 1.0 && tv > 0.0 {
        acc += at(i0, j0 + 1) * ((1.0 - tu) * tv);
    }
    if tu > 0.0 && tv > 0.0 {
        acc += at(i0 + 1, j0 + 1) * (tu * tv);
    }
    acc
}

/// Centered 2D DFT between a [`FrequencyGrid`] and its space partner.
///
/// `inverse`: `g(x_j) = sum_k G(xi_k) exp(2 pi i <x_j, xi_k>) dxi^2`,
/// `forward`: `G(xi_k) = sum_j g(x_j) exp(-2 pi i <x_j, xi_k>) dx^2`.
#[derive(Clone)]
pub struct Dft2 {
    grid: FrequencyGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `(-1)^k` applied on the frequency side.
    freq_sign: Vec<f64>,
    /// `(-1)^j exp(2 pi i delta (j - n/2) / n)` applied on the space side.
    space_phase: Vec<Complex64>,
}

impl Dft2 {
    pub fn new(grid: FrequencyGrid) -> Self {
        let n = grid.n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let freq_sign = (0..n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let delta = match grid.centering {
            Centering::Node => 0.0,
            Centering::Cell => 0.5,
        };
        let space_phase = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                let ph = 2.0 * std::f64::consts::PI * delta * (j as f64 - (n / 2) as f64)
                    / n as f64;
                Complex64::from_polar(s, ph)
            })
            .collect();
        Dft2 {
            grid,
            fwd,
            inv,
            freq_sign,
            space_phase,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Frequency samples to space samples, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let n = self.grid.n;
        assert_eq!(data.len(), n * n);
        for k1 in 0..n {
            for k2 in 0..n {
                data[k1 * n + k2] *= self.freq_sign[k1] * self.freq_sign[k2];
            }
        }
        self.fft2(data, &self.inv);
        let scale = self.grid.cell_area();
        for j1 in 0..n {
            for j2 in 0..n {
                data[j1 * n + j2] *= self.space_phase[j1] * self.space_phase[j2] * scale;
            }
        }
    }

    /// Space samples to frequency samples, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        let n = self.grid.n;
        assert_eq!(data.len(), n * n);
        for j1 in 0..n {
            for j2 in 0..n {
                data[j1 * n + j2] *= (self.space_phase[j1] * self.space_phase[j2]).conj();
            }
        }
        self.fft2(data, &self.fwd);
        let scale = self.grid.x_cell_area();
        for k1 in 0..n {
            for k2 in 0..n {
                data[k1 * n + k2] *= self.freq_sign[k1] * self.freq_sign[k2] * scale;
            }
        }
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GridSidecar {
    format: String,
    n: usize,
    xi_max: f64,
    #[serde(default)]
    centering: Centering,
    domain_tag: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<GroupFamily>,
    data: String,
}

/// Path of the raw data file belonging to a sidecar.
pub fn data_path(sidecar: &Path) -> PathBuf {
    sidecar.with_extension("bin")
}

pub(crate) fn write_complex_le(path: &Path, values: &[Complex64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn read_complex_le(path: &Path, count: usize) -> Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() != count * 16 {
        return Err(CoorbitError::Format(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            count * 16,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

impl SampledField {
    /// Writes the JSON sidecar at `path` and the samples next to it
    /// (`.bin`, little-endian f64 pairs `(re, im)`, row-major).
    pub fn write(&self, path: &Path, family: Option<GroupFamily>) -> Result<()> {
        let data = data_path(path);
        let sidecar = GridSidecar {
            format: GRID_FORMAT.to_string(),
            n: self.grid.n,
            xi_max: self.grid.xi_max,
            centering: self.grid.centering,
            domain_tag: self.domain,
            family,
            data: data
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&sidecar)?)?;
        write_complex_le(&data, &self.values)
    }

    pub fn read(path: &Path) -> Result<(SampledField, Option<GroupFamily>)> {
        let sidecar: GridSidecar = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if sidecar.format != GRID_FORMAT {
            return Err(CoorbitError::Format(format!(
                "unsupported format tag {:?}",
                sidecar.format
            )));
        }
        let grid = FrequencyGrid::with_centering(sidecar.n, sidecar.xi_max, sidecar.centering)?;
        let data = path.with_file_name(&sidecar.data);
        let values = read_complex_le(&data, grid.len())?;
        Ok((SampledField::new(grid, values, sidecar.domain_tag)?, sidecar.family))
    }
}
