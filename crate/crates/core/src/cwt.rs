//! Continuous wavelet transform on a product grid `x-grid x H-nodes`.
//!
//! For each dilation node the slice `W(., h) = |det h|^{1/2} F^{-1}[f_hat
//! conj(psi_hat(h^T .))]` is one inverse DFT. Slices whose frequency product
//! vanishes identically are stored as `None`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoorbitError, Result};
use crate::grid::{data_path, Dft2, Domain, FrequencyGrid, FrequencyWindow, SampledField};
use crate::group::{AffinePoint, DilationParams, GroupFamily, Vec2};
use crate::orbit;
use crate::quadrature;

pub const CWT_FORMAT: &str = "coorbit-cwt v1";

/// Nodes processed together by the parallel reductions.
const CHUNK: usize = 32;

/// Chart mesh of an [`HGrid`].
///
/// * similitude: `rho = sqrt(a^2 + b^2)` log-spaced in `[a_min, a_max]`
///   (`n_a` nodes), angle periodic with `n_b` nodes;
/// * diagonal: `|a|` and `|b|` log-spaced in `[a_min, a_max]` with `n_a` and
///   `n_b` nodes, four sign branches;
/// * shearlet: `|a|` log-spaced (`n_a` per sign), `b = |a| beta` with
///   `beta` linear in `[-b_max, b_max]` (`n_b` nodes);
/// * scalar: `a` log-spaced, `n_a` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HGridSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub n_a: usize,
    pub b_max: f64,
    pub n_b: usize,
}

impl Default for HGridSpec {
    fn default() -> Self {
        HGridSpec {
            a_min: 1.0 / 16.0,
            a_max: 16.0,
            n_a: 33,
            b_max: 4.0,
            n_b: 33,
        }
    }
}

impl HGridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_min > 0.0 && self.a_max > self.a_min && self.a_max.is_finite()) {
            return Err(invalid(format!(
                "need 0 < a_min < a_max, got [{}, {}]",
                self.a_min, self.a_max
            )));
        }
        if self.n_a < 2 || self.n_b < 1 {
            return Err(invalid("need n_a >= 2 and n_b >= 1"));
        }
        if !(self.b_max >= 0.0 && self.b_max.is_finite()) {
            return Err(invalid(format!("b_max must be finite and >= 0, got {}", self.b_max)));
        }
        Ok(())
    }
}

/// Quadrature nodes on `H` with weights `quadrature weight x Haar density`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HGrid {
    pub family: GroupFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<HGridSpec>,
    pub nodes: Vec<DilationParams>,
    pub weights: Vec<f64>,
}

impl HGrid {
    pub fn new(family: GroupFamily, spec: HGridSpec) -> Result<Self> {
        family.validate()?;
        spec.validate()?;
        let (t0, t1) = (spec.a_min.ln(), spec.a_max.ln());
        let logs = quadrature::trapezoid(t0, t1, spec.n_a);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut push = |a: f64, b: f64, w: f64| -> Result<()> {
            nodes.push(DilationParams::new(family, a, b)?);
            weights.push(w);
            Ok(())
        };
        match family {
            GroupFamily::Similitude => {
                // da db / rho^2 = dt dtheta
                let angles = quadrature::periodic(-PI, 2.0 * PI, spec.n_b);
                for &(t, wt) in &logs {
                    let rho = t.exp();
                    for &(th, wth) in &angles {
                        push(rho * th.cos(), rho * th.sin(), wt * wth)?;
                    }
                }
            }
            GroupFamily::Diagonal => {
                // da db / |ab| = dt_a dt_b
                let logs_b = quadrature::trapezoid(t0, t1, spec.n_b.max(2));
                for sa in [1.0, -1.0] {
                    for &(ta, wa) in &logs {
                        for sb in [1.0, -1.0] {
                            for &(tb, wb) in &logs_b {
                                push(sa * ta.exp(), sb * tb.exp(), wa * wb)?;
                            }
                        }
                    }
                }
            }
            GroupFamily::Shearlet { .. } => {
                // b = |a| beta: da db / a^2 = dt dbeta
                let betas = quadrature::trapezoid(-spec.b_max, spec.b_max, spec.n_b);
                for sa in [1.0, -1.0] {
                    for &(t, wt) in &logs {
                        let r = t.exp();
                        for &(beta, wb) in &betas {
                            push(sa * r, r * beta, wt * wb)?;
                        }
                    }
                }
            }
            GroupFamily::ScalarReducible => {
                for &(t, wt) in &logs {
                    push(t.exp(), 0.0, wt)?;
                }
            }
        }
        Ok(HGrid {
            family,
            spec: Some(spec),
            nodes,
            weights,
        })
    }

    pub fn default_for(family: GroupFamily) -> Result<Self> {
        HGrid::new(family, HGridSpec::default())
    }

    /// An explicit node list, e.g. a single node with unit weight.
    pub fn from_nodes(family: GroupFamily, nodes: Vec<DilationParams>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(CoorbitError::GridMismatch(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        for (h, w) in nodes.iter().zip(&weights) {
            if h.family != family {
                return Err(CoorbitError::FamilyMismatch {
                    left: family,
                    right: h.family,
                });
            }
            h.check()?;
            if !(*w > 0.0 && w.is_finite()) {
                return Err(invalid(format!("node weights must be positive, got {w}")));
            }
        }
        Ok(HGrid {
            family,
            spec: None,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Reads either a full `HGrid` or `{"family": .., <HGridSpec fields>}`.
    pub fn from_json(text: &str) -> Result<Self> {
        if let Ok(g) = serde_json::from_str::<HGrid>(text) {
            return HGrid::from_nodes(g.family, g.nodes, g.weights).map(|mut h| {
                h.spec = g.spec;
                h
            });
        }
        #[derive(Deserialize)]
        struct Compact {
            #[serde(flatten)]
            family: GroupFamily,
            #[serde(flatten)]
            spec: Option<HGridSpec>,
        }
        let c: Compact = serde_json::from_str(text)?;
        HGrid::new(c.family, c.spec.unwrap_or_default())
    }
}

/// `pi(x, h) w` in frequency: `|det h|^{1/2} exp(-2 pi i <x, xi>) w(h^T xi)`.
#[derive(Debug, Clone, Copy)]
pub struct RepresentedWindow<'a, W: ?Sized> {
    pub inner: &'a W,
    pub point: AffinePoint,
}

impl<'a, W: FrequencyWindow + ?Sized> RepresentedWindow<'a, W> {
    pub fn new(inner: &'a W, point: AffinePoint) -> Self {
        RepresentedWindow { inner, point }
    }
}

impl<W: FrequencyWindow + ?Sized> FrequencyWindow for RepresentedWindow<'_, W> {
    fn eval(&self, xi: Vec2) -> Complex64 {
        let h = &self.point.h;
        let x = self.point.x;
        let phase = -2.0 * PI * (x[0] * xi[0] + x[1] * xi[1]);
        self.inner.eval(h.dual_action(xi)) * Complex64::from_polar(h.abs_det().sqrt(), phase)
    }
}

/// Samples `conj(psi_hat(h^T xi))` times `f_hat(xi)`; `None` if identically zero.
fn frequency_product(
    f: &SampledField,
    psi: &(impl FrequencyWindow + ?Sized),
    h: &DilationParams,
) -> Option<Vec<Complex64>> {
    let grid = f.grid;
    let mut any = false;
    let out: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(i, fv)| {
            if fv.re == 0.0 && fv.im == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let p = psi.eval(h.dual_action(grid.point(i)));
            let v = fv * p.conj();
            if v.re != 0.0 || v.im != 0.0 {
                any = true;
            }
            v
        })
        .collect();
    any.then_some(out)
}

/// One slice `W(., h)` on the space grid of `f`.
pub fn analyze_slice(
    f: &SampledField,
    psi: &(impl FrequencyWindow + ?Sized),
    h: &DilationParams,
    dft: &Dft2,
) -> Option<Vec<Complex64>> {
    let mut data = frequency_product(f, psi, h)?;
    dft.inverse(&mut data);
    let s = h.abs_det().sqrt();
    for v in data.iter_mut() {
        *v *= s;
    }
    Some(data)
}

fn require_frequency(f: &SampledField, what: &str) -> Result<()> {
    if f.domain != Domain::Frequency {
        return Err(invalid(format!("{what} must be given in the frequency domain")));
    }
    Ok(())
}

/// Streams the transform slice by slice and applies `op` to each; results
/// come back in node order whatever the number of worker threads.
pub fn map_slices<T, W, F>(f: &SampledField, psi: &W, hgrid: &HGrid, op: F) -> Result<Vec<T>>
where
    T: Send,
    W: FrequencyWindow + ?Sized,
    F: Fn(usize, Option<&[Complex64]>) -> T + Sync,
{
    require_frequency(f, "f")?;
    let dft = Dft2::new(f.grid);
    Ok((0..hgrid.len())
        .into_par_iter()
        .map(|k| {
            let slice = analyze_slice(f, psi, &hgrid.nodes[k], &dft);
            op(k, slice.as_deref())
        })
        .collect())
}

/// Sampled transform values: one optional `n x n` slice per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformArray {
    pub xgrid: FrequencyGrid,
    pub hgrid: HGrid,
    pub slices: Vec<Option<Vec<Complex64>>>,
}

impl TransformArray {
    pub fn zeros(xgrid: FrequencyGrid, hgrid: HGrid) -> Self {
        let slices = vec![None; hgrid.len()];
        TransformArray {
            xgrid,
            hgrid,
            slices,
        }
    }

    pub fn new(xgrid: FrequencyGrid, hgrid: HGrid, slices: Vec<Option<Vec<Complex64>>>) -> Result<Self> {
        if slices.len() != hgrid.len() {
            return Err(CoorbitError::GridMismatch(format!(
                "{} slices for {} nodes",
                slices.len(),
                hgrid.len()
            )));
        }
        if let Some(s) = slices.iter().flatten().find(|s| s.len() != xgrid.len()) {
            return Err(CoorbitError::GridMismatch(format!(
                "slice of length {} on a grid of {}",
                s.len(),
                xgrid.len()
            )));
        }
        Ok(TransformArray {
            xgrid,
            hgrid,
            slices,
        })
    }

    pub fn value(&self, node: usize, idx: usize) -> Complex64 {
        self.slices[node]
            .as_ref()
            .map_or(Complex64::new(0.0, 0.0), |s| s[idx])
    }

    pub fn scaled(&self, s: Complex64) -> TransformArray {
        TransformArray {
            xgrid: self.xgrid,
            hgrid: self.hgrid.clone(),
            slices: self
                .slices
                .iter()
                .map(|sl| sl.as_ref().map(|v| v.iter().map(|z| z * s).collect()))
                .collect(),
        }
    }

    fn check_same(&self, other: &TransformArray) -> Result<()> {
        if !self.xgrid.compatible(&other.xgrid) || self.hgrid != other.hgrid {
            return Err(CoorbitError::GridMismatch("transform arrays on different grids".into()));
        }
        Ok(())
    }

    /// `<S, T>` in `L^2(G)`: `sum_h weight_h / |det h| sum_x dx^2 S conj(T)`.
    pub fn inner(&self, other: &TransformArray) -> Result<Complex64> {
        self.check_same(other)?;
        let dx2 = self.xgrid.x_cell_area();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, (a, b)) in self.slices.iter().zip(&other.slices).enumerate() {
            if let (Some(a), Some(b)) = (a, b) {
                let s: Complex64 = a.iter().zip(b).map(|(u, v)| u * v.conj()).sum();
                acc += s * (self.hgrid.weights[k] / self.hgrid.nodes[k].abs_det() * dx2);
            }
        }
        Ok(acc)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn nonzero_slices(&self) -> usize {
        self.slices.iter().filter(|s| s.is_some()).count()
    }

    /// Writes a JSON header at `path` and the stored slices, in node order,
    /// to the `.bin` file next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        let data = data_path(path);
        let header = CwtHeader {
            format: CWT_FORMAT.to_string(),
            family: self.hgrid.family,
            xgrid: self.xgrid,
            hgrid: self.hgrid.clone(),
            present: self.slices.iter().map(|s| s.is_some()).collect(),
            data: data
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        };
        std::fs::write(path, serde_json::to_string(&header)?)?;
        let mut w = BufWriter::new(File::create(&data)?);
        for v in self.slices.iter().flatten().flatten() {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<TransformArray> {
        let header: CwtHeader = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if header.format != CWT_FORMAT {
            return Err(CoorbitError::Format(format!(
                "unsupported format tag {:?}",
                header.format
            )));
        }
        header.xgrid.validate()?;
        let hgrid = HGrid::from_nodes(header.family, header.hgrid.nodes, header.hgrid.weights)
            .map(|mut h| {
                h.spec = header.hgrid.spec;
                h
            })?;
        if header.present.len() != hgrid.len() {
            return Err(CoorbitError::Format("presence mask does not match node count".into()));
        }
        let m = header.xgrid.len();
        let mut bytes = Vec::new();
        BufReader::new(File::open(path.with_file_name(&header.data))?).read_to_end(&mut bytes)?;
        let stored = header.present.iter().filter(|p| **p).count();
        if bytes.len() != stored * m * 16 {
            return Err(CoorbitError::Format(format!(
                "expected {} bytes of slice data, found {}",
                stored * m * 16,
                bytes.len()
            )));
        }
        let mut chunks = bytes.chunks_exact(m * 16);
        let slices = header
            .present
            .iter()
            .map(|p| {
                p.then(|| {
                    chunks
                        .next()
                        .unwrap()
                        .chunks_exact(16)
                        .map(|c| {
                            Complex64::new(
                                f64::from_le_bytes(c[..8].try_into().unwrap()),
                                f64::from_le_bytes(c[8..].try_into().unwrap()),
                            )
                        })
                        .collect()
                })
            })
            .collect();
        TransformArray::new(header.xgrid, hgrid, slices)
    }
}

#[derive(Serialize, Deserialize)]
struct CwtHeader {
    format: String,
    family: GroupFamily,
    xgrid: FrequencyGrid,
    hgrid: HGrid,
    present: Vec<bool>,
    data: String,
}

/// Full transform of `f` against a sampled wavelet (bilinear resampling).
pub fn analyze(f: &SampledField, psi: &SampledField, hgrid: &HGrid) -> Result<TransformArray> {
    require_frequency(psi, "psi")?;
    if !f.grid.compatible(&psi.grid) {
        return Err(CoorbitError::GridMismatch("f and psi live on different grids".into()));
    }
    analyze_window(f, psi, hgrid)
}

/// Full transform of `f` against an analytically evaluated wavelet.
pub fn analyze_window<W: FrequencyWindow + ?Sized>(
    f: &SampledField,
    psi: &W,
    hgrid: &HGrid,
) -> Result<TransformArray> {
    let slices = map_slices(f, psi, hgrid, |_, s| s.map(|s| s.to_vec()))?;
    TransformArray::new(f.grid, hgrid.clone(), slices)
}

/// Quadrature adjoint of [`analyze`]:
/// `sum_h weight_h |det h|^{-1/2} psi_hat(h^T xi) F[T(., h)](xi)`.
pub fn synthesize(t: &TransformArray, psi: &(impl FrequencyWindow + ?Sized)) -> Result<SampledField> {
    let grid = t.xgrid;
    let dft = Dft2::new(grid);
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    let nodes: Vec<usize> = (0..t.hgrid.len()).filter(|&k| t.slices[k].is_some()).collect();
    for chunk in nodes.chunks(CHUNK) {
        let parts: Vec<Vec<Complex64>> = chunk
            .par_iter()
            .map(|&k| {
                let h = &t.hgrid.nodes[k];
                let mut data = t.slices[k].clone().unwrap();
                dft.forward(&mut data);
                let s = t.hgrid.weights[k] / h.abs_det().sqrt();
                for (i, v) in data.iter_mut().enumerate() {
                    *v *= psi.eval(h.dual_action(grid.point(i))) * s;
                }
                data
            })
            .collect();
        for part in parts {
            for (a, v) in acc.iter_mut().zip(part) {
                *a += v;
            }
        }
    }
    SampledField::new(grid, acc, Domain::Frequency)
}

/// `sum_nodes |psi_hat(h^T xi)|^2 weight_h`.
pub fn calderon_function(psi: &(impl FrequencyWindow + ?Sized), xi: Vec2, hgrid: &HGrid) -> Result<f64> {
    if !orbit::in_orbit(hgrid.family, xi)? {
        return Err(CoorbitError::OffOrbit(xi[0], xi[1]));
    }
    Ok(calderon_sum(psi, xi, hgrid))
}

fn calderon_sum(psi: &(impl FrequencyWindow + ?Sized), xi: Vec2, hgrid: &HGrid) -> f64 {
    hgrid
        .nodes
        .iter()
        .zip(&hgrid.weights)
        .map(|(h, w)| psi.eval(h.dual_action(xi)).norm_sqr() * w)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalderonStats {
    pub mean: f64,
    pub rel_std: f64,
    pub min: f64,
    pub max: f64,
    pub probes: usize,
    /// `rel_std` at or above [`CALDERON_FLAT_TOL`].
    pub flagged: bool,
}

pub const CALDERON_FLAT_TOL: f64 = 0.05;

/// Mean and relative standard deviation of the Calderon function over probes.
pub fn calderon_constant(
    psi: &(impl FrequencyWindow + ?Sized),
    hgrid: &HGrid,
    probes: &[Vec2],
) -> Result<CalderonStats> {
    if probes.is_empty() {
        return Err(invalid("empty probe set"));
    }
    let vals = probes
        .iter()
        .map(|&p| calderon_function(psi, p, hgrid))
        .collect::<Result<Vec<f64>>>()?;
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let rel_std = if mean > 0.0 { var.sqrt() / mean } else { f64::INFINITY };
    Ok(CalderonStats {
        mean,
        rel_std,
        min: vals.iter().cloned().fold(f64::INFINITY, f64::min),
        max: vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        probes: vals.len(),
        flagged: !(rel_std < CALDERON_FLAT_TOL),
    })
}

/// Deterministic probe points inside the orbit: an annulus `1 <= |xi| <= 3`
/// for the similitude family, otherwise the unit ball around twice the base
/// point.
pub fn default_probes(family: GroupFamily) -> Result<Vec<Vec2>> {
    let base = orbit::base_point(family)?;
    let mut out = Vec::new();
    match family {
        GroupFamily::Similitude => {
            for r in [1.0, 1.5, 2.0, 2.5, 3.0] {
                for k in 0..8 {
                    let th = 2.0 * PI * (k as f64 + 0.25 * r) / 8.0;
                    out.push([r * th.cos(), r * th.sin()]);
                }
            }
        }
        _ => {
            let c = [2.0 * base[0], 2.0 * base[1]];
            out.push(c);
            for r in [0.3, 0.6, 0.9] {
                for k in 0..8 {
                    let th = 2.0 * PI * (k as f64 + r) / 8.0;
                    out.push([c[0] + r * th.cos(), c[1] + r * th.sin()]);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{AnalyticWavelet, WaveletSpec};

    const SH: GroupFamily = GroupFamily::Shearlet { c: 0.5 };

    fn small_spec() -> HGridSpec {
        HGridSpec {
            n_a: 9,
            n_b: 5,
            ..HGridSpec::default()
        }
    }

    #[test]
    fn hgrid_sizes_and_weights() {
        let d = HGridSpec::default();
        assert_eq!(HGrid::new(SH, d).unwrap().len(), 2 * 33 * 33);
        assert_eq!(HGrid::new(GroupFamily::Similitude, d).unwrap().len(), 33 * 33);
        assert_eq!(HGrid::new(GroupFamily::Diagonal, d).unwrap().len(), 4 * 33 * 33);
        assert_eq!(HGrid::new(GroupFamily::ScalarReducible, d).unwrap().len(), 33);
        for fam in [SH, GroupFamily::Similitude, GroupFamily::Diagonal] {
            let g = HGrid::new(fam, small_spec()).unwrap();
            assert!(g.weights.iter().all(|w| *w > 0.0));
        }
        assert!(HGrid::new(SH, HGridSpec { a_min: 2.0, a_max: 1.0, ..d }).is_err());
    }

    #[test]
    fn hgrid_json_forms() {
        let g = HGrid::new(SH, small_spec()).unwrap();
        let back = HGrid::from_json(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        let compact = r#"{"family":"shearlet","c":0.5,"a_min":0.0625,"a_max":16.0,"n_a":9,"b_max":4.0,"n_b":5}"#;
        assert_eq!(HGrid::from_json(compact).unwrap(), g);
        let bare = HGrid::from_json(r#"{"family":"similitude"}"#).unwrap();
        assert_eq!(bare.len(), 33 * 33);
    }

    #[test]
    fn identity_coefficient_is_squared_norm() {
        let grid = FrequencyGrid::new(64, 4.0).unwrap();
        let spec = WaveletSpec::default_bump(SH).unwrap();
        let psi = crate::wavelet::bump_wavelet(SH, spec, grid).unwrap();
        let hg = HGrid::from_nodes(SH, vec![SH.identity()], vec![1.0]).unwrap();
        let t = analyze(&psi, &psi, &hg).unwrap();
        let center = (grid.n / 2) * grid.n + grid.n / 2;
        assert!((t.value(0, center) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_input_gives_empty_transform() {
        let grid = FrequencyGrid::new(32, 4.0).unwrap();
        let zero = SampledField::zeros(grid, Domain::Frequency);
        let w = AnalyticWavelet::normalized(SH, WaveletSpec::moment(1), grid).unwrap();
        let hg = HGrid::new(SH, small_spec()).unwrap();
        let t = analyze_window(&zero, &w, &hg).unwrap();
        assert_eq!(t.nonzero_slices(), 0);
        let back = synthesize(&t, &w).unwrap();
        assert_eq!(back.max_abs(), 0.0);
    }

    #[test]
    fn calderon_scales_quadratically() {
        let grid = FrequencyGrid::new(64, 8.0).unwrap();
        let w = AnalyticWavelet::normalized(SH, WaveletSpec::default_bump(SH).unwrap(), grid).unwrap();
        let mut w3 = w;
        w3.amplitude *= 3.0;
        let hg = HGrid::new(SH, small_spec()).unwrap();
        let probes = default_probes(SH).unwrap();
        let a = calderon_constant(&w, &hg, &probes).unwrap();
        let b = calderon_constant(&w3, &hg, &probes).unwrap();
        assert!((b.mean / a.mean - 9.0).abs() < 1e-12);
        assert!(calderon_function(&w, [0.0, 1.0], &hg).is_err());
        assert!(calderon_constant(&w, &hg, &[]).is_err());
        let zero = |_: Vec2| Complex64::new(0.0, 0.0);
        assert_eq!(calderon_function(&zero, [1.0, 0.0], &hg).unwrap(), 0.0);
    }

    #[test]
    fn file_round_trip() {
        let grid = FrequencyGrid::new(16, 4.0).unwrap();
        let w = AnalyticWavelet::normalized(SH, WaveletSpec::default_bump(SH).unwrap(), grid).unwrap();
        let f = w.sample(grid);
        let hg = HGrid::new(SH, HGridSpec { n_a: 3, n_b: 3, ..HGridSpec::default() }).unwrap();
        let t = analyze_window(&f, &w, &hg).unwrap();
        assert!(t.nonzero_slices() > 0 && t.nonzero_slices() < hg.len());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        t.write(&path).unwrap();
        assert_eq!(TransformArray::read(&path).unwrap(), t);
    }
}
