//! Weights on `G`, control weights, and weighted mixed norms of sampled
//! transforms.

use serde::{Deserialize, Serialize};

use crate::cwt::{self, HGrid, TransformArray};
use crate::error::{invalid, CoorbitError, Result};
use crate::grid::{Domain, FrequencyGrid, FrequencyWindow, SampledField};
use crate::group::{AffinePoint, DilationParams, GroupFamily, Vec2};
use crate::wavelet;

/// Upper bound `w(h)` for the dilation part of a weight, per family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HWeight {
    /// `w = 1`.
    Unit,
    /// `(a^2 + b^2)^u + (a^2 + b^2)^{-u}`.
    Similitude { u: f64 },
    /// `(|a| + 1/|a|)^t (|b| + 1/|b|)^u`.
    Diagonal { t: f64, u: f64 },
    /// `(|a| + 1/|a| + |b|)^u`.
    Shearlet { u: f64 },
    /// `|a|^{r1} (|a| + 1/|a| + |a|^{-1/2} |b|)^{r2}`; dominated by the
    /// `Shearlet { u: r1 + 2 r2 }` bound.
    ShearletLiterature { r1: f64, r2: f64 },
    /// `(a + 1/a)^u` for the scalar family.
    Scalar { u: f64 },
}

impl HWeight {
    pub fn eval(&self, h: &DilationParams) -> f64 {
        let (a, b) = (h.a.abs(), h.b.abs());
        match *self {
            HWeight::Unit => 1.0,
            HWeight::Similitude { u } => {
                let r2 = h.a * h.a + h.b * h.b;
                r2.powf(u) + r2.powf(-u)
            }
            HWeight::Diagonal { t, u } => (a + 1.0 / a).powf(t) * (b + 1.0 / b).powf(u),
            HWeight::Shearlet { u } => (a + 1.0 / a + b).powf(u),
            HWeight::ShearletLiterature { r1, r2 } => {
                a.powf(r1) * (a + 1.0 / a + b / a.sqrt()).powf(r2)
            }
            HWeight::Scalar { u } => (a + 1.0 / a).powf(u),
        }
    }

    /// The bundle with exponent `u` (and `t = u` for the diagonal family).
    pub fn for_family(family: GroupFamily, u: f64) -> HWeight {
        match family {
            GroupFamily::Similitude => HWeight::Similitude { u },
            GroupFamily::Diagonal => HWeight::Diagonal { t: u, u },
            GroupFamily::Shearlet { .. } => HWeight::Shearlet { u },
            GroupFamily::ScalarReducible => HWeight::Scalar { u },
        }
    }

    /// Parses a command-line bundle such as `{"u": 1}`, `{"t": 1, "u": 2}`
    /// or `{"r1": 1, "r2": 0.5}` in the context of a family. A full tagged
    /// form (`{"kind": "shearlet", "u": 1}`) is accepted too.
    pub fn from_json(family: GroupFamily, text: &str) -> Result<HWeight> {
        if let Ok(w) = serde_json::from_str::<HWeight>(text) {
            return Ok(w);
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Loose {
            t: Option<f64>,
            u: Option<f64>,
            r1: Option<f64>,
            r2: Option<f64>,
        }
        let l: Loose = serde_json::from_str(text)?;
        let w = match (family, l) {
            (_, Loose { t: None, u: None, r1: None, r2: None }) => HWeight::Unit,
            (GroupFamily::Shearlet { .. }, Loose { r1: Some(r1), r2, u: None, t: None }) => {
                HWeight::ShearletLiterature { r1, r2: r2.unwrap_or(0.0) }
            }
            (GroupFamily::Shearlet { .. }, Loose { r1: None, r2: Some(r2), u: None, t: None }) => {
                HWeight::ShearletLiterature { r1: 0.0, r2 }
            }
            (GroupFamily::Diagonal, Loose { t, u, r1: None, r2: None }) => HWeight::Diagonal {
                t: t.or(u).unwrap_or(0.0),
                u: u.unwrap_or(0.0),
            },
            (fam, Loose { u: Some(u), t: None, r1: None, r2: None }) => HWeight::for_family(fam, u),
            _ => return Err(invalid(format!("weight bundle {text} does not fit {family}"))),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            HWeight::Unit => true,
            HWeight::Similitude { u } | HWeight::Shearlet { u } | HWeight::Scalar { u } => u.is_finite(),
            HWeight::Diagonal { t, u } => t.is_finite() && u.is_finite(),
            HWeight::ShearletLiterature { r1, r2 } => r1.is_finite() && r2.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("weight exponents must be finite"))
        }
    }
}

/// `v(x, h) = (1 + |x| + ||h||_inf)^s w(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub s: f64,
    pub hweight: HWeight,
}

impl WeightSpec {
    pub fn new(s: f64, hweight: HWeight) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(invalid(format!("translation exponent must be >= 0, got {s}")));
        }
        hweight.validate()?;
        Ok(WeightSpec { s, hweight })
    }

    pub fn unit() -> Self {
        WeightSpec {
            s: 0.0,
            hweight: HWeight::Unit,
        }
    }
}

fn norm2(x: Vec2) -> f64 {
    x[0].hypot(x[1])
}

pub fn weight_eval(spec: &WeightSpec, x: Vec2, h: &DilationParams) -> f64 {
    let poly = if spec.s == 0.0 {
        1.0
    } else {
        (1.0 + norm2(x) + h.op_norm()).powf(spec.s)
    };
    poly * spec.hweight.eval(h)
}

/// Exponent `1/p` with `1/inf = 0`.
fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn check_exponent(p: f64, name: &str) -> Result<()> {
    if !(p >= 1.0) {
        return Err(invalid(format!("{name} must lie in [1, inf], got {p}")));
    }
    Ok(())
}

/// The `x`-independent factors of the control weight:
/// `(w(h) + w(h^-1)) max(D^{-1/q}, D^{1/q-1}) (|det|^{1/q-1/p} + |det|^{1/p-1/q})`
/// with `D = Delta_G(0, h)`.
fn control_core(spec: &WeightSpec, p: f64, q: f64, h: &DilationParams) -> f64 {
    let (ip, iq) = (recip(p), recip(q));
    let hinv = h.invert();
    let dg = h.modular_g();
    let det = h.abs_det();
    (spec.hweight.eval(h) + spec.hweight.eval(&hinv))
        * dg.powf(-iq).max(dg.powf(iq - 1.0))
        * (det.powf(iq - ip) + det.powf(ip - iq))
}

/// Upper bound `(1 + |x|)^s w_0(h)` for the control weight of `L^{p,q}_v`.
pub fn control_weight_eval(spec: &WeightSpec, p: f64, q: f64, x: Vec2, h: &DilationParams) -> Result<f64> {
    check_exponent(p, "p")?;
    check_exponent(q, "q")?;
    let hinv = h.invert();
    let poly = (1.0 + h.op_norm() + hinv.op_norm()).powf(spec.s);
    Ok((1.0 + norm2(x)).powf(spec.s) * poly * control_core(spec, p, q, h))
}

/// The symmetric control weight
/// `v_2(x, h) = (1 + |x| + |h^-1 x| + ||h^-1|| + ||h||)^s x control_core(h)`.
pub fn control_weight_v2(spec: &WeightSpec, p: f64, q: f64, z: &AffinePoint) -> Result<f64> {
    check_exponent(p, "p")?;
    check_exponent(q, "q")?;
    let hinv = z.h.invert();
    let v1 = (1.0 + norm2(z.x) + norm2(hinv.matrix().apply(z.x)) + hinv.op_norm() + z.h.op_norm())
        .powf(spec.s);
    Ok(v1 * control_core(spec, p, q, &z.h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedNormParams {
    pub p: f64,
    pub q: f64,
    pub weight: WeightSpec,
}

impl MixedNormParams {
    pub fn new(p: f64, q: f64, weight: WeightSpec) -> Result<Self> {
        check_exponent(p, "p")?;
        check_exponent(q, "q")?;
        Ok(MixedNormParams { p, q, weight })
    }
}

/// Inner `L^p_v` norm over `x` of one slice (the weight evaluated at `(x, h)`).
pub fn slice_norm(slice: Option<&[num_complex::Complex64]>, xgrid: &FrequencyGrid, h: &DilationParams, params: &MixedNormParams) -> f64 {
    let Some(slice) = slice else {
        return 0.0;
    };
    let w = &params.weight;
    let hw = w.hweight.eval(h);
    let point_weight = |i: usize| {
        if w.s == 0.0 {
            hw
        } else {
            (1.0 + norm2(xgrid.x_point(i)) + h.op_norm()).powf(w.s) * hw
        }
    };
    if params.p.is_infinite() {
        return slice
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm() * point_weight(i))
            .fold(0.0, f64::max);
    }
    let p = params.p;
    let s: f64 = if p == 2.0 {
        slice
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm_sqr() * point_weight(i).powi(2))
            .sum()
    } else {
        slice
            .iter()
            .enumerate()
            .map(|(i, v)| (v.norm() * point_weight(i)).powf(p))
            .sum()
    };
    (s * xgrid.x_cell_area()).powf(1.0 / p)
}

/// Outer `L^q` over `H` with measure `weight_h / |det h|`, from per-node
/// inner norms.
pub fn combine_slices(inner: &[f64], hgrid: &HGrid, q: f64) -> f64 {
    if q.is_infinite() {
        return inner.iter().cloned().fold(0.0, f64::max);
    }
    let s: f64 = inner
        .iter()
        .zip(&hgrid.nodes)
        .zip(&hgrid.weights)
        .map(|((v, h), w)| v.powf(q) * w / h.abs_det())
        .sum();
    s.powf(1.0 / q)
}

/// `||T||_{L^{p,q}_v}` by quadrature.
pub fn mixed_norm(t: &TransformArray, params: &MixedNormParams) -> f64 {
    let inner: Vec<f64> = t
        .slices
        .iter()
        .zip(&t.hgrid.nodes)
        .map(|(s, h)| slice_norm(s.as_deref(), &t.xgrid, h, params))
        .collect();
    combine_slices(&inner, &t.hgrid, params.q)
}

/// Mixed norm of `W_psi f` without storing the transform.
pub fn mixed_norm_streaming(
    f: &SampledField,
    psi: &(impl FrequencyWindow + ?Sized),
    hgrid: &HGrid,
    params: &MixedNormParams,
) -> Result<f64> {
    let inner = cwt::map_slices(f, psi, hgrid, |k, s| slice_norm(s, &f.grid, &hgrid.nodes[k], params))?;
    Ok(combine_slices(&inner, hgrid, params.q))
}

/// Plain weighted `L^p(G)` norm as one flattened sum (reference path for `p = q`).
pub fn weighted_lp_flat(t: &TransformArray, p: f64, weight: &WeightSpec) -> f64 {
    let dx2 = t.xgrid.x_cell_area();
    let mut acc = 0.0;
    for (k, s) in t.slices.iter().enumerate() {
        let Some(s) = s else { continue };
        let h = &t.hgrid.nodes[k];
        let m = t.hgrid.weights[k] / h.abs_det() * dx2;
        for (i, v) in s.iter().enumerate() {
            acc += (v.norm() * weight_eval(weight, t.xgrid.x_point(i), h)).powf(p) * m;
        }
    }
    acc.powf(1.0 / p)
}

/// `||g||_{L^p_s} = (sum |g|^p (1 + |x|)^{sp} dx^2)^{1/p}`; frequency-domain
/// input is transformed first.
pub fn lps_norm(field: &SampledField, p: f64, s: f64) -> Result<f64> {
    check_exponent(p, "p")?;
    if !(s >= 0.0) {
        return Err(invalid(format!("weight exponent must be >= 0, got {s}")));
    }
    let space = match field.domain {
        Domain::Space => field.clone(),
        Domain::Frequency => field.to_space(),
    };
    let g = &space.grid;
    if p.is_infinite() {
        return Ok(space
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm() * (1.0 + norm2(g.x_point(i))).powf(s))
            .fold(0.0, f64::max));
    }
    let sum: f64 = space
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (v.norm() * (1.0 + norm2(g.x_point(i))).powf(s)).powf(p))
        .sum();
    Ok((sum * g.x_cell_area()).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRatio {
    pub ratio: f64,
    pub mixed_norm: f64,
    pub seminorm_f: f64,
    pub seminorm_psi: f64,
}

/// `||W_psi f||_{L^{p,q}_v} / (|f_hat|_{t,t} |psi_hat|_{t,t})`.
pub fn decay_ratio(
    f: &SampledField,
    psi: &SampledField,
    hgrid: &HGrid,
    params: &MixedNormParams,
    t: usize,
) -> Result<DecayRatio> {
    for (field, name) in [(f, "f"), (psi, "psi")] {
        if field.domain != Domain::Frequency {
            return Err(invalid(format!("{name} must be a frequency-domain field")));
        }
    }
    if !f.grid.compatible(&psi.grid) {
        return Err(CoorbitError::GridMismatch("f and psi live on different grids".into()));
    }
    let sf = wavelet::schwartz_seminorm(f, t, t as f64)?;
    let sp = wavelet::schwartz_seminorm(psi, t, t as f64)?;
    if sf == 0.0 || sp == 0.0 {
        return Err(invalid("zero seminorm in the denominator"));
    }
    let m = mixed_norm_streaming(f, psi, hgrid, params)?;
    Ok(DecayRatio {
        ratio: m / (sf * sp),
        mixed_norm: m,
        seminorm_f: sf,
        seminorm_psi: sp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SH: GroupFamily = GroupFamily::Shearlet { c: 0.5 };

    fn dp(f: GroupFamily, a: f64, b: f64) -> DilationParams {
        DilationParams::new(f, a, b).unwrap()
    }

    #[test]
    fn weight_examples() {
        let one = WeightSpec::unit();
        assert_eq!(weight_eval(&one, [3.0, -1.0], &dp(SH, 0.2, 5.0)), 1.0);
        let sim = WeightSpec::new(1.0, HWeight::Similitude { u: 0.0 }).unwrap();
        let id = GroupFamily::Similitude.identity();
        assert!((weight_eval(&sim, [1.0, 0.0], &id) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn control_weight_examples() {
        let spec = WeightSpec::new(0.0, HWeight::Similitude { u: 0.0 }).unwrap();
        // a^2 + b^2 = 4
        let h = dp(GroupFamily::Similitude, 2.0, 0.0);
        let v = control_weight_eval(&spec, 2.0, 2.0, [0.0, 0.0], &h).unwrap();
        assert!((v - 16.0).abs() < 1e-12, "{v}");
        let id = GroupFamily::Similitude.identity();
        let v = control_weight_eval(&spec, 3.0, 3.0, [5.0, 5.0], &id).unwrap();
        assert!((v - (2.0 + 2.0) * 2.0).abs() < 1e-12);
    }

    #[test]
    fn control_weight_lower_bound_needs_growth() {
        // With s = 0 and a bounded dilation weight the symmetric construction
        // drops below one at small scales.
        let spec = WeightSpec::new(0.0, HWeight::Similitude { u: 0.0 }).unwrap();
        let z = AffinePoint::new([0.0, 0.0], dp(GroupFamily::Similitude, 1.0 / 16.0, 0.0));
        let v = control_weight_v2(&spec, 2.0, 2.0, &z).unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{v}");
        let grown = WeightSpec::new(1.0, HWeight::Similitude { u: 0.0 }).unwrap();
        assert!(control_weight_v2(&grown, 2.0, 2.0, &z).unwrap() >= 1.0);
    }

    #[test]
    fn bundle_parsing() {
        assert_eq!(HWeight::from_json(SH, r#"{"u": 2}"#).unwrap(), HWeight::Shearlet { u: 2.0 });
        assert_eq!(
            HWeight::from_json(SH, r#"{"r1": 1, "r2": 0.5}"#).unwrap(),
            HWeight::ShearletLiterature { r1: 1.0, r2: 0.5 }
        );
        assert_eq!(
            HWeight::from_json(GroupFamily::Diagonal, r#"{"t": 1, "u": 2}"#).unwrap(),
            HWeight::Diagonal { t: 1.0, u: 2.0 }
        );
        assert_eq!(HWeight::from_json(SH, "{}").unwrap(), HWeight::Unit);
        assert!(HWeight::from_json(GroupFamily::Similitude, r#"{"r1": 1}"#).is_err());
        assert!(HWeight::from_json(SH, r#"{"v": 1}"#).is_err());
    }

    #[test]
    fn literature_weight_dominated() {
        let lit = HWeight::ShearletLiterature { r1: 1.0, r2: 0.5 };
        let bound = HWeight::Shearlet { u: 2.0 };
        for (a, b) in [(0.01, 3.0), (5.0, -2.0), (1.0, 0.0), (-0.3, 10.0), (40.0, 0.1)] {
            let h = dp(SH, a, b);
            assert!(lit.eval(&h) <= bound.eval(&h) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lps_gaussian() {
        let g = FrequencyGrid::new(128, 8.0).unwrap();
        let gauss = SampledField::from_fn(g, Domain::Space, |x| {
            num_complex::Complex64::new((-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
        });
        let v = lps_norm(&gauss, 2.0, 0.0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-4);
        assert!(lps_norm(&gauss, 2.0, 1.0).unwrap() > v);
        let l1 = lps_norm(&gauss, 1.0, 0.0).unwrap();
        assert!((l1 - 1.0).abs() < 1e-4);
    }
}
