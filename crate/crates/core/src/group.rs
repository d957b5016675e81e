//! Dilation-group families in two dimensions and their affine extensions.
//!
//! Elements are stored in chart coordinates `(a, b)`; every operation is a
//! closed-form chart formula, and [`DilationParams::matrix`] gives the
//! representing 2x2 matrix:
//!
//! | family      | matrix                  | identity |
//! |-------------|-------------------------|----------|
//! | similitude  | `[[a, b], [-b, a]]`     | (1, 0)   |
//! | diagonal    | `[[a, 0], [0, b]]`      | (1, 1)   |
//! | shearlet    | `[[a, b], [0, a^c]]`    | (1, 0)   |
//! | scalar      | `a * I`                 | (1, -)   |
//!
//! For the shearlet family `a^c` is the signed power `sign(a) |a|^c`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoorbitError, Result};

pub type Vec2 = [f64; 2];

/// Chart coordinates below this magnitude are rejected.
pub const CHART_EPS: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroupFamily {
    Similitude,
    Diagonal,
    Shearlet {
        c: f64,
    },
    /// `R^2 x| R^+` acting by scalar dilations. The quasi-regular
    /// representation is reducible; used only for the window-dependence demo.
    #[serde(alias = "scalar")]
    ScalarReducible,
}

impl GroupFamily {
    pub fn shearlet(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(CoorbitError::InvalidParameter(format!(
                "shearlet exponent must be finite, got {c}"
            )));
        }
        Ok(GroupFamily::Shearlet { c })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GroupFamily::Shearlet { c } if !c.is_finite() => Err(CoorbitError::InvalidParameter(
                format!("shearlet exponent must be finite, got {c}"),
            )),
            _ => Ok(()),
        }
    }

    /// Whether the quasi-regular representation is irreducible.
    pub fn is_admissible(&self) -> bool {
        !matches!(self, GroupFamily::ScalarReducible)
    }

    pub fn require_admissible(&self, operation: &'static str) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(CoorbitError::Unsupported {
                family: *self,
                operation,
            })
        }
    }

    pub fn identity(&self) -> DilationParams {
        let (a, b) = match self {
            GroupFamily::Diagonal => (1.0, 1.0),
            _ => (1.0, 0.0),
        };
        DilationParams { family: *self, a, b }
    }

    /// Parses `{"family": "shearlet", "c": 0.5}` and friends.
    pub fn from_json(text: &str) -> Result<Self> {
        let family: GroupFamily = serde_json::from_str(text)?;
        family.validate()?;
        Ok(family)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family serializes")
    }

    pub fn name(&self) -> &'static str {
        match self {
            GroupFamily::Similitude => "similitude",
            GroupFamily::Diagonal => "diagonal",
            GroupFamily::Shearlet { .. } => "shearlet",
            GroupFamily::ScalarReducible => "scalar_reducible",
        }
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupFamily::Shearlet { c } => write!(f, "shearlet(c={c})"),
            other => f.write_str(other.name()),
        }
    }
}

/// `sign(a) |a|^c`.
#[inline]
pub fn signed_pow(a: f64, c: f64) -> f64 {
    a.signum() * a.abs().powf(c)
}

/// Dense 2x2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &other.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    /// Operator norm induced by the euclidean norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        let m = &self.0;
        let p = m[0][0] * m[0][0] + m[1][0] * m[1][0];
        let q = m[0][0] * m[0][1] + m[1][0] * m[1][1];
        let r = m[0][1] * m[0][1] + m[1][1] * m[1][1];
        let tr = p + r;
        let disc = ((p - r) * (p - r) + 4.0 * q * q).sqrt();
        (0.5 * (tr + disc)).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }
}

/// A dilation-group element in the chart of its family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationParams {
    pub family: GroupFamily,
    pub a: f64,
    pub b: f64,
}

impl DilationParams {
    pub fn new(family: GroupFamily, a: f64, b: f64) -> Result<Self> {
        family.validate()?;
        let b = if family == GroupFamily::ScalarReducible {
            0.0
        } else {
            b
        };
        let h = DilationParams { family, a, b };
        h.check()?;
        Ok(h)
    }

    /// Verifies the chart constraint of the family.
    pub fn check(&self) -> Result<()> {
        let (a, b) = (self.a, self.b);
        if !a.is_finite() || !b.is_finite() {
            return Err(CoorbitError::InvalidElement(format!(
                "non-finite chart coordinates ({a}, {b})"
            )));
        }
        let ok = match self.family {
            GroupFamily::Similitude => a * a + b * b > CHART_EPS,
            GroupFamily::Diagonal => a.abs() > CHART_EPS && b.abs() > CHART_EPS,
            GroupFamily::Shearlet { .. } => a.abs() > CHART_EPS,
            GroupFamily::ScalarReducible => a > CHART_EPS,
        };
        if ok {
            Ok(())
        } else {
            Err(CoorbitError::InvalidElement(format!(
                "({a}, {b}) violates the {} chart",
                self.family
            )))
        }
    }

    pub fn matrix(&self) -> Mat2 {
        let (a, b) = (self.a, self.b);
        match self.family {
            GroupFamily::Similitude => Mat2([[a, b], [-b, a]]),
            GroupFamily::Diagonal => Mat2([[a, 0.0], [0.0, b]]),
            GroupFamily::Shearlet { c } => Mat2([[a, b], [0.0, signed_pow(a, c)]]),
            GroupFamily::ScalarReducible => Mat2([[a, 0.0], [0.0, a]]),
        }
    }

    pub fn compose(&self, other: &DilationParams) -> Result<DilationParams> {
        if self.family != other.family {
            return Err(CoorbitError::FamilyMismatch {
                left: self.family,
                right: other.family,
            });
        }
        let (a1, b1, a2, b2) = (self.a, self.b, other.a, other.b);
        let (a, b) = match self.family {
            GroupFamily::Similitude => (a1 * a2 - b1 * b2, a1 * b2 + b1 * a2),
            GroupFamily::Diagonal => (a1 * a2, b1 * b2),
            GroupFamily::Shearlet { c } => (a1 * a2, a1 * b2 + b1 * signed_pow(a2, c)),
            GroupFamily::ScalarReducible => (a1 * a2, 0.0),
        };
        DilationParams::new(self.family, a, b)
    }

    pub fn invert(&self) -> DilationParams {
        let (a, b) = (self.a, self.b);
        let (ia, ib) = match self.family {
            GroupFamily::Similitude => {
                let r2 = a * a + b * b;
                (a / r2, -b / r2)
            }
            GroupFamily::Diagonal => (1.0 / a, 1.0 / b),
            GroupFamily::Shearlet { c } => (1.0 / a, -b / (a * signed_pow(a, c))),
            GroupFamily::ScalarReducible => (1.0 / a, 0.0),
        };
        DilationParams {
            family: self.family,
            a: ia,
            b: ib,
        }
    }

    pub fn determinant(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        match self.family {
            GroupFamily::Similitude => a * a + b * b,
            GroupFamily::Diagonal => a * b,
            GroupFamily::Shearlet { c } => a * signed_pow(a, c),
            GroupFamily::ScalarReducible => a * a,
        }
    }

    pub fn abs_det(&self) -> f64 {
        self.determinant().abs()
    }

    /// Modular function of the dilation group.
    pub fn modular_h(&self) -> f64 {
        match self.family {
            GroupFamily::Shearlet { c } => self.a.abs().powf(c - 1.0),
            _ => 1.0,
        }
    }

    /// Modular function of `G` at `(x, h)`; independent of `x`.
    pub fn modular_g(&self) -> f64 {
        self.modular_h() / self.abs_det()
    }

    /// Density of left Haar measure of `H` with respect to `da db`
    /// (`da` alone for the scalar family).
    pub fn haar_density(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        match self.family {
            GroupFamily::Similitude => 1.0 / (a * a + b * b),
            GroupFamily::Diagonal => 1.0 / (a * b).abs(),
            GroupFamily::Shearlet { .. } => 1.0 / (a * a),
            GroupFamily::ScalarReducible => 1.0 / a,
        }
    }

    /// `h^T xi`.
    pub fn dual_action(&self, xi: Vec2) -> Vec2 {
        self.matrix().transpose().apply(xi)
    }

    /// `h^{-T} xi`.
    pub fn inverse_dual_action(&self, xi: Vec2) -> Vec2 {
        self.invert().dual_action(xi)
    }

    /// The per-family matrix norm used in the embeddedness integrals.
    pub fn group_norm(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        match self.family {
            GroupFamily::Similitude => a.hypot(b),
            GroupFamily::Diagonal => a.abs().max(b.abs()),
            GroupFamily::Shearlet { c } => a.abs().max(a.abs().powf(c)).max(b.abs()),
            GroupFamily::ScalarReducible => a.abs(),
        }
    }

    /// `||h||_inf`, the euclidean operator norm.
    pub fn op_norm(&self) -> f64 {
        self.matrix().op_norm()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.matrix().max_abs_diff(&Mat2::IDENTITY) <= tol
    }
}

/// Which matrix norm to use wherever `||h||` appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    #[default]
    Family,
    Operator,
}

impl NormChoice {
    pub fn eval(&self, h: &DilationParams) -> f64 {
        match self {
            NormChoice::Family => h.group_norm(),
            NormChoice::Operator => h.op_norm(),
        }
    }
}

/// An element `(x, h)` of `G = R^2 x| H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinePoint {
    pub x: Vec2,
    pub h: DilationParams,
}

impl AffinePoint {
    pub fn new(x: Vec2, h: DilationParams) -> Self {
        AffinePoint { x, h }
    }

    pub fn identity(family: GroupFamily) -> Self {
        AffinePoint {
            x: [0.0, 0.0],
            h: family.identity(),
        }
    }

    /// `(x, h)(y, g) = (x + h y, h g)`.
    pub fn compose(&self, other: &AffinePoint) -> Result<AffinePoint> {
        let hy = self.h.matrix().apply(other.x);
        Ok(AffinePoint {
            x: [self.x[0] + hy[0], self.x[1] + hy[1]],
            h: self.h.compose(&other.h)?,
        })
    }

    /// `(x, h)^{-1} = (-h^{-1} x, h^{-1})`.
    pub fn invert(&self) -> AffinePoint {
        let hinv = self.h.invert();
        let y = hinv.matrix().apply(self.x);
        AffinePoint {
            x: [-y[0], -y[1]],
            h: hinv,
        }
    }

    /// The affine map `y -> x + h y`.
    pub fn apply(&self, y: Vec2) -> Vec2 {
        let hy = self.h.matrix().apply(y);
        [self.x[0] + hy[0], self.x[1] + hy[1]]
    }

    pub fn modular(&self) -> f64 {
        self.h.modular_g()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SH: GroupFamily = GroupFamily::Shearlet { c: 0.5 };

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn matrices() {
        let id = GroupFamily::Similitude.identity();
        assert_eq!(id.matrix(), Mat2::IDENTITY);
        let h = DilationParams::new(SH, 4.0, 1.0).unwrap();
        assert_eq!(h.matrix(), Mat2([[4.0, 1.0], [0.0, 2.0]]));
        let d = DilationParams::new(GroupFamily::Diagonal, 2.0, 3.0).unwrap();
        assert_eq!(d.matrix(), Mat2([[2.0, 0.0], [0.0, 3.0]]));
        let s = DilationParams::new(GroupFamily::ScalarReducible, 3.0, 7.0).unwrap();
        assert_eq!(s.b, 0.0);
        assert_eq!(s.matrix(), Mat2([[3.0, 0.0], [0.0, 3.0]]));
    }

    #[test]
    fn chart_violations() {
        assert!(DilationParams::new(GroupFamily::Similitude, 0.0, 0.0).is_err());
        assert!(DilationParams::new(GroupFamily::Diagonal, 1.0, 0.0).is_err());
        assert!(DilationParams::new(SH, 0.0, 1.0).is_err());
        assert!(DilationParams::new(GroupFamily::ScalarReducible, -1.0, 0.0).is_err());
        assert!(DilationParams::new(GroupFamily::Diagonal, 1e-301, 1.0).is_err());
        assert!(GroupFamily::shearlet(f64::NAN).is_err());
    }

    #[test]
    fn composition_examples() {
        let f = GroupFamily::Similitude;
        let i = DilationParams::new(f, 0.0, 1.0).unwrap();
        let ii = i.compose(&i).unwrap();
        assert_eq!((ii.a, ii.b), (-1.0, 0.0));
        let h = DilationParams::new(SH, 4.0, 1.0).unwrap();
        let r = h.compose(&SH.identity()).unwrap();
        assert_eq!((r.a, r.b), (4.0, 1.0));
        let l = SH.identity().compose(&h).unwrap();
        assert_eq!((l.a, l.b), (4.0, 1.0));
        let err = h.compose(&f.identity());
        assert!(matches!(err, Err(CoorbitError::FamilyMismatch { .. })));
    }

    #[test]
    fn inverse_examples() {
        let d = DilationParams::new(GroupFamily::Diagonal, 2.0, 3.0).unwrap();
        let di = d.invert();
        assert!(close(di.a, 0.5) && close(di.b, 1.0 / 3.0));
        let h = DilationParams::new(SH, 4.0, 1.0).unwrap();
        let m = h.invert().matrix();
        assert!(m.max_abs_diff(&Mat2([[0.25, -0.125], [0.0, 0.5]])) < 1e-15);
        assert!(SH.identity().invert().is_identity(0.0));
    }

    #[test]
    fn measures() {
        let h = DilationParams::new(SH, 4.0, 1.0).unwrap();
        assert!(close(h.determinant(), 8.0));
        assert!(close(h.modular_h(), 0.5));
        assert!(close(h.haar_density(), 1.0 / 16.0));
        assert!(close(h.modular_g(), 1.0 / 16.0));
        let d = DilationParams::new(GroupFamily::Diagonal, 2.0, 3.0).unwrap();
        assert!(close(d.determinant(), 6.0));
        assert!(close(d.haar_density(), 1.0 / 6.0));
        let s = GroupFamily::Similitude.identity();
        assert_eq!(
            (s.determinant(), s.modular_h(), s.haar_density(), s.modular_g()),
            (1.0, 1.0, 1.0, 1.0)
        );
        // negative a: determinant stays positive under the signed-power convention
        let n = DilationParams::new(SH, -4.0, 1.0).unwrap();
        assert!(close(n.determinant(), 8.0));
        assert!(close(n.matrix().det(), 8.0));
    }

    #[test]
    fn dual_action_examples() {
        let h = DilationParams::new(SH, 4.0, 1.0).unwrap();
        assert_eq!(h.dual_action([1.0, 0.0]), [4.0, 1.0]);
        assert_eq!(h.dual_action([0.0, 0.0]), [0.0, 0.0]);
        let s = DilationParams::new(GroupFamily::Similitude, 2.0, -3.0).unwrap();
        assert_eq!(s.dual_action([1.0, 0.0]), [2.0, -3.0]);
        let d = DilationParams::new(GroupFamily::Diagonal, 2.0, -3.0).unwrap();
        assert_eq!(d.dual_action([1.0, 1.0]), [2.0, -3.0]);
    }

    #[test]
    fn affine_examples() {
        let f = GroupFamily::Diagonal;
        let h = DilationParams::new(f, 2.0, 3.0).unwrap();
        let p = AffinePoint::new([1.0, 1.0], h);
        assert_eq!(p.apply([1.0, 0.0]), [3.0, 1.0]);
        assert_eq!(p.compose(&AffinePoint::identity(f)).unwrap(), p);
        let e = p.compose(&p.invert()).unwrap();
        assert!(e.x[0].abs() < 1e-12 && e.x[1].abs() < 1e-12);
        assert!(e.h.is_identity(1e-12));
    }

    #[test]
    fn norms() {
        let s = DilationParams::new(GroupFamily::Similitude, 3.0, 4.0).unwrap();
        assert!(close(s.group_norm(), 5.0));
        assert!(close(s.op_norm(), 5.0));
        let d = DilationParams::new(GroupFamily::Diagonal, 2.0, 3.0).unwrap();
        assert!(close(d.group_norm(), 3.0));
        assert!(close(d.op_norm(), 3.0));
        let h = DilationParams::new(GroupFamily::Shearlet { c: 2.0 }, 0.5, 0.0).unwrap();
        assert!(close(h.group_norm(), 0.5));
        assert!(close(NormChoice::Operator.eval(&h), 0.5));
    }

    #[test]
    fn family_json() {
        let f = GroupFamily::from_json(r#"{"family": "shearlet", "c": 0.5}"#).unwrap();
        assert_eq!(f, SH);
        assert_eq!(GroupFamily::from_json(&f.to_json()).unwrap(), f);
        assert_eq!(
            GroupFamily::from_json(r#"{"family": "scalar"}"#).unwrap(),
            GroupFamily::ScalarReducible
        );
        assert!(GroupFamily::from_json(r#"{"family": "affine"}"#).is_err());
    }
}
