//! Numeric test of temperate embeddedness of the dual orbit: the two
//! integrability conditions over `H`, evaluated on a nested sequence of
//! chart boxes `|a| in [2^-k, 2^k], |b| <= 2^k` with `k = 2 trunc`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::group::{DilationParams, GroupFamily};
use crate::norms::HWeight;
use crate::orbit;
use crate::quadrature::GaussLegendre;

/// Euclidean dimension of the underlying space.
const DIM: f64 = 2.0;
const GL_ORDER: usize = 8;
const PANEL_WIDTH: f64 = 0.25;
/// Relative increment below which a truncation step counts as settled.
pub const CAUCHY_TOL: f64 = 0.01;
pub const MIN_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `|det h|^{1/2-1/q} (1+||h||)^{s+3} w(h) A(h^T xi_0)^l` in `L^q(H)`.
    I,
    /// `|det h|^{-1/2-1/q} (1+||h||)^{s+3} w(h) A(h^{-T} xi_0)^l` in `L^1(H)`.
    II,
}

/// Parameters shared by every evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub family: GroupFamily,
    pub s: f64,
    pub q: f64,
    pub weight: HWeight,
}

impl EmbeddingParams {
    pub fn new(family: GroupFamily, s: f64, q: f64, weight: HWeight) -> Result<Self> {
        family.require_admissible("temperate embeddedness")?;
        if !(q >= 1.0 && q.is_finite()) {
            return Err(invalid(format!("q must satisfy 1 <= q < inf, got {q}")));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(invalid(format!("s must be >= 0, got {s}")));
        }
        weight.validate()?;
        Ok(EmbeddingParams { family, s, q, weight })
    }
}

/// Quadrature node on the largest box with the smallest level containing it.
#[derive(Debug, Clone, Copy)]
struct Node {
    level: usize,
    /// Quadrature weight times Haar density.
    measure: f64,
    /// Integrand of each condition without the `A^l` factor.
    base: [f64; 2],
    /// `A(h^T xi_0)` and `A(h^{-T} xi_0)`.
    env: [f64; 2],
}

/// Precomputed quadrature for truncation levels `1..=levels`.
#[derive(Debug, Clone)]
pub struct EmbeddingQuadrature {
    pub params: EmbeddingParams,
    pub levels: usize,
    nodes: Vec<Node>,
}

/// `log 2^k` for the level boundaries.
fn level_logs(levels: usize) -> Vec<f64> {
    (0..=levels).map(|t| (2 * t) as f64 * std::f64::consts::LN_2).collect()
}

/// Smallest level whose box contains `(log|a|, |b|)`.
fn level_of(levels: usize, la: f64, b: f64) -> usize {
    let need = la.abs().max(if b > 0.0 { b.ln() } else { 0.0 });
    let bounds = level_logs(levels);
    (1..=levels)
        .find(|&t| need <= bounds[t] * (1.0 + 1e-12))
        .unwrap_or(levels)
}

/// Composite Gauss-Legendre on `[-L, L]` with breaks at `+-2t ln 2`.
fn symmetric_log_rule(gl: &GaussLegendre, levels: usize) -> Vec<(f64, f64)> {
    let b = level_logs(levels);
    let mut breaks: Vec<f64> = b.iter().rev().map(|v| -v).collect();
    breaks.extend(b.iter().skip(1));
    gl.composite(&breaks, PANEL_WIDTH)
}

impl EmbeddingQuadrature {
    pub fn new(params: EmbeddingParams, levels: usize) -> Result<Self> {
        if levels < MIN_LEVELS {
            return Err(invalid(format!(
                "truncation schedule needs at least {MIN_LEVELS} levels, got {levels}"
            )));
        }
        let gl = GaussLegendre::new(GL_ORDER);
        let logs = symmetric_log_rule(&gl, levels);
        let family = params.family;
        let mut nodes = Vec::new();
        let mut add = |h: DilationParams, measure: f64, level: usize| -> Result<()> {
            nodes.push(Self::node(&params, &h, measure, level)?);
            Ok(())
        };
        match family {
            GroupFamily::Similitude => {
                // dh = dt dtheta; the integrands are rotation invariant, a
                // short periodic rule is exact up to roundoff
                let n_theta = 8;
                for &(t, wt) in &logs {
                    let rho = t.exp();
                    let level = level_of(levels, t, 0.0);
                    for k in 0..n_theta {
                        let th = 2.0 * PI * k as f64 / n_theta as f64;
                        let h = DilationParams::new(family, rho * th.cos(), rho * th.sin())?;
                        add(h, wt * 2.0 * PI / n_theta as f64, level)?;
                    }
                }
            }
            GroupFamily::Diagonal => {
                // dh = dt_a dt_b over four sign branches
                for &(ta, wa) in &logs {
                    for &(tb, wb) in &logs {
                        let level = level_of(levels, ta.abs().max(tb.abs()), 0.0);
                        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                            let h = DilationParams::new(family, sa * ta.exp(), sb * tb.exp())?;
                            add(h, wa * wb, level)?;
                        }
                    }
                }
            }
            GroupFamily::Shearlet { .. } => {
                // dh = da db / a^2 = dt db / |a|, with b = sinh(tau)
                let tmax = level_logs(levels)[levels].exp().asinh();
                let mut tau_breaks: Vec<f64> = level_logs(levels)
                    .iter()
                    .skip(1)
                    .map(|l| l.exp().asinh())
                    .collect();
                tau_breaks.insert(0, 0.0);
                let mut full: Vec<f64> = tau_breaks.iter().rev().map(|v| -v).collect();
                full.extend(tau_breaks.iter().skip(1));
                debug_assert!((full[full.len() - 1] - tmax).abs() < 1e-9);
                let taus = gl.composite(&full, PANEL_WIDTH);
                for &(t, wt) in &logs {
                    let r = t.exp();
                    for &(tau, wtau) in &taus {
                        let b = tau.sinh();
                        let level = level_of(levels, t, b.abs());
                        let m = wt * wtau * tau.cosh() / r;
                        for sa in [1.0, -1.0] {
                            add(DilationParams::new(family, sa * r, b)?, m, level)?;
                        }
                    }
                }
            }
            GroupFamily::ScalarReducible => unreachable!(),
        }
        Ok(EmbeddingQuadrature { params, levels, nodes })
    }

    fn node(params: &EmbeddingParams, h: &DilationParams, measure: f64, level: usize) -> Result<Node> {
        let xi0 = orbit::base_point(params.family)?;
        let det = h.abs_det();
        let poly = (1.0 + h.group_norm()).powf(params.s + DIM + 1.0) * params.weight.eval(h);
        let iq = 1.0 / params.q;
        let env_i = orbit::aux_a(params.family, h.dual_action(xi0))?;
        let env_ii = orbit::aux_a(params.family, h.inverse_dual_action(xi0))?;
        Ok(Node {
            level,
            measure,
            base: [det.powf(0.5 - iq) * poly, det.powf(-0.5 - iq) * poly],
            env: [env_i, env_ii],
        })
    }

    /// Values of one condition at every truncation level `1..=levels`.
    pub fn values(&self, which: Condition, ell: u32) -> Vec<f64> {
        let idx = match which {
            Condition::I => 0,
            Condition::II => 1,
        };
        let power = match which {
            Condition::I => self.params.q,
            Condition::II => 1.0,
        };
        let mut per_level = vec![0.0; self.levels + 1];
        for n in &self.nodes {
            let v = n.base[idx] * n.env[idx].powi(ell as i32);
            per_level[n.level] += v.powf(power) * n.measure;
        }
        let mut acc = 0.0;
        (1..=self.levels)
            .map(|t| {
                acc += per_level[t];
                acc.powf(1.0 / power)
            })
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Value of one condition on truncation level `trunc` (box exponent `2 trunc`).
pub fn embeddedness_condition(params: EmbeddingParams, which: Condition, ell: u32, trunc: usize) -> Result<f64> {
    if trunc == 0 {
        return Err(invalid("truncation level must be >= 1"));
    }
    let quad = EmbeddingQuadrature::new(params, trunc.max(MIN_LEVELS))?;
    Ok(quad.values(which, ell)[trunc - 1])
}

/// Integrand of a condition at a single group element (before the `L^q` power).
pub fn condition_integrand(params: &EmbeddingParams, which: Condition, ell: u32, h: &DilationParams) -> Result<f64> {
    let n = EmbeddingQuadrature::node(params, h, 1.0, 1)?;
    let idx = match which {
        Condition::I => 0,
        Condition::II => 1,
    };
    Ok(n.base[idx] * n.env[idx].powi(ell as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Converged { limit: f64 },
    /// `growth` is the fitted exponent of `value ~ (2^k)^growth` over the
    /// last levels.
    Diverged { growth: f64 },
}

impl Verdict {
    pub fn converged(&self) -> bool {
        matches!(self, Verdict::Converged { .. })
    }
}

/// Cauchy test on a nested truncation sequence: the last two relative
/// increments must be below [`CAUCHY_TOL`].
pub fn judge(values: &[f64]) -> Verdict {
    let n = values.len();
    let rel = |i: usize| {
        let (prev, cur) = (values[i - 1], values[i]);
        if cur == 0.0 {
            0.0
        } else {
            ((cur - prev) / cur).abs()
        }
    };
    let settled = n >= 3 && rel(n - 1) < CAUCHY_TOL && rel(n - 2) < CAUCHY_TOL && values[n - 1].is_finite();
    if settled {
        return Verdict::Converged { limit: values[n - 1] };
    }
    // least squares of log value against log 2^k, k = 2 t, over the last three levels
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(n.saturating_sub(3))
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(i, v)| ((2 * (i + 1)) as f64 * std::f64::consts::LN_2, v.ln()))
        .collect();
    let growth = if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::INFINITY
    };
    Verdict::Diverged { growth }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllReport {
    pub ell: u32,
    pub condition_i: Verdict,
    pub condition_ii: Verdict,
    pub values_i: Vec<f64>,
    pub values_ii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub params: EmbeddingParams,
    pub levels: usize,
    pub quadrature_nodes: usize,
    pub per_ell: Vec<EllReport>,
    /// Smallest `l` in the range with both conditions converged.
    pub minimal_ell: Option<u32>,
}

pub fn embeddedness_verdict(params: EmbeddingParams, ells: &[u32], levels: usize) -> Result<EmbeddingReport> {
    if ells.is_empty() {
        return Err(invalid("empty range of indices"));
    }
    let quad = EmbeddingQuadrature::new(params, levels)?;
    let per_ell: Vec<EllReport> = ells
        .iter()
        .map(|&ell| {
            let values_i = quad.values(Condition::I, ell);
            let values_ii = quad.values(Condition::II, ell);
            EllReport {
                ell,
                condition_i: judge(&values_i),
                condition_ii: judge(&values_ii),
                values_i,
                values_ii,
            }
        })
        .collect();
    let minimal_ell = per_ell
        .iter()
        .filter(|r| r.condition_i.converged() && r.condition_ii.converged())
        .map(|r| r.ell)
        .min();
    Ok(EmbeddingReport {
        params,
        levels,
        quadrature_nodes: quad.node_count(),
        per_ell,
        minimal_ell,
    })
}
