//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines land in the plain `cargo test` output.

use std::process::ExitCode;
use std::time::Instant;

use coorbit::cwt::{map_slices, HGrid, HGridSpec, RepresentedWindow};
use coorbit::embed::Condition;
use coorbit::experiments::{
    run_calderon, run_counterexample, run_decay_suite, run_embeddedness, run_frame, CalderonConfig, Check,
    CounterexampleConfig, DecayConfig, EmbeddingConfig, FrameConfig,
};
use coorbit::frame::from_chart;
use coorbit::grid::{FrequencyGrid, SampledField};
use coorbit::group::{AffinePoint, DilationParams, GroupFamily, Mat2};
use coorbit::norms::{control_weight_v2, HWeight, WeightSpec};
use coorbit::orbit;
use coorbit::wavelet::{
    mollifier, moment_slope, random_test_function, AnalyticWavelet, FrequencyBall, WaveletSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SHEARLET: GroupFamily = GroupFamily::Shearlet { c: 0.5 };
const ADMISSIBLE: [GroupFamily; 3] = [GroupFamily::Similitude, GroupFamily::Diagonal, SHEARLET];
const ALL: [GroupFamily; 4] = [
    GroupFamily::Similitude,
    GroupFamily::Diagonal,
    SHEARLET,
    GroupFamily::ScalarReducible,
];

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn failed_checks(checks: &[Check]) -> String {
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}={:.4e} (threshold {:.4e})", c.name, c.value, c.threshold))
        .collect();
    if bad.is_empty() {
        "all checks passed".into()
    } else {
        bad.join(", ")
    }
}

fn random_element<R: Rng>(family: GroupFamily, rng: &mut R, spread: f64) -> DilationParams {
    let branch = match family {
        GroupFamily::Diagonal => rng.gen_range(0..4u8),
        GroupFamily::Shearlet { .. } => rng.gen_range(0..2u8),
        _ => 0,
    };
    let t = rng.gen_range(-spread..spread);
    let s = match family {
        GroupFamily::Similitude => rng.gen_range(0.0..std::f64::consts::TAU),
        _ => rng.gen_range(-spread..spread),
    };
    from_chart(family, branch, t, s).unwrap()
}

fn rel_gap(a: &Mat2, b: &Mat2) -> f64 {
    let scale = 1.0 + b.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    a.max_abs_diff(b) / scale
}

// ------------------------------------------------------------------ 1

/// Compactly supported test function on `H` in `(a, b)` coordinates.
fn haar_test_function(family: GroupFamily, h: &DilationParams) -> f64 {
    let center = match family {
        GroupFamily::Diagonal => [1.0, 1.0],
        _ => [1.0, 0.0],
    };
    let r = (h.a - center[0]).hypot(h.b - center[1]);
    mollifier(r / 0.5)
}

/// `int F(h0 h) dh` against `int F(h) dh` by a trapezoid rule on `[-4, 4]^2`
/// with the closed-form left Haar density.
fn haar_invariance_gap(family: GroupFamily, h0: &DilationParams) -> f64 {
    let m = 1200;
    let (lo, hi) = (-4.0, 4.0);
    let step = (hi - lo) / m as f64;
    let (mut plain, mut moved) = (0.0, 0.0);
    if family == GroupFamily::ScalarReducible {
        for i in 0..=m {
            let a = lo + i as f64 * step;
            if a <= 0.0 {
                continue;
            }
            let h = DilationParams::new(family, a, 0.0).unwrap();
            let d = h.haar_density();
            plain += haar_test_function(family, &h) * d;
            moved += haar_test_function(family, &h0.compose(&h).unwrap()) * d;
        }
    } else {
        for i in 0..=m {
            let a = lo + i as f64 * step;
            for j in 0..=m {
                let b = lo + j as f64 * step;
                let Ok(h) = DilationParams::new(family, a, b) else {
                    continue;
                };
                if h.abs_det() == 0.0 {
                    continue;
                }
                let d = h.haar_density();
                plain += haar_test_function(family, &h) * d;
                moved += haar_test_function(family, &h0.compose(&h).unwrap()) * d;
            }
        }
    }
    ((moved - plain) / plain).abs()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let trials = 1000;
    for k in 0..trials {
        let family = ALL[k % ALL.len()];
        let (h1, h2, h3) = (
            random_element(family, &mut rng, 2.0),
            random_element(family, &mut rng, 2.0),
            random_element(family, &mut rng, 2.0),
        );
        let c = h1.compose(&h2).unwrap();
        worst = worst.max(rel_gap(&c.matrix(), &h1.matrix().mul(&h2.matrix())));
        let l = c.compose(&h3).unwrap();
        let r = h1.compose(&h2.compose(&h3).unwrap()).unwrap();
        worst = worst.max(rel_gap(&l.matrix(), &r.matrix()));
        worst = worst.max(rel_gap(&h1.invert().matrix(), &h1.matrix().inverse().unwrap()));
        let id = h1.compose(&h1.invert()).unwrap().matrix();
        worst = worst.max(id.max_abs_diff(&Mat2([[1.0, 0.0], [0.0, 1.0]])));
        let det = c.determinant();
        worst = worst.max((det - h1.determinant() * h2.determinant()).abs() / det.abs());
    }
    let algebra_ok = worst <= 1e-12;

    let mut haar_worst = 0.0f64;
    for family in ALL {
        for _ in 0..2 {
            let h0 = random_element(family, &mut rng, 0.5);
            haar_worst = haar_worst.max(haar_invariance_gap(family, &h0));
        }
    }
    let haar_ok = haar_worst <= 1e-3;
    Outcome::new(
        algebra_ok && haar_ok,
        format!("{trials} random checks, worst relative gap {worst:.2e} (<= 1e-12); Haar left invariance worst {haar_worst:.2e} (<= 1e-3)"),
    )
}

// ------------------------------------------------------------------ 2

/// Golden-section minimum of a convex function on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-14 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Distance to the orbit complement from sampled complement pieces,
/// polished by golden section around the best sample.
fn brute_force_distance(family: GroupFamily, xi: [f64; 2], samples: usize) -> f64 {
    let pieces: Vec<fn(f64) -> [f64; 2]> = match family {
        GroupFamily::Similitude => return xi[0].hypot(xi[1]),
        GroupFamily::Diagonal => vec![|t| [0.0, t], |t| [t, 0.0]],
        _ => vec![|t| [0.0, t]],
    };
    let (lo, hi) = (-2.0, 2.0);
    let step = (hi - lo) / (samples - 1) as f64;
    let mut best = f64::INFINITY;
    for piece in pieces {
        let d = |t: f64| {
            let p = piece(t);
            (xi[0] - p[0]).hypot(xi[1] - p[1])
        };
        let k = (0..samples)
            .min_by(|&i, &j| d(lo + i as f64 * step).total_cmp(&d(lo + j as f64 * step)))
            .unwrap();
        let a = lo + k.saturating_sub(1) as f64 * step;
        let b = lo + (k + 1).min(samples - 1) as f64 * step;
        best = best.min(golden_min(d, a, b));
    }
    best
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut dist_gap = 0.0f64;
    let (mut a_bad, mut ratio_bad, mut points) = (0usize, 0usize, 0usize);
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for family in ADMISSIBLE {
        for _ in 0..1000 {
            let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let d = orbit::dist_complement(family, xi).unwrap();
            dist_gap = dist_gap.max((d - brute_force_distance(family, xi, 10_000)).abs());
        }
        for _ in 0..10_000 {
            let xi = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            if !orbit::in_orbit(family, xi).unwrap() {
                continue;
            }
            points += 1;
            let a = orbit::aux_a(family, xi).unwrap();
            if !(a > 0.0 && a <= 1.0) {
                a_bad += 1;
            }
            let r = orbit::aux_a_closed(family, xi).unwrap() / a;
            rmin = rmin.min(r);
            rmax = rmax.max(r);
            if !(0.5..=2.0).contains(&r) {
                ratio_bad += 1;
            }
        }
    }
    let ok = dist_gap <= 1e-6 && a_bad == 0 && ratio_bad == 0;
    Outcome::new(
        ok,
        format!(
            "dist vs brute force max gap {dist_gap:.2e} (<= 1e-6); A outside (0,1] on {a_bad}/{points} points; closed/generic ratio in [{rmin:.3}, {rmax:.3}]"
        ),
    )
}

// ------------------------------------------------------------------ 3

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, wavelet) in [("bump", None), ("moment", Some(WaveletSpec::moment(2)))] {
        let cfg = CalderonConfig {
            family: SHEARLET,
            wavelet,
            ..CalderonConfig::default()
        };
        match run_calderon(&cfg) {
            Ok(r) => {
                ok &= r.passed();
                parts.push(format!(
                    "{label}: rel_std {:.2e} (< 0.05), parseval deviation {:.2e} (< 0.03)",
                    r.results.stats.rel_std, r.results.parseval_deviation
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{label}: error {e}"));
            }
        }
    }
    Outcome::new(ok, parts.join("; "))
}

// ------------------------------------------------------------------ 4

fn envelope_max(family: GroupFamily, order: u32, grid: FrequencyGrid) -> f64 {
    let psi = AnalyticWavelet::normalized(family, WaveletSpec::moment(order), grid).unwrap();
    let mut m = 0.0f64;
    for i in 0..grid.len() {
        let xi = grid.point(i);
        if !orbit::in_orbit(family, xi).unwrap() {
            continue;
        }
        let a = orbit::aux_a(family, xi).unwrap();
        m = m.max(psi.value(xi).abs() / a.powi(order as i32));
    }
    m
}

fn criterion_4() -> Outcome {
    let coarse = FrequencyGrid::new(128, 8.0).unwrap();
    let fine = coarse.refined();
    let mut ok = true;
    let (mut worst_change, mut worst_slope) = (0.0f64, 0.0f64);
    for family in ADMISSIBLE {
        // Similitude: P = |xi|^2 vanishes to second order at the origin.
        let per_order = if family == GroupFamily::Similitude { 2.0 } else { 1.0 };
        for order in 1..=3u32 {
            let (m1, m2) = (envelope_max(family, order, coarse), envelope_max(family, order, fine));
            let change = (m2 / m1 - 1.0).abs();
            ok &= m1.is_finite() && m2.is_finite() && change < 0.2;
            worst_change = worst_change.max(change);
            let field = AnalyticWavelet::normalized(family, WaveletSpec::moment(order), fine)
                .unwrap()
                .sample(fine);
            let slope = moment_slope(&field, family).ok().and_then(|m| m.slope());
            let err = slope.map_or(f64::INFINITY, |s| (s - per_order * order as f64).abs());
            ok &= err <= 0.2;
            worst_slope = worst_slope.max(err);
        }
    }
    Outcome::new(
        ok,
        format!("grid max of |psi|/A^s changes at most {worst_change:.3} under refinement (< 0.2); slope error at most {worst_slope:.3} (<= 0.2)"),
    )
}

// ------------------------------------------------------------------ 5

fn criterion_5() -> Outcome {
    match run_decay_suite(&DecayConfig::default()) {
        Ok(r) => Outcome::new(
            r.passed(),
            format!(
                "{} instances, ratio in [{:.3e}, {:.3e}], spread {:.3} (<= 10)",
                r.results.instances.len(),
                r.results.min_ratio,
                r.results.max_ratio,
                r.results.spread
            ),
        ),
        Err(e) => Outcome::new(false, format!("error {e}")),
    }
}

// ------------------------------------------------------------------ 6

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for family in ADMISSIBLE {
        for q in [1.0, 2.0] {
            let cfg = EmbeddingConfig {
                family,
                q,
                s: 0.0,
                weight: HWeight::for_family(family, 0.0),
                levels: 6,
                ..EmbeddingConfig::default()
            };
            match run_embeddedness(&cfg) {
                Ok(r) => {
                    let ell = r.results.minimal_ell;
                    ok &= ell.is_some();
                    parts.push(format!(
                        "{} q={q}: l={}",
                        family.name(),
                        ell.map_or("none".into(), |l| l.to_string())
                    ));
                    if family == GroupFamily::Similitude {
                        let zero = r.results.per_ell.iter().find(|e| e.ell == 0);
                        let diverged = zero.is_some_and(|e| !e.condition_ii.converged());
                        ok &= diverged;
                        if !diverged {
                            parts.push(format!("similitude l=0 {:?} not diverged", Condition::II));
                        }
                    }
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("{} q={q}: error {e}", family.name()));
                }
            }
        }
    }
    Outcome::new(ok, parts.join(", "))
}

// ------------------------------------------------------------------ 7

fn criterion_7() -> Outcome {
    match run_frame(&FrameConfig::default()) {
        Ok(r) => {
            let osc = r
                .results
                .u_search
                .as_ref()
                .and_then(|u| u.steps.last())
                .map_or(f64::INFINITY, |s| s.1);
            let worst = r.results.reconstructions.iter().map(|x| x.rel_error).fold(0.0, f64::max);
            let iters = r.results.reconstructions.iter().map(|x| x.iterations).max().unwrap_or(0);
            Outcome::new(
                r.passed(),
                format!(
                    "oscillation {osc:.3} (< 1); equivalence spread {:.3} (<= 10); reconstruction error {worst:.2e} (< 1e-3) in at most {iters} iterations (<= 200); {}",
                    r.results.equivalence_spread,
                    failed_checks(&r.checks)
                ),
            )
        }
        Err(e) => Outcome::new(false, format!("error {e}")),
    }
}

// ------------------------------------------------------------------ 8

fn criterion_8() -> Outcome {
    match run_counterexample(&CounterexampleConfig::default()) {
        Ok(r) => {
            let gap = r.results.grids.iter().map(|g| g.max_identity_gap).fold(0.0, f64::max);
            let growth: Vec<String> = r
                .results
                .grids
                .iter()
                .map(|g| {
                    let c = g.scales.iter().map(|s| s.mixed.relative_growth).fold(f64::INFINITY, f64::min);
                    format!("n={} growth {c:.3}", g.n)
                })
                .collect();
            Outcome::new(
                r.passed(),
                format!(
                    "identity gap {gap:.2e} (< 1e-10); {}; {}",
                    growth.join(", "),
                    failed_checks(&r.checks)
                ),
            )
        }
        Err(e) => Outcome::new(false, format!("error {e}")),
    }
}

// ------------------------------------------------------------------ 9

/// `(1 + |x| + |h^-1 x| + ||h^-1|| + ||h||)^s`, symmetric and submultiplicative.
fn symmetric_weight(s: f64, x: [f64; 2], h: &DilationParams) -> f64 {
    let hinv = h.invert();
    let y = hinv.matrix().apply(x);
    (1.0 + x[0].hypot(x[1]) + y[0].hypot(y[1]) + hinv.op_norm() + h.op_norm()).powf(s)
}

/// `||W_phi f||` in `L^{2,2}` with the symmetric weight of order `s`.
fn weighted_transform_norm(f: &SampledField, phi: &(impl coorbit::grid::FrequencyWindow + ?Sized), hgrid: &HGrid, s: f64) -> f64 {
    let grid = f.grid;
    let cell = grid.x_cell_area();
    let per = map_slices(f, phi, hgrid, |k, slice| {
        let Some(slice) = slice else { return 0.0 };
        let h = &hgrid.nodes[k];
        let e: f64 = slice
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm_sqr() * symmetric_weight(s, grid.x_point(i), h).powi(2))
            .sum();
        e * cell * hgrid.weights[k] / h.abs_det()
    })
    .unwrap();
    per.iter().sum::<f64>().sqrt()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = WeightSpec::new(1.0, HWeight::Unit).unwrap();
    let (mut sym_gap, mut v_min) = (0.0f64, f64::INFINITY);
    for k in 0..1000 {
        let family = ADMISSIBLE[k % 3];
        let (p, q) = (rng.gen_range(1.0..4.0), rng.gen_range(1.0..4.0));
        let z = AffinePoint::new(
            [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
            random_element(family, &mut rng, 2.0),
        );
        let v = control_weight_v2(&spec, p, q, &z).unwrap();
        let back = control_weight_v2(&spec, p, q, &z.invert()).unwrap() / z.modular();
        sym_gap = sym_gap.max((v - back).abs() / v);
        v_min = v_min.min(v);
    }

    let family = SHEARLET;
    let grid = FrequencyGrid::new(128, 8.0).unwrap();
    let psi = AnalyticWavelet::normalized(family, WaveletSpec::default_bump(family).unwrap(), grid).unwrap();
    let hgrid = HGrid::new(family, HGridSpec::default()).unwrap();
    let region = FrequencyBall::default_for(family).unwrap();
    let (mut worst_bound, mut worst_identity) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let f = random_test_function(grid, region, 3, 1.0, &mut rng);
        let z = AffinePoint::new(
            [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
            random_element(family, &mut rng, 0.5),
        );
        // R_z W_psi f = W_{pi(z) psi} f
        let moved = RepresentedWindow::new(&psi, z);
        let dg = z.h.modular_g();
        let lhs = weighted_transform_norm(&f, &moved, &hgrid, 1.0);
        let rhs = dg.powf(-0.5) * symmetric_weight(1.0, z.x, &z.h) * weighted_transform_norm(&f, &psi, &hgrid, 1.0);
        worst_bound = worst_bound.max(lhs / rhs);
        // unweighted: right translation scales the norm by exactly dg^{-1/2}
        let plain = weighted_transform_norm(&f, &moved, &hgrid, 0.0)
            / (dg.powf(-0.5) * weighted_transform_norm(&f, &psi, &hgrid, 0.0));
        worst_identity = worst_identity.max((plain - 1.0).abs());
    }
    let ok = sym_gap <= 1e-10 && v_min >= 1.0 && worst_bound <= 1.0;
    Outcome::new(
        ok,
        format!(
            "symmetry gap {sym_gap:.2e} (<= 1e-10); min v2 {v_min:.3} (>= 1); translation bound ratio at most {worst_bound:.3} (<= 1); unweighted isometry defect {worst_identity:.2e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("group algebra", criterion_1),
        ("orbit geometry", criterion_2),
        ("admissibility", criterion_3),
        ("envelope", criterion_4),
        ("decay bound", criterion_5),
        ("temperate embeddedness", criterion_6),
        ("frame discretization", criterion_7),
        ("counterexample", criterion_8),
        ("control weights", criterion_9),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        if !out.passed {
            failures += 1;
        }
        println!(
            "{tag} criterion {} ({name}): {} [{:.1} s]",
            k + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
