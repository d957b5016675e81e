use std::f64::consts::PI;

use coorbit::cwt::{self, HGrid, HGridSpec, RepresentedWindow, TransformArray};
use coorbit::grid::{Domain, FrequencyGrid, FrequencyWindow, SampledField};
use coorbit::group::{AffinePoint, DilationParams, GroupFamily, Vec2};
use coorbit::wavelet::{self, AnalyticWavelet, FrequencyBall, RadialProfile, WaveletSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SH: GroupFamily = GroupFamily::Shearlet { c: 0.5 };
const FAMILIES: [GroupFamily; 3] = [SH, GroupFamily::Similitude, GroupFamily::Diagonal];

fn bump(fam: GroupFamily, g: FrequencyGrid) -> AnalyticWavelet {
    AnalyticWavelet::normalized(fam, WaveletSpec::default_bump(fam).unwrap(), g).unwrap()
}

fn random_f(g: FrequencyGrid, fam: GroupFamily, seed: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = FrequencyBall::default_for(fam).unwrap();
    wavelet::random_test_function(g, region, 3, 0.5, &mut rng)
}

fn g_energy(f: &SampledField, w: &AnalyticWavelet, hg: &HGrid) -> f64 {
    let dx2 = f.grid.x_cell_area();
    cwt::map_slices(f, w, hg, |k, s| {
        s.map_or(0.0, |s| {
            s.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx2 * hg.weights[k] / hg.nodes[k].abs_det()
        })
    })
    .unwrap()
    .iter()
    .sum()
}

#[test]
fn calderon_flat_for_bumps_on_default_grid() {
    let g = FrequencyGrid::new(256, 8.0).unwrap();
    for fam in FAMILIES {
        let hg = HGrid::default_for(fam).unwrap();
        let probes = cwt::default_probes(fam).unwrap();
        let analytic = cwt::calderon_constant(&bump(fam, g), &hg, &probes).unwrap();
        let sampled = cwt::calderon_constant(&bump(fam, g).sample(g), &hg, &probes).unwrap();
        assert!(analytic.rel_std < 0.05 && !analytic.flagged, "{fam}: {analytic:?}");
        assert!(sampled.rel_std < 0.05, "{fam}: {sampled:?}");
    }
}

#[test]
fn undersized_hgrid_is_flagged() {
    let g = FrequencyGrid::new(256, 8.0).unwrap();
    let spec = HGridSpec {
        a_min: 0.5,
        a_max: 0.7,
        ..HGridSpec::default()
    };
    let hg = HGrid::new(SH, spec).unwrap();
    let st = cwt::calderon_constant(&bump(SH, g), &hg, &cwt::default_probes(SH).unwrap()).unwrap();
    assert!(st.flagged, "{st:?}");
}

#[test]
fn radial_similitude_calderon_is_two_pi() {
    let p = RadialProfile::new(0.5, 2.0).unwrap();
    // independent check of the radial normalization
    let n = 200_000;
    let h = (2.0 - 0.5) / n as f64;
    let integral: f64 = (0..n)
        .map(|i| {
            let s = 0.5 + (i as f64 + 0.5) * h;
            p.value(s).powi(2) / s * h
        })
        .sum();
    assert!((integral - 1.0).abs() < 1e-6);
    let w = move |xi: Vec2| Complex64::new(p.value(xi[0].hypot(xi[1])), 0.0);
    let hg = HGrid::new(GroupFamily::Similitude, HGridSpec { n_a: 65, ..HGridSpec::default() }).unwrap();
    for xi in [[1.0, 0.0], [0.3, -0.7], [2.0, 2.0], [-1.5, 0.1]] {
        let v = cwt::calderon_function(&w, xi, &hg).unwrap();
        assert!((v / (2.0 * PI) - 1.0).abs() < 1e-3, "{xi:?}: {v}");
    }
}

#[test]
fn calderon_invariant_along_orbit() {
    let g = FrequencyGrid::new(256, 8.0).unwrap();
    for fam in FAMILIES {
        let hg = HGrid::default_for(fam).unwrap();
        let w = bump(fam, g);
        let xi = [2.0 * orbit_base(fam)[0], 2.0 * orbit_base(fam)[1]];
        for k in [hg.len() / 2 + 1, hg.len() / 3] {
            let moved = hg.nodes[k].dual_action(xi);
            let a = cwt::calderon_function(&w, xi, &hg).unwrap();
            let b = cwt::calderon_function(&w, moved, &hg).unwrap();
            // moved points may leave the region covered by the truncated grid
            if moved[0].hypot(moved[1]) < 4.0 && moved[0].hypot(moved[1]) > 0.5 {
                assert!((a - b).abs() / a < 0.05, "{fam}: {a} vs {b} at {moved:?}");
            }
        }
    }
}

fn orbit_base(fam: GroupFamily) -> Vec2 {
    coorbit::orbit::base_point(fam).unwrap()
}

#[test]
fn parseval_matches_calderon_mean() {
    let g = FrequencyGrid::new(128, 8.0).unwrap();
    for fam in FAMILIES {
        let w = bump(fam, g);
        let hg = HGrid::default_for(fam).unwrap();
        let st = cwt::calderon_constant(&w, &hg, &cwt::default_probes(fam).unwrap()).unwrap();
        for seed in 0..3 {
            let f = random_f(g, fam, seed);
            let ratio = g_energy(&f, &w, &hg) / f.l2_norm().powi(2);
            assert!((ratio / st.mean - 1.0).abs() < 0.03, "{fam}: {ratio} vs {}", st.mean);
        }
    }
}

#[test]
fn synthesis_of_analysis_recovers_scaled_input() {
    let g = FrequencyGrid::new(64, 8.0).unwrap();
    let fam = SH;
    let w = bump(fam, g);
    let hg = HGrid::default_for(fam).unwrap();
    let st = cwt::calderon_constant(&w, &hg, &cwt::default_probes(fam).unwrap()).unwrap();
    let f = random_f(g, fam, 11);
    let t = cwt::analyze_window(&f, &w, &hg).unwrap();
    let back = cwt::synthesize(&t, &w).unwrap();
    let err = back
        .scaled(Complex64::new(1.0 / st.mean, 0.0))
        .rel_l2_error(&f)
        .unwrap();
    assert!(err < 0.02, "{err}");
}

#[test]
fn identity_node_coefficient_and_single_atom() {
    let g = FrequencyGrid::new(64, 8.0).unwrap();
    let psi = bump(SH, g).sample(g);
    let hg = HGrid::from_nodes(SH, vec![SH.identity()], vec![1.0]).unwrap();
    let t = cwt::analyze(&psi, &psi, &hg).unwrap();
    let center = (g.n / 2) * g.n + g.n / 2;
    assert!((t.value(0, center) - 1.0).norm() < 1e-12);

    let (j1, j2) = (g.n / 2 + 3, g.n / 2 - 5);
    let mut slice = vec![Complex64::new(0.0, 0.0); g.len()];
    slice[j1 * g.n + j2] = Complex64::new(1.0, 0.0);
    let t = TransformArray::new(g, hg, vec![Some(slice)]).unwrap();
    let out = cwt::synthesize(&t, &psi).unwrap();
    let x0 = [g.x_coord(j1), g.x_coord(j2)];
    let atom = RepresentedWindow::new(&psi, AffinePoint::new(x0, SH.identity()));
    let expect = SampledField::from_window(g, &atom).scaled(Complex64::new(g.x_cell_area(), 0.0));
    assert!(out.rel_l2_error(&expect).unwrap() < 1e-12);
}

#[test]
fn covariance_on_grid_aligned_elements() {
    let g = FrequencyGrid::new(64, 8.0).unwrap();
    let w = bump(SH, g);
    let f = random_f(g, SH, 5);
    let dx = g.x_spacing();
    let y = [3.0 * dx, -2.0 * dx];
    let gel = DilationParams::new(SH, 1.0, 1.0).unwrap();
    let moved = SampledField::from_window(g, &RepresentedWindow::new(&f, AffinePoint::new(y, gel)));
    let dft = coorbit::grid::Dft2::new(g);
    let n = g.n as i64;
    for (a, b) in [(0.5, 0.7), (0.5, 0.5), (0.6, 0.8)] {
        let h = DilationParams::new(SH, a, b).unwrap();
        let lhs = cwt::analyze_slice(&moved, &w, &h, &dft).unwrap();
        let back = gel.invert().compose(&h).unwrap();
        let rhs = cwt::analyze_slice(&f, &w, &back, &dft).unwrap();
        let scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for j1 in 0..n {
            for j2 in 0..n {
                // g^{-1}(x - y) with g^{-1} = [[1, -1], [0, 1]] in index units
                let (u1, u2) = (j1 - n / 2 - 3, j2 - n / 2 + 2);
                let (v1, v2) = (u1 - u2, u2);
                let (k1, k2) = ((v1 + n / 2).rem_euclid(n), (v2 + n / 2).rem_euclid(n));
                let a = lhs[(j1 * n + j2) as usize];
                let b = rhs[(k1 * n + k2) as usize];
                worst = worst.max((a - b).norm());
            }
        }
        assert!(worst / scale < 1e-6, "{worst} / {scale}");
    }
}

#[test]
fn similitude_rotation_covariance_for_radial_wavelet() {
    let g = FrequencyGrid::new(64, 8.0).unwrap();
    let fam = GroupFamily::Similitude;
    let w = AnalyticWavelet::normalized(fam, WaveletSpec::moment(1), g).unwrap();
    let f = random_f(g, fam, 3);
    let n = g.n;
    // f rotated by a quarter turn: f'(xi) = f(R xi), R (xi1, xi2) = (-xi2, xi1)
    let rotated = SampledField::from_window(g, &|xi: Vec2| f.sample_bilinear([-xi[1], xi[0]]));
    let dft = coorbit::grid::Dft2::new(g);
    let h = DilationParams::new(fam, 0.8, 0.0).unwrap();
    let a = cwt::analyze_slice(&rotated, &w, &h, &dft).unwrap();
    let b = cwt::analyze_slice(&f, &w, &h, &dft).unwrap();
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for j1 in 1..n {
        for j2 in 1..n {
            // W f'(x) = W f(R x)
            let (k1, k2) = (n - j2, j1);
            assert!((a[j1 * n + j2] - b[k1 * n + k2]).norm() < 1e-9 * scale);
        }
    }
}

#[test]
fn analyze_is_linear_and_synthesize_is_adjoint() {
    let g = FrequencyGrid::new(32, 4.0).unwrap();
    let hg = HGrid::new(SH, HGridSpec { n_a: 5, n_b: 3, ..HGridSpec::default() }).unwrap();
    let w = AnalyticWavelet::normalized(SH, WaveletSpec::moment(2), g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut rand_field = |dom| {
        let vals = (0..g.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SampledField::new(g, vals, dom).unwrap()
    };
    let f1 = rand_field(Domain::Frequency);
    let f2 = rand_field(Domain::Frequency);
    let lam = Complex64::new(0.3, -1.7);
    let mut comb = f1.clone();
    comb.add_scaled(&f2, lam).unwrap();
    let t1 = cwt::analyze_window(&f1, &w, &hg).unwrap();
    let t2 = cwt::analyze_window(&f2, &w, &hg).unwrap();
    let tc = cwt::analyze_window(&comb, &w, &hg).unwrap();
    for k in 0..hg.len() {
        for i in 0..g.len() {
            let expect = t1.value(k, i) + t2.value(k, i) * lam;
            assert!((tc.value(k, i) - expect).norm() < 1e-12 * (1.0 + expect.norm()));
        }
    }
    // conjugate-linear in the wavelet
    let w2 = |xi: Vec2| w.eval(xi) * lam;
    let tw = cwt::analyze_window(&f1, &w2, &hg).unwrap();
    for k in 0..hg.len() {
        for i in (0..g.len()).step_by(7) {
            let expect = t1.value(k, i) * lam.conj();
            assert!((tw.value(k, i) - expect).norm() < 1e-12 * (1.0 + expect.norm()));
        }
    }
    let slices = (0..hg.len())
        .map(|_| Some(rand_field(Domain::Space).values))
        .collect();
    let t = TransformArray::new(g, hg.clone(), slices).unwrap();
    let lhs = t1.inner(&t).unwrap();
    let rhs = f1.inner(&cwt::synthesize(&t, &w).unwrap()).unwrap();
    assert!((lhs - rhs).norm() < 1e-8 * lhs.norm(), "{lhs} vs {rhs}");
}

#[test]
fn transform_scaling_is_exact() {
    let g = FrequencyGrid::new(32, 4.0).unwrap();
    let hg = HGrid::new(SH, HGridSpec { n_a: 5, n_b: 3, ..HGridSpec::default() }).unwrap();
    let w = bump(SH, g);
    let t = cwt::analyze_window(&w.sample(g), &w, &hg).unwrap();
    let s = t.scaled(Complex64::new(-2.5, 0.0));
    assert!((s.l2_norm() - 2.5 * t.l2_norm()).abs() < 1e-12 * t.l2_norm());
}
