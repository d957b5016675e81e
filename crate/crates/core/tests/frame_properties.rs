use coorbit::cwt::HGrid;
use coorbit::frame::{
    atom_inner, build_sampling_set, frame_bounds, reconstruct_with, search_u, CoeffArray, FrameOperator,
    ReconstructionConfig, SamplingParams, SamplingSet, SamplingWindow, UParams,
};
use coorbit::grid::FrequencyGrid;
use coorbit::group::GroupFamily;
use coorbit::norms::{HWeight, WeightSpec};
use coorbit::wavelet::{random_test_function, AnalyticWavelet, WaveletSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shearlet() -> GroupFamily {
    GroupFamily::shearlet(0.5).unwrap()
}

fn setup(family: GroupFamily, n: usize, params: SamplingParams) -> (FrequencyGrid, AnalyticWavelet, SamplingSet) {
    let grid = FrequencyGrid::new(n, 8.0).unwrap();
    let psi = AnalyticWavelet::normalized(family, WaveletSpec::default_bump(family).unwrap(), grid).unwrap();
    let window = SamplingWindow::default_for(family).unwrap();
    let z = build_sampling_set(family, params, window, grid).unwrap();
    (grid, psi, z)
}

fn unit(len: usize, i: usize) -> CoeffArray {
    let mut c = CoeffArray::zeros(len);
    c.values[i] = Complex64::new(1.0, 0.0);
    c
}

fn field_inner(a: &coorbit::grid::SampledField, b: &coorbit::grid::SampledField) -> Complex64 {
    let (a, b) = (a.to_frequency(), b.to_frequency());
    let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).sum();
    s * a.grid.cell_area()
}

#[test]
fn gram_columns_match_direct_inner_products() {
    let (grid, psi, z) = setup(shearlet(), 64, SamplingParams::default());
    let op = FrameOperator::new(&z, &psi);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let j = rng.gen_range(0..z.len());
        let atom = op.synthesize(&unit(z.len(), j)).unwrap();
        let col = op.analyze(&atom).unwrap();
        for _ in 0..20 {
            let i = rng.gen_range(0..z.len());
            let direct = atom_inner(&psi, &grid, &z.point(j), &z.point(i));
            assert!((col.values[i] - direct).norm() < 1e-8, "G[{i},{j}] {} vs {}", col.values[i], direct);
        }
    }
}

#[test]
fn gram_is_hermitian() {
    let (_, psi, z) = setup(shearlet(), 64, SamplingParams::default());
    let op = FrameOperator::new(&z, &psi);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let i = rng.gen_range(0..z.len());
        let j = rng.gen_range(0..z.len());
        let gi = op.analyze(&op.synthesize(&unit(z.len(), i)).unwrap()).unwrap();
        let gj = op.analyze(&op.synthesize(&unit(z.len(), j)).unwrap()).unwrap();
        assert!((gi.values[j] - gj.values[i].conj()).norm() < 1e-12);
    }
}

#[test]
fn analysis_and_synthesis_are_adjoint_and_linear() {
    let family = shearlet();
    let (grid, psi, z) = setup(family, 64, SamplingParams::default());
    let op = FrameOperator::new(&z, &psi);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_test_function(grid, z.window.region, 3, 1.0, &mut rng);
    let g = random_test_function(grid, z.window.region, 3, 1.0, &mut rng);
    let mut c = CoeffArray::zeros(z.len());
    for v in c.values.iter_mut() {
        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let af = op.analyze(&f).unwrap();
    let lhs: Complex64 = af.values.iter().zip(&c.values).map(|(a, b)| a * b.conj()).sum();
    let rhs = field_inner(&f, &op.synthesize(&c).unwrap());
    assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()), "{lhs} vs {rhs}");

    let lam = Complex64::new(0.3, -1.2);
    let mut combo = f.clone();
    combo.add_scaled(&g, lam).unwrap();
    let ac = op.analyze(&combo).unwrap();
    let ag = op.analyze(&g).unwrap();
    for k in 0..z.len() {
        let expect = af.values[k] + lam * ag.values[k];
        assert!((ac.values[k] - expect).norm() < 1e-12);
    }
}

#[test]
fn refining_beta_halves_translation_radius() {
    let family = shearlet();
    let base = SamplingParams::default();
    let finer = SamplingParams {
        beta: base.beta / 2.0,
        ..base
    };
    let (_, _, z1) = setup(family, 128, base);
    let (_, _, z2) = setup(family, 128, finer);
    let r = z2.density.required.x_radius / z1.density.required.x_radius;
    assert!((r - 0.5).abs() < 0.1, "ratio {r}");
}

#[test]
fn coarse_mesh_is_not_dense_for_small_neighborhoods() {
    let coarse = SamplingParams {
        a_ratio: 4.0,
        b_step: 1.0,
        beta: 4.0,
    };
    let (_, _, z) = setup(shearlet(), 128, coarse);
    let small = UParams {
        x_radius: 0.5,
        chart_radius: 0.25,
    };
    assert!(!z.density.is_dense_for(&small), "{:?}", z.density.required);
    let (_, _, fine) = setup(shearlet(), 128, SamplingParams::default().refined().refined());
    assert!(fine.density.is_dense_for(&fine.density.required));
    assert!(fine.density.required.x_radius < z.density.required.x_radius);
}

#[test]
fn reconstruction_error_decreases_monotonically() {
    let family = shearlet();
    let (grid, psi, z) = setup(family, 128, SamplingParams::default().refined());
    let op = FrameOperator::new(&z, &psi);
    let bounds = frame_bounds(&op, &z.window.region, 20, 0).unwrap();
    assert!(bounds.condition() < 1e3, "{bounds:?}");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = random_test_function(grid, z.window.region, 3, 1.0, &mut rng);
    let c = op.analyze(&f).unwrap();
    let cfg = ReconstructionConfig {
        max_iter: 60,
        tol: 1e-12,
        ..ReconstructionConfig::default()
    };
    let r = reconstruct_with(&op, &c, Some(&f), bounds, &cfg).unwrap();
    for w in r.history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9), "{:?}", r.history);
    }
    assert!(r.rel_error < r.history[0]);
}

#[test]
fn bandlimited_functions_are_recovered() {
    let family = shearlet();
    let (grid, psi, z) = setup(family, 128, SamplingParams::default().refined());
    let op = FrameOperator::new(&z, &psi);
    let bounds = frame_bounds(&op, &z.window.region, 20, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = random_test_function(grid, z.window.region, 3, 1.0, &mut rng);
    let c = op.analyze(&f).unwrap();
    let cfg = ReconstructionConfig {
        max_iter: 2000,
        tol: 1e-6,
        ..ReconstructionConfig::default()
    };
    let r = reconstruct_with(&op, &c, Some(&f), bounds, &cfg).unwrap();
    assert!(r.rel_error < 1e-6, "{} after {}", r.rel_error, r.iterations);
}

#[test]
fn oscillation_search_decreases() {
    let family = shearlet();
    let grid = FrequencyGrid::new(64, 8.0).unwrap();
    let psi = AnalyticWavelet::normalized(family, WaveletSpec::default_bump(family).unwrap(), grid).unwrap();
    let spec = coorbit::cwt::HGridSpec {
        a_min: 0.25,
        a_max: 4.0,
        n_a: 9,
        b_max: 2.0,
        n_b: 9,
    };
    let hgrid = HGrid::new(family, spec).unwrap();
    let w = WeightSpec::new(0.0, HWeight::Unit).unwrap();
    let start = UParams {
        x_radius: 1.0,
        chart_radius: 0.5,
    };
    let s = search_u(&psi, grid, &hgrid, start, &w, 2.0, 2.0, 12).unwrap();
    assert!(s.found.is_some());
    for w in s.steps.windows(2) {
        assert!(w[1].1 < w[0].1, "{:?}", s.steps);
        assert!(w[0].0.contains(&w[1].0));
    }
    assert!(s.steps.last().unwrap().1 < 1.0);
}
