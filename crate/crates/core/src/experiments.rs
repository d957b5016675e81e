//! Experiment drivers behind the command-line tool. Each driver takes a
//! serializable config and returns a [`Report`] that embeds the resolved
//! config, the numeric results and a list of pass/fail checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cwt::{self, analyze_slice, map_slices, CalderonStats, HGrid, HGridSpec, RepresentedWindow};
use crate::embed::{embeddedness_verdict, EmbeddingParams, EmbeddingReport};
use crate::error::{invalid, CoorbitError, Result};
use crate::frame::{
    self, build_sampling_set, frame_bounds, reconstruct_with, search_u, FrameBounds, FrameOperator,
    ReconstructionConfig, SamplingParams, SamplingSummary, SamplingWindow, UParams, USearch,
};
use crate::grid::{Centering, Dft2, Domain, FrequencyGrid, FrequencyWindow, SampledField};
use crate::group::{AffinePoint, DilationParams, GroupFamily, Vec2};
use crate::norms::{decay_ratio, mixed_norm, mixed_norm_streaming, HWeight, MixedNormParams, WeightSpec};
use crate::wavelet::{counterexample_windows, random_test_function, spectral_edge_fraction, AnalyticWavelet, FrequencyBall, WaveletSpec};

/// Failure category of a check; doubles as the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckCategory {
    Admissibility,
    Embeddedness,
    Decay,
    Frame,
    Counterexample,
}

impl CheckCategory {
    pub fn exit_code(&self) -> i32 {
        match self {
            CheckCategory::Admissibility => 10,
            CheckCategory::Embeddedness => 11,
            CheckCategory::Decay => 12,
            CheckCategory::Frame => 13,
            CheckCategory::Counterexample => 14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub category: CheckCategory,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    /// Passes when `value < threshold`.
    fn below(name: &str, category: CheckCategory, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            category,
            passed: value < threshold,
            value,
            threshold,
        }
    }

    /// Passes when `value <= threshold`.
    fn at_most(name: &str, category: CheckCategory, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            category,
            passed: value <= threshold,
            value,
            threshold,
        }
    }

    /// Passes when `value > threshold`.
    fn above(name: &str, category: CheckCategory, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            category,
            passed: value > threshold,
            value,
            threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<C, R> {
    pub command: String,
    pub config: C,
    pub results: R,
    pub checks: Vec<Check>,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passes, otherwise the code of the first failure.
    pub fn exit_code(&self) -> i32 {
        self.checks
            .iter()
            .find(|c| !c.passed)
            .map_or(0, |c| c.category.exit_code())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn checks_csv(&self) -> String {
        let mut s = String::from("name,category,passed,value,threshold\n");
        for c in &self.checks {
            s += &format!(
                "{},{},{},{},{}\n",
                c.name,
                serde_json::to_value(c.category).unwrap().as_str().unwrap_or(""),
                c.passed,
                c.value,
                c.threshold
            );
        }
        s
    }
}

/// Named CSV tables of a result set.
pub trait CsvTables {
    fn tables(&self) -> Vec<(String, String)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub n: usize,
    pub xi_max: f64,
    pub centering: Centering,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 256,
            xi_max: 8.0,
            centering: Centering::Node,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::with_centering(self.n, self.xi_max, self.centering)
    }
}

fn default_wavelet(family: GroupFamily, spec: Option<WaveletSpec>, grid: FrequencyGrid) -> Result<AnalyticWavelet> {
    let spec = match spec {
        Some(s) => s,
        None => WaveletSpec::default_bump(family)?,
    };
    AnalyticWavelet::normalized(family, spec, grid)
}

fn l2_energy(slice: Option<&[Complex64]>, cell: f64) -> f64 {
    slice.map_or(0.0, |s| s.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell)
}

/// `||W_psi f||^2_{L^2(G)}` by streaming.
fn transform_energy(f: &SampledField, psi: &(impl FrequencyWindow + ?Sized), hgrid: &HGrid) -> Result<f64> {
    let cell = f.grid.x_cell_area();
    let per = map_slices(f, psi, hgrid, |k, s| {
        l2_energy(s, cell) * hgrid.weights[k] / hgrid.nodes[k].abs_det()
    })?;
    Ok(per.iter().sum())
}

// ---------------------------------------------------------------- calderon

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalderonConfig {
    pub family: GroupFamily,
    pub wavelet: Option<WaveletSpec>,
    pub grid: GridConfig,
    pub hgrid: HGridSpec,
    pub probes: Option<Vec<Vec2>>,
    pub test_functions: usize,
    pub region: Option<FrequencyBall>,
    pub parseval_tol: f64,
    pub seed: u64,
}

impl Default for CalderonConfig {
    fn default() -> Self {
        CalderonConfig {
            family: GroupFamily::Shearlet { c: 0.5 },
            wavelet: None,
            grid: GridConfig::default(),
            hgrid: HGridSpec::default(),
            probes: None,
            test_functions: 10,
            region: None,
            parseval_tol: 0.03,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalderonResults {
    pub wavelet: WaveletSpec,
    pub stats: CalderonStats,
    pub probe_values: Vec<(Vec2, f64)>,
    /// `||W f||^2 / ||f||^2` per test function.
    pub parseval_ratios: Vec<f64>,
    /// `max |ratio / mean - 1|`.
    pub parseval_deviation: f64,
    pub verdict: String,
}

impl CsvTables for CalderonResults {
    fn tables(&self) -> Vec<(String, String)> {
        let mut probes = String::from("xi1,xi2,calderon\n");
        for (xi, v) in &self.probe_values {
            probes += &format!("{},{},{}\n", xi[0], xi[1], v);
        }
        let mut parseval = String::from("index,ratio\n");
        for (i, r) in self.parseval_ratios.iter().enumerate() {
            parseval += &format!("{i},{r}\n");
        }
        vec![("probes".into(), probes), ("parseval".into(), parseval)]
    }
}

pub fn run_calderon(cfg: &CalderonConfig) -> Result<Report<CalderonConfig, CalderonResults>> {
    let grid = cfg.grid.build()?;
    let psi = default_wavelet(cfg.family, cfg.wavelet, grid)?;
    let hgrid = HGrid::new(cfg.family, cfg.hgrid)?;
    let probes = match &cfg.probes {
        Some(p) => p.clone(),
        None => cwt::default_probes(cfg.family)?,
    };
    let stats = cwt::calderon_constant(&psi, &hgrid, &probes)?;
    let probe_values = probes
        .iter()
        .map(|&xi| Ok((xi, cwt::calderon_function(&psi, xi, &hgrid)?)))
        .collect::<Result<Vec<_>>>()?;
    let region = match cfg.region {
        Some(r) => r,
        None => FrequencyBall::default_for(cfg.family)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut parseval_ratios = Vec::with_capacity(cfg.test_functions);
    for _ in 0..cfg.test_functions {
        let f = random_test_function(grid, region, 3, 1.0, &mut rng);
        let e = transform_energy(&f, &psi, &hgrid)?;
        parseval_ratios.push(e / f.l2_norm().powi(2));
    }
    let parseval_deviation = parseval_ratios
        .iter()
        .map(|r| (r / stats.mean - 1.0).abs())
        .fold(0.0, f64::max);
    let mut checks = vec![Check::below(
        "calderon_rel_std",
        CheckCategory::Admissibility,
        stats.rel_std,
        cwt::CALDERON_FLAT_TOL,
    )];
    if !parseval_ratios.is_empty() {
        checks.push(Check::below(
            "parseval_vs_calderon",
            CheckCategory::Admissibility,
            parseval_deviation,
            cfg.parseval_tol,
        ));
    }
    let verdict = if checks.iter().all(|c| c.passed) {
        "admissible"
    } else {
        "not admissible on this grid"
    };
    Ok(Report {
        command: "calderon".into(),
        config: cfg.clone(),
        results: CalderonResults {
            wavelet: psi.spec,
            stats,
            probe_values,
            parseval_ratios,
            parseval_deviation,
            verdict: verdict.into(),
        },
        checks,
    })
}

// ----------------------------------------------------------- embeddedness

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub family: GroupFamily,
    pub s: f64,
    pub q: f64,
    pub weight: HWeight,
    pub ells: Vec<u32>,
    pub levels: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            family: GroupFamily::Shearlet { c: 0.5 },
            s: 0.0,
            q: 2.0,
            weight: HWeight::Unit,
            ells: (0..=16).collect(),
            levels: 6,
        }
    }
}

impl CsvTables for EmbeddingReport {
    fn tables(&self) -> Vec<(String, String)> {
        let mut t = String::from("ell,condition,level,value,converged\n");
        for e in &self.per_ell {
            for (name, verdict, values) in [
                ("i", &e.condition_i, &e.values_i),
                ("ii", &e.condition_ii, &e.values_ii),
            ] {
                for (k, v) in values.iter().enumerate() {
                    t += &format!("{},{},{},{},{}\n", e.ell, name, k + 1, v, verdict.converged());
                }
            }
        }
        vec![("levels".into(), t)]
    }
}

pub fn run_embeddedness(cfg: &EmbeddingConfig) -> Result<Report<EmbeddingConfig, EmbeddingReport>> {
    let params = EmbeddingParams::new(cfg.family, cfg.s, cfg.q, cfg.weight)?;
    let report = embeddedness_verdict(params, &cfg.ells, cfg.levels)?;
    let checks = vec![Check {
        name: "minimal_ell_finite".into(),
        category: CheckCategory::Embeddedness,
        passed: report.minimal_ell.is_some(),
        value: report.minimal_ell.map_or(f64::INFINITY, f64::from),
        threshold: cfg.ells.iter().copied().max().map_or(0.0, f64::from),
    }];
    Ok(Report {
        command: "check-embeddedness".into(),
        config: cfg.clone(),
        results: report,
        checks,
    })
}

// ------------------------------------------------------------------ decay

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContrastConfig {
    pub family: GroupFamily,
    pub order: u32,
    pub weight: HWeight,
    pub gaussian_sigma: f64,
    pub narrow: HGridSpec,
    pub wide: HGridSpec,
    /// Flag when the Gaussian's growth exceeds the baseline's by this factor.
    pub growth_factor: f64,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        ContrastConfig {
            family: GroupFamily::Diagonal,
            order: 3,
            weight: HWeight::Diagonal { t: 2.0, u: 2.0 },
            gaussian_sigma: 2.0,
            narrow: HGridSpec {
                a_min: 1.0 / 8.0,
                a_max: 8.0,
                n_a: 25,
                b_max: 4.0,
                n_b: 25,
            },
            wide: HGridSpec {
                a_min: 1.0 / 32.0,
                a_max: 32.0,
                n_a: 41,
                b_max: 4.0,
                n_b: 41,
            },
            growth_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecayConfig {
    pub family: GroupFamily,
    pub grid: GridConfig,
    pub hgrid: HGridSpec,
    /// Moment order of the analyzing wavelet and of the analyzed atoms.
    pub order: u32,
    pub t: usize,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub weight: HWeight,
    pub instances: usize,
    pub max_shift: f64,
    /// Instances draw `ln|a|` uniformly from `[-log_dilation, log_dilation]`.
    pub log_dilation: f64,
    pub max_shear: f64,
    /// Instances whose spectrum exceeds this fraction of its peak near the
    /// band edge are redrawn.
    pub edge_tol: f64,
    pub cap: f64,
    pub contrast: Option<ContrastConfig>,
    pub seed: u64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            family: GroupFamily::Shearlet { c: 0.5 },
            grid: GridConfig {
                n: 128,
                ..GridConfig::default()
            },
            hgrid: HGridSpec::default(),
            order: 3,
            t: 6,
            p: 2.0,
            q: 2.0,
            s: 0.0,
            weight: HWeight::Unit,
            instances: 20,
            max_shift: 0.25,
            log_dilation: 0.5 * std::f64::consts::LN_2,
            max_shear: 0.25,
            edge_tol: 1e-8,
            cap: 10.0,
            contrast: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayInstance {
    pub point: AffinePoint,
    pub ratio: f64,
    pub mixed_norm: f64,
    pub seminorm_f: f64,
    pub seminorm_psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastResults {
    pub baseline_narrow: f64,
    pub baseline_wide: f64,
    pub gaussian_narrow: f64,
    pub gaussian_wide: f64,
    pub baseline_growth: f64,
    pub gaussian_growth: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayResults {
    pub instances: Vec<DecayInstance>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub spread: f64,
    pub contrast: Option<ContrastResults>,
}

impl CsvTables for DecayResults {
    fn tables(&self) -> Vec<(String, String)> {
        let mut t = String::from("x1,x2,a,b,ratio,mixed_norm,seminorm_f,seminorm_psi\n");
        for i in &self.instances {
            t += &format!(
                "{},{},{},{},{},{},{},{}\n",
                i.point.x[0], i.point.x[1], i.point.h.a, i.point.h.b, i.ratio, i.mixed_norm, i.seminorm_f, i.seminorm_psi
            );
        }
        vec![("instances".into(), t)]
    }
}

/// Random element with the translation on the space grid.
fn random_element<R: Rng>(cfg: &DecayConfig, grid: &FrequencyGrid, rng: &mut R) -> Result<AffinePoint> {
    let dx = grid.x_spacing();
    let steps = (cfg.max_shift / dx).floor() as i64;
    let x = [
        rng.gen_range(-steps..=steps) as f64 * dx,
        rng.gen_range(-steps..=steps) as f64 * dx,
    ];
    let t = if cfg.log_dilation > 0.0 {
        rng.gen_range(-cfg.log_dilation..=cfg.log_dilation)
    } else {
        0.0
    };
    let s = match cfg.family {
        GroupFamily::ScalarReducible => 0.0,
        _ if cfg.max_shear > 0.0 => rng.gen_range(-cfg.max_shear..=cfg.max_shear),
        _ => 0.0,
    };
    let h = frame::from_chart(cfg.family, 0, t, s)?;
    Ok(AffinePoint::new(x, h))
}

const MAX_REDRAWS: usize = 100;

fn weighted_norm_growth(
    f: &SampledField,
    psi: &(impl FrequencyWindow + ?Sized),
    family: GroupFamily,
    params: &MixedNormParams,
    narrow: HGridSpec,
    wide: HGridSpec,
) -> Result<(f64, f64)> {
    let n1 = mixed_norm_streaming(f, psi, &HGrid::new(family, narrow)?, params)?;
    let n2 = mixed_norm_streaming(f, psi, &HGrid::new(family, wide)?, params)?;
    Ok((n1, n2))
}

pub fn run_decay_suite(cfg: &DecayConfig) -> Result<Report<DecayConfig, DecayResults>> {
    let grid = cfg.grid.build()?;
    let psi_w = AnalyticWavelet::normalized(cfg.family, WaveletSpec::moment(cfg.order), grid)?;
    let psi = psi_w.sample(grid);
    let hgrid = HGrid::new(cfg.family, cfg.hgrid)?;
    let params = MixedNormParams::new(cfg.p, cfg.q, WeightSpec::new(cfg.s, cfg.weight)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut instances = Vec::with_capacity(cfg.instances);
    for _ in 0..cfg.instances {
        let mut drawn = None;
        for _ in 0..MAX_REDRAWS {
            let z = random_element(cfg, &grid, &mut rng)?;
            let f = SampledField::from_window(grid, &RepresentedWindow::new(&psi_w, z));
            if spectral_edge_fraction(&f, 0.1) <= cfg.edge_tol {
                drawn = Some((z, f));
                break;
            }
        }
        let (z, f) = drawn.ok_or_else(|| {
            CoorbitError::InsufficientSamples(format!("no grid-representable instance in {MAX_REDRAWS} draws"))
        })?;
        let r = decay_ratio(&f, &psi, &hgrid, &params, cfg.t)?;
        instances.push(DecayInstance {
            point: z,
            ratio: r.ratio,
            mixed_norm: r.mixed_norm,
            seminorm_f: r.seminorm_f,
            seminorm_psi: r.seminorm_psi,
        });
    }
    let min_ratio = instances.iter().map(|i| i.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = instances.iter().map(|i| i.ratio).fold(0.0, f64::max);
    let spread = max_ratio / min_ratio;
    let mut checks = Vec::new();
    if !instances.is_empty() {
        checks.push(Check::at_most("ratio_spread", CheckCategory::Decay, spread, cfg.cap));
    }

    let contrast = match &cfg.contrast {
        None => None,
        Some(c) => {
            let cgrid = grid;
            let cpsi = AnalyticWavelet::normalized(c.family, WaveletSpec::moment(c.order), cgrid)?;
            let cparams = MixedNormParams::new(cfg.p, cfg.q, WeightSpec::new(cfg.s, c.weight)?)?;
            let baseline = cpsi.sample(cgrid);
            let sigma = c.gaussian_sigma;
            let gauss = SampledField::from_fn(cgrid, Domain::Frequency, |xi| {
                Complex64::new((-std::f64::consts::PI * (xi[0] * xi[0] + xi[1] * xi[1]) / (sigma * sigma)).exp(), 0.0)
            });
            let gauss = gauss.scaled(Complex64::new(1.0 / gauss.l2_norm(), 0.0));
            let (b1, b2) = weighted_norm_growth(&baseline, &cpsi, c.family, &cparams, c.narrow, c.wide)?;
            let (g1, g2) = weighted_norm_growth(&gauss, &cpsi, c.family, &cparams, c.narrow, c.wide)?;
            let (bg, gg) = (b2 / b1, g2 / g1);
            let flagged = gg > c.growth_factor * bg;
            checks.push(Check::above(
                "gaussian_contrast_growth",
                CheckCategory::Decay,
                gg / bg,
                c.growth_factor,
            ));
            Some(ContrastResults {
                baseline_narrow: b1,
                baseline_wide: b2,
                gaussian_narrow: g1,
                gaussian_wide: g2,
                baseline_growth: bg,
                gaussian_growth: gg,
                flagged,
            })
        }
    };
    Ok(Report {
        command: "verify-decay".into(),
        config: cfg.clone(),
        results: DecayResults {
            instances,
            min_ratio,
            max_ratio,
            spread,
            contrast,
        },
        checks,
    })
}

// ------------------------------------------------------------------ frame

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OscillationConfig {
    pub grid: GridConfig,
    pub hgrid: HGridSpec,
    pub start: UParams,
    pub max_halvings: usize,
}

impl Default for OscillationConfig {
    fn default() -> Self {
        OscillationConfig {
            grid: GridConfig {
                n: 128,
                ..GridConfig::default()
            },
            hgrid: HGridSpec::default(),
            start: UParams {
                x_radius: 1.0,
                chart_radius: 0.5,
            },
            max_halvings: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameConfig {
    pub family: GroupFamily,
    pub wavelet: Option<WaveletSpec>,
    pub grid: GridConfig,
    pub sampling: SamplingParams,
    pub window: Option<SamplingWindow>,
    pub hgrid: HGridSpec,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub weight: HWeight,
    pub test_functions: usize,
    pub reconstructions: usize,
    pub equivalence_cap: f64,
    pub reconstruction: ReconstructionConfig,
    pub oscillation: Option<OscillationConfig>,
    pub seed: u64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            family: GroupFamily::Shearlet { c: 0.5 },
            wavelet: None,
            grid: GridConfig::default(),
            sampling: SamplingParams::default().refined().refined(),
            window: None,
            hgrid: HGridSpec::default(),
            p: 2.0,
            q: 2.0,
            s: 0.0,
            weight: HWeight::Unit,
            test_functions: 10,
            reconstructions: 3,
            equivalence_cap: 10.0,
            reconstruction: ReconstructionConfig::default(),
            oscillation: Some(OscillationConfig::default()),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSummary {
    pub rel_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameResults {
    pub sampling: SamplingSummary,
    pub u_search: Option<USearch>,
    /// `discrete_norm(analyze_at f) / mixed_norm(analyze f)` per test function.
    pub equivalence_ratios: Vec<f64>,
    pub equivalence_interval: (f64, f64),
    pub equivalence_spread: f64,
    pub bounds: FrameBounds,
    pub reconstructions: Vec<ReconstructionSummary>,
}

impl CsvTables for FrameResults {
    fn tables(&self) -> Vec<(String, String)> {
        let mut eq = String::from("index,ratio\n");
        for (i, r) in self.equivalence_ratios.iter().enumerate() {
            eq += &format!("{i},{r}\n");
        }
        let mut rec = String::from("run,iteration,rel_error\n");
        for (k, r) in self.reconstructions.iter().enumerate() {
            for (i, e) in r.history.iter().enumerate() {
                rec += &format!("{k},{},{e}\n", i + 1);
            }
        }
        let mut osc = String::from("x_radius,chart_radius,oscillation_norm\n");
        if let Some(u) = &self.u_search {
            for (p, v) in &u.steps {
                osc += &format!("{},{},{}\n", p.x_radius, p.chart_radius, v);
            }
        }
        vec![
            ("equivalence".into(), eq),
            ("reconstruction".into(), rec),
            ("oscillation".into(), osc),
        ]
    }
}

pub fn run_frame(cfg: &FrameConfig) -> Result<Report<FrameConfig, FrameResults>> {
    let psi = default_wavelet(cfg.family, cfg.wavelet, cfg.grid.build()?)?;
    run_frame_with(cfg, &psi)
}

/// [`run_frame`] with an explicit analyzing window (for instance a stored
/// field); `cfg.wavelet` is ignored.
pub fn run_frame_with(
    cfg: &FrameConfig,
    psi: &(impl FrequencyWindow + ?Sized),
) -> Result<Report<FrameConfig, FrameResults>> {
    let grid = cfg.grid.build()?;
    let window = match cfg.window {
        Some(w) => w,
        None => SamplingWindow::default_for(cfg.family)?,
    };
    let z = build_sampling_set(cfg.family, cfg.sampling, window, grid)?;
    let weight = WeightSpec::new(cfg.s, cfg.weight)?;
    let mut checks = Vec::new();

    let u_search = match &cfg.oscillation {
        None => None,
        Some(o) => {
            let ogrid = o.grid.build()?;
            let ohgrid = HGrid::new(cfg.family, o.hgrid)?;
            let s = search_u(psi, ogrid, &ohgrid, o.start, &weight, cfg.p, cfg.q, o.max_halvings)?;
            let last = s.steps.last().map_or(f64::INFINITY, |st| st.1);
            checks.push(Check::below("oscillation_below_one", CheckCategory::Frame, last, 1.0));
            Some(s)
        }
    };

    let op = FrameOperator::new(&z, psi);
    let hgrid = HGrid::new(cfg.family, cfg.hgrid)?;
    let params = MixedNormParams::new(cfg.p, cfg.q, weight)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fields: Vec<SampledField> = (0..cfg.test_functions.max(cfg.reconstructions))
        .map(|_| random_test_function(grid, window.region, 3, 1.0, &mut rng))
        .collect();
    let mut equivalence_ratios = Vec::new();
    for f in fields.iter().take(cfg.test_functions) {
        let c = op.analyze(f)?;
        let d = frame::discrete_norm(&c, &z, cfg.p, cfg.q, &weight)?;
        let m = mixed_norm(&cwt::analyze_window(f, psi, &hgrid)?, &params);
        equivalence_ratios.push(d / m);
    }
    let lo = equivalence_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = equivalence_ratios.iter().cloned().fold(0.0, f64::max);
    let spread = hi / lo;
    if !equivalence_ratios.is_empty() {
        checks.push(Check::at_most(
            "norm_equivalence_spread",
            CheckCategory::Frame,
            spread,
            cfg.equivalence_cap,
        ));
    }

    let rc = &cfg.reconstruction;
    let bounds = frame_bounds(&op, &window.region, rc.power_iter, rc.seed)?;
    let mut reconstructions = Vec::new();
    for f in fields.iter().take(cfg.reconstructions) {
        let c = op.analyze(f)?;
        let r = reconstruct_with(&op, &c, Some(f), bounds, rc)?;
        reconstructions.push(ReconstructionSummary {
            rel_error: r.rel_error,
            iterations: r.iterations,
            converged: r.converged,
            history: r.history,
        });
    }
    if !reconstructions.is_empty() {
        let worst = reconstructions.iter().map(|r| r.rel_error).fold(0.0, f64::max);
        checks.push(Check::below("reconstruction_error", CheckCategory::Frame, worst, rc.tol));
    }
    Ok(Report {
        command: "frame-test".into(),
        config: cfg.clone(),
        results: FrameResults {
            sampling: z.summary(),
            u_search,
            equivalence_ratios,
            equivalence_interval: (lo, hi),
            equivalence_spread: spread,
            bounds,
            reconstructions,
        },
        checks,
    })
}

// --------------------------------------------------------- counterexample

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CounterexampleConfig {
    pub grid_sizes: Vec<usize>,
    pub xi_max: f64,
    pub r1: f64,
    pub r2: f64,
    pub hgrid: HGridSpec,
    pub scales: Vec<f64>,
    /// Truncation radii as fractions of the half period.
    pub radius_fractions: Vec<f64>,
    pub identity_tol: f64,
    pub parseval_tol: f64,
    pub cauchy_tol: f64,
    /// Minimum of `c2 / N(R_min)` for the divergent transform.
    pub growth_floor: f64,
    /// Maximum ratio between fitted growth rates across grid sizes.
    pub growth_consistency: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            grid_sizes: vec![128, 256, 512],
            xi_max: 8.0,
            r1: 0.25,
            r2: 4.0,
            hgrid: HGridSpec {
                a_min: 1.0 / 8.0,
                a_max: 8.0,
                n_a: 97,
                b_max: 1.0,
                n_b: 1,
            },
            scales: vec![0.8, 1.0, 1.25],
            radius_fractions: vec![1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0],
            identity_tol: 1e-10,
            parseval_tol: 0.01,
            cauchy_tol: 0.01,
            growth_floor: 0.1,
            growth_consistency: 1.5,
        }
    }
}

/// Least-squares fit `N(R) = c1 + c2 ln R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub radii: Vec<f64>,
    pub norms: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    /// `c2 / N(R_min)`.
    pub relative_growth: f64,
    /// Relative increment of the last step, from half to the full
    /// truncation radius.
    pub tail_increment: f64,
}

pub fn fit_log_growth(radii: &[f64], norms: &[f64]) -> Result<LogFit> {
    if radii.len() < 2 || radii.len() != norms.len() {
        return Err(invalid("log fit needs at least two (R, N) pairs"));
    }
    let n = radii.len() as f64;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = norms.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(norms).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c2 = sxy / sxx;
    let c1 = my - c2 * mx;
    let k = norms.len() - 1;
    let tail_increment = ((norms[k] - norms[k - 1]) / norms[k].abs().max(f64::MIN_POSITIVE)).abs();
    Ok(LogFit {
        radii: radii.to_vec(),
        norms: norms.to_vec(),
        c1,
        c2,
        relative_growth: c2 / norms[0],
        tail_increment,
    })
}

/// `int_{|x| <= R} |slice(x)| dx` for each radius.
fn truncated_l1(slice: &[Complex64], grid: &FrequencyGrid, radii: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; radii.len()];
    for (i, v) in slice.iter().enumerate() {
        let x = grid.x_point(i);
        let r = x[0].hypot(x[1]);
        let a = v.norm();
        for (s, &rr) in sums.iter_mut().zip(radii) {
            if r <= rr {
                *s += a;
            }
        }
    }
    sums.iter().map(|s| s * grid.x_cell_area()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrowth {
    pub scale: f64,
    pub same: LogFit,
    pub mixed: LogFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleGrid {
    pub n: usize,
    /// `max |W_g g - W_f f|` over all nodes.
    pub max_identity_gap: f64,
    pub parseval_f: f64,
    pub parseval_g: f64,
    pub scales: Vec<ScaleGrowth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleResults {
    pub grids: Vec<CounterexampleGrid>,
    /// Per scale, `max c2 / min c2` of `W_f g` across grid sizes.
    pub growth_consistency: Vec<f64>,
}

impl CsvTables for CounterexampleResults {
    fn tables(&self) -> Vec<(String, String)> {
        let mut t = String::from("n,scale,transform,radius,truncated_l1\n");
        for g in &self.grids {
            for s in &g.scales {
                for (name, fit) in [("wf_f", &s.same), ("wf_g", &s.mixed)] {
                    for (r, v) in fit.radii.iter().zip(&fit.norms) {
                        t += &format!("{},{},{},{},{}\n", g.n, s.scale, name, r, v);
                    }
                }
            }
        }
        vec![("truncated_l1".into(), t)]
    }
}

pub fn run_counterexample(cfg: &CounterexampleConfig) -> Result<Report<CounterexampleConfig, CounterexampleResults>> {
    if cfg.grid_sizes.is_empty() {
        return Err(invalid("no grid sizes given"));
    }
    if let Some(&n) = cfg.grid_sizes.iter().find(|&&n| n < 128) {
        return Err(invalid(format!(
            "grid size {n} cannot resolve the sign discontinuity (need n >= 128)"
        )));
    }
    if cfg.radius_fractions.len() < 2 {
        return Err(invalid("need at least two truncation radii"));
    }
    let family = GroupFamily::ScalarReducible;
    let hgrid = HGrid::new(family, cfg.hgrid)?;
    let mut grids = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.grid_sizes {
        let grid = FrequencyGrid::with_centering(n, cfg.xi_max, Centering::Cell)?;
        let (fw, gw) = counterexample_windows(grid, cfg.r1, cfg.r2)?;
        let f = SampledField::from_window(grid, &fw);
        let g = SampledField::from_window(grid, &gw);
        let cell = grid.x_cell_area();
        let dft = Dft2::new(grid);
        let per_node: Vec<(f64, f64, f64)> = (0..hgrid.len())
            .map(|k| {
                let h = &hgrid.nodes[k];
                let wff = analyze_slice(&f, &fw, h, &dft);
                let wgg = analyze_slice(&g, &gw, h, &dft);
                let gap = match (&wff, &wgg) {
                    (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max),
                    (Some(a), None) | (None, Some(a)) => a.iter().map(|x| x.norm()).fold(0.0, f64::max),
                    (None, None) => 0.0,
                };
                let m = hgrid.weights[k] / h.abs_det();
                (gap, l2_energy(wff.as_deref(), cell) * m, l2_energy(wgg.as_deref(), cell) * m)
            })
            .collect();
        let max_identity_gap = per_node.iter().map(|p| p.0).fold(0.0, f64::max);
        let parseval_f = per_node.iter().map(|p| p.1).sum::<f64>() / f.l2_norm().powi(2);
        let parseval_g = per_node.iter().map(|p| p.2).sum::<f64>() / g.l2_norm().powi(2);

        let half = grid.x_period() / 2.0;
        let radii: Vec<f64> = cfg.radius_fractions.iter().map(|r| r * half).collect();
        let mut scales = Vec::new();
        for &s in &cfg.scales {
            let h = DilationParams::new(family, s, 0.0)?;
            let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
            let same = analyze_slice(&f, &fw, &h, &dft).unwrap_or_else(|| zero.clone());
            let mixed = analyze_slice(&g, &fw, &h, &dft).unwrap_or(zero);
            scales.push(ScaleGrowth {
                scale: s,
                same: fit_log_growth(&radii, &truncated_l1(&same, &grid, &radii))?,
                mixed: fit_log_growth(&radii, &truncated_l1(&mixed, &grid, &radii))?,
            });
        }

        checks.push(Check::below(
            &format!("identity_gap_n{n}"),
            CheckCategory::Counterexample,
            max_identity_gap,
            cfg.identity_tol,
        ));
        checks.push(Check::below(
            &format!("parseval_agreement_n{n}"),
            CheckCategory::Counterexample,
            (parseval_f / parseval_g - 1.0).abs(),
            cfg.parseval_tol,
        ));
        let largest = cfg.grid_sizes.iter().copied().max() == Some(n);
        for sg in &scales {
            // the slowly decaying tail of W_f f is only resolved on the widest cell
            if largest {
                checks.push(Check::below(
                    &format!("wf_f_cauchy_n{n}_s{}", sg.scale),
                    CheckCategory::Counterexample,
                    sg.same.tail_increment,
                    cfg.cauchy_tol,
                ));
            }
            checks.push(Check::above(
                &format!("wf_g_log_growth_n{n}_s{}", sg.scale),
                CheckCategory::Counterexample,
                sg.mixed.relative_growth,
                cfg.growth_floor,
            ));
        }
        grids.push(CounterexampleGrid {
            n,
            max_identity_gap,
            parseval_f,
            parseval_g,
            scales,
        });
    }
    let growth_consistency: Vec<f64> = (0..cfg.scales.len())
        .map(|k| {
            let c2s: Vec<f64> = grids.iter().map(|g| g.scales[k].mixed.c2).collect();
            let lo = c2s.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = c2s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if lo > 0.0 {
                hi / lo
            } else {
                f64::INFINITY
            }
        })
        .collect();
    for (k, &r) in growth_consistency.iter().enumerate() {
        checks.push(Check::at_most(
            &format!("wf_g_growth_consistency_s{}", cfg.scales[k]),
            CheckCategory::Counterexample,
            r,
            cfg.growth_consistency,
        ));
    }
    Ok(Report {
        command: "counterexample".into(),
        config: cfg.clone(),
        results: CounterexampleResults {
            grids,
            growth_consistency,
        },
        checks,
    })
}
