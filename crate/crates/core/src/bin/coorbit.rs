use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use coorbit::cwt::{self, HGrid, TransformArray};
use coorbit::experiments::{
    run_calderon, run_counterexample, run_decay_suite, run_embeddedness, run_frame, run_frame_with, CalderonConfig,
    ContrastConfig, CounterexampleConfig, CsvTables, DecayConfig, EmbeddingConfig, FrameConfig, GridConfig, Report,
};
use coorbit::frame::SamplingParams;
use coorbit::grid::{Centering, FrequencyGrid, SampledField};
use coorbit::group::GroupFamily;
use coorbit::norms::{mixed_norm, HWeight, MixedNormParams, WeightSpec};
use coorbit::orbit;
use coorbit::wavelet::{self, WaveletSpec};
use coorbit::{CoorbitError, Result};

/// Continuous wavelet transforms over planar dilation groups.
#[derive(Parser, Debug)]
#[command(name = "coorbit", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for randomized test functions and instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for `<command>.json` and CSV tables.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Orbit membership, complement distance and A on sample frequencies.
    Orbit(OrbitArgs),
    /// Sample a bump or moment wavelet to a grid file.
    MakeWavelet(MakeWaveletArgs),
    /// Wavelet transform of a stored field.
    Cwt {
        #[command(subcommand)]
        action: CwtAction,
    },
    /// Weighted mixed norm of a stored transform.
    CoorbitNorm(NormArgs),
    /// Temperate embeddedness checker.
    CheckEmbeddedness(EmbedArgs),
    /// Decay-ratio suite with optional no-moment contrast.
    VerifyDecay(DecayArgs),
    /// Sampling set, oscillation, norm equivalence and reconstruction.
    FrameTest(FrameArgs),
    /// Calderon constancy and Parseval agreement.
    Calderon(CalderonArgs),
    /// Window dependence demo for the reducible scalar family.
    Counterexample(CounterArgs),
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Family as JSON, e.g. '{"family":"shearlet","c":0.5}'.
    #[arg(long)]
    family: String,
    /// Frequencies `x,y` (repeatable); defaults to a square mesh.
    #[arg(long = "xi", value_parser = parse_vec2)]
    xi: Vec<[f64; 2]>,
    /// Half width of the default mesh.
    #[arg(long, default_value_t = 2.0)]
    extent: f64,
    /// Points per axis of the default mesh.
    #[arg(long, default_value_t = 9)]
    mesh: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum WaveletKind {
    Bump,
    Moment,
}

#[derive(Args, Debug)]
struct MakeWaveletArgs {
    #[arg(long)]
    family: String,
    #[arg(long, value_enum, default_value_t = WaveletKind::Bump)]
    kind: WaveletKind,
    /// Moment order (moment wavelets only).
    #[arg(long, default_value_t = 2)]
    order: u32,
    /// Full wavelet spec as JSON; overrides `--kind`.
    #[arg(long)]
    spec: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    /// Sidecar path; raw data goes next to it with extension `.bin`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 8.0)]
    xi_max: f64,
    /// Use cell-centred nodes (no node on an axis).
    #[arg(long)]
    cell: bool,
}

impl GridArgs {
    fn config(&self) -> GridConfig {
        GridConfig {
            n: self.n,
            xi_max: self.xi_max,
            centering: if self.cell { Centering::Cell } else { Centering::Node },
        }
    }
}

#[derive(Subcommand, Debug)]
enum CwtAction {
    /// Analyze `f` with `psi` over an H grid and store the transform.
    Analyze {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        /// H grid JSON file (`{"family": .., "a_min": ..}` or a full grid);
        /// defaults to the family's standard grid.
        #[arg(long)]
        hgrid: Option<PathBuf>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct NormArgs {
    /// Stored transform (coorbit-cwt v1 header).
    #[arg(long)]
    transform: PathBuf,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    p: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    /// Dilation weight bundle as JSON, e.g. '{"u":1}'.
    #[arg(long, default_value = "{}")]
    weight: String,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    q: f64,
    #[arg(long, default_value = "{}")]
    weight: String,
    /// Range `lo..hi` (inclusive) of indices to test.
    #[arg(long, default_value = "0..16", value_parser = parse_range)]
    ell: (u32, u32),
    #[arg(long, default_value_t = 6)]
    levels: usize,
}

#[derive(Args, Debug)]
struct DecayArgs {
    /// Full configuration JSON file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    /// Run the Gaussian contrast experiment as well.
    #[arg(long)]
    contrast: bool,
}

#[derive(Args, Debug)]
struct FrameArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    /// Analyzing window from a grid file instead of the default wavelet.
    #[arg(long)]
    psi: Option<PathBuf>,
    #[arg(long)]
    a_ratio: Option<f64>,
    #[arg(long)]
    b_step: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Skip the oscillation search.
    #[arg(long)]
    no_oscillation: bool,
}

#[derive(Args, Debug)]
struct CalderonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    /// Wavelet spec as JSON, e.g. '{"kind":"moment","order":2}'.
    #[arg(long)]
    wavelet: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct CounterArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma separated grid sizes.
    #[arg(long, value_delimiter = ',')]
    grid_sizes: Option<Vec<usize>>,
}

fn parse_vec2(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{s}`"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([x, y])
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected `lo..hi`, got `{s}`"))?;
    let lo = lo.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let hi = hi.trim_start_matches('=').trim().parse::<u32>().map_err(|e| e.to_string())?;
    if hi < lo {
        return Err(format!("empty range `{s}`"));
    }
    Ok((lo, hi))
}

fn family(text: &str) -> Result<GroupFamily> {
    let text = text.trim();
    if text.starts_with('{') {
        GroupFamily::from_json(text)
    } else {
        GroupFamily::from_json(&json!({ "family": text, "c": 0.5 }).to_string())
            .or_else(|_| GroupFamily::from_json(&json!({ "family": text }).to_string()))
    }
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
    }
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), body)?;
    Ok(())
}

/// Prints and stores a report; returns its exit code.
fn emit<C: Serialize, R: Serialize + CsvTables>(g: &Global, report: &Report<C, R>) -> Result<u8> {
    let json = report.to_json()?;
    let tables = report.results.tables();
    if let Some(dir) = &g.out_dir {
        write_out(dir, &format!("{}.json", report.command), &json)?;
        write_out(dir, &format!("{}_checks.csv", report.command), &report.checks_csv())?;
        for (name, body) in &tables {
            write_out(dir, &format!("{}_{name}.csv", report.command), body)?;
        }
    }
    match g.format {
        Format::Json => println!("{json}"),
        Format::Csv => {
            print!("{}", report.checks_csv());
            for (name, body) in &tables {
                println!("\n# {name}");
                print!("{body}");
            }
        }
    }
    for c in &report.checks {
        eprintln!(
            "{} {} value={} threshold={}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    Ok(report.exit_code() as u8)
}

fn emit_value(g: &Global, command: &str, value: &serde_json::Value) -> Result<u8> {
    let json = serde_json::to_string_pretty(value)?;
    if let Some(dir) = &g.out_dir {
        write_out(dir, &format!("{command}.json"), &json)?;
    }
    println!("{json}");
    Ok(0)
}

fn run_orbit(g: &Global, a: &OrbitArgs) -> Result<u8> {
    let fam = family(&a.family)?;
    let points: Vec<[f64; 2]> = if a.xi.is_empty() {
        if a.mesh < 2 {
            return Err(CoorbitError::InvalidParameter("mesh needs at least 2 points".into()));
        }
        let step = 2.0 * a.extent / (a.mesh - 1) as f64;
        (0..a.mesh)
            .flat_map(|i| (0..a.mesh).map(move |j| [-a.extent + i as f64 * step, -a.extent + j as f64 * step]))
            .collect()
    } else {
        a.xi.clone()
    };
    let mut csv = String::from("xi1,xi2,in_orbit,dist,A\n");
    let mut rows = Vec::with_capacity(points.len());
    for xi in points {
        let inside = orbit::in_orbit(fam, xi)?;
        let d = orbit::dist_complement(fam, xi)?;
        let aux = if inside { orbit::aux_a(fam, xi)? } else { 0.0 };
        csv += &format!("{},{},{},{},{}\n", xi[0], xi[1], inside, d, aux);
        rows.push(json!({ "xi": xi, "in_orbit": inside, "dist": d, "A": aux }));
    }
    if let Some(dir) = &g.out_dir {
        write_out(dir, "orbit.csv", &csv)?;
    }
    match g.format {
        Format::Csv => print!("{csv}"),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "family": fam, "points": rows }))?
        ),
    }
    Ok(0)
}

fn run_make_wavelet(g: &Global, a: &MakeWaveletArgs) -> Result<u8> {
    let fam = family(&a.family)?;
    let spec = match (&a.spec, a.kind) {
        (Some(s), _) => serde_json::from_str(s)?,
        (None, WaveletKind::Bump) => WaveletSpec::default_bump(fam)?,
        (None, WaveletKind::Moment) => WaveletSpec::moment(a.order),
    };
    let grid = a.grid.config().build()?;
    let field = wavelet::make_wavelet(fam, spec, grid)?;
    field.write(&a.out, Some(fam))?;
    let slope = wavelet::moment_slope(&field, fam)?;
    emit_value(
        g,
        "make-wavelet",
        &json!({
            "file": a.out,
            "family": fam,
            "spec": spec,
            "grid": grid,
            "l2_norm": field.l2_norm(),
            "moment_order": slope,
        }),
    )
}

fn read_field(path: &Path) -> Result<(SampledField, Option<GroupFamily>)> {
    SampledField::read(path)
}

fn run_cwt(g: &Global, action: &CwtAction) -> Result<u8> {
    let CwtAction::Analyze { f, psi, hgrid, family: fam, out } = action;
    let (f, f_family) = read_field(f)?;
    let (psi, psi_family) = read_field(psi)?;
    let fam = match fam {
        Some(t) => Some(family(t)?),
        None => psi_family.or(f_family),
    };
    let hgrid = match (hgrid, fam) {
        (Some(p), _) => HGrid::from_json(&fs::read_to_string(p)?)?,
        (None, Some(fam)) => HGrid::default_for(fam)?,
        (None, None) => {
            return Err(CoorbitError::InvalidParameter(
                "no family in the inputs; pass --family or --hgrid".into(),
            ))
        }
    };
    let f = f.to_frequency();
    let psi = psi.to_frequency();
    let t = cwt::analyze(&f, &psi, &hgrid)?;
    t.write(out)?;
    emit_value(
        g,
        "cwt",
        &json!({
            "file": out,
            "family": hgrid.family,
            "nodes": hgrid.len(),
            "nonzero_slices": t.nonzero_slices(),
            "l2_norm": t.l2_norm(),
        }),
    )
}

fn run_norm(g: &Global, a: &NormArgs) -> Result<u8> {
    let t = TransformArray::read(&a.transform)?;
    let w = HWeight::from_json(t.hgrid.family, &a.weight)?;
    let params = MixedNormParams::new(a.p, a.q, WeightSpec::new(a.s, w)?)?;
    let norm = mixed_norm(&t, &params);
    emit_value(
        g,
        "coorbit-norm",
        &json!({
            "transform": a.transform,
            "p": a.p.to_string(),
            "q": a.q.to_string(),
            "s": a.s,
            "weight": w,
            "norm": norm,
        }),
    )
}

fn run_embed(g: &Global, a: &EmbedArgs) -> Result<u8> {
    let fam = family(&a.family)?;
    let cfg = EmbeddingConfig {
        family: fam,
        s: a.s,
        q: a.q,
        weight: HWeight::from_json(fam, &a.weight)?,
        ells: (a.ell.0..=a.ell.1).collect(),
        levels: a.levels,
    };
    emit(g, &run_embeddedness(&cfg)?)
}

fn run_decay(g: &Global, a: &DecayArgs) -> Result<u8> {
    let mut cfg: DecayConfig = load_config(&a.config)?;
    if let Some(f) = &a.family {
        cfg.family = family(f)?;
    }
    if let Some(n) = a.instances {
        cfg.instances = n;
    }
    if let Some(t) = a.t {
        cfg.t = t;
    }
    if a.contrast && cfg.contrast.is_none() {
        cfg.contrast = Some(ContrastConfig::default());
    }
    cfg.seed = g.seed;
    emit(g, &run_decay_suite(&cfg)?)
}

fn run_frame_cmd(g: &Global, a: &FrameArgs) -> Result<u8> {
    let mut cfg: FrameConfig = load_config(&a.config)?;
    if let Some(f) = &a.family {
        cfg.family = family(f)?;
    }
    if a.a_ratio.is_some() || a.b_step.is_some() || a.beta.is_some() {
        cfg.sampling = SamplingParams {
            a_ratio: a.a_ratio.unwrap_or(cfg.sampling.a_ratio),
            b_step: a.b_step.unwrap_or(cfg.sampling.b_step),
            beta: a.beta.unwrap_or(cfg.sampling.beta),
        };
    }
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(q) = a.q {
        cfg.q = q;
    }
    if let Some(s) = a.s {
        cfg.s = s;
    }
    if let Some(w) = &a.weight {
        cfg.weight = HWeight::from_json(cfg.family, w)?;
    }
    if let Some(n) = a.n {
        cfg.grid.n = n;
    }
    if a.no_oscillation {
        cfg.oscillation = None;
    }
    cfg.seed = g.seed;
    let report = match &a.psi {
        None => run_frame(&cfg)?,
        Some(path) => {
            let (psi, _) = read_field(path)?;
            let psi = psi.to_frequency();
            let grid: FrequencyGrid = cfg.grid.build()?;
            if !psi.grid.compatible(&grid) {
                cfg.grid = GridConfig {
                    n: psi.grid.n,
                    xi_max: psi.grid.xi_max,
                    centering: psi.grid.centering,
                };
            }
            run_frame_with(&cfg, &psi)?
        }
    };
    emit(g, &report)
}

fn run_calderon_cmd(g: &Global, a: &CalderonArgs) -> Result<u8> {
    let mut cfg: CalderonConfig = load_config(&a.config)?;
    if let Some(f) = &a.family {
        cfg.family = family(f)?;
    }
    if let Some(w) = &a.wavelet {
        cfg.wavelet = Some(serde_json::from_str(w)?);
    }
    if let Some(n) = a.n {
        cfg.grid.n = n;
    }
    cfg.seed = g.seed;
    emit(g, &run_calderon(&cfg)?)
}

fn run_counter(g: &Global, a: &CounterArgs) -> Result<u8> {
    let mut cfg: CounterexampleConfig = load_config(&a.config)?;
    if let Some(sizes) = &a.grid_sizes {
        cfg.grid_sizes = sizes.clone();
    }
    emit(g, &run_counterexample(&cfg)?)
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Orbit(a) => run_orbit(g, a),
        Command::MakeWavelet(a) => run_make_wavelet(g, a),
        Command::Cwt { action } => run_cwt(g, action),
        Command::CoorbitNorm(a) => run_norm(g, a),
        Command::CheckEmbeddedness(a) => run_embed(g, a),
        Command::VerifyDecay(a) => run_decay(g, a),
        Command::FrameTest(a) => run_frame_cmd(g, a),
        Command::Calderon(a) => run_calderon_cmd(g, a),
        Command::Counterexample(a) => run_counter(g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
