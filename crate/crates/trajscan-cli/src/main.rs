//! `trajscan`: batch scanner for trajectory spatial scan statistics.
//!
//! Subcommands: `generate` (synthetic data), `simplify` (coresets), `scan`
//! (find the best region), `oracle` (exhaustive small-instance scan),
//! `plant` (label a synthetic anomaly), `power` (recovery-rate experiments).

mod io;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use trajscan::coreset::{simplify, traj_seed, CoresetMethod};
use trajscan::discrepancy::{DiscrepancyFn, Model};
use trajscan::geom::{Point, Shape, ShapeFamily};
use trajscan::harness::{
    exact_region_stats, exact_scan, generate_synthetic, plant, power_experiment, Generator,
    OracleMembership, OracleOptions, PlantConfig, SyntheticConfig,
};
use trajscan::runner::{run_scan, ScanSpec};
use trajscan::scan_point::PartialMethod;
use trajscan::trajectory::TrajectoryDataset;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "trajscan", version, about = "Spatial scan anomalies over trajectory data")]
struct Cli {
    /// Cap on worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trajectory dataset as waypoint CSV.
    Generate(GenerateArgs),
    /// Simplify each trajectory into its coreset points (CSV out).
    Simplify(SimplifyArgs),
    /// Find the highest-discrepancy region (JSON out).
    Scan(ScanArgs),
    /// Exhaustive scan oracle for small instances (JSON out).
    Oracle(OracleArgs),
    /// Plant a labeled anomaly into a dataset (CSV + JSON out).
    Plant(PlantArgs),
    /// Statistical-power experiment: generate, plant, scan, repeat.
    Power(PowerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Halfplane,
    Disk,
    Rect,
}

impl From<FamilyArg> for ShapeFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Halfplane => ShapeFamily::Halfplane,
            FamilyArg::Disk => ShapeFamily::Disk,
            FamilyArg::Rect => ShapeFamily::Rect,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Flux,
    Partial,
    Full,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Flux => Model::Flux,
            ModelArg::Partial => Model::Partial,
            ModelArg::Full => Model::Full,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FnArg {
    Kulldorff,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    AllWaypoints,
    RandomSample,
    Even,
    DouglasPeucker,
    ConvexHull,
    ApproxHull,
    LiftedHull,
    GridKernel,
    Gridding,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    RandomWalk,
    SegmentBundle,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    /// Distances are in normalized unit-square coordinates.
    Normalized,
    /// Distances are in the input file's coordinates and get converted.
    Original,
}

#[derive(Clone, Copy, ValueEnum)]
enum MembershipArg {
    /// Ground-truth segment-level intersection.
    Segments,
    /// Waypoint membership, matching point-based scanners.
    Points,
}

fn resolve_fn(fun: FnArg, one_sided: bool) -> Result<DiscrepancyFn> {
    Ok(match (fun, one_sided) {
        (FnArg::Kulldorff, false) => DiscrepancyFn::Kulldorff,
        (FnArg::Kulldorff, true) => DiscrepancyFn::KulldorffOneSided,
        (FnArg::Linear, false) => DiscrepancyFn::Linear,
        (FnArg::Linear, true) => bail!("--one-sided applies only to --fn kulldorff"),
    })
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| {
        std::env::var("TRAJSCAN_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

/// Runtime fields are zeroed under TRAJSCAN_DETERMINISTIC so identical runs
/// produce byte-identical outputs.
fn report_ms(elapsed_ms: u64) -> u64 {
    match std::env::var("TRAJSCAN_DETERMINISTIC") {
        Ok(v) if !v.is_empty() && v != "0" => 0,
        _ => elapsed_ms,
    }
}

fn build_coreset(
    method: MethodArg,
    alpha: Option<f64>,
    r: Option<f64>,
) -> Result<CoresetMethod> {
    let need_alpha = || alpha.context("this coreset method requires --alpha");
    let m = match method {
        MethodArg::AllWaypoints => CoresetMethod::AllWaypoints,
        MethodArg::ConvexHull => CoresetMethod::ConvexHull,
        MethodArg::LiftedHull => CoresetMethod::LiftedHull,
        MethodArg::RandomSample => CoresetMethod::RandomSample { alpha: need_alpha()? },
        MethodArg::Even => CoresetMethod::Even { alpha: need_alpha()? },
        MethodArg::DouglasPeucker => CoresetMethod::DouglasPeucker { alpha: need_alpha()? },
        MethodArg::ApproxHull => CoresetMethod::ApproxHull { alpha: need_alpha()? },
        MethodArg::Gridding => CoresetMethod::Gridding { alpha: need_alpha()? },
        MethodArg::GridKernel => CoresetMethod::GridKernel {
            alpha: need_alpha()?,
            r: r.context("grid-kernel requires a radius (--r or --r-min)")?,
        },
    };
    m.validate()?;
    Ok(m)
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    n_traj: usize,
    #[arg(long, default_value_t = 8)]
    waypoints_min: usize,
    #[arg(long, default_value_t = 20)]
    waypoints_max: usize,
    #[arg(long, default_value_t = 0.03)]
    step_scale: f64,
    #[arg(long, value_enum, default_value_t = GeneratorArg::RandomWalk)]
    generator: GeneratorArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Output waypoint CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimplifyArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    alpha: Option<f64>,
    /// Minimum disk radius for grid-kernel coresets.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, value_enum, default_value_t = UnitsArg::Normalized)]
    units: UnitsArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Output coreset CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long = "fn", value_enum, default_value_t = FnArg::Kulldorff)]
    fun: FnArg,
    /// Score only regions with an elevated recorded rate.
    #[arg(long)]
    one_sided: bool,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Spatial error (coresets, rectangle grid resolution).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Number of doubling radius subranges; with --r-min it implies --r-max.
    #[arg(long)]
    z: Option<u32>,
    #[arg(long, value_enum)]
    coreset: Option<MethodArg>,
    #[arg(long)]
    max_side: Option<f64>,
    /// Evaluate multiscale disk candidates over a neighborhood that covers
    /// every in-window disk instead of the fast 5x5 block.
    #[arg(long)]
    exact_eval: bool,
    #[arg(long)]
    hull_trick: bool,
    #[arg(long, value_enum, default_value_t = UnitsArg::Normalized)]
    units: UnitsArg,
    #[arg(long, default_value_t = 1.0)]
    c_net: f64,
    #[arg(long, default_value_t = 0.25)]
    c_sample: f64,
    #[arg(long, default_value_t = 1)]
    k_bound: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long = "fn", value_enum, default_value_t = FnArg::Kulldorff)]
    fun: FnArg,
    #[arg(long)]
    one_sided: bool,
    #[arg(long, value_enum, default_value_t = MembershipArg::Segments)]
    membership: MembershipArg,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = UnitsArg::Normalized)]
    units: UnitsArg,
    /// Size guard: the oracle is roughly quartic.
    #[arg(long, default_value_t = 200)]
    max_trajectories: usize,
    #[arg(long, default_value_t = 2000)]
    max_waypoints: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlantArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long = "fn", value_enum, default_value_t = FnArg::Kulldorff)]
    fun: FnArg,
    /// Recorded rate outside the planted region.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Recorded rate inside the planted region.
    #[arg(long, default_value_t = 0.8)]
    q: f64,
    /// Target baseline mass fraction of the region.
    #[arg(long, default_value_t = 0.05)]
    f: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Output labeled waypoint CSV path.
    #[arg(short, long)]
    output: PathBuf,
    /// Planted-region JSON path (stdout when omitted).
    #[arg(long)]
    region_out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    // synthetic data
    #[arg(long, default_value_t = 1000)]
    n_traj: usize,
    #[arg(long, default_value_t = 8)]
    waypoints_min: usize,
    #[arg(long, default_value_t = 20)]
    waypoints_max: usize,
    #[arg(long, default_value_t = 0.03)]
    step_scale: f64,
    #[arg(long, value_enum, default_value_t = GeneratorArg::RandomWalk)]
    generator: GeneratorArg,
    // plant
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0.8)]
    q: f64,
    #[arg(long, default_value_t = 0.05)]
    f: f64,
    // scan
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long = "fn", value_enum, default_value_t = FnArg::Kulldorff)]
    fun: FnArg,
    #[arg(long)]
    one_sided: bool,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    z: Option<u32>,
    #[arg(long, value_enum)]
    coreset: Option<MethodArg>,
    #[arg(long)]
    max_side: Option<f64>,
    #[arg(long)]
    exact_eval: bool,
    #[arg(long)]
    hull_trick: bool,
    #[arg(long, default_value_t = 1.0)]
    c_net: f64,
    #[arg(long, default_value_t = 0.25)]
    c_sample: f64,
    #[arg(long, default_value_t = 1)]
    k_bound: usize,
    // experiment
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0.9)]
    threshold: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-trial CSV path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Summary JSON path (stdout when omitted).
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    if let Err(err) = run(cli.command) {
        let payload = serde_json::json!({ "error": format!("{err:#}") });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Simplify(a) => cmd_simplify(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Plant(a) => cmd_plant(a),
        Command::Power(a) => cmd_power(a),
    }
}

fn ingest_reporting(path: &Path) -> Result<TrajectoryDataset> {
    let (dataset, report) = io::ingest(path)?;
    eprintln!("{}", serde_json::to_string(&report)?);
    Ok(dataset)
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        n_traj: a.n_traj,
        waypoints_min: a.waypoints_min,
        waypoints_max: a.waypoints_max,
        step_scale: a.step_scale,
        generator: match a.generator {
            GeneratorArg::RandomWalk => Generator::RandomWalk,
            GeneratorArg::SegmentBundle => Generator::SegmentBundle,
        },
        seed: resolve_seed(a.seed),
    };
    let dataset = generate_synthetic(&cfg);
    io::write_waypoint_csv(&dataset, &a.output)
}

fn cmd_simplify(a: SimplifyArgs) -> Result<()> {
    let dataset = ingest_reporting(&a.input)?;
    let to_norm = |d: Option<f64>| match a.units {
        UnitsArg::Normalized => d,
        UnitsArg::Original => d.map(|v| v * dataset.transform.scale),
    };
    let method = build_coreset(a.method, to_norm(a.alpha), to_norm(a.r))?;
    let seed = resolve_seed(a.seed);
    let mut rows: Vec<(u64, Point)> = Vec::new();
    for t in &dataset.trajectories {
        for p in simplify(t, &method, traj_seed(seed, t.id))? {
            rows.push((t.id, p));
        }
    }
    io::write_coreset_csv(&rows, &dataset.transform, &a.output)
}

#[derive(Serialize)]
struct ParamsEcho {
    eps: f64,
    delta: f64,
    alpha: Option<f64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    max_side: Option<f64>,
    coreset: Option<CoresetMethod>,
    exact_eval: bool,
    hull_trick: bool,
    one_sided: bool,
    c_net: f64,
    c_sample: f64,
    k_bound: usize,
}

#[derive(Serialize)]
struct ScanOutput {
    version: &'static str,
    model: Model,
    family: ShapeFamily,
    #[serde(rename = "fn")]
    fun: DiscrepancyFn,
    /// Best region in the input file's coordinate system.
    shape: Option<Shape>,
    shape_normalized: Option<Shape>,
    /// Exact statistics of the region over the full dataset.
    r_frac: f64,
    b_frac: f64,
    phi: f64,
    n: usize,
    s: usize,
    n_k: usize,
    s_k: usize,
    seed: u64,
    runtime_ms: u64,
    params: ParamsEcho,
}

fn resolve_window(
    r_min: Option<f64>,
    r_max: Option<f64>,
    z: Option<u32>,
) -> Result<(Option<f64>, Option<f64>)> {
    match (r_min, r_max, z) {
        (Some(lo), None, Some(z)) => Ok((Some(lo), Some(lo * f64::powi(2.0, z as i32)))),
        (lo, hi, _) => Ok((lo, hi)),
    }
}

fn cmd_scan(a: ScanArgs) -> Result<()> {
    let dataset = ingest_reporting(&a.input)?;
    let fun = resolve_fn(a.fun, a.one_sided)?;
    let seed = resolve_seed(a.seed);
    let to_norm = |d: Option<f64>| match a.units {
        UnitsArg::Normalized => d,
        UnitsArg::Original => d.map(|v| v * dataset.transform.scale),
    };
    let (r_min, r_max) = resolve_window(to_norm(a.r_min), to_norm(a.r_max), a.z)?;
    let alpha = to_norm(a.alpha);
    let coreset = match a.coreset {
        Some(m) => Some(build_coreset(m, alpha, r_min)?),
        None => None,
    };
    let spec = ScanSpec {
        model: a.model.into(),
        family: a.family.into(),
        fun,
        eps: a.eps,
        delta: a.delta,
        seed,
        coreset,
        partial_method: PartialMethod::Even,
        alpha,
        r_min,
        r_max,
        max_side: to_norm(a.max_side),
        exact_eval: a.exact_eval,
        hull_trick: a.hull_trick,
        c_net: a.c_net,
        c_sample: a.c_sample,
        k_bound: a.k_bound,
    };
    let out = run_scan(&dataset, &spec)?;
    let stats = match &out.result.shape {
        Some(shape) => exact_region_stats(&dataset, shape, spec.model, fun)?,
        None => trajscan::RegionStats::zero(),
    };
    let output = ScanOutput {
        version: VERSION,
        model: spec.model,
        family: spec.family,
        fun,
        shape: out
            .result
            .shape
            .as_ref()
            .map(|s| dataset.transform.shape_to_original(s)),
        shape_normalized: out.result.shape,
        r_frac: stats.r_frac,
        b_frac: stats.b_frac,
        phi: stats.phi,
        n: out.n,
        s: out.s,
        n_k: out.n_k,
        s_k: out.s_k,
        seed,
        runtime_ms: report_ms(out.result.elapsed.as_millis() as u64),
        params: ParamsEcho {
            eps: spec.eps,
            delta: spec.delta,
            alpha: spec.alpha,
            r_min: spec.r_min,
            r_max: spec.r_max,
            max_side: spec.max_side,
            coreset: spec.coreset,
            exact_eval: spec.exact_eval,
            hull_trick: spec.hull_trick,
            one_sided: a.one_sided,
            c_net: spec.c_net,
            c_sample: spec.c_sample,
            k_bound: spec.k_bound,
        },
    };
    io::emit(&serde_json::to_string_pretty(&output)?, a.output.as_deref())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let dataset = ingest_reporting(&a.input)?;
    let fun = resolve_fn(a.fun, a.one_sided)?;
    let to_norm = |d: Option<f64>| match a.units {
        UnitsArg::Normalized => d,
        UnitsArg::Original => d.map(|v| v * dataset.transform.scale),
    };
    let opts = OracleOptions {
        membership: match a.membership {
            MembershipArg::Segments => OracleMembership::Segments,
            MembershipArg::Points => OracleMembership::Points,
        },
        r_min: to_norm(a.r_min),
        r_max: to_norm(a.r_max),
        max_trajectories: a.max_trajectories,
        max_waypoints: a.max_waypoints,
    };
    let result = exact_scan(&dataset, a.family.into(), a.model.into(), fun, &opts)?;
    let output = serde_json::json!({
        "version": VERSION,
        "model": Model::from(a.model),
        "family": ShapeFamily::from(a.family),
        "fn": fun,
        "shape": result.shape.as_ref().map(|s| dataset.transform.shape_to_original(s)),
        "shape_normalized": result.shape,
        "r_frac": result.stats.r_frac,
        "b_frac": result.stats.b_frac,
        "phi": result.stats.phi,
        "runtime_ms": report_ms(result.elapsed.as_millis() as u64),
    });
    io::emit(&serde_json::to_string_pretty(&output)?, a.output.as_deref())
}

fn cmd_plant(a: PlantArgs) -> Result<()> {
    let dataset = ingest_reporting(&a.input)?;
    let fun = resolve_fn(a.fun, false)?;
    let seed = resolve_seed(a.seed);
    let cfg = PlantConfig {
        family: a.family.into(),
        model: a.model.into(),
        p: a.p,
        q: a.q,
        f: a.f,
        fun,
        seed,
    };
    let planted = plant(&dataset, &cfg)?;
    io::write_waypoint_csv(&planted.dataset, &a.output)?;
    let region = serde_json::json!({
        "version": VERSION,
        "model": cfg.model,
        "family": cfg.family,
        "fn": cfg.fun,
        "shape": planted.dataset.transform.shape_to_original(&planted.shape),
        "shape_normalized": planted.shape,
        "r_frac": planted.stats.r_frac,
        "b_frac": planted.stats.b_frac,
        "phi": planted.stats.phi,
        "p": cfg.p,
        "q": cfg.q,
        "f": cfg.f,
        "seed": seed,
    });
    io::emit(&serde_json::to_string_pretty(&region)?, a.region_out.as_deref())
}

fn cmd_power(a: PowerArgs) -> Result<()> {
    let fun = resolve_fn(a.fun, a.one_sided)?;
    let seed = resolve_seed(a.seed);
    let synth = SyntheticConfig {
        n_traj: a.n_traj,
        waypoints_min: a.waypoints_min,
        waypoints_max: a.waypoints_max,
        step_scale: a.step_scale,
        generator: match a.generator {
            GeneratorArg::RandomWalk => Generator::RandomWalk,
            GeneratorArg::SegmentBundle => Generator::SegmentBundle,
        },
        seed,
    };
    let plant_cfg = PlantConfig {
        family: a.family.into(),
        model: a.model.into(),
        p: a.p,
        q: a.q,
        f: a.f,
        fun,
        seed,
    };
    let (r_min, r_max) = resolve_window(a.r_min, a.r_max, a.z)?;
    let coreset = match a.coreset {
        Some(m) => Some(build_coreset(m, a.alpha, r_min)?),
        None => None,
    };
    let spec = ScanSpec {
        model: a.model.into(),
        family: a.family.into(),
        fun,
        eps: a.eps,
        delta: a.delta,
        seed,
        coreset,
        partial_method: PartialMethod::Even,
        alpha: a.alpha,
        r_min,
        r_max,
        max_side: a.max_side,
        exact_eval: a.exact_eval,
        hull_trick: a.hull_trick,
        c_net: a.c_net,
        c_sample: a.c_sample,
        k_bound: a.k_bound,
    };
    let report = power_experiment(&synth, &plant_cfg, &spec, a.trials, a.threshold)?;

    let mut csv = String::from("seed,eps,alpha,planted_phi,found_phi,runtime_ms\n");
    for t in &report.trials {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.seed,
            t.eps,
            t.alpha,
            t.planted_phi,
            t.found_phi,
            report_ms(t.runtime_ms)
        ));
    }
    if let Some(path) = &a.output {
        std::fs::write(path, &csv).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let summary = serde_json::json!({
        "version": VERSION,
        "model": Model::from(a.model),
        "family": ShapeFamily::from(a.family),
        "fn": fun,
        "trials": report.trials.len(),
        "threshold": report.threshold,
        "recovery_rate": report.recovery_rate,
        "mean_planted_phi": report.trials.iter().map(|t| t.planted_phi).sum::<f64>()
            / report.trials.len() as f64,
        "mean_found_phi": report.trials.iter().map(|t| t.found_phi).sum::<f64>()
            / report.trials.len() as f64,
        "seed": seed,
    });
    io::emit(&serde_json::to_string_pretty(&summary)?, a.summary_out.as_deref())
}
