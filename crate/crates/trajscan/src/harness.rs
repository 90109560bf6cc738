//! Benchmark harness: synthetic trajectory generators, planted anomalies
//! with known statistics, the exhaustive scan oracle, and statistical-power
//! experiments.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coreset::traj_seed;
use crate::discrepancy::{DiscrepancyFn, Model, RegionStats};
use crate::error::Error;
use crate::geom::{
    circumcircle, segment_clip_length, shape_contains, trajectory_intersects, Disk, Halfplane,
    Point, Rect, Segment, Shape, ShapeFamily,
};
use crate::runner::{run_scan, ScanSpec};
use crate::scan_point::grid_lines;
use crate::sweep::Best;
use crate::scan_point::ScanResult;
use crate::trajectory::{Trajectory, TrajectoryDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Tangled random walks filling the domain.
    RandomWalk,
    /// Trajectories clustered along a few shared routes.
    SegmentBundle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_traj: usize,
    pub waypoints_min: usize,
    pub waypoints_max: usize,
    pub step_scale: f64,
    pub generator: Generator,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn random_walk(n_traj: usize, seed: u64) -> Self {
        SyntheticConfig {
            n_traj,
            waypoints_min: 8,
            waypoints_max: 20,
            step_scale: 0.03,
            generator: Generator::RandomWalk,
            seed,
        }
    }
}

/// Reflects a coordinate into `[0, 1]`.
fn reflect01(x: f64) -> f64 {
    let m = x.rem_euclid(2.0);
    if m > 1.0 {
        2.0 - m
    } else {
        m
    }
}

/// Seeded synthetic trajectories inside the unit square; all waypoints are
/// clipped to the domain and labels start unrecorded.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> TrajectoryDataset {
    assert!(cfg.n_traj >= 1 && cfg.waypoints_min >= 1 && cfg.waypoints_min <= cfg.waypoints_max);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let routes: Vec<(Point, Point)> = match cfg.generator {
        Generator::RandomWalk => Vec::new(),
        Generator::SegmentBundle => {
            let n_routes = (cfg.n_traj / 100).max(3);
            (0..n_routes)
                .map(|_| {
                    (
                        Point::new(rng.gen(), rng.gen()),
                        Point::new(rng.gen(), rng.gen()),
                    )
                })
                .collect()
        }
    };
    let trajectories = (0..cfg.n_traj)
        .map(|id| {
            let m = rng.gen_range(cfg.waypoints_min..=cfg.waypoints_max);
            let mut wps = Vec::with_capacity(m);
            match cfg.generator {
                Generator::RandomWalk => {
                    let mut p = Point::new(rng.gen(), rng.gen());
                    wps.push(p);
                    for _ in 1..m {
                        p = Point::new(
                            reflect01(p.x + (rng.gen::<f64>() * 2.0 - 1.0) * cfg.step_scale),
                            reflect01(p.y + (rng.gen::<f64>() * 2.0 - 1.0) * cfg.step_scale),
                        );
                        wps.push(p);
                    }
                }
                Generator::SegmentBundle => {
                    let (a, b) = routes[rng.gen_range(0..routes.len())];
                    let jitter = cfg.step_scale;
                    for j in 0..m {
                        let t = j as f64 / (m - 1).max(1) as f64;
                        let on_route = a.add(b.sub(a).scale(t));
                        wps.push(Point::new(
                            reflect01(on_route.x + (rng.gen::<f64>() * 2.0 - 1.0) * jitter),
                            reflect01(on_route.y + (rng.gen::<f64>() * 2.0 - 1.0) * jitter),
                        ));
                    }
                }
            }
            Trajectory::new(id as u64, wps, false)
        })
        .collect();
    TrajectoryDataset::from_normalized(trajectories)
}

/// Model-specific membership of one trajectory in a shape: intersection for
/// full, begins-inside-and-ends-outside for flux, arclength fraction for
/// partial.
pub fn membership_fraction(t: &Trajectory, shape: &Shape, model: Model) -> f64 {
    match model {
        Model::Full => {
            if trajectory_intersects(&t.waypoints, shape) {
                1.0
            } else {
                0.0
            }
        }
        Model::Flux => {
            let b_in = shape_contains(shape, t.begin());
            let e_in = shape_contains(shape, t.end());
            if b_in && !e_in {
                1.0
            } else {
                0.0
            }
        }
        Model::Partial => {
            let total = t.arclength();
            if total == 0.0 {
                return 0.0;
            }
            let inside: f64 = t
                .waypoints
                .windows(2)
                .map(|w| segment_clip_length(Segment::new(w[0], w[1]), shape))
                .sum();
            inside / total
        }
    }
}

/// Exact region statistics of `shape` over the full dataset under the
/// model's own semantics (segment-level intersection, analytic clipping,
/// signed endpoint logic). This is what reported scan results are re-scored
/// with.
pub fn exact_region_stats(
    dataset: &TrajectoryDataset,
    shape: &Shape,
    model: Model,
    fun: DiscrepancyFn,
) -> Result<RegionStats, Error> {
    if model == Model::Flux && fun != DiscrepancyFn::Linear {
        return Err(Error::FluxRequiresLinear);
    }
    let (r_frac, b_frac) = match model {
        Model::Full => {
            let (mut ri, mut bi, mut rt, mut bt) = (0.0, 0.0, 0.0, 0.0);
            for t in &dataset.trajectories {
                rt += t.r_value();
                bt += t.b_value();
                if trajectory_intersects(&t.waypoints, shape) {
                    ri += t.r_value();
                    bi += t.b_value();
                }
            }
            (
                if rt > 0.0 { ri / rt } else { 0.0 },
                if bt > 0.0 { bi / bt } else { 0.0 },
            )
        }
        Model::Partial => {
            let (mut ri, mut bi, mut rt, mut bt) = (0.0, 0.0, 0.0, 0.0);
            for t in &dataset.trajectories {
                let total = t.arclength();
                if total == 0.0 {
                    continue;
                }
                let inside: f64 = t
                    .waypoints
                    .windows(2)
                    .map(|w| segment_clip_length(Segment::new(w[0], w[1]), shape))
                    .sum();
                rt += t.r_value() * total;
                bt += t.b_value() * total;
                ri += t.r_value() * inside;
                bi += t.b_value() * inside;
            }
            (
                if rt > 0.0 { ri / rt } else { 0.0 },
                if bt > 0.0 { bi / bt } else { 0.0 },
            )
        }
        Model::Flux => {
            // Signed endpoint convention of the flux reduction: begins count
            // +r/-b, ends count -r/+b.
            let (mut rs, mut bs, mut rt, mut bt) = (0.0, 0.0, 0.0, 0.0);
            for t in &dataset.trajectories {
                rt += t.r_value();
                bt += t.b_value();
                let b_in = shape_contains(shape, t.begin());
                let e_in = shape_contains(shape, t.end());
                if b_in && !e_in {
                    rs += t.r_value();
                    bs -= t.b_value();
                } else if e_in && !b_in {
                    rs -= t.r_value();
                    bs += t.b_value();
                }
            }
            (
                if rt > 0.0 { rs / rt } else { 0.0 },
                if bt > 0.0 { bs / bt } else { 0.0 },
            )
        }
    };
    Ok(RegionStats { r_frac, b_frac, phi: fun.eval(r_frac, b_frac) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantConfig {
    pub family: ShapeFamily,
    pub model: Model,
    /// Recorded rate outside the planted region.
    pub p: f64,
    /// Recorded rate inside the planted region.
    pub q: f64,
    /// Target baseline mass fraction of the region.
    pub f: f64,
    pub fun: DiscrepancyFn,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub dataset: TrajectoryDataset,
    pub shape: Shape,
    pub stats: RegionStats,
}

/// Baseline mass fraction of `shape` under the model: fraction of
/// trajectories for full/flux, arclength fraction for partial.
fn baseline_mass(dataset: &TrajectoryDataset, shape: &Shape, model: Model) -> f64 {
    match model {
        Model::Partial => {
            let total = dataset.total_arclength();
            if total == 0.0 {
                return 0.0;
            }
            dataset
                .trajectories
                .iter()
                .map(|t| membership_fraction(t, shape, model) * t.arclength())
                .sum::<f64>()
                / total
        }
        _ => {
            dataset
                .trajectories
                .iter()
                .map(|t| membership_fraction(t, shape, model))
                .sum::<f64>()
                / dataset.len() as f64
        }
    }
}

fn shape_of_size(family: ShapeFamily, center: Point, direction: Point, size: f64) -> Shape {
    match family {
        ShapeFamily::Disk => Shape::Disk(Disk::new(center, size.max(1e-9))),
        ShapeFamily::Rect => {
            let h = size.max(1e-9);
            Shape::Rect(Rect::new(center.x - h, center.x + h, center.y - h, center.y + h))
        }
        ShapeFamily::Halfplane => {
            // grow the halfplane by sliding its boundary along the normal
            Shape::Halfplane(Halfplane::new(direction, direction.dot(center) + size - 1.5))
        }
    }
}

/// Plants a region of the requested family whose model-specific baseline
/// mass is within 10% of `f` (binary search on size around random centers),
/// then relabels: trajectories inside get recorded with probability `q`,
/// outside with `p` (partial interpolates by in-fraction). Returns the
/// shape and its exact statistics on the relabeled data.
pub fn plant(dataset: &TrajectoryDataset, cfg: &PlantConfig) -> Result<Planted, Error> {
    if !(cfg.f > 0.0 && cfg.f < 1.0) || !(0.0..=1.0).contains(&cfg.p) || !(0.0..=1.0).contains(&cfg.q) {
        return Err(Error::invalid("plant rates must satisfy 0<f<1, 0<=p,q<=1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best_realized = 0.0f64;
    let mut found: Option<Shape> = None;
    'attempts: for _ in 0..20 {
        let center = Point::new(rng.gen(), rng.gen());
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let direction = Point::new(angle.cos(), angle.sin());
        // size in [0, hi]: mass is (near-)monotone in size for all families
        let mut lo = 0.0f64;
        let mut hi = match cfg.family {
            ShapeFamily::Disk => 1.5,
            ShapeFamily::Rect => 1.0,
            ShapeFamily::Halfplane => 3.0,
        };
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            let shape = shape_of_size(cfg.family, center, direction, mid);
            let mass = baseline_mass(dataset, &shape, cfg.model);
            if (mass - cfg.f).abs() <= 0.1 * cfg.f {
                found = Some(shape);
                break 'attempts;
            }
            if (mass - cfg.f).abs() < (best_realized - cfg.f).abs() {
                best_realized = mass;
            }
            if mass < cfg.f {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let shape = found.ok_or(Error::PlantUnreachable { target: cfg.f, realized: best_realized })?;

    let mut relabeled = dataset.clone();
    for t in &mut relabeled.trajectories {
        let mu = membership_fraction(t, &shape, cfg.model);
        let rate = cfg.q * mu + cfg.p * (1.0 - mu);
        t.recorded = rng.gen::<f64>() < rate;
    }
    let stats = exact_region_stats(&relabeled, &shape, cfg.model, cfg.fun)?;
    Ok(Planted { dataset: relabeled, shape, stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMembership {
    /// Ground-truth segment-level intersection (the model semantics).
    Segments,
    /// Waypoints stand in for the trajectory, matching what point-based
    /// scanners see. Identical to `Segments` for halfplanes.
    Points,
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub membership: OracleMembership,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub max_trajectories: usize,
    pub max_waypoints: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            membership: OracleMembership::Segments,
            r_min: None,
            r_max: None,
            max_trajectories: 200,
            max_waypoints: 2000,
        }
    }
}

fn oracle_eval(
    dataset: &TrajectoryDataset,
    shape: &Shape,
    model: Model,
    membership: OracleMembership,
) -> (f64, f64) {
    match (model, membership) {
        (Model::Full, OracleMembership::Points) => {
            let (mut ri, mut bi, mut rt, mut bt) = (0.0, 0.0, 0.0, 0.0);
            for t in &dataset.trajectories {
                rt += t.r_value();
                bt += t.b_value();
                if t.waypoints.iter().any(|&w| shape_contains(shape, w)) {
                    ri += t.r_value();
                    bi += t.b_value();
                }
            }
            (
                if rt > 0.0 { ri / rt } else { 0.0 },
                if bt > 0.0 { bi / bt } else { 0.0 },
            )
        }
        _ => {
            let st = exact_region_stats(dataset, shape, model, DiscrepancyFn::Linear)
                .expect("linear always valid");
            (st.r_frac, st.b_frac)
        }
    }
}

/// Exhaustive combinatorial oracle: enumerates halfplanes through all
/// waypoint pairs, disks through all triples plus diametral pairs, or
/// rectangles over all coordinate 4-tuples, evaluating each candidate with
/// exact model semantics. Guarded, since this is brutally quartic.
pub fn exact_scan(
    dataset: &TrajectoryDataset,
    family: ShapeFamily,
    model: Model,
    fun: DiscrepancyFn,
    opts: &OracleOptions,
) -> Result<ScanResult, Error> {
    let started = Instant::now();
    if model == Model::Flux && fun != DiscrepancyFn::Linear {
        return Err(Error::FluxRequiresLinear);
    }
    let waypoints: usize = dataset.trajectories.iter().map(|t| t.waypoints.len()).sum();
    if dataset.len() > opts.max_trajectories || waypoints > opts.max_waypoints {
        return Err(Error::OracleGuard {
            trajectories: dataset.len(),
            waypoints,
            max_trajectories: opts.max_trajectories,
            max_waypoints: opts.max_waypoints,
        });
    }
    if dataset.recorded_count() == 0 {
        return Err(Error::NoRecorded);
    }
    let pts: Vec<Point> = dataset
        .trajectories
        .iter()
        .flat_map(|t| t.waypoints.iter().copied())
        .collect();
    let score = |shape: Shape, best: &mut Best| {
        let (r, b) = oracle_eval(dataset, &shape, model, opts.membership);
        best.offer(shape, r, b, fun);
    };
    let radius_ok =
        |r: f64| opts.r_min.is_none_or(|lo| r >= lo) && opts.r_max.is_none_or(|hi| r <= hi);

    let n = pts.len();
    let best = match family {
        ShapeFamily::Halfplane => (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = Best::new();
                for j in (i + 1)..n {
                    let d = pts[j].sub(pts[i]);
                    if d.norm_sq() == 0.0 {
                        continue;
                    }
                    for normal in [Point::new(d.y, -d.x), Point::new(-d.y, d.x)] {
                        score(
                            Shape::Halfplane(Halfplane::through(
                                normal.scale(1.0 / normal.norm()),
                                pts[i],
                            )),
                            &mut best,
                        );
                    }
                }
                best
            })
            .reduce(Best::new, Best::merge),
        ShapeFamily::Disk => (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = Best::new();
                for j in (i + 1)..n {
                    let diam = Disk::new(
                        pts[i].add(pts[j].sub(pts[i]).scale(0.5)),
                        pts[i].dist(pts[j]) / 2.0,
                    );
                    if diam.radius > 0.0 && radius_ok(diam.radius) {
                        score(Shape::Disk(diam), &mut best);
                    }
                    for k in (j + 1)..n {
                        if let Some(disk) = circumcircle(pts[i], pts[j], pts[k]) {
                            if radius_ok(disk.radius) {
                                score(Shape::Disk(disk), &mut best);
                            }
                        }
                    }
                }
                best
            })
            .reduce(Best::new, Best::merge),
        ShapeFamily::Rect => {
            let xs = grid_lines(pts.iter().map(|p| p.x));
            let ys = grid_lines(pts.iter().map(|p| p.y));
            (0..xs.len())
                .into_par_iter()
                .map(|li| {
                    let mut best = Best::new();
                    for ri in li..xs.len() {
                        for bi in 0..ys.len() {
                            for ti in bi..ys.len() {
                                score(
                                    Shape::Rect(Rect::new(xs[li], xs[ri], ys[bi], ys[ti])),
                                    &mut best,
                                );
                            }
                        }
                    }
                    best
                })
                .reduce(Best::new, Best::merge)
        }
    };
    Ok(ScanResult::from_best(best, started))
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub eps: f64,
    pub alpha: f64,
    pub planted_phi: f64,
    pub found_phi: f64,
    pub found_shape: Option<Shape>,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    pub trials: Vec<TrialRecord>,
    pub threshold: f64,
    pub recovery_rate: f64,
}

/// Runs `trials` independent generate/plant/scan rounds. The found score is
/// the returned shape re-scored exactly on the full planted dataset;
/// recovery means reaching `threshold` (default 0.9) of the planted score.
pub fn power_experiment(
    synth: &SyntheticConfig,
    plant_cfg: &PlantConfig,
    spec: &ScanSpec,
    trials: usize,
    threshold: f64,
) -> Result<PowerReport, Error> {
    if trials == 0 {
        return Err(Error::invalid("power experiment needs at least one trial"));
    }
    let mut records = Vec::with_capacity(trials);
    let mut recovered = 0usize;
    for trial in 0..trials {
        let trial_seed = traj_seed(synth.seed, trial as u64);
        let data = generate_synthetic(&SyntheticConfig { seed: trial_seed, ..synth.clone() });
        let planted = plant(&data, &PlantConfig { seed: traj_seed(trial_seed, 1), ..plant_cfg.clone() })?;
        let run = run_scan(
            &planted.dataset,
            &ScanSpec { seed: traj_seed(trial_seed, 2), ..spec.clone() },
        )?;
        let found_phi = match &run.result.shape {
            Some(shape) => {
                exact_region_stats(&planted.dataset, shape, plant_cfg.model, plant_cfg.fun)?.phi
            }
            None => 0.0,
        };
        if found_phi >= threshold * planted.stats.phi {
            recovered += 1;
        }
        records.push(TrialRecord {
            seed: trial_seed,
            eps: spec.eps,
            alpha: spec.alpha.unwrap_or(0.0),
            planted_phi: planted.stats.phi,
            found_phi,
            found_shape: run.result.shape,
            runtime_ms: run.result.elapsed.as_millis() as u64,
        });
    }
    Ok(PowerReport {
        recovery_rate: recovered as f64 / trials as f64,
        trials: records,
        threshold,
    })
}
