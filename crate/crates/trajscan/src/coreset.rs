//! Per-trajectory spatial coresets: convert a polyline into a small labeled
//! point set that preserves shape intersections up to an inward shift of
//! `alpha`, for a target shape family.
//!
//! Guarantee shapes per method: `Even`, `Gridding`, and `RandomSample` cover
//! all three families; `DouglasPeucker`, `ConvexHull`, and `ApproxHull` cover
//! halfplanes; `GridKernel` covers disks of radius at least `r`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geom::{alpha_kernel, convex_hull, Point};
use crate::trajectory::{LabeledPoint, LabeledPointSet, Trajectory, TrajectoryDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum CoresetMethod {
    AllWaypoints,
    RandomSample { alpha: f64 },
    Even { alpha: f64 },
    DouglasPeucker { alpha: f64 },
    ConvexHull,
    ApproxHull { alpha: f64 },
    LiftedHull,
    GridKernel { alpha: f64, r: f64 },
    Gridding { alpha: f64 },
}

impl CoresetMethod {
    pub fn validate(&self) -> Result<(), Error> {
        let check_alpha = |alpha: f64| {
            if alpha > 0.0 && alpha < 1.0 && alpha.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "coreset alpha must be in (0, 1), got {alpha}"
                )))
            }
        };
        match *self {
            CoresetMethod::AllWaypoints | CoresetMethod::ConvexHull | CoresetMethod::LiftedHull => Ok(()),
            CoresetMethod::RandomSample { alpha }
            | CoresetMethod::Even { alpha }
            | CoresetMethod::DouglasPeucker { alpha }
            | CoresetMethod::ApproxHull { alpha }
            | CoresetMethod::Gridding { alpha } => check_alpha(alpha),
            CoresetMethod::GridKernel { alpha, r } => {
                check_alpha(alpha)?;
                GridKernelParams::new(alpha, r).map(|_| ())
            }
        }
    }
}

/// Derived grid-kernel parameters: cell edge `gamma = sqrt(2 alpha r -
/// alpha^2/2)` and the per-cell kernel error `alpha / (2 sqrt(2) gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridKernelParams {
    pub gamma: f64,
    pub kernel_err: f64,
}

impl GridKernelParams {
    pub fn new(alpha: f64, r: f64) -> Result<Self, Error> {
        let disc = 2.0 * alpha * r - alpha * alpha / 2.0;
        if !(alpha > 0.0) || !(r > 0.0) || disc <= 0.0 {
            return Err(Error::invalid(format!(
                "grid kernel needs 2*alpha*r > alpha^2/2 (alpha={alpha}, r={r})"
            )));
        }
        let gamma = disc.sqrt();
        let kernel_err = alpha / (2.0 * std::f64::consts::SQRT_2 * gamma);
        if !(kernel_err > 0.0 && kernel_err < 1.0) {
            return Err(Error::invalid(format!(
                "grid kernel error {kernel_err} out of (0,1); increase r (alpha={alpha}, r={r})"
            )));
        }
        Ok(GridKernelParams { gamma, kernel_err })
    }
}

/// Point at arclength position `s` along the polyline (clamped to its ends).
pub(crate) fn point_at_arclength(waypoints: &[Point], s: f64) -> Point {
    if s <= 0.0 {
        return waypoints[0];
    }
    let mut remaining = s;
    for w in waypoints.windows(2) {
        let len = w[0].dist(w[1]);
        if remaining <= len {
            if len == 0.0 {
                return w[0];
            }
            return w[0].add(w[1].sub(w[0]).scale(remaining / len));
        }
        remaining -= len;
    }
    *waypoints.last().unwrap()
}

/// Points at arclength positions `offset, offset + alpha, ...` strictly
/// before the total length. Empty when no position fits.
fn even_positions(waypoints: &[Point], alpha: f64, offset: f64) -> Vec<Point> {
    let total: f64 = waypoints.windows(2).map(|w| w[0].dist(w[1])).sum();
    if total <= offset {
        return Vec::new();
    }
    let count = ((total - offset) / alpha).ceil().max(1.0) as usize;
    // Walk once; positions are sorted.
    let mut out = Vec::with_capacity(count);
    let mut seg_start = 0.0;
    let mut seg_idx = 0;
    for i in 0..count {
        let s = offset + i as f64 * alpha;
        if s >= total {
            break;
        }
        while seg_idx + 1 < waypoints.len() - 1
            && seg_start + waypoints[seg_idx].dist(waypoints[seg_idx + 1]) < s
        {
            seg_start += waypoints[seg_idx].dist(waypoints[seg_idx + 1]);
            seg_idx += 1;
        }
        let w0 = waypoints[seg_idx];
        let w1 = waypoints[seg_idx + 1];
        let len = w0.dist(w1);
        let local = (s - seg_start).clamp(0.0, len);
        out.push(if len == 0.0 {
            w0
        } else {
            w0.add(w1.sub(w0).scale(local / len))
        });
    }
    out
}

fn douglas_peucker(waypoints: &[Point], alpha: f64) -> Vec<Point> {
    fn recurse(pts: &[Point], alpha: f64, keep: &mut Vec<usize>, lo: usize, hi: usize) {
        if hi <= lo + 1 {
            return;
        }
        let seg = crate::geom::Segment::new(pts[lo], pts[hi]);
        let mut worst = 0.0;
        let mut worst_i = lo;
        for i in (lo + 1)..hi {
            let d = crate::geom::point_segment_dist(pts[i], seg);
            if d > worst {
                worst = d;
                worst_i = i;
            }
        }
        if worst > alpha {
            recurse(pts, alpha, keep, lo, worst_i);
            keep.push(worst_i);
            recurse(pts, alpha, keep, worst_i, hi);
        }
    }
    let mut keep = vec![0];
    recurse(waypoints, alpha, &mut keep, 0, waypoints.len() - 1);
    keep.push(waypoints.len() - 1);
    keep.sort_unstable();
    keep.dedup();
    keep.into_iter().map(|i| waypoints[i]).collect()
}

/// Waypoints whose paraboloid lift is a vertex of the 3D convex hull.
///
/// Lifts of distinct planar points are extreme on the paraboloid (the tangent
/// plane at a lifted point strictly separates it from every other lift), so
/// this keeps every distinct waypoint and drops only exact duplicates.
fn lifted_hull(waypoints: &[Point]) -> Vec<Point> {
    let mut seen: Vec<Point> = Vec::with_capacity(waypoints.len());
    for &p in waypoints {
        if !seen.contains(&p) {
            seen.push(p);
        }
    }
    seen
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic per-trajectory stream seed.
pub fn traj_seed(base: u64, traj_id: u64) -> u64 {
    splitmix64(base ^ splitmix64(traj_id.wrapping_add(1)))
}

fn random_sample(waypoints: &[Point], alpha: f64, seed: u64) -> Vec<Point> {
    use rand::Rng;
    use rand::SeedableRng;
    let total: f64 = waypoints.windows(2).map(|w| w[0].dist(w[1])).sum();
    if total == 0.0 {
        return vec![waypoints[0]];
    }
    let ratio = total / alpha;
    let k = (ratio * (ratio + 2.0).ln()).ceil().max(1.0) as usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| point_at_arclength(waypoints, rng.gen::<f64>() * total))
        .collect()
}

fn grid_kernel(waypoints: &[Point], alpha: f64, r: f64) -> Result<Vec<Point>, Error> {
    let params = GridKernelParams::new(alpha, r)?;
    let total: f64 = waypoints.windows(2).map(|w| w[0].dist(w[1])).sum();
    if total == 0.0 {
        return Ok(vec![waypoints[0]]);
    }
    // Densify so the per-cell kernel sees curve points, not just sparse
    // waypoints; a curve point is then within alpha/8 of some sample.
    let mut dense = even_positions(waypoints, alpha / 4.0, 0.0);
    dense.extend_from_slice(waypoints);
    let mut cells: BTreeMap<(i64, i64), Vec<Point>> = BTreeMap::new();
    for p in dense {
        let key = (
            (p.x / params.gamma).floor() as i64,
            (p.y / params.gamma).floor() as i64,
        );
        cells.entry(key).or_default().push(p);
    }
    let mut out = Vec::new();
    for pts in cells.values() {
        out.extend(alpha_kernel(pts, params.kernel_err));
    }
    Ok(out)
}

fn gridding(waypoints: &[Point], alpha: f64) -> Vec<Point> {
    let total: f64 = waypoints.windows(2).map(|w| w[0].dist(w[1])).sum();
    let base = if total == 0.0 {
        vec![waypoints[0]]
    } else {
        even_positions(waypoints, alpha / 2.0, 0.0)
    };
    // Snap to centers of an (alpha/sqrt(8))-edge grid; displacement <= alpha/4.
    let edge = alpha / 8.0f64.sqrt();
    let mut out: Vec<Point> = Vec::with_capacity(base.len());
    for p in base {
        let c = Point::new(
            ((p.x / edge).floor() + 0.5) * edge,
            ((p.y / edge).floor() + 0.5) * edge,
        );
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

/// Simplifies one trajectory into its coreset point sequence. `seed` is used
/// only by `RandomSample`.
pub fn simplify(t: &Trajectory, method: &CoresetMethod, seed: u64) -> Result<Vec<Point>, Error> {
    method.validate()?;
    let wps = &t.waypoints;
    if wps.len() == 1 {
        return Ok(vec![wps[0]]);
    }
    Ok(match *method {
        CoresetMethod::AllWaypoints => wps.clone(),
        CoresetMethod::RandomSample { alpha } => random_sample(wps, alpha, seed),
        CoresetMethod::Even { alpha } => {
            let pts = even_positions(wps, alpha, 0.0);
            if pts.is_empty() {
                vec![wps[0]]
            } else {
                pts
            }
        }
        CoresetMethod::DouglasPeucker { alpha } => douglas_peucker(wps, alpha),
        CoresetMethod::ConvexHull => convex_hull(wps),
        CoresetMethod::ApproxHull { alpha } => alpha_kernel(wps, alpha),
        CoresetMethod::LiftedHull => lifted_hull(wps),
        CoresetMethod::GridKernel { alpha, r } => grid_kernel(wps, alpha, r)?,
        CoresetMethod::Gridding { alpha } => gridding(wps, alpha),
    })
}

/// Grid-kernel coreset for disks of radius at least `r` (callable directly
/// when the radius window is known).
pub fn simplify_grid_kernel(t: &Trajectory, alpha: f64, r: f64) -> Result<Vec<Point>, Error> {
    if t.waypoints.len() == 1 {
        return Ok(vec![t.waypoints[0]]);
    }
    grid_kernel(&t.waypoints, alpha, r)
}

/// Dataset-level `Even` placement where the arclength offset carries across
/// consecutive trajectories, as if they were chained together: the first
/// point of trajectory `j` sits a distance `alpha` along the chain from the
/// last point of trajectory `j - 1`. Zero-arclength trajectories contribute
/// no points (and do not advance the offset).
pub fn chain_even(dataset: &TrajectoryDataset, alpha: f64) -> LabeledPointSet {
    assert!(alpha > 0.0);
    let mut points = Vec::new();
    let mut offset = 0.0f64;
    for t in &dataset.trajectories {
        let total = t.arclength();
        if total == 0.0 {
            continue;
        }
        let placed = even_positions(&t.waypoints, alpha, offset);
        let n = placed.len();
        for p in placed {
            points.push(LabeledPoint {
                location: p,
                traj_id: t.id,
                r_weight: t.r_value(),
                b_weight: t.b_value(),
            });
        }
        offset = if n > 0 {
            offset + n as f64 * alpha - total
        } else {
            offset - total
        };
    }
    LabeledPointSet::from_points(points)
}

/// Applies `method` to every trajectory, tagging points with the
/// trajectory's raw `(r, b)` weights.
pub fn simplify_dataset(
    trajectories: &[Trajectory],
    method: &CoresetMethod,
    seed: u64,
) -> Result<LabeledPointSet, Error> {
    let mut points = Vec::new();
    for t in trajectories {
        let pts = simplify(t, method, traj_seed(seed, t.id))?;
        for p in pts {
            points.push(LabeledPoint {
                location: p,
                traj_id: t.id,
                r_weight: t.r_value(),
                b_weight: t.b_value(),
            });
        }
    }
    Ok(LabeledPointSet::from_points(points))
}
