//! Full-model scanning: a trajectory counts once while any of its coreset
//! points is inside the swept shape, tracked by per-trajectory counters that
//! update the running statistics only on zero/nonzero transitions.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::coreset::{simplify_dataset, CoresetMethod, GridKernelParams};
use crate::discrepancy::DiscrepancyFn;
use crate::error::Error;
use crate::geom::{convex_hull, Point, Rect, Shape, BOUNDARY_EPS};
use crate::grid::{cell_of, PointGrid};
use crate::sampling::{draw_trajectory_sets, SamplingParams};
use crate::scan_point::{ext_index, grid_lines, ScanResult};
use crate::sweep::{disk_pivot_sweep, halfplane_sweep, Accum, Best};
use crate::trajectory::{LabeledPointSet, Trajectory, TrajectoryDataset};

/// Per-trajectory membership counters with running recorded/baseline sums,
/// updated only when a trajectory's counter toggles between zero and nonzero.
/// Insert/remove take point indices of the set the state was built from.
#[derive(Debug, Clone)]
pub struct CounterState {
    point_traj: Vec<u32>,
    traj_r: Vec<f64>,
    traj_b: Vec<f64>,
    counts: Vec<u32>,
    pub running_r: f64,
    pub running_b: f64,
    r_total: f64,
    b_total: f64,
    traj_ids: Vec<u64>,
}

impl CounterState {
    /// Builds counters for `sample`; each trajectory's `(r, b)` weights are
    /// taken from its points (constant per trajectory for full-model sets).
    pub fn new(sample: &LabeledPointSet) -> Self {
        let mut index: BTreeMap<u64, u32> = BTreeMap::new();
        let mut traj_ids = Vec::new();
        let mut traj_r = Vec::new();
        let mut traj_b = Vec::new();
        for p in &sample.points {
            index.entry(p.traj_id).or_insert_with(|| {
                traj_ids.push(p.traj_id);
                traj_r.push(p.r_weight);
                traj_b.push(p.b_weight);
                (traj_ids.len() - 1) as u32
            });
        }
        let point_traj = sample.points.iter().map(|p| index[&p.traj_id]).collect();
        let r_total = traj_r.iter().sum();
        let b_total = traj_b.iter().sum();
        CounterState {
            point_traj,
            counts: vec![0; traj_ids.len()],
            traj_r,
            traj_b,
            running_r: 0.0,
            running_b: 0.0,
            r_total,
            b_total,
            traj_ids,
        }
    }

    pub fn count_of(&self, traj_id: u64) -> u32 {
        self.traj_ids
            .iter()
            .position(|&id| id == traj_id)
            .map_or(0, |i| self.counts[i])
    }

    pub fn all_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }
}

impl Accum for CounterState {
    fn insert(&mut self, idx: usize) {
        let t = self.point_traj[idx] as usize;
        self.counts[t] += 1;
        if self.counts[t] == 1 {
            self.running_r += self.traj_r[t];
            self.running_b += self.traj_b[t];
        }
    }

    fn remove(&mut self, idx: usize) {
        let t = self.point_traj[idx] as usize;
        debug_assert!(self.counts[t] > 0);
        self.counts[t] -= 1;
        if self.counts[t] == 0 {
            self.running_r -= self.traj_r[t];
            self.running_b -= self.traj_b[t];
        }
    }

    fn fracs(&self) -> (f64, f64) {
        (
            if self.r_total > 0.0 { self.running_r / self.r_total } else { 0.0 },
            if self.b_total > 0.0 { self.running_b / self.b_total } else { 0.0 },
        )
    }
}

/// Radial halfplane sweep with counter bookkeeping: exact full-model maximum
/// over closed halfplanes through one net point and one sample point.
pub fn max_halfplane_full(
    net: &LabeledPointSet,
    sample: &LabeledPointSet,
    fun: DiscrepancyFn,
) -> Result<ScanResult, Error> {
    let started = Instant::now();
    if net.is_empty() {
        return Err(Error::EmptyNet);
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let locs: Vec<Point> = sample.points.iter().map(|p| p.location).collect();
    let ids: Vec<usize> = (0..locs.len()).collect();
    let best = net
        .points
        .par_iter()
        .map_init(
            || CounterState::new(sample),
            |counters, q| {
                let mut best = Best::new();
                halfplane_sweep(q.location, &locs, &ids, counters, fun, &mut best);
                best
            },
        )
        .reduce(Best::new, Best::merge);
    Ok(ScanResult::from_best(best, started))
}

/// Naive full-model disk scan (no spatial pruning): every net point is a
/// pivot and the whole sample is swept; radii outside the window are skipped.
/// The multiscale scanner exists because this is the slow baseline.
pub fn max_disk_full(
    net: &LabeledPointSet,
    sample: &LabeledPointSet,
    fun: DiscrepancyFn,
    r_min: Option<f64>,
    r_max: Option<f64>,
) -> Result<ScanResult, Error> {
    let started = Instant::now();
    if net.len() < 2 {
        return Err(Error::invalid("disk scanning needs at least 2 net points"));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let locs: Vec<Point> = sample.points.iter().map(|p| p.location).collect();
    let ids: Vec<usize> = (0..locs.len()).collect();
    let seconds: Vec<Point> = net.points.iter().map(|p| p.location).collect();
    let best = net
        .points
        .par_iter()
        .map_init(
            || CounterState::new(sample),
            |counters, q| {
                let mut best = Best::new();
                disk_pivot_sweep(
                    q.location, &seconds, &locs, &ids, counters, fun, r_min, r_max, true, &mut best,
                );
                best
            },
        )
        .reduce(Best::new, Best::merge);
    Ok(ScanResult::from_best(best, started))
}

/// Candidate grid lines for the spatially-approximated rectangle scan: walk
/// the sorted distinct net coordinates and emit a line once the current
/// column reaches both marks, at least `alpha` wide and at least `eps_grid`
/// of the sample's baseline mass (whichever is reached later); the last
/// coordinate is always kept. `eps_grid = 0` keeps every coordinate at least
/// `alpha` apart.
fn thinned_lines(net_coords: Vec<f64>, sample_sorted: &[(f64, f64)], alpha: f64, eps_grid: f64) -> Vec<f64> {
    if net_coords.is_empty() {
        return net_coords;
    }
    let total_mass: f64 = sample_sorted.iter().map(|&(_, m)| m).sum();
    let cap = eps_grid * total_mass;
    let mut out = vec![net_coords[0]];
    let mut mass_acc = 0.0;
    let mut sp = sample_sorted.partition_point(|&(x, _)| x <= net_coords[0]);
    for &c in &net_coords[1..] {
        while sp < sample_sorted.len() && sample_sorted[sp].0 <= c {
            mass_acc += sample_sorted[sp].1;
            sp += 1;
        }
        if c - *out.last().unwrap() >= alpha && mass_acc >= cap {
            out.push(c);
            mass_acc = 0.0;
        }
    }
    let last = *net_coords.last().unwrap();
    if *out.last().unwrap() != last {
        out.push(last);
    }
    out
}

/// Spatially-approximated full-model rectangle scan: candidate sides snap to
/// grid lines at least `alpha` apart (O(1/alpha) per axis), the right side
/// sweeps with counter bookkeeping, and candidates wider or taller than
/// `max_side` are skipped.
pub fn max_rect_full(
    net: &LabeledPointSet,
    sample: &LabeledPointSet,
    fun: DiscrepancyFn,
    alpha: f64,
    eps_grid: f64,
    max_side: Option<f64>,
) -> Result<ScanResult, Error> {
    let started = Instant::now();
    if net.is_empty() {
        return Err(Error::EmptyNet);
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("rectangle grid alpha must be positive"));
    }
    let mut xs: Vec<(f64, f64)> = sample.points.iter().map(|p| (p.location.x, p.b_weight.max(0.0))).collect();
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ys: Vec<(f64, f64)> = sample.points.iter().map(|p| (p.location.y, p.b_weight.max(0.0))).collect();
    ys.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lines_x = thinned_lines(grid_lines(net.points.iter().map(|p| p.location.x)), &xs, alpha, eps_grid);
    let lines_y = thinned_lines(grid_lines(net.points.iter().map(|p| p.location.y)), &ys, alpha, eps_grid);
    let gx = lines_x.len();
    let gy = lines_y.len();

    // Sample point indices bucketed by interleaved (row, column) indices.
    let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 2 * gy]; // (ext_x, point idx)
    for (i, p) in sample.points.iter().enumerate() {
        let (Some(ix), Some(iy)) = (ext_index(&lines_x, p.location.x), ext_index(&lines_y, p.location.y))
        else {
            continue;
        };
        rows[iy].push((ix, i));
    }
    let rows = &rows;
    let lines_x = &lines_x;
    let lines_y = &lines_y;

    let best = (0..gy)
        .into_par_iter()
        .map_init(
            || CounterState::new(sample),
            |counters, b| {
                let mut best = Best::new();
                let mut strip_cols: Vec<Vec<usize>> = vec![Vec::new(); 2 * gx];
                let mut inserted: Vec<usize> = Vec::new();
                for t in b..gy {
                    if let Some(ms) = max_side {
                        if lines_y[t] - lines_y[b] > ms + BOUNDARY_EPS {
                            break;
                        }
                    }
                    let from_row = if t == b { 2 * b } else { 2 * t - 1 };
                    for row in &rows[from_row..=2 * t] {
                        for &(ix, i) in row {
                            strip_cols[ix].push(i);
                        }
                    }
                    for l in 0..gx {
                        inserted.clear();
                        for r in l..gx {
                            if let Some(ms) = max_side {
                                if lines_x[r] - lines_x[l] > ms + BOUNDARY_EPS {
                                    break;
                                }
                            }
                            let from_col = if r == l { 2 * l } else { 2 * r - 1 };
                            for col in &strip_cols[from_col..=2 * r] {
                                for &i in col {
                                    counters.insert(i);
                                    inserted.push(i);
                                }
                            }
                            let (rf, bf) = counters.fracs();
                            best.offer(
                                Shape::Rect(Rect::new(lines_x[l], lines_x[r], lines_y[b], lines_y[t])),
                                rf,
                                bf,
                                fun,
                            );
                        }
                        for &i in &inserted {
                            counters.remove(i);
                        }
                    }
                }
                best
            },
        )
        .reduce(Best::new, Best::merge);
    Ok(ScanResult::from_best(best, started))
}

/// Parameters for the multiscale disk scan over radii in `[r_min, r_max]`
/// with `r_max = r_min * 2^z`.
#[derive(Debug, Clone)]
pub struct MultiScaleParams {
    pub r_min: f64,
    pub r_max: f64,
    /// Spatial approximation error for the per-subrange grid-kernel coresets.
    pub alpha: f64,
    /// Prune each trajectory's swept points to their hull in the inverted
    /// parameter space (membership per trajectory is unchanged, so scores
    /// are identical; there are just fewer events).
    pub use_hull_trick: bool,
    /// Fetch candidate partners and swept points from a neighborhood large
    /// enough for every in-window disk (exact scores on the candidate
    /// family). Off = the 5x5-block restriction, which is faster and may
    /// undercount trajectories that only touch a disk outside the block.
    pub exact_eval: bool,
    /// Coreset override; default builds `GridKernel(alpha, r)` per subrange.
    pub coreset: Option<CoresetMethod>,
}

impl MultiScaleParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max <= 1.0) {
            return Err(Error::invalid(format!(
                "need 0 < r_min < r_max <= 1, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.coreset.is_none() {
            GridKernelParams::new(self.alpha, self.r_min)?;
        }
        Ok(())
    }

    /// Doubling subranges `[r, 2r]` covering the window; the last one is
    /// capped at `r_max` when the ratio is not an exact power of two.
    pub fn subranges(&self) -> Result<Vec<(f64, f64)>, Error> {
        self.validate()?;
        let mut out = Vec::new();
        let mut r = self.r_min;
        while r < self.r_max {
            out.push((r, (2.0 * r).min(self.r_max)));
            r *= 2.0;
        }
        Ok(out)
    }
}

/// Keeps, per trajectory, only the points whose inversion around `pivot`
/// lies on that trajectory's inverted convex hull. A halfplane in inverted
/// space contains a point of the set iff it contains a hull vertex, so
/// trajectory membership indicators (and therefore counters) are unchanged.
fn hull_trick_filter(
    pivot: Point,
    local: &[usize],
    sample: &LabeledPointSet,
) -> Vec<usize> {
    let mut by_traj: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &i in local {
        by_traj.entry(sample.points[i].traj_id).or_default().push(i);
    }
    let mut keep = Vec::with_capacity(local.len());
    for (_, idxs) in by_traj {
        if idxs.len() <= 3 {
            keep.extend(idxs);
            continue;
        }
        let mut inv: Vec<(Point, usize)> = Vec::with_capacity(idxs.len());
        for &i in &idxs {
            let rel = sample.points[i].location.sub(pivot);
            let n2 = rel.norm_sq();
            if n2 < BOUNDARY_EPS * BOUNDARY_EPS {
                keep.push(i); // pivot-coincident: always on the boundary
            } else {
                inv.push((rel.scale(1.0 / n2), i));
            }
        }
        if inv.is_empty() {
            continue;
        }
        let hull = convex_hull(&inv.iter().map(|&(p, _)| p).collect::<Vec<_>>());
        for (p, i) in inv {
            if hull.contains(&p) {
                keep.push(i);
            }
        }
    }
    keep.sort_unstable();
    keep.dedup();
    keep
}

/// Multiscale disk scanning: decomposes `[r_min, r_max]` into doubling
/// subranges `[r, 2r]`, builds radius-matched coresets per subrange, lays an
/// r-edge grid, and for every net point pivots a local inverted sweep over
/// nearby candidates, with counters deduplicating trajectories.
pub fn max_disk_multiscale(
    dataset: &TrajectoryDataset,
    params: &MultiScaleParams,
    sampling: &SamplingParams,
    fun: DiscrepancyFn,
) -> Result<ScanResult, Error> {
    let started = Instant::now();
    let subranges = params.subranges()?;
    let (net_idx, sample_idx) = draw_trajectory_sets(dataset, sampling)?;
    let net_trajs: Vec<Trajectory> = net_idx.iter().map(|&i| dataset.trajectories[i].clone()).collect();
    let sample_trajs: Vec<Trajectory> =
        sample_idx.iter().map(|&i| dataset.trajectories[i].clone()).collect();

    let mut best = Best::new();
    for (r, r_hi) in subranges {
        let method = params
            .coreset
            .unwrap_or(CoresetMethod::GridKernel { alpha: params.alpha, r });
        let net_pts = simplify_dataset(&net_trajs, &method, sampling.seed)?;
        let sample_pts = simplify_dataset(&sample_trajs, &method, sampling.seed)?;
        if net_pts.is_empty() || sample_pts.is_empty() {
            continue;
        }
        let net_grid = PointGrid::build(net_pts.points.iter().map(|p| p.location), r);
        let sample_grid = PointGrid::build(sample_pts.points.iter().map(|p| p.location), r);
        // A disk through the pivot with radius <= 2r keeps all its points
        // within 4r, i.e. within 5 cells; the fast path stops at the 5x5
        // block (2 cells) and tolerates the undercount.
        let reach: i64 = if params.exact_eval { 5 } else { 2 };

        let sub_best = net_pts
            .points
            .par_iter()
            .map_init(
                || CounterState::new(&sample_pts),
                |counters, q| {
                    let mut best = Best::new();
                    let cell = cell_of(q.location, r);
                    let seconds: Vec<Point> = net_grid
                        .block(cell, reach)
                        .into_iter()
                        .map(|i| net_pts.points[i].location)
                        .collect();
                    let mut local = sample_grid.block(cell, reach);
                    if params.use_hull_trick {
                        local = hull_trick_filter(q.location, &local, &sample_pts);
                    }
                    let locs: Vec<Point> =
                        local.iter().map(|&i| sample_pts.points[i].location).collect();
                    disk_pivot_sweep(
                        q.location,
                        &seconds,
                        &locs,
                        &local,
                        counters,
                        fun,
                        Some(r),
                        Some(r_hi),
                        true,
                        &mut best,
                    );
                    best
                },
            )
            .reduce(Best::new, Best::merge);
        best = best.merge(sub_best);
    }
    Ok(ScanResult::from_best(best, started))
}
