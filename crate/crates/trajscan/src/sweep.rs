//! Shared scanning machinery: running-sum accumulators, the radial halfplane
//! sweep, and the inversion-based disk sweep. The point-model and full-model
//! scanners differ only in the accumulator they plug in here.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::discrepancy::{DiscrepancyFn, RegionStats};
use crate::geom::{shape_key_lt, Disk, Halfplane, Point, Shape, BOUNDARY_EPS};
use crate::trajectory::LabeledPoint;

/// Squared distance below which two points are treated as coincident.
const COINCIDENT_SQ: f64 = BOUNDARY_EPS * BOUNDARY_EPS;

/// Incremental region statistics over an indexed point set.
pub(crate) trait Accum {
    fn insert(&mut self, idx: usize);
    fn remove(&mut self, idx: usize);
    /// Current `(r_frac, b_frac)`.
    fn fracs(&self) -> (f64, f64);
}

/// Point-model accumulator: signed weight sums over the points currently
/// inside, normalized by the positive masses of the whole sample.
pub(crate) struct WeightAccum<'a> {
    pts: &'a [LabeledPoint],
    r_norm: f64,
    b_norm: f64,
    r_sum: f64,
    b_sum: f64,
}

impl<'a> WeightAccum<'a> {
    pub fn new(pts: &'a [LabeledPoint]) -> Self {
        let mut r_norm = 0.0;
        let mut b_norm = 0.0;
        for p in pts {
            if p.r_weight > 0.0 {
                r_norm += p.r_weight;
            }
            if p.b_weight > 0.0 {
                b_norm += p.b_weight;
            }
        }
        WeightAccum { pts, r_norm, b_norm, r_sum: 0.0, b_sum: 0.0 }
    }
}

impl Accum for WeightAccum<'_> {
    fn insert(&mut self, idx: usize) {
        self.r_sum += self.pts[idx].r_weight;
        self.b_sum += self.pts[idx].b_weight;
    }

    fn remove(&mut self, idx: usize) {
        self.r_sum -= self.pts[idx].r_weight;
        self.b_sum -= self.pts[idx].b_weight;
    }

    fn fracs(&self) -> (f64, f64) {
        (
            if self.r_norm > 0.0 { self.r_sum / self.r_norm } else { 0.0 },
            if self.b_norm > 0.0 { self.b_sum / self.b_norm } else { 0.0 },
        )
    }
}

/// Best-candidate tracker with the deterministic tie-break: higher score
/// wins, exact ties go to the lexicographically smallest parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct Best {
    pub phi: f64,
    pub shape: Option<Shape>,
    pub stats: RegionStats,
}

impl Best {
    pub fn new() -> Self {
        Best { phi: f64::NEG_INFINITY, shape: None, stats: RegionStats::zero() }
    }

    pub fn offer(&mut self, shape: Shape, r: f64, b: f64, fun: DiscrepancyFn) {
        let phi = fun.eval(r, b);
        let better = match &self.shape {
            None => phi > self.phi || self.phi == f64::NEG_INFINITY,
            Some(cur) => phi > self.phi || (phi == self.phi && shape_key_lt(&shape, cur)),
        };
        if better {
            self.phi = phi;
            self.shape = Some(shape);
            self.stats = RegionStats { r_frac: r, b_frac: b, phi };
        }
    }

    pub fn merge(self, other: Best) -> Best {
        match (&self.shape, &other.shape) {
            (_, None) => self,
            (None, _) => other,
            (Some(a), Some(b)) => {
                if other.phi > self.phi || (other.phi == self.phi && shape_key_lt(b, a)) {
                    other
                } else {
                    self
                }
            }
        }
    }
}

fn norm_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a < 0.0 {
        a += TAU;
    }
    a
}

/// Rotates the closed halfplane `{x : n(theta) . x <= n(theta) . pivot}`
/// through a full turn, maintaining membership incrementally and scoring at
/// every event angle. The candidates visited are exactly the closed
/// halfplanes whose boundary passes through `pivot` and one sweep point (both
/// orientations). `ids[i]` is the accumulator id of `locs[i]`, so callers can
/// sweep a local subset against a globally-normalized accumulator. Leaves
/// `accum` empty.
pub(crate) fn halfplane_sweep<A: Accum>(
    pivot: Point,
    locs: &[Point],
    ids: &[usize],
    accum: &mut A,
    fun: DiscrepancyFn,
    best: &mut Best,
) {
    debug_assert_eq!(locs.len(), ids.len());
    let mut permanent: Vec<usize> = Vec::new();
    // (angle, is_leave, local idx)
    let mut events: Vec<(f64, bool, u32)> = Vec::with_capacity(2 * locs.len());
    for (i, &p) in locs.iter().enumerate() {
        let d = p.sub(pivot);
        if d.norm_sq() < COINCIDENT_SQ {
            accum.insert(ids[i]);
            permanent.push(ids[i]);
            continue;
        }
        let phi_p = d.y.atan2(d.x);
        events.push((norm_angle(phi_p + FRAC_PI_2), false, i as u32));
        events.push((norm_angle(phi_p - FRAC_PI_2), true, i as u32));
    }
    if events.is_empty() {
        let (r, b) = accum.fracs();
        best.offer(
            Shape::Halfplane(Halfplane::through(Point::new(1.0, 0.0), pivot)),
            r,
            b,
            fun,
        );
        for &i in &permanent {
            accum.remove(i);
        }
        return;
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // First pass sets the exact state just before the first event: enter and
    // leave assign membership absolutely, so one warm-up circuit suffices.
    let mut inside = vec![false; locs.len()];
    for &(_, is_leave, idx) in &events {
        let i = idx as usize;
        if is_leave {
            if inside[i] {
                accum.remove(ids[i]);
                inside[i] = false;
            }
        } else if !inside[i] {
            accum.insert(ids[i]);
            inside[i] = true;
        }
    }

    // Scoring pass: per distinct angle, apply enters, score the closed
    // halfplane (boundary points are in), then apply leaves.
    let mut pos = 0;
    while pos < events.len() {
        let angle = events[pos].0;
        let mut end = pos;
        while end < events.len() && events[end].0 == angle {
            end += 1;
        }
        for &(_, is_leave, idx) in &events[pos..end] {
            let i = idx as usize;
            if !is_leave && !inside[i] {
                accum.insert(ids[i]);
                inside[i] = true;
            }
        }
        let (r, b) = accum.fracs();
        let normal = Point::new(angle.cos(), angle.sin());
        best.offer(Shape::Halfplane(Halfplane::through(normal, pivot)), r, b, fun);
        for &(_, is_leave, idx) in &events[pos..end] {
            let i = idx as usize;
            if is_leave && inside[i] {
                accum.remove(ids[i]);
                inside[i] = false;
            }
        }
        pos = end;
    }

    for (i, flag) in inside.iter().enumerate() {
        if *flag {
            accum.remove(ids[i]);
        }
    }
    for &i in &permanent {
        accum.remove(i);
    }
}

/// One disk-sweep candidate: circle through the pivot, one `second` point,
/// and (at event angles) one sweep point.
fn disk_candidate(pivot: Point, p_star: Point, theta: f64) -> Option<Disk> {
    let v = Point::new(-theta.sin(), theta.cos());
    let d_p = v.dot(p_star);
    if d_p == 0.0 {
        return None;
    }
    let c = v.scale(0.5 / d_p);
    let radius = c.norm();
    if !radius.is_finite() || radius <= 0.0 {
        return None;
    }
    Some(Disk::new(pivot.add(c), radius))
}

fn radius_ok(r: f64, r_min: Option<f64>, r_max: Option<f64>) -> bool {
    r_min.is_none_or(|lo| r >= lo) && r_max.is_none_or(|hi| r <= hi)
}

/// Scans all disks with `pivot` on the boundary and a second boundary point
/// from `seconds`, by inverting around the pivot (`x -> x/|x|^2` maps disks
/// through the pivot to halfplanes) and rotating a line through each inverted
/// second point. Scores closed membership at event angles and, when
/// `include_diametral` is set, at each pair's diametral disk. Degenerate
/// collinear triples fall on the excluded through-origin angle and are
/// skipped. `ids[i]` is the accumulator id of `locs[i]`. Leaves `accum`
/// empty.
#[allow(clippy::too_many_arguments)]
pub(crate) fn disk_pivot_sweep<A: Accum>(
    pivot: Point,
    seconds: &[Point],
    locs: &[Point],
    ids: &[usize],
    accum: &mut A,
    fun: DiscrepancyFn,
    r_min: Option<f64>,
    r_max: Option<f64>,
    include_diametral: bool,
    best: &mut Best,
) {
    debug_assert_eq!(locs.len(), ids.len());
    // Points coinciding with the pivot lie on every candidate boundary.
    let mut pivot_permanent: Vec<usize> = Vec::new();
    let mut inverted: Vec<Option<Point>> = Vec::with_capacity(locs.len());
    for (i, &x) in locs.iter().enumerate() {
        let x_rel = x.sub(pivot);
        let n2 = x_rel.norm_sq();
        if n2 < COINCIDENT_SQ {
            accum.insert(ids[i]);
            pivot_permanent.push(ids[i]);
            inverted.push(None);
        } else {
            inverted.push(Some(x_rel.scale(1.0 / n2)));
        }
    }

    let mut events: Vec<(f64, u32)> = Vec::new();
    let mut inside: Vec<bool> = Vec::new();
    let mut on_second: Vec<bool> = Vec::new();
    let mut second_permanent: Vec<usize> = Vec::new();
    for &sp in seconds {
        let p_rel = sp.sub(pivot);
        if p_rel.norm_sq() < COINCIDENT_SQ {
            continue;
        }
        let p_star = p_rel.scale(1.0 / p_rel.norm_sq());
        // Sweep angles are measured from the through-origin line, which is
        // excluded: it is where the membership side flips and where collinear
        // degenerate triples live.
        let split = (-p_star.y).atan2(-p_star.x);

        events.clear();
        second_permanent.clear();
        on_second.clear();
        on_second.resize(locs.len(), false);
        for (i, inv) in inverted.iter().enumerate() {
            let Some(x_star) = inv else { continue };
            if x_star.sub(p_star).norm_sq() < COINCIDENT_SQ {
                // same location as the second point: on every candidate circle
                accum.insert(ids[i]);
                second_permanent.push(ids[i]);
                on_second[i] = true;
                continue;
            }
            let delta = x_star.sub(p_star);
            let a = (delta.y.atan2(delta.x) - split).rem_euclid(PI);
            if a > 0.0 && a < PI {
                events.push((a, i as u32));
            }
            // a == 0 exactly: constant membership, handled by the init below.
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        // Initial membership at an angle strictly between the split line and
        // the first event.
        let first_a = events.first().map_or(PI / 2.0, |e| e.0 / 2.0);
        let theta_s = split + first_a;
        let v = Point::new(-theta_s.sin(), theta_s.cos());
        let d_p = v.dot(p_star);
        inside.clear();
        inside.resize(locs.len(), false);
        for (i, inv) in inverted.iter().enumerate() {
            let Some(x_star) = inv else { continue };
            if on_second[i] {
                continue;
            }
            let member = if d_p > 0.0 { v.dot(*x_star) >= d_p } else { v.dot(*x_star) <= d_p };
            if member {
                accum.insert(ids[i]);
                inside[i] = true;
            }
        }

        let diam_a = if include_diametral {
            let theta_d = (-p_rel.x).atan2(p_rel.y);
            Some((theta_d - split).rem_euclid(PI))
        } else {
            None
        };
        let mut diam_done = false;
        let try_diametral = |upto: f64, accum: &A, best: &mut Best, done: &mut bool| {
            if let Some(a) = diam_a {
                if !*done && a < upto && a > 0.0 {
                    *done = true;
                    if let Some(disk) = disk_candidate(pivot, p_star, split + a) {
                        if radius_ok(disk.radius, r_min, r_max) {
                            let (r, b) = accum.fracs();
                            best.offer(Shape::Disk(disk), r, b, fun);
                        }
                    }
                }
            }
        };

        let mut pos = 0;
        let mut to_remove: Vec<usize> = Vec::new();
        while pos < events.len() {
            let a = events[pos].0;
            let mut end = pos;
            while end < events.len() && events[end].0 == a {
                end += 1;
            }
            try_diametral(a, accum, best, &mut diam_done);
            // A point on the sweep line sits on the candidate circle: in.
            to_remove.clear();
            for &(_, idx) in &events[pos..end] {
                let i = idx as usize;
                if inside[i] {
                    to_remove.push(i);
                } else {
                    accum.insert(ids[i]);
                    inside[i] = true;
                }
            }
            if a == diam_a.unwrap_or(f64::NAN) {
                diam_done = true; // same circle as this event batch
            }
            if let Some(disk) = disk_candidate(pivot, p_star, split + a) {
                if radius_ok(disk.radius, r_min, r_max) {
                    let (r, b) = accum.fracs();
                    best.offer(Shape::Disk(disk), r, b, fun);
                }
            }
            for &i in &to_remove {
                accum.remove(ids[i]);
                inside[i] = false;
            }
            pos = end;
        }
        try_diametral(PI, accum, best, &mut diam_done);

        for (i, flag) in inside.iter().enumerate() {
            if *flag {
                accum.remove(ids[i]);
            }
        }
        for &i in &second_permanent {
            accum.remove(i);
        }
    }

    for &i in &pivot_permanent {
        accum.remove(i);
    }
}
