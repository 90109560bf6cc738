//! Exact planar primitives: points, segments, the three scan-shape families,
//! containment and clipping predicates, convex hulls, directional-width
//! kernels, and the paraboloid lift that turns disks into halfspaces.
//!
//! All shapes are closed sets: a point on the boundary counts as inside.
//! Predicates run in plain `f64` with a small boundary tolerance
//! ([`BOUNDARY_EPS`]); there is no exact arithmetic.

use serde::{Deserialize, Serialize};

/// Tolerance applied to boundary comparisons in containment predicates.
pub const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    pub fn dist_sq(self, o: Point) -> f64 {
        self.sub(o).norm_sq()
    }

    /// Cross product of `self` and `o` as 2-vectors.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }
}

/// Closed halfplane `{ p : normal . p <= offset }` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halfplane {
    pub normal: Point,
    pub offset: f64,
}

impl Halfplane {
    /// Normalizes `normal` to unit length (required by the type invariant).
    pub fn new(normal: Point, offset: f64) -> Self {
        let n = normal.norm();
        assert!(n > 0.0, "halfplane normal must be nonzero");
        Halfplane {
            normal: normal.scale(1.0 / n),
            offset: offset / n,
        }
    }

    /// Halfplane with the given unit normal whose boundary passes through `q`.
    pub fn through(normal: Point, q: Point) -> Self {
        Halfplane::new(normal, normal.dot(q))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.normal.dot(p) <= self.offset + BOUNDARY_EPS
    }

    /// Signed distance of `p` to the boundary; negative inside.
    pub fn signed_dist(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Closed disk `{ p : |p - center| <= radius }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Self {
        debug_assert!(radius > 0.0 && radius.is_finite());
        Disk { center, radius }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.dist_sq(self.center) <= self.radius * self.radius + BOUNDARY_EPS
    }
}

/// Closed axis-aligned rectangle, membership closed on all four sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        debug_assert!(x_lo <= x_hi && y_lo <= y_hi);
        Rect { x_lo, x_hi, y_lo, y_hi }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_lo - BOUNDARY_EPS
            && p.x <= self.x_hi + BOUNDARY_EPS
            && p.y >= self.y_lo - BOUNDARY_EPS
            && p.y <= self.y_hi + BOUNDARY_EPS
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }
}

/// A scan region: one of the three supported shape families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Shape {
    Halfplane(Halfplane),
    Disk(Disk),
    Rect(Rect),
}

/// Selector for a family of scan shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeFamily {
    Halfplane,
    Disk,
    Rect,
}

impl Shape {
    /// Parameter vector used for deterministic tie-breaking between
    /// equal-score shapes; compared lexicographically.
    pub fn key(&self) -> (u8, [f64; 4]) {
        match self {
            Shape::Halfplane(h) => (0, [h.normal.x, h.normal.y, h.offset, 0.0]),
            Shape::Disk(d) => (1, [d.center.x, d.center.y, d.radius, 0.0]),
            Shape::Rect(r) => (2, [r.x_lo, r.x_hi, r.y_lo, r.y_hi]),
        }
    }
}

/// Compares shape parameter vectors; total order, used under parallel merges.
pub fn shape_key_lt(a: &Shape, b: &Shape) -> bool {
    let (ta, ka) = a.key();
    let (tb, kb) = b.key();
    if ta != tb {
        return ta < tb;
    }
    for i in 0..4 {
        match ka[i].total_cmp(&kb[i]) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Image of a point under the paraboloid lift `(x, y) -> (x, y, x^2 + y^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Lifts `p` onto the unit paraboloid. A point lies in a disk exactly when
/// its lift lies in the disk's lifted halfspace (see [`disk_contains_lifted`]).
pub fn veronese_lift(p: Point) -> LiftedPoint {
    LiftedPoint {
        x: p.x,
        y: p.y,
        z: p.x * p.x + p.y * p.y,
    }
}

/// Membership of a lifted point in the halfspace corresponding to `disk`:
/// `z - 2 c . (x, y) <= r^2 - |c|^2`, with the same closed convention and
/// tolerance as [`Disk::contains`].
pub fn disk_contains_lifted(disk: &Disk, lp: &LiftedPoint) -> bool {
    let c = disk.center;
    lp.z - 2.0 * (c.x * lp.x + c.y * lp.y) + c.norm_sq() <= disk.radius * disk.radius + BOUNDARY_EPS
}

/// Circumcircle of three points; `None` when they are (near-)collinear.
pub fn circumcircle(a: Point, b: Point, c: Point) -> Option<Disk> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-12 {
        return None;
    }
    let ux = (a.norm_sq() * (b.y - c.y) + b.norm_sq() * (c.y - a.y) + c.norm_sq() * (a.y - b.y)) / d;
    let uy = (a.norm_sq() * (c.x - b.x) + b.norm_sq() * (a.x - c.x) + c.norm_sq() * (b.x - a.x)) / d;
    let center = Point::new(ux, uy);
    let radius = center.dist(a);
    (radius > 0.0 && radius.is_finite()).then(|| Disk::new(center, radius))
}

/// Closed-set membership; total over all shape families.
pub fn shape_contains(shape: &Shape, p: Point) -> bool {
    match shape {
        Shape::Halfplane(h) => h.contains(p),
        Shape::Disk(d) => d.contains(p),
        Shape::Rect(r) => r.contains(p),
    }
}

/// Exact arclength of `seg` intersected with `shape`.
///
/// Halfplane: linear clip. Disk: quadratic roots. Rect: parametric
/// (Liang-Barsky) clip. Always in `[0, seg.length()]`.
pub fn segment_clip_length(seg: Segment, shape: &Shape) -> f64 {
    let len = seg.length();
    if len == 0.0 {
        return 0.0;
    }
    let (lo, hi) = match shape {
        Shape::Halfplane(h) => {
            let sa = h.signed_dist(seg.a);
            let sb = h.signed_dist(seg.b);
            if sa <= 0.0 && sb <= 0.0 {
                (0.0, 1.0)
            } else if sa > 0.0 && sb > 0.0 {
                return 0.0;
            } else {
                let t = sa / (sa - sb);
                if sa <= 0.0 {
                    (0.0, t)
                } else {
                    (t, 1.0)
                }
            }
        }
        Shape::Disk(d) => {
            let dir = seg.b.sub(seg.a);
            let rel = seg.a.sub(d.center);
            let a2 = dir.norm_sq();
            let b1 = dir.dot(rel);
            let c0 = rel.norm_sq() - d.radius * d.radius;
            let disc = b1 * b1 - a2 * c0;
            if disc < 0.0 {
                return 0.0;
            }
            let sq = disc.sqrt();
            let t0 = (-b1 - sq) / a2;
            let t1 = (-b1 + sq) / a2;
            (t0.max(0.0), t1.min(1.0))
        }
        Shape::Rect(r) => {
            let dir = seg.b.sub(seg.a);
            match liang_barsky(seg.a, dir, r, 0.0) {
                Some(iv) => iv,
                None => return 0.0,
            }
        }
    };
    len * (hi - lo).max(0.0)
}

/// Parametric clip of the ray `a + t * dir`, `t` in `[0, 1]`, against `r`
/// grown by `pad` on every side. Returns the clipped interval, if non-empty.
fn liang_barsky(a: Point, dir: Point, r: &Rect, pad: f64) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let checks = [
        (-dir.x, a.x - (r.x_lo - pad)),
        (dir.x, (r.x_hi + pad) - a.x),
        (-dir.y, a.y - (r.y_lo - pad)),
        (dir.y, (r.y_hi + pad) - a.y),
    ];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Distance from `p` to the closed segment `seg`.
pub fn point_segment_dist(p: Point, seg: Segment) -> f64 {
    let d = seg.b.sub(seg.a);
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return p.dist(seg.a);
    }
    let t = (p.sub(seg.a).dot(d) / len_sq).clamp(0.0, 1.0);
    p.dist(seg.a.add(d.scale(t)))
}

/// Whether `seg` meets `shape` at all (boundary touches count).
pub fn segment_intersects(seg: Segment, shape: &Shape) -> bool {
    match shape {
        // A closed halfplane's complement is convex, so a segment meets the
        // halfplane iff one of its endpoints does.
        Shape::Halfplane(h) => h.contains(seg.a) || h.contains(seg.b),
        Shape::Disk(d) => point_segment_dist(d.center, seg) <= d.radius + BOUNDARY_EPS,
        Shape::Rect(r) => {
            if r.contains(seg.a) || r.contains(seg.b) {
                return true;
            }
            liang_barsky(seg.a, seg.b.sub(seg.a), r, BOUNDARY_EPS).is_some()
        }
    }
}

/// Ground-truth trajectory/shape intersection: true iff any segment of the
/// polyline (or the single point when there is one waypoint) meets `shape`.
pub fn trajectory_intersects(waypoints: &[Point], shape: &Shape) -> bool {
    assert!(!waypoints.is_empty(), "trajectory needs at least one waypoint");
    if waypoints.len() == 1 {
        return shape_contains(shape, waypoints[0]);
    }
    waypoints
        .windows(2)
        .any(|w| segment_intersects(Segment::new(w[0], w[1]), shape))
}

/// Extreme points of `points` in counter-clockwise order (monotone chain).
/// Collinear interior points are dropped; one or two distinct points are
/// returned as-is.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    assert!(!points.is_empty());
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| a.sub(o).cross(b.sub(o));
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Maximum over `[t0, t0 + span]` of `min(g1, g2)` where
/// `gi(t) = Ai cos t + Bi sin t`. Exact: the maximum is attained at an
/// endpoint, an interior peak of either sinusoid, or a crossing g1 = g2.
fn max_min_sinusoids_on(a1: f64, b1: f64, a2: f64, b2: f64, t0: f64, span: f64) -> f64 {
    let g1 = |t: f64| a1 * t.cos() + b1 * t.sin();
    let g2 = |t: f64| a2 * t.cos() + b2 * t.sin();
    let eval = |t: f64| g1(t).min(g2(t));
    let mut cands = vec![t0, t0 + span];
    for (a, b) in [(a1, b1), (a2, b2), (a1 - a2, b1 - b2)] {
        // Peaks of g1/g2 and zeros of g1 - g2; zeros of a sinusoid are the
        // peaks of its quarter-turn rotation, handled uniformly via atan2.
        let base = if (a, b) == (a1 - a2, b1 - b2) {
            // crossing: zeros of R cos(t - psi) sit at psi + pi/2 + k pi
            (b1 - b2).atan2(a1 - a2) + std::f64::consts::FRAC_PI_2
        } else {
            b.atan2(a)
        };
        for k in -2i32..=2 {
            let t = base + k as f64 * std::f64::consts::PI;
            if t >= t0 && t <= t0 + span {
                cands.push(t);
            }
        }
    }
    cands.into_iter().map(eval).fold(f64::NEG_INFINITY, f64::max)
}

/// Directional-width kernel of a point multiset.
///
/// Returns a subset `K` of the input such that for every unit direction `u`,
/// `max_K u.p >= max_input u.p - kappa * diam(input)`. The construction keeps
/// the extreme input point for each of `O(1/sqrt(kappa))` canonical
/// directions, then adaptively splits any direction interval whose exact
/// interior error bound exceeds the budget, so the guarantee holds for every
/// input (smooth inputs never trigger a split). The internal budget is
/// `kappa * diam / sqrt(2)`, leaving margin under the declared contract.
pub fn alpha_kernel(points: &[Point], kappa: f64) -> Vec<Point> {
    assert!(!points.is_empty());
    assert!(kappa > 0.0);
    let hull = convex_hull(points);
    let h = hull.len();
    if h <= 3 {
        return hull;
    }
    let mut diam: f64 = 0.0;
    for i in 0..h {
        for j in (i + 1)..h {
            diam = diam.max(hull[i].dist(hull[j]));
        }
    }
    if diam == 0.0 {
        return vec![hull[0]];
    }
    let budget = kappa * diam / std::f64::consts::SQRT_2;

    // Support argmax; ties broken by hull index so the result is stable.
    let argmax = |theta: f64| -> usize {
        let u = Point::new(theta.cos(), theta.sin());
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for (i, p) in hull.iter().enumerate() {
            let v = u.dot(*p);
            if v > best_v {
                best_v = v;
                best = i;
            }
        }
        best
    };

    let dtheta = (8.0 * kappa).sqrt().min(std::f64::consts::FRAC_PI_2);
    let m = (std::f64::consts::TAU / dtheta).ceil() as usize;
    let step = std::f64::consts::TAU / m as f64;

    let mut keep = vec![false; h];
    let mut intervals: Vec<(f64, f64, usize, usize, u32)> = Vec::new();
    let anchors: Vec<usize> = (0..m).map(|j| argmax(j as f64 * step)).collect();
    for j in 0..m {
        keep[anchors[j]] = true;
        intervals.push((
            j as f64 * step,
            step,
            anchors[j],
            anchors[(j + 1) % m],
            0,
        ));
    }

    // Exact error bound for directions inside [t0, t0+span]: the support
    // argmax walks the hull CCW from ia to ib, so only that arc can exceed
    // the kept endpoints.
    while let Some((t0, span, ia, ib, depth)) = intervals.pop() {
        let arc_len = (ib + h - ia) % h;
        if arc_len <= 1 {
            continue;
        }
        let pa = hull[ia];
        let pb = hull[ib];
        let mut err: f64 = 0.0;
        for s in 1..arc_len {
            let v = hull[(ia + s) % h];
            if keep[(ia + s) % h] {
                continue;
            }
            let d1 = v.sub(pa);
            let d2 = v.sub(pb);
            err = err.max(max_min_sinusoids_on(d1.x, d1.y, d2.x, d2.y, t0, span));
        }
        if err <= budget {
            continue;
        }
        if depth >= 48 {
            for s in 1..arc_len {
                keep[(ia + s) % h] = true;
            }
            continue;
        }
        let tm = t0 + span / 2.0;
        let im = argmax(tm);
        keep[im] = true;
        intervals.push((t0, span / 2.0, ia, im, depth + 1));
        intervals.push((tm, span / 2.0, im, ib, depth + 1));
    }

    (0..h).filter(|&i| keep[i]).map(|i| hull[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn disk(cx: f64, cy: f64, r: f64) -> Shape {
        Shape::Disk(Disk::new(Point::new(cx, cy), r))
    }

    fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Shape {
        Shape::Rect(Rect::new(x0, x1, y0, y1))
    }

    #[test]
    fn contains_examples() {
        assert!(shape_contains(&disk(0.5, 0.5, 0.1), Point::new(0.5, 0.5)));
        assert!(shape_contains(&rect(0.0, 1.0, 0.0, 1.0), Point::new(1.0, 0.3)));
        let h = Shape::Halfplane(Halfplane::new(Point::new(0.0, 1.0), 0.5));
        assert!(!shape_contains(&h, Point::new(0.2, 0.7)));
        assert!(shape_contains(&h, Point::new(0.2, 0.5)));
    }

    #[test]
    fn clip_examples() {
        // |(t,0)| = 1 at t = 1, so half the segment is inside.
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(2.0, 0.0));
        let got = segment_clip_length(s, &disk(0.0, 0.0, 1.0));
        assert!((got - 1.0).abs() < 1e-12, "got {got}");

        let s = Segment::new(Point::new(-0.5, 0.5), Point::new(1.5, 0.5));
        let got = segment_clip_length(s, &rect(0.0, 1.0, 0.0, 1.0));
        assert!((got - 1.0).abs() < 1e-12);

        let s = Segment::new(Point::new(5.0, 5.0), Point::new(6.0, 5.0));
        assert_eq!(segment_clip_length(s, &disk(0.0, 0.0, 1.0)), 0.0);
        assert_eq!(segment_clip_length(s, &rect(0.0, 1.0, 0.0, 1.0)), 0.0);

        let h = Shape::Halfplane(Halfplane::new(Point::new(1.0, 0.0), 1.0));
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(2.0, 0.0));
        assert!((segment_clip_length(s, &h) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clip_degenerate_segment() {
        let s = Segment::new(Point::new(0.5, 0.5), Point::new(0.5, 0.5));
        assert_eq!(segment_clip_length(s, &disk(0.5, 0.5, 0.2)), 0.0);
    }

    #[test]
    fn trajectory_intersection_examples() {
        // Crossing segment, no waypoint inside.
        let wps = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let d = disk(0.5, 0.05, 0.08);
        assert!(!shape_contains(&d, wps[0]) && !shape_contains(&d, wps[1]));
        assert!(trajectory_intersects(&wps, &d));

        let far = disk(5.0, 5.0, 0.1);
        assert!(!trajectory_intersects(&wps, &far));

        let single = [Point::new(0.5, 0.5)];
        assert!(trajectory_intersects(&single, &disk(0.5, 0.5, 0.1)));
        assert!(!trajectory_intersects(&single, &disk(0.9, 0.9, 0.1)));
    }

    #[test]
    fn lift_examples() {
        let lp = veronese_lift(Point::new(0.0, 0.0));
        assert_eq!((lp.x, lp.y, lp.z), (0.0, 0.0, 0.0));
        let lp = veronese_lift(Point::new(3.0, 4.0));
        assert_eq!((lp.x, lp.y, lp.z), (3.0, 4.0, 25.0));
        let lp = veronese_lift(Point::new(1.0, -2.0));
        assert_eq!((lp.x, lp.y, lp.z), (1.0, -2.0, 5.0));
    }

    #[test]
    fn lift_agrees_with_disk_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let p = Point::new(rng.gen::<f64>(), rng.gen::<f64>());
            let d = Disk::new(
                Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
                rng.gen::<f64>() * 0.5 + 1e-3,
            );
            assert_eq!(d.contains(p), disk_contains_lifted(&d, &veronese_lift(p)));
        }
    }

    #[test]
    fn disk_containment_monotone_in_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let c = Point::new(rng.gen(), rng.gen());
            let r1 = rng.gen::<f64>() * 0.3 + 1e-3;
            let r2 = r1 + rng.gen::<f64>() * 0.3;
            let p = Point::new(rng.gen(), rng.gen());
            if Disk::new(c, r1).contains(p) {
                assert!(Disk::new(c, r2).contains(p));
            }
        }
    }

    #[test]
    fn hull_examples() {
        let corners = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        let h = convex_hull(&corners);
        assert_eq!(h.len(), 4);
        assert!(!h.contains(&Point::new(0.5, 0.5)));

        let coll: Vec<Point> = (0..5).map(|i| Point::new(i as f64, i as f64)).collect();
        let h = convex_hull(&coll);
        assert_eq!(h, vec![Point::new(0.0, 0.0), Point::new(4.0, 4.0)]);

        let single = convex_hull(&[Point::new(0.3, 0.4)]);
        assert_eq!(single.len(), 1);
    }

    /// O(n^3) extremality oracle: p is a hull vertex iff it is not inside
    /// the hull of the others, checked by separating directions over pairs.
    fn brute_extreme(points: &[Point]) -> Vec<Point> {
        let mut out = Vec::new();
        'outer: for (i, &p) in points.iter().enumerate() {
            // p is extreme iff some direction makes it the strict unique max
            for (j, &a) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                for (k, &b) in points.iter().enumerate() {
                    if k == i || k == j {
                        continue;
                    }
                    // direction = outward normal of edge candidate (a, b)
                    let e = b.sub(a);
                    let n = Point::new(e.y, -e.x);
                    let proj_p = n.dot(p);
                    if points
                        .iter()
                        .enumerate()
                        .all(|(l, &q)| l == i || n.dot(q) < proj_p)
                    {
                        out.push(p);
                        continue 'outer;
                    }
                    let n = Point::new(-e.y, e.x);
                    let proj_p = n.dot(p);
                    if points
                        .iter()
                        .enumerate()
                        .all(|(l, &q)| l == i || n.dot(q) < proj_p)
                    {
                        out.push(p);
                        continue 'outer;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn hull_matches_brute_force_on_random_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point> = (0..100)
            .map(|_| Point::new(rng.gen(), rng.gen()))
            .collect();
        let mut h = convex_hull(&pts);
        let mut b = brute_extreme(&pts);
        let key = |p: &Point| (p.x.total_cmp(&0.0), p.x.to_bits(), p.y.to_bits());
        h.sort_by_key(key);
        b.sort_by_key(key);
        assert_eq!(h, b);
    }

    #[test]
    fn hull_of_hull_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Point> = (0..60).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        let h1 = convex_hull(&pts);
        let h2 = convex_hull(&h1);
        assert_eq!(h1.len(), h2.len());
    }

    #[test]
    fn kernel_collinear_keeps_endpoints() {
        let pts: Vec<Point> = (0..9).map(|i| Point::new(0.1 * i as f64, 0.2)).collect();
        let k = alpha_kernel(&pts, 0.3);
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn kernel_square_corners_retained() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let k = alpha_kernel(&pts, 0.01);
        assert_eq!(k.len(), 4);
    }

    fn directional_error(points: &[Point], kernel: &[Point], dirs: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..dirs {
            let t = j as f64 / dirs as f64 * std::f64::consts::TAU;
            let u = Point::new(t.cos(), t.sin());
            let mp = points.iter().map(|p| u.dot(*p)).fold(f64::NEG_INFINITY, f64::max);
            let mk = kernel.iter().map(|p| u.dot(*p)).fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(mp - mk);
        }
        worst
    }

    #[test]
    fn kernel_on_circle_small_and_accurate() {
        let kappa = 0.04;
        let pts: Vec<Point> = (0..1000)
            .map(|i| {
                let t = i as f64 / 1000.0 * std::f64::consts::TAU;
                Point::new(0.5 + 0.5 * t.cos(), 0.5 + 0.5 * t.sin())
            })
            .collect();
        let k = alpha_kernel(&pts, kappa);
        // c/sqrt(kappa) with c frozen at 4.
        assert!(
            k.len() as f64 <= 4.0 / kappa.sqrt(),
            "kernel size {} too large",
            k.len()
        );
        let err = directional_error(&pts, &k, 720);
        assert!(err <= kappa * 1.0, "directional error {err} over budget");
    }

    #[test]
    fn kernel_keeps_needle_spike() {
        // A spike of height well above kappa*diam must survive even though no
        // canonical direction points at it.
        let kappa = 0.01;
        let mut pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        pts.push(Point::new(0.5, 0.03));
        let k = alpha_kernel(&pts, kappa);
        assert!(k.contains(&Point::new(0.5, 0.03)));
    }

    #[test]
    fn kernel_soundness_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let n = rng.gen_range(4..80);
            let pts: Vec<Point> = (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
            let kappa = rng.gen::<f64>() * 0.2 + 0.005;
            let k = alpha_kernel(&pts, kappa);
            assert!(k.iter().all(|p| pts.contains(p)), "kernel not a subset");
            let diam = {
                let mut d: f64 = 0.0;
                for i in 0..pts.len() {
                    for j in 0..pts.len() {
                        d = d.max(pts[i].dist(pts[j]));
                    }
                }
                d
            };
            let err = directional_error(&pts, &k, 360);
            assert!(err <= kappa * diam + 1e-12, "err {err} > {}", kappa * diam);
        }
    }

    proptest::proptest! {
        #[test]
        fn clip_additivity(
            ax in -1.0f64..2.0, ay in -1.0f64..2.0,
            bx in -1.0f64..2.0, by in -1.0f64..2.0,
            t in 0.01f64..0.99,
            cx in 0.0f64..1.0, cy in 0.0f64..1.0, r in 0.05f64..0.6,
        ) {
            let a = Point::new(ax, ay);
            let b = Point::new(bx, by);
            let mid = a.add(b.sub(a).scale(t));
            for shape in [
                disk(cx, cy, r),
                rect(cx - r, cx + r, cy - r, cy + r),
                Shape::Halfplane(Halfplane::new(Point::new(cx - 0.5, cy - 0.5 + 1e-3), r - 0.3)),
            ] {
                let whole = segment_clip_length(Segment::new(a, b), &shape);
                let parts = segment_clip_length(Segment::new(a, mid), &shape)
                    + segment_clip_length(Segment::new(mid, b), &shape);
                proptest::prop_assert!((whole - parts).abs() < 1e-9);
            }
        }
    }
}
