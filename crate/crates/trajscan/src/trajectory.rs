//! Trajectory data model: waypoints, recorded/baseline labels, arclength,
//! and normalization of a dataset into the unit square.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geom::{Disk, Halfplane, Point, Rect, Shape};

/// An ordered polyline with a recorded flag. Labels hold for the whole
/// trajectory; the baseline weight is the constant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: u64,
    pub waypoints: Vec<Point>,
    pub recorded: bool,
}

impl Trajectory {
    pub fn new(id: u64, waypoints: Vec<Point>, recorded: bool) -> Self {
        assert!(!waypoints.is_empty(), "trajectory {id} has no waypoints");
        Trajectory { id, waypoints, recorded }
    }

    /// Sum of segment lengths; 0 for a single waypoint.
    pub fn arclength(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].dist(w[1]))
            .sum()
    }

    pub fn r_value(&self) -> f64 {
        if self.recorded {
            1.0
        } else {
            0.0
        }
    }

    pub fn b_value(&self) -> f64 {
        1.0
    }

    pub fn begin(&self) -> Point {
        self.waypoints[0]
    }

    pub fn end(&self) -> Point {
        *self.waypoints.last().unwrap()
    }
}

/// Uniform-scale affine map from original to normalized coordinates:
/// `normalized = (original - offset) * scale`. A single scale keeps distance
/// parameters meaning the same thing in x and y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub scale: f64,
    pub offset: (f64, f64),
}

impl Transform {
    pub fn identity() -> Self {
        Transform { scale: 1.0, offset: (0.0, 0.0) }
    }

    pub fn to_normalized(&self, p: Point) -> Point {
        Point::new((p.x - self.offset.0) * self.scale, (p.y - self.offset.1) * self.scale)
    }

    pub fn to_original(&self, p: Point) -> Point {
        Point::new(p.x / self.scale + self.offset.0, p.y / self.scale + self.offset.1)
    }

    /// Maps a normalized-space shape back to original coordinates.
    pub fn shape_to_original(&self, shape: &Shape) -> Shape {
        match shape {
            Shape::Halfplane(h) => {
                // normal . ((p - off) * scale) <= c  <=>  normal . p <= c/scale + normal . off
                let off = Point::new(self.offset.0, self.offset.1);
                Shape::Halfplane(Halfplane::new(
                    h.normal,
                    h.offset / self.scale + h.normal.dot(off),
                ))
            }
            Shape::Disk(d) => Shape::Disk(Disk::new(
                self.to_original(d.center),
                d.radius / self.scale,
            )),
            Shape::Rect(r) => {
                let lo = self.to_original(Point::new(r.x_lo, r.y_lo));
                let hi = self.to_original(Point::new(r.x_hi, r.y_hi));
                Shape::Rect(Rect::new(lo.x, hi.x, lo.y, hi.y))
            }
        }
    }
}

/// A set of trajectories normalized to `[0,1] x [0,1]`, plus the transform
/// that got them there.
#[derive(Debug, Clone)]
pub struct TrajectoryDataset {
    pub trajectories: Vec<Trajectory>,
    pub transform: Transform,
}

impl TrajectoryDataset {
    /// Normalizes raw trajectories into the unit square with a uniform scale
    /// (aspect ratio preserved) and records the transform.
    pub fn normalize(raw: Vec<Trajectory>) -> Result<TrajectoryDataset, Error> {
        if raw.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for t in &raw {
            for p in &t.waypoints {
                if !p.is_finite() {
                    return Err(Error::NonFiniteInput { traj_id: t.id });
                }
                min_x = min_x.min(p.x);
                max_x = max_x.max(p.x);
                min_y = min_y.min(p.y);
                max_y = max_y.max(p.y);
            }
        }
        let extent = (max_x - min_x).max(max_y - min_y);
        if extent <= 0.0 {
            return Err(Error::ZeroExtent);
        }
        let transform = Transform { scale: 1.0 / extent, offset: (min_x, min_y) };
        let trajectories = raw
            .into_iter()
            .map(|t| Trajectory {
                id: t.id,
                waypoints: t.waypoints.iter().map(|&p| transform.to_normalized(p)).collect(),
                recorded: t.recorded,
            })
            .collect();
        Ok(TrajectoryDataset { trajectories, transform })
    }

    /// Wraps already-normalized trajectories with an identity transform.
    pub fn from_normalized(trajectories: Vec<Trajectory>) -> TrajectoryDataset {
        TrajectoryDataset { trajectories, transform: Transform::identity() }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn recorded_count(&self) -> usize {
        self.trajectories.iter().filter(|t| t.recorded).count()
    }

    pub fn total_arclength(&self) -> f64 {
        self.trajectories.iter().map(|t| t.arclength()).sum()
    }
}

/// A point carrying its source trajectory and signed recorded/baseline
/// weights. Sign conventions are set by whichever reduction produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub location: Point,
    pub traj_id: u64,
    pub r_weight: f64,
    pub b_weight: f64,
}

/// A multiset of labeled points plus the per-trajectory point count `k`.
#[derive(Debug, Clone, Default)]
pub struct LabeledPointSet {
    pub points: Vec<LabeledPoint>,
    pub per_traj_k: BTreeMap<u64, usize>,
}

impl LabeledPointSet {
    pub fn from_points(points: Vec<LabeledPoint>) -> Self {
        let mut per_traj_k = BTreeMap::new();
        for p in &points {
            *per_traj_k.entry(p.traj_id).or_insert(0) += 1;
        }
        LabeledPointSet { points, per_traj_k }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest per-trajectory point count (the realized `k`).
    pub fn max_k(&self) -> usize {
        self.per_traj_k.values().copied().max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{shape_contains, trajectory_intersects};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn arclength_examples() {
        let t = Trajectory::new(0, vec![Point::new(0.3, 0.7)], false);
        assert_eq!(t.arclength(), 0.0);

        let t = Trajectory::new(
            1,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)],
            true,
        );
        assert!((t.arclength() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn arclength_matches_pairwise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let wps: Vec<Point> = (0..50).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        let t = Trajectory::new(0, wps.clone(), false);
        let mut expect = 0.0;
        for i in 1..wps.len() {
            expect += ((wps[i].x - wps[i - 1].x).powi(2) + (wps[i].y - wps[i - 1].y).powi(2)).sqrt();
        }
        assert!((t.arclength() - expect).abs() < 1e-12);
    }

    #[test]
    fn arclength_split_invariant() {
        let a = Point::new(0.1, 0.2);
        let b = Point::new(0.9, 0.7);
        let mid = a.add(b.sub(a).scale(0.37));
        let t1 = Trajectory::new(0, vec![a, b], false);
        let t2 = Trajectory::new(0, vec![a, mid, b], false);
        assert!((t1.arclength() - t2.arclength()).abs() < 1e-12);
    }

    #[test]
    fn normalize_example() {
        // bbox [10,20] x [30,35] -> scale 1/10, occupies [0,1] x [0,0.5]
        let raw = vec![Trajectory::new(
            0,
            vec![Point::new(10.0, 30.0), Point::new(20.0, 35.0)],
            false,
        )];
        let ds = TrajectoryDataset::normalize(raw).unwrap();
        assert!((ds.transform.scale - 0.1).abs() < 1e-12);
        let wps = &ds.trajectories[0].waypoints;
        assert_eq!(wps[0], Point::new(0.0, 0.0));
        assert_eq!(wps[1], Point::new(1.0, 0.5));
    }

    #[test]
    fn normalize_identity_on_unit_square() {
        let raw = vec![Trajectory::new(
            0,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            false,
        )];
        let ds = TrajectoryDataset::normalize(raw).unwrap();
        assert_eq!(ds.transform.scale, 1.0);
        assert_eq!(ds.transform.offset, (0.0, 0.0));
    }

    #[test]
    fn normalize_rejects_zero_extent() {
        let raw = vec![Trajectory::new(0, vec![Point::new(3.0, 3.0); 4], false)];
        assert!(matches!(
            TrajectoryDataset::normalize(raw),
            Err(Error::ZeroExtent)
        ));
    }

    #[test]
    fn transform_round_trip() {
        let tr = Transform { scale: 0.25, offset: (12.5, -3.0) };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = Point::new(rng.gen::<f64>() * 40.0, rng.gen::<f64>() * 40.0 - 20.0);
            let back = tr.to_original(tr.to_normalized(p));
            assert!(back.dist(p) < 1e-9);
        }
    }

    #[test]
    fn normalization_preserves_containment() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let wps: Vec<Point> = (0..5)
                .map(|_| Point::new(rng.gen::<f64>() * 30.0 + 5.0, rng.gen::<f64>() * 8.0))
                .collect();
            let raw = Trajectory::new(0, wps.clone(), false);
            let shape_orig = Shape::Disk(Disk::new(
                Point::new(rng.gen::<f64>() * 30.0 + 5.0, rng.gen::<f64>() * 8.0),
                rng.gen::<f64>() * 5.0 + 0.5,
            ));
            let ds = TrajectoryDataset::normalize(vec![raw.clone()]).unwrap();
            let tf = ds.transform;
            let shape_norm = match shape_orig {
                Shape::Disk(d) => Shape::Disk(Disk::new(tf.to_normalized(d.center), d.radius * tf.scale)),
                _ => unreachable!(),
            };
            assert_eq!(
                trajectory_intersects(&raw.waypoints, &shape_orig),
                trajectory_intersects(&ds.trajectories[0].waypoints, &shape_norm),
            );
            // and the emitted inverse maps back to the original shape
            let back = tf.shape_to_original(&shape_norm);
            if let (Shape::Disk(a), Shape::Disk(b)) = (&back, &shape_orig) {
                assert!(a.center.dist(b.center) < 1e-9 && (a.radius - b.radius).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shape_to_original_halfplane_membership() {
        let tf = Transform { scale: 0.1, offset: (10.0, 30.0) };
        let h_norm = Shape::Halfplane(Halfplane::new(Point::new(0.6, -0.8), 0.3));
        let h_orig = tf.shape_to_original(&h_norm);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let p_norm = Point::new(rng.gen::<f64>() * 2.0 - 0.5, rng.gen::<f64>() * 2.0 - 0.5);
            let p_orig = tf.to_original(p_norm);
            assert_eq!(shape_contains(&h_norm, p_norm), shape_contains(&h_orig, p_orig));
        }
    }

    #[test]
    fn labeled_point_set_counts() {
        let pts = vec![
            LabeledPoint { location: Point::new(0.0, 0.0), traj_id: 3, r_weight: 1.0, b_weight: 1.0 },
            LabeledPoint { location: Point::new(0.1, 0.0), traj_id: 3, r_weight: 1.0, b_weight: 1.0 },
            LabeledPoint { location: Point::new(0.2, 0.0), traj_id: 9, r_weight: 0.0, b_weight: 1.0 },
        ];
        let set = LabeledPointSet::from_points(pts);
        assert_eq!(set.per_traj_k[&3], 2);
        assert_eq!(set.per_traj_k[&9], 1);
        assert_eq!(set.max_k(), 2);
    }
}
