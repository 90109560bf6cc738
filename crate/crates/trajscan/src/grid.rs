//! Uniform grid over the unit square: point bucketing for local range
//! queries and exact cell traversal for polylines.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::geom::Point;

/// Cell index of `p` in a grid with the given edge length.
pub fn cell_of(p: Point, edge: f64) -> (i64, i64) {
    ((p.x / edge).floor() as i64, (p.y / edge).floor() as i64)
}

/// Buckets point indices by cell for neighborhood fetches.
#[derive(Debug, Clone)]
pub struct PointGrid {
    pub edge: f64,
    cells: BTreeMap<(i64, i64), Vec<usize>>,
}

impl PointGrid {
    pub fn build(points: impl Iterator<Item = Point>, edge: f64) -> Self {
        assert!(edge > 0.0);
        let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for (i, p) in points.enumerate() {
            cells.entry(cell_of(p, edge)).or_default().push(i);
        }
        PointGrid { edge, cells }
    }

    /// Indices of points whose cell lies within `radius_cells` of `center`
    /// in Chebyshev distance, in deterministic order.
    pub fn block(&self, center: (i64, i64), radius_cells: i64) -> Vec<usize> {
        let mut out = Vec::new();
        for cx in (center.0 - radius_cells)..=(center.0 + radius_cells) {
            for cy in (center.1 - radius_cells)..=(center.1 + radius_cells) {
                if let Some(v) = self.cells.get(&(cx, cy)) {
                    out.extend_from_slice(v);
                }
            }
        }
        out
    }
}

/// Distinct cells of an `edge`-grid entered by the polyline, via exact
/// segment traversal (Amanatides-Woo stepping).
pub fn visited_cells(waypoints: &[Point], edge: f64) -> BTreeSet<(i64, i64)> {
    let mut cells = BTreeSet::new();
    if waypoints.is_empty() {
        return cells;
    }
    cells.insert(cell_of(waypoints[0], edge));
    for w in waypoints.windows(2) {
        traverse_segment(w[0], w[1], edge, &mut cells);
    }
    cells
}

fn traverse_segment(a: Point, b: Point, edge: f64, cells: &mut BTreeSet<(i64, i64)>) {
    let (mut ix, mut iy) = cell_of(a, edge);
    let (ex, ey) = cell_of(b, edge);
    cells.insert((ix, iy));
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    // Parameter t at which the ray crosses the next cell boundary per axis.
    let mut t_max_x = if dx != 0.0 {
        let boundary = (ix + if dx > 0.0 { 1 } else { 0 }) as f64 * edge;
        (boundary - a.x) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        let boundary = (iy + if dy > 0.0 { 1 } else { 0 }) as f64 * edge;
        (boundary - a.y) / dy
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dx != 0.0 { edge / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { edge / dy.abs() } else { f64::INFINITY };
    // Bounded by the segment's cell span; guards against float drift.
    let max_steps = ((ex - ix).abs() + (ey - iy).abs() + 2) as usize * 2;
    for _ in 0..max_steps {
        if ix == ex && iy == ey {
            break;
        }
        if t_max_x <= t_max_y {
            if t_max_x > 1.0 {
                break;
            }
            ix += step_x;
            t_max_x += t_delta_x;
        } else {
            if t_max_y > 1.0 {
                break;
            }
            iy += step_y;
            t_max_y += t_delta_y;
        }
        cells.insert((ix, iy));
    }
    cells.insert((ex, ey));
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn horizontal_segment_cells() {
        let cells = visited_cells(&[Point::new(0.05, 0.05), Point::new(0.95, 0.05)], 0.1);
        assert_eq!(cells.len(), 10);
        for (i, c) in cells.iter().enumerate() {
            assert_eq!(*c, (i as i64, 0));
        }
    }

    #[test]
    fn diagonal_segment_cells() {
        let cells = visited_cells(&[Point::new(0.05, 0.05), Point::new(0.55, 0.55)], 0.1);
        // a diagonal through 6 cells on the main diagonal plus boundary crossings
        assert!(cells.contains(&(0, 0)) && cells.contains(&(5, 5)));
        for &(x, y) in &cells {
            assert!((x - y).abs() <= 1);
        }
    }

    #[test]
    fn cell_count_obeys_grouping_bound() {
        // visited cells <= 9 (L/edge + 1)
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(2..30);
            let mut p = Point::new(rng.gen(), rng.gen());
            let mut wps = vec![p];
            for _ in 1..n {
                p = Point::new(
                    (p.x + (rng.gen::<f64>() - 0.5) * 0.3).clamp(0.0, 1.0),
                    (p.y + (rng.gen::<f64>() - 0.5) * 0.3).clamp(0.0, 1.0),
                );
                wps.push(p);
            }
            let len: f64 = wps.windows(2).map(|w| w[0].dist(w[1])).sum();
            let edge = rng.gen::<f64>() * 0.2 + 0.01;
            let cells = visited_cells(&wps, edge);
            let bound = 9.0 * (len / edge + 1.0);
            assert!((cells.len() as f64) <= bound, "{} > {}", cells.len(), bound);
        }
    }

    #[test]
    fn grid_block_fetch() {
        let pts = [
            Point::new(0.05, 0.05),
            Point::new(0.15, 0.05),
            Point::new(0.95, 0.95),
        ];
        let g = PointGrid::build(pts.iter().copied(), 0.1);
        let near = g.block((0, 0), 1);
        assert_eq!(near, vec![0, 1]);
        let all = g.block((5, 5), 10);
        assert_eq!(all.len(), 3);
    }
}
