//! Waypoint CSV ingestion and the CSV/JSON emitters.
//!
//! Input format: UTF-8, LF, header `traj_id,x,y,label`, one waypoint per
//! row in path order, all rows of one trajectory contiguous, label `r` or
//! `b` constant per trajectory.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use trajscan::geom::Point;
use trajscan::trajectory::{Trajectory, TrajectoryDataset};

pub const WAYPOINT_HEADER: &str = "traj_id,x,y,label";

#[derive(Debug, serde::Serialize)]
pub struct IngestReport {
    pub trajectories: usize,
    pub waypoints: usize,
    pub recorded: usize,
    pub bbox: [f64; 4],
}

/// Parses and validates a waypoint CSV, then normalizes to the unit square.
pub fn ingest(path: &Path) -> Result<(TrajectoryDataset, IngestReport)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == WAYPOINT_HEADER => {}
        Some((_, h)) => bail!("line 1: expected header `{WAYPOINT_HEADER}`, got `{h}`"),
        None => bail!("empty input file"),
    }

    let mut raw: Vec<Trajectory> = Vec::new();
    let mut closed: BTreeSet<u64> = BTreeSet::new();
    let mut current: Option<(u64, Vec<Point>, bool)> = None;
    let mut waypoints = 0usize;
    let mut bbox = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];

    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(id_s), Some(x_s), Some(y_s), Some(label_s), None) = (
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
        ) else {
            bail!("line {lineno}: expected 4 comma-separated fields");
        };
        let id: u64 = id_s
            .trim()
            .parse()
            .with_context(|| format!("line {lineno}: bad traj_id `{id_s}`"))?;
        let x: f64 = x_s
            .trim()
            .parse()
            .with_context(|| format!("line {lineno}: bad x `{x_s}`"))?;
        let y: f64 = y_s
            .trim()
            .parse()
            .with_context(|| format!("line {lineno}: bad y `{y_s}`"))?;
        if !x.is_finite() || !y.is_finite() {
            bail!("line {lineno}: non-finite coordinate");
        }
        let recorded = match label_s.trim() {
            "r" => true,
            "b" => false,
            other => bail!("line {lineno}: label must be `r` or `b`, got `{other}`"),
        };

        match &mut current {
            Some((cur_id, wps, cur_rec)) if *cur_id == id => {
                if *cur_rec != recorded {
                    bail!("line {lineno}: conflicting label for traj_id {id}");
                }
                wps.push(Point::new(x, y));
            }
            other => {
                if let Some((done_id, wps, rec)) = other.take() {
                    raw.push(Trajectory::new(done_id, wps, rec));
                    closed.insert(done_id);
                }
                if closed.contains(&id) {
                    bail!("line {lineno}: traj_id {id} reappears after its block ended");
                }
                *other = Some((id, vec![Point::new(x, y)], recorded));
            }
        }
        waypoints += 1;
        bbox[0] = bbox[0].min(x);
        bbox[1] = bbox[1].max(x);
        bbox[2] = bbox[2].min(y);
        bbox[3] = bbox[3].max(y);
    }
    if let Some((id, wps, rec)) = current.take() {
        raw.push(Trajectory::new(id, wps, rec));
    }
    if raw.is_empty() {
        bail!("no waypoint rows in {}", path.display());
    }
    let report = IngestReport {
        trajectories: raw.len(),
        waypoints,
        recorded: raw.iter().filter(|t| t.recorded).count(),
        bbox,
    };
    let dataset = TrajectoryDataset::normalize(raw)?;
    Ok((dataset, report))
}

/// Writes a dataset as waypoint CSV in original coordinates.
pub fn write_waypoint_csv(dataset: &TrajectoryDataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(WAYPOINT_HEADER);
    out.push('\n');
    for t in &dataset.trajectories {
        let label = if t.recorded { 'r' } else { 'b' };
        for p in &t.waypoints {
            let orig = dataset.transform.to_original(*p);
            writeln!(out, "{},{},{},{label}", t.id, orig.x, orig.y).unwrap();
        }
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes `traj_id,x,y` rows (coreset points) in original coordinates.
pub fn write_coreset_csv(
    rows: &[(u64, Point)],
    transform: &trajscan::Transform,
    path: &Path,
) -> Result<()> {
    let mut out = String::from("traj_id,x,y\n");
    for (id, p) in rows {
        let orig = transform.to_original(*p);
        writeln!(out, "{id},{},{}", orig.x, orig.y).unwrap();
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes a string either to the given path or to stdout.
pub fn emit(content: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content).with_context(|| format!("cannot write {}", p.display()))
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}
