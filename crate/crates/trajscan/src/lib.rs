//! Approximate spatial scan statistics over trajectory data.
//!
//! Finds a region (halfplane, disk, or axis-aligned rectangle) whose
//! recorded-vs-baseline discrepancy is within an additive `eps` of the best
//! possible, under three notions of how a trajectory meets a region:
//!
//! - **flux**: it begins inside and ends outside (or vice versa),
//! - **partial**: it contributes its arclength fraction inside,
//! - **full**: it counts once if it touches the region at all.
//!
//! Scale comes from three layers that the modules below implement: spatial
//! coresets replace each trajectory with a few labeled points
//! ([`coreset`]), two-level sampling picks a sparse net of candidate-
//! defining trajectories plus a dense scoring sample ([`sampling`]), and
//! shape-specific sweep algorithms enumerate candidate regions
//! incrementally ([`scan_point`], [`scan_full`]).
//!
//! The [`harness`] module generates synthetic data, plants anomalies with
//! known statistics, and measures recovery power; [`runner`] dispatches a
//! complete configured scan. The `book/` directory of this repository is an
//! mdbook guide whose code listings compile as doc-tests of this crate.

pub mod coreset;
pub mod discrepancy;
pub mod error;
pub mod geom;
pub mod grid;
pub mod harness;
pub mod runner;
pub mod sampling;
pub mod scan_full;
pub mod scan_point;
mod sweep;
pub mod trajectory;

pub use discrepancy::{DiscrepancyFn, Model, RegionStats};
pub use error::Error;
pub use geom::{Disk, Halfplane, Point, Rect, Shape, ShapeFamily};
pub use runner::{run_scan, RunOutput, ScanSpec};
pub use scan_point::ScanResult;
pub use trajectory::{LabeledPoint, LabeledPointSet, Trajectory, TrajectoryDataset, Transform};

/// Book chapters compiled as doc-tests so the guide stays in sync with the
/// library (mdbook itself does not run example code against the crate).
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/coresets.md")]
    mod coresets {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/scanning.md")]
    mod scanning {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
