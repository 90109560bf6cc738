//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has no recorded trajectories; scanning needs r(t) = 1 somewhere")]
    NoRecorded,

    #[error("dataset has zero spatial extent; nothing to normalize")]
    ZeroExtent,

    #[error("trajectory {traj_id} contains a non-finite waypoint")]
    NonFiniteInput { traj_id: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the flux model supports only the linear discrepancy function")]
    FluxRequiresLinear,

    #[error("point sample is empty")]
    EmptySample,

    #[error("net is empty; no candidate regions")]
    EmptyNet,

    #[error("all trajectories have zero arclength")]
    ZeroArclength,

    #[error("could not plant a region with baseline fraction {target} (best realized {realized})")]
    PlantUnreachable { target: f64, realized: f64 },

    #[error("instance too large for the exact oracle: {trajectories} trajectories / {waypoints} waypoints (guard: {max_trajectories}/{max_waypoints})")]
    OracleGuard {
        trajectories: usize,
        waypoints: usize,
        max_trajectories: usize,
        max_waypoints: usize,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
