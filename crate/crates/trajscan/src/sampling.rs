//! Two-level sampling: a sparse net of trajectories defines the candidate
//! regions and a dense sample estimates the discrepancy of each candidate.
//! Sizes follow the trajectory range-space bound, where representing each
//! trajectory by at most `k` points costs a near-logarithmic factor in `k`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coreset::{simplify_dataset, CoresetMethod};
use crate::error::Error;
use crate::trajectory::{LabeledPointSet, Trajectory, TrajectoryDataset};

/// Net/sample sizing and seeding. Defaults reproduce the point-set operating
/// sizes `n = 1/eps`, `s = 1/(2 eps)^2` at `k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    /// Additive error allowed on the discrepancy score.
    pub eps: f64,
    /// Failure probability.
    pub delta: f64,
    /// Bound on per-trajectory coreset size feeding the VC term.
    pub k_bound: usize,
    pub c_net: f64,
    pub c_sample: f64,
    pub seed: u64,
}

impl SamplingParams {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Self {
        SamplingParams { eps, delta, k_bound: 1, c_net: 1.0, c_sample: 0.25, seed }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k_bound = k.max(1);
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!("eps must be in (0,1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must be in (0,1), got {}", self.delta)));
        }
        if !(self.c_net > 0.0 && self.c_sample > 0.0) {
            return Err(Error::invalid("sampling constants must be positive"));
        }
        Ok(())
    }
}

/// Net size `n = ceil(c_net * (max(1, ln k)/eps) * ln(max(e, ln(k) /
/// (eps * delta))))`, the `O((log k / eps) log(log k / (eps delta)))` bound.
/// At `k = 1` the bracket's `ln k` vanishes, the floor takes over, and the
/// size reduces to the point-set operating size `n = c_net / eps` for any
/// `eps` and `delta`.
pub fn net_size(params: &SamplingParams) -> usize {
    let k = params.k_bound.max(1) as f64;
    let lead = (k.ln()).max(1.0) / params.eps;
    let inner = k.ln() / (params.eps * params.delta);
    let bracket = inner.max(std::f64::consts::E).ln();
    (params.c_net * lead * bracket).ceil() as usize
}

/// Sample size `s = ceil(c_sample * (1/eps^2) * (ln(k+1) + ln(1/delta)))`.
/// With `c_sample = 1/4`, `k = 1`, and the bracket at 1 this is the
/// point-set heuristic `1/(2 eps)^2`.
pub fn sample_size(params: &SamplingParams) -> usize {
    let k = params.k_bound.max(1) as f64;
    let bracket = (k + 1.0).ln() + (1.0 / params.delta).ln();
    (params.c_sample / (params.eps * params.eps) * bracket).ceil() as usize
}

/// The two sampling levels with their coreset point sets.
#[derive(Debug, Clone)]
pub struct TwoLevelSample {
    /// Indices into the dataset of net trajectories, ascending.
    pub net_idx: Vec<usize>,
    pub sample_idx: Vec<usize>,
    pub net_points: LabeledPointSet,
    pub sample_points: LabeledPointSet,
    /// Max realized per-trajectory coreset size across both levels.
    pub realized_k_max: usize,
}

impl TwoLevelSample {
    pub fn n(&self) -> usize {
        self.net_idx.len()
    }

    pub fn s(&self) -> usize {
        self.sample_idx.len()
    }
}

/// Draws `count` distinct indices uniformly from `0..total` (everything when
/// `count >= total`), returned ascending.
pub(crate) fn draw_indices(rng: &mut ChaCha8Rng, total: usize, count: usize) -> Vec<usize> {
    if count >= total {
        return (0..total).collect();
    }
    let mut idx = rand::seq::index::sample(rng, total, count).into_vec();
    idx.sort_unstable();
    idx
}

/// Draws the net and sample trajectory index sets (without replacement,
/// capped at the full dataset) from one seeded stream.
pub fn draw_trajectory_sets(
    dataset: &TrajectoryDataset,
    params: &SamplingParams,
) -> Result<(Vec<usize>, Vec<usize>), Error> {
    params.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = net_size(params);
    let s = sample_size(params);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let net = draw_indices(&mut rng, dataset.len(), n);
    let sample = draw_indices(&mut rng, dataset.len(), s);
    Ok((net, sample))
}

fn gather(dataset: &TrajectoryDataset, idx: &[usize]) -> Vec<Trajectory> {
    idx.iter().map(|&i| dataset.trajectories[i].clone()).collect()
}

/// Draws both levels and applies the coreset method per trajectory.
pub fn draw_two_level(
    dataset: &TrajectoryDataset,
    params: &SamplingParams,
    method: &CoresetMethod,
) -> Result<TwoLevelSample, Error> {
    let (net_idx, sample_idx) = draw_trajectory_sets(dataset, params)?;
    let net_points = simplify_dataset(&gather(dataset, &net_idx), method, params.seed)?;
    let sample_points = simplify_dataset(&gather(dataset, &sample_idx), method, params.seed)?;
    let realized_k_max = net_points.max_k().max(sample_points.max_k());
    Ok(TwoLevelSample { net_idx, sample_idx, net_points, sample_points, realized_k_max })
}
