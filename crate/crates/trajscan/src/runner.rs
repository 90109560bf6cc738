//! One entry point that wires model, shape family, sampling, coresets, and
//! the matching scanner together. The CLI and the power harness both drive
//! scans through [`run_scan`].

use serde::{Deserialize, Serialize};

use crate::coreset::CoresetMethod;
use crate::discrepancy::{DiscrepancyFn, Model};
use crate::error::Error;
use crate::geom::ShapeFamily;
use crate::sampling::{draw_trajectory_sets, draw_two_level, net_size, sample_size, SamplingParams};
use crate::trajectory::Trajectory;
use crate::scan_full::{max_disk_full, max_disk_multiscale, max_halfplane_full, max_rect_full, MultiScaleParams};
use crate::scan_point::{
    flux_reduce, max_disk_points, max_halfplane_points, max_rect_points, partial_reduce,
    PartialMethod, ScanResult,
};
use crate::trajectory::TrajectoryDataset;

/// Everything needed to run one scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSpec {
    pub model: Model,
    pub family: ShapeFamily,
    pub fun: DiscrepancyFn,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    /// Coreset for full-model scans; None picks the family default
    /// (convex hull for halfplanes, gridding for rectangles, per-subrange
    /// grid kernels for disks).
    pub coreset: Option<CoresetMethod>,
    /// Point placement for the partial reduction.
    pub partial_method: PartialMethod,
    /// Spatial error: rectangle grid resolution and grid-kernel parameter.
    pub alpha: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub max_side: Option<f64>,
    pub exact_eval: bool,
    pub hull_trick: bool,
    pub c_net: f64,
    pub c_sample: f64,
    pub k_bound: usize,
}

impl ScanSpec {
    pub fn new(model: Model, family: ShapeFamily, fun: DiscrepancyFn, eps: f64, seed: u64) -> Self {
        ScanSpec {
            model,
            family,
            fun,
            eps,
            delta: 0.5,
            seed,
            coreset: None,
            partial_method: PartialMethod::Even,
            alpha: None,
            r_min: None,
            r_max: None,
            max_side: None,
            exact_eval: false,
            hull_trick: false,
            c_net: 1.0,
            c_sample: 0.25,
            k_bound: 1,
        }
    }

    pub fn sampling(&self) -> SamplingParams {
        SamplingParams {
            eps: self.eps,
            delta: self.delta,
            k_bound: self.k_bound,
            c_net: self.c_net,
            c_sample: self.c_sample,
            seed: self.seed,
        }
    }

    fn require_alpha(&self, what: &str) -> Result<f64, Error> {
        self.alpha
            .ok_or_else(|| Error::invalid(format!("{what} requires --alpha")))
    }

    /// Cross-field validation mirroring the CLI contract.
    pub fn validate(&self) -> Result<(), Error> {
        self.sampling().validate()?;
        if self.model == Model::Flux && self.fun != DiscrepancyFn::Linear {
            return Err(Error::FluxRequiresLinear);
        }
        if let Some(m) = &self.coreset {
            m.validate()?;
        }
        if self.r_min.is_some() != self.r_max.is_some() {
            return Err(Error::invalid("r-min and r-max must be given together"));
        }
        if self.model == Model::Full && self.family == ShapeFamily::Rect {
            self.require_alpha("full-model rectangle scanning")?;
        }
        if self.model == Model::Full
            && self.family == ShapeFamily::Disk
            && self.r_min.is_some()
            && self.coreset.is_none()
        {
            self.require_alpha("multiscale disk scanning")?;
        }
        Ok(())
    }
}

/// A scan result plus the realized sampling sizes.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: ScanResult,
    /// Net / sample sizes in trajectories (points for the partial model).
    pub n: usize,
    pub s: usize,
    /// Net / sample sizes in coreset points.
    pub n_k: usize,
    pub s_k: usize,
}

fn default_full_coreset(spec: &ScanSpec) -> Result<CoresetMethod, Error> {
    Ok(match spec.coreset {
        Some(m) => m,
        None => match spec.family {
            ShapeFamily::Halfplane => CoresetMethod::ConvexHull,
            ShapeFamily::Rect => CoresetMethod::Gridding {
                alpha: spec.require_alpha("gridding coresets")?,
            },
            ShapeFamily::Disk => CoresetMethod::Even {
                alpha: spec.require_alpha("even coresets")?,
            },
        },
    })
}

fn gather(dataset: &TrajectoryDataset, idx: &[usize]) -> Vec<Trajectory> {
    idx.iter().map(|&i| dataset.trajectories[i].clone()).collect()
}

pub fn run_scan(dataset: &TrajectoryDataset, spec: &ScanSpec) -> Result<RunOutput, Error> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.recorded_count() == 0 {
        return Err(Error::NoRecorded);
    }
    let sampling = spec.sampling();
    match spec.model {
        Model::Flux => {
            let (net_idx, sample_idx) = draw_trajectory_sets(dataset, &sampling)?;
            let sub = |idx: &[usize]| TrajectoryDataset {
                trajectories: idx.iter().map(|&i| dataset.trajectories[i].clone()).collect(),
                transform: dataset.transform,
            };
            let net = flux_reduce(&sub(&net_idx)).points;
            let sample = flux_reduce(&sub(&sample_idx)).points;
            let result = match spec.family {
                ShapeFamily::Halfplane => max_halfplane_points(&net, &sample, spec.fun)?,
                ShapeFamily::Disk => max_disk_points(&net, &sample, spec.fun, spec.r_min, spec.r_max)?,
                ShapeFamily::Rect => max_rect_points(&net, &sample, spec.fun)?,
            };
            Ok(RunOutput {
                result,
                n: net_idx.len(),
                s: sample_idx.len(),
                n_k: net.len(),
                s_k: sample.len(),
            })
        }
        Model::Partial => {
            let n = net_size(&sampling);
            let s = sample_size(&sampling);
            let (net, sample) = partial_reduce(dataset, n, s, spec.partial_method, spec.seed)?;
            let result = match spec.family {
                ShapeFamily::Halfplane => max_halfplane_points(&net, &sample, spec.fun)?,
                ShapeFamily::Disk => max_disk_points(&net, &sample, spec.fun, spec.r_min, spec.r_max)?,
                ShapeFamily::Rect => max_rect_points(&net, &sample, spec.fun)?,
            };
            Ok(RunOutput { result, n, s, n_k: net.len(), s_k: sample.len() })
        }
        Model::Full => match spec.family {
            ShapeFamily::Disk if spec.r_min.is_some() => {
                let params = MultiScaleParams {
                    r_min: spec.r_min.unwrap(),
                    r_max: spec.r_max.unwrap(),
                    alpha: spec.alpha.unwrap_or(0.0),
                    use_hull_trick: spec.hull_trick,
                    exact_eval: spec.exact_eval,
                    coreset: spec.coreset,
                };
                let result = max_disk_multiscale(dataset, &params, &sampling, spec.fun)?;
                // realized point counts of the finest (largest-k) subrange
                let (net_idx, sample_idx) = draw_trajectory_sets(dataset, &sampling)?;
                let method = spec
                    .coreset
                    .unwrap_or(CoresetMethod::GridKernel { alpha: params.alpha, r: params.r_min });
                let n_k = crate::coreset::simplify_dataset(
                    &gather(dataset, &net_idx),
                    &method,
                    sampling.seed,
                )?
                .len();
                let s_k = crate::coreset::simplify_dataset(
                    &gather(dataset, &sample_idx),
                    &method,
                    sampling.seed,
                )?
                .len();
                Ok(RunOutput { result, n: net_idx.len(), s: sample_idx.len(), n_k, s_k })
            }
            _ => {
                let method = default_full_coreset(spec)?;
                let tls = draw_two_level(dataset, &sampling, &method)?;
                let result = match spec.family {
                    ShapeFamily::Halfplane => {
                        max_halfplane_full(&tls.net_points, &tls.sample_points, spec.fun)?
                    }
                    ShapeFamily::Rect => max_rect_full(
                        &tls.net_points,
                        &tls.sample_points,
                        spec.fun,
                        spec.require_alpha("full-model rectangle scanning")?,
                        spec.eps,
                        spec.max_side,
                    )?,
                    ShapeFamily::Disk => max_disk_full(
                        &tls.net_points,
                        &tls.sample_points,
                        spec.fun,
                        spec.r_min,
                        spec.r_max,
                    )?,
                };
                Ok(RunOutput {
                    result,
                    n: tls.n(),
                    s: tls.s(),
                    n_k: tls.net_points.len(),
                    s_k: tls.sample_points.len(),
                })
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::trajectory::Trajectory;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dataset(n: usize, seed: u64) -> TrajectoryDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trajs = (0..n)
            .map(|i| {
                let m = rng.gen_range(2..5);
                let wps = (0..m).map(|_| Point::new(rng.gen(), rng.gen())).collect();
                Trajectory::new(i as u64, wps, rng.gen_bool(0.3))
            })
            .collect();
        TrajectoryDataset::from_normalized(trajs)
    }

    #[test]
    fn flux_kulldorff_rejected() {
        let spec = ScanSpec::new(
            Model::Flux,
            ShapeFamily::Halfplane,
            DiscrepancyFn::Kulldorff,
            0.2,
            1,
        );
        assert!(matches!(spec.validate(), Err(Error::FluxRequiresLinear)));
    }

    #[test]
    fn rect_full_needs_alpha() {
        let spec = ScanSpec::new(Model::Full, ShapeFamily::Rect, DiscrepancyFn::Linear, 0.2, 1);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn runs_all_point_model_combinations() {
        let ds = dataset(40, 3);
        for model in [Model::Flux, Model::Partial] {
            for family in [ShapeFamily::Halfplane, ShapeFamily::Disk, ShapeFamily::Rect] {
                let spec = ScanSpec::new(model, family, DiscrepancyFn::Linear, 0.3, 5);
                let out = run_scan(&ds, &spec).unwrap();
                assert!(out.result.stats.phi >= 0.0, "{model:?}/{family:?}");
                assert!(out.n > 0 && out.s > 0);
            }
        }
    }

    #[test]
    fn runs_full_model_scanners() {
        let ds = dataset(25, 4);
        let mut spec = ScanSpec::new(Model::Full, ShapeFamily::Halfplane, DiscrepancyFn::Kulldorff, 0.3, 5);
        run_scan(&ds, &spec).unwrap();

        spec.family = ShapeFamily::Rect;
        spec.alpha = Some(0.05);
        run_scan(&ds, &spec).unwrap();

        spec.family = ShapeFamily::Disk;
        spec.r_min = Some(0.05);
        spec.r_max = Some(0.2);
        spec.alpha = Some(0.01);
        run_scan(&ds, &spec).unwrap();
    }

    #[test]
    fn deterministic_given_seed() {
        let ds = dataset(60, 9);
        let spec = ScanSpec::new(Model::Flux, ShapeFamily::Rect, DiscrepancyFn::Linear, 0.25, 42);
        let a = run_scan(&ds, &spec).unwrap();
        let b = run_scan(&ds, &spec).unwrap();
        assert_eq!(a.result.stats.phi, b.result.stats.phi);
        assert_eq!(a.result.shape, b.result.shape);
    }
}
