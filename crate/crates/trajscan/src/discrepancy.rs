//! Statistical discrepancy functions and region evaluation under the three
//! intersection models.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geom::{shape_contains, Shape};
use crate::trajectory::LabeledPointSet;

/// Clamp bound keeping the Kulldorff statistic finite on empty/full regions.
pub const KULLDORFF_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscrepancyFn {
    /// Two-sided: depleted regions score like enriched ones.
    Kulldorff,
    Linear,
    /// Gated variant scoring only enriched regions (`r > b`).
    KulldorffOneSided,
}

impl DiscrepancyFn {
    pub fn eval(self, r: f64, b: f64) -> f64 {
        match self {
            DiscrepancyFn::Kulldorff => kulldorff(r, b),
            DiscrepancyFn::Linear => linear(r, b),
            DiscrepancyFn::KulldorffOneSided => {
                if r > b {
                    kulldorff(r, b)
                } else {
                    0.0
                }
            }
        }
    }
}

/// How a trajectory contributes to a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Net boundary crossings: begins inside and ends outside, or vice versa.
    Flux,
    /// Proportional to the arclength fraction inside the region.
    Partial,
    /// All or nothing: counts once if the trajectory touches the region.
    Full,
}

/// Recorded and baseline fractions of a region together with its score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub r_frac: f64,
    pub b_frac: f64,
    pub phi: f64,
}

impl RegionStats {
    pub fn zero() -> Self {
        RegionStats { r_frac: 0.0, b_frac: 0.0, phi: 0.0 }
    }
}

/// Poisson log-likelihood discrepancy
/// `phi(r, b) = r ln(r/b) + (1 - r) ln((1-r)/(1-b))`,
/// with both arguments clamped into `[1e-7, 1 - 1e-7]`. Nonnegative, zero at
/// `r = b` (it is a KL divergence between Bernoulli laws); two-sided by
/// default, so depleted regions score as well as enriched ones.
pub fn kulldorff(r: f64, b: f64) -> f64 {
    let r = r.clamp(KULLDORFF_EPS, 1.0 - KULLDORFF_EPS);
    let b = b.clamp(KULLDORFF_EPS, 1.0 - KULLDORFF_EPS);
    if r == b {
        return 0.0;
    }
    let phi = r * (r / b).ln() + (1.0 - r) * ((1.0 - r) / (1.0 - b)).ln();
    phi.max(0.0)
}

/// `|r - b|`.
pub fn linear(r: f64, b: f64) -> f64 {
    (r - b).abs()
}

/// Signed totals of a labeled point set: positive recorded mass and positive
/// baseline mass, used as normalizers.
pub(crate) fn positive_masses(sample: &LabeledPointSet) -> (f64, f64) {
    let mut r = 0.0;
    let mut b = 0.0;
    for p in &sample.points {
        if p.r_weight > 0.0 {
            r += p.r_weight;
        }
        if p.b_weight > 0.0 {
            b += p.b_weight;
        }
    }
    (r, b)
}

/// Evaluates one region against a labeled point sample under `model`.
///
/// Flux and partial sum signed point weights; flux fractions may be negative
/// and only the linear function applies. Full counts each trajectory once if
/// at least one of its points is inside (its points must all carry the
/// trajectory's own `(r, b)` weights).
pub fn evaluate_region(
    shape: &Shape,
    sample: &LabeledPointSet,
    model: Model,
    fun: DiscrepancyFn,
) -> Result<RegionStats, Error> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if model == Model::Flux && fun != DiscrepancyFn::Linear {
        return Err(Error::FluxRequiresLinear);
    }
    let (r_frac, b_frac) = match model {
        Model::Flux | Model::Partial => {
            let (r_norm, b_norm) = positive_masses(sample);
            let mut r_sum = 0.0;
            let mut b_sum = 0.0;
            for p in &sample.points {
                if shape_contains(shape, p.location) {
                    r_sum += p.r_weight;
                    b_sum += p.b_weight;
                }
            }
            (
                if r_norm > 0.0 { r_sum / r_norm } else { 0.0 },
                if b_norm > 0.0 { b_sum / b_norm } else { 0.0 },
            )
        }
        Model::Full => {
            // Per-trajectory weights are constant across a trajectory's
            // points; totals count each trajectory once.
            let mut r_total = 0.0;
            let mut b_total = 0.0;
            let mut r_sum = 0.0;
            let mut b_sum = 0.0;
            let mut seen_total = std::collections::BTreeSet::new();
            let mut seen_in = std::collections::BTreeSet::new();
            for p in &sample.points {
                if seen_total.insert(p.traj_id) {
                    r_total += p.r_weight;
                    b_total += p.b_weight;
                }
                if shape_contains(shape, p.location) && seen_in.insert(p.traj_id) {
                    r_sum += p.r_weight;
                    b_sum += p.b_weight;
                }
            }
            (
                if r_total > 0.0 { r_sum / r_total } else { 0.0 },
                if b_total > 0.0 { b_sum / b_total } else { 0.0 },
            )
        }
    };
    Ok(RegionStats { r_frac, b_frac, phi: fun.eval(r_frac, b_frac) })
}
