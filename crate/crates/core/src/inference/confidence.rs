use serde::Serialize;

use super::{
    bootstrap_value_functions, calibrate_quantiles, estimate_identified_set, threshold_delta, BootstrapDraws,
    IdentifiedSetEstimate, InferenceOptions,
};
use crate::error::{Error, Result};
use crate::model::{BoundModel, Weights};

/// `[lb - q_lb/√n, ub + q_ub/√n]` and the quantities it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceSet {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub q_lb: f64,
    pub q_ub: f64,
    pub delta_hat: f64,
    pub delta_star: f64,
    pub b_n: f64,
    pub relaxation_used: f64,
}

impl ConfidenceSet {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone)]
pub struct Inference {
    pub set: ConfidenceSet,
    pub estimate: IdentifiedSetEstimate,
    pub draws: BootstrapDraws,
}

/// Estimate, bootstrap, threshold, calibrate, assemble.
pub fn construct_confidence_set(
    model: &BoundModel,
    alpha: f64,
    draws: usize,
    seed: u64,
    opts: &InferenceOptions,
) -> Result<Inference> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let estimate = estimate_identified_set(model, &Weights::uniform(model.n()), opts)?;
    let draws = bootstrap_value_functions(model, &estimate, draws, seed, opts)?;
    let set = confidence_set_from_draws(&estimate, &draws, alpha, opts)?;
    Ok(Inference { set, estimate, draws })
}

/// Calibrates and assembles a set from existing draws; lets several levels share one bootstrap.
pub fn confidence_set_from_draws(
    estimate: &IdentifiedSetEstimate,
    draws: &BootstrapDraws,
    alpha: f64,
    opts: &InferenceOptions,
) -> Result<ConfidenceSet> {
    let th = threshold_delta(estimate.delta, draws.n, opts.threshold_mode)?;
    let mut q = calibrate_quantiles(draws, th.delta_star, alpha)?;
    if opts.clamp_nonnegative {
        q.q_lb = q.q_lb.max(0.0);
        q.q_ub = q.q_ub.max(0.0);
    }
    let root_n = (draws.n as f64).sqrt();
    Ok(ConfidenceSet {
        lower: estimate.lb - q.q_lb / root_n,
        upper: estimate.ub + q.q_ub / root_n,
        alpha,
        q_lb: q.q_lb,
        q_ub: q.q_ub,
        delta_hat: estimate.delta,
        delta_star: th.delta_star,
        b_n: th.b_n,
        relaxation_used: estimate.relaxation_used,
    })
}
