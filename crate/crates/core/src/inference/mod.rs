//! Identified-set estimation and bootstrap confidence sets for the bounds.

mod bootstrap;
mod calibrate;
mod confidence;
mod estimate;
mod oracle;

pub use bootstrap::{bootstrap_value_functions, resample_weights, BootstrapDraws, DrawFlag};
pub use calibrate::{
    calibrate_pairs, calibrate_quantiles, required_count, threshold_delta, QuantilePair, Threshold, ThresholdMode,
};
pub use confidence::{confidence_set_from_draws, construct_confidence_set, ConfidenceSet, Inference};
pub use estimate::{compute_relaxation, estimate_identified_set, IdentifiedSetEstimate, Relaxation};
pub use oracle::{delta_method_oracle, DeltaMethodOracle};

use serde::{Deserialize, Serialize};

use crate::lp::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RelaxPolicy {
    #[default]
    Auto,
    Off,
}

#[derive(Debug, Clone, Copy)]
pub struct InferenceOptions {
    pub relax: RelaxPolicy,
    pub threshold_mode: ThresholdMode,
    /// Replace negative critical values by zero.
    pub clamp_nonnegative: bool,
    /// `ε` added to `c*` is this times `1 + ‖b‖∞`.
    pub relaxation_epsilon: f64,
    /// Relaxation applied to the original sample before any infeasibility is seen.
    pub min_relaxation: f64,
    pub solver: SolverOptions<f64>,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            relax: RelaxPolicy::Auto,
            threshold_mode: ThresholdMode::Length,
            clamp_nonnegative: false,
            relaxation_epsilon: 1e-6,
            min_relaxation: 0.0,
            solver: SolverOptions::default(),
        }
    }
}
