use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::estimate::estimate_from_means;
use super::{IdentifiedSetEstimate, InferenceOptions};
use crate::error::{Error, Result};
use crate::model::{BoundModel, Weights};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DrawFlag {
    Ok,
    /// The draw needed more relaxation than the original sample.
    Relaxed,
    Failed,
}

/// Recentered, `√n`-scaled bootstrap value functions, paired by draw index.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraws {
    /// `√n (lb_b - lb)`; NaN for failed draws.
    pub lower: Vec<f64>,
    /// `√n (ub_b - ub)`; NaN for failed draws.
    pub upper: Vec<f64>,
    pub flags: Vec<DrawFlag>,
    pub seed: u64,
    pub n: usize,
}

impl BootstrapDraws {
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Paired `(L, U)` of every non-failed draw, in draw order.
    pub fn usable(&self) -> (Vec<f64>, Vec<f64>) {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, f)| **f != DrawFlag::Failed)
            .map(|(b, _)| (self.lower[b], self.upper[b]))
            .unzip()
    }

    pub fn count(&self, flag: DrawFlag) -> usize {
        self.flags.iter().filter(|f| **f == flag).count()
    }

    pub fn failure_rate(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.count(DrawFlag::Failed) as f64 / self.len() as f64
        }
    }
}

/// Multinomial resampling counts for draw `b`: `n` uniform picks from stream `(seed, b)`.
pub fn resample_weights(n: usize, seed: u64, b: u64) -> Weights {
    let mut r = rng::stream(seed, b);
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[r.gen_range(0..n)] += 1;
    }
    Weights::from_counts(&counts)
}

/// Re-solves both bound LPs on `draws` multinomial resamples. Draw `b` uses
/// random stream `(seed, b)` and results are stored by index, so the output
/// does not depend on how many threads run it.
///
/// The original-sample relaxation is the floor for every draw; a draw that is
/// still infeasible at that level is relaxed further and flagged.
pub fn bootstrap_value_functions(
    model: &BoundModel,
    est: &IdentifiedSetEstimate,
    draws: usize,
    seed: u64,
    opts: &InferenceOptions,
) -> Result<BootstrapDraws> {
    if draws == 0 {
        return Err(Error::InvalidArgument("at least one bootstrap draw is required".into()));
    }
    let n = model.n();
    let root_n = (n as f64).sqrt();
    let results: Vec<(f64, f64, DrawFlag)> = (0..draws as u64)
        .into_par_iter()
        .map(|b| {
            let w = resample_weights(n, seed, b);
            let Ok(means) = model.moment_means(&w) else {
                return (f64::NAN, f64::NAN, DrawFlag::Failed);
            };
            match estimate_from_means(&means, opts, est.relaxation_used) {
                Ok(e) => {
                    let flag = if e.relaxation_used > est.relaxation_used {
                        DrawFlag::Relaxed
                    } else {
                        DrawFlag::Ok
                    };
                    (root_n * (e.lb - est.lb), root_n * (e.ub - est.ub), flag)
                }
                Err(_) => (f64::NAN, f64::NAN, DrawFlag::Failed),
            }
        })
        .collect();

    let mut out = BootstrapDraws {
        lower: Vec::with_capacity(draws),
        upper: Vec::with_capacity(draws),
        flags: Vec::with_capacity(draws),
        seed,
        n,
    };
    for (l, u, f) in results {
        out.lower.push(l);
        out.upper.push(u);
        out.flags.push(f);
    }
    Ok(out)
}
