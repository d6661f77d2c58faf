//! Joint calibration of the two one-sided critical values.
//!
//! With `D = √n Δ*`, `m = ⌈(1-α) B⌉` and usable draws `(L_b, U_b)`, the pair
//! `(q_lb, q_ub)` minimizes `q_lb + q_ub` subject to
//!
//! ```text
//! (C1)  #{b : L_b <= q_lb      and U_b + D >= -q_ub} >= m
//! (C2)  #{b : L_b <= q_lb + D  and U_b     >= -q_ub} >= m
//! ```
//!
//! Both counts only change at `q_lb ∈ {L_b} ∪ {L_b - D}`, so those are the
//! candidates. For a fixed `q_lb` the smallest admissible `q_ub` is the larger
//! of `-(m-th largest U_b + D over L_b <= q_lb)` and `-(m-th largest U_b over
//! L_b <= q_lb + D)`. Prefixes of the draws sorted by `L` are nested, so the
//! m-th largest `U` over every prefix comes from a single heap pass.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::BootstrapDraws;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// `Δ* = Δ̂ · 1{Δ̂ > b_n}`.
    #[default]
    Length,
    /// `Δ* = 1{Δ̂ > b_n}`.
    Indicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub delta_star: f64,
    pub b_n: f64,
}

/// Thresholds the estimated interval length at `b_n = (ln n)^{-1/2}`.
pub fn threshold_delta(delta_hat: f64, n: usize, mode: ThresholdMode) -> Result<Threshold> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("thresholding needs n >= 2, got {n}")));
    }
    let b_n = (n as f64).ln().powf(-0.5);
    let long = delta_hat > b_n;
    let delta_star = match (mode, long) {
        (_, false) => 0.0,
        (ThresholdMode::Length, true) => delta_hat,
        (ThresholdMode::Indicator, true) => 1.0,
    };
    Ok(Threshold { delta_star, b_n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantilePair {
    pub q_lb: f64,
    pub q_ub: f64,
}

/// Number of draws each constraint must cover: `⌈(1-α) B⌉`, at least one.
pub fn required_count(alpha: f64, usable: usize) -> usize {
    let raw = (1.0 - alpha) * usable as f64;
    // absorb representation error such as 0.9 * 300 = 270.00000000000006
    let m = (raw - 1e-9 * raw.max(1.0)).ceil() as usize;
    m.clamp(1, usable.max(1))
}

pub fn calibrate_quantiles(draws: &BootstrapDraws, delta_star: f64, alpha: f64) -> Result<QuantilePair> {
    let (l, u) = draws.usable();
    let d = (draws.n as f64).sqrt() * delta_star;
    calibrate_pairs(&l, &u, d, alpha)
}

/// Calibration on raw paired draws with the scaled length `d = √n Δ*` already applied.
pub fn calibrate_pairs(lower: &[f64], upper: &[f64], d: f64, alpha: f64) -> Result<QuantilePair> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if lower.len() != upper.len() {
        return Err(Error::Dimension("L and U draws are not paired".into()));
    }
    if !(d >= 0.0) {
        return Err(Error::InvalidArgument(format!("scaled length must be nonnegative, got {d}")));
    }
    let b = lower.len();
    if b == 0 || lower.iter().chain(upper).any(|v| !v.is_finite()) {
        return Err(Error::CalibrationInfeasible { usable: b, required: required_count(alpha, b) });
    }
    let m = required_count(alpha, b);

    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| lower[i].total_cmp(&lower[j]).then(i.cmp(&j)));
    let sorted_l: Vec<f64> = order.iter().map(|&i| lower[i]).collect();

    // kth[k] = m-th largest U among the k smallest L (k >= m)
    let mut kth = vec![f64::NAN; b + 1];
    let mut heap: BinaryHeap<Reverse<OrdF64>> = BinaryHeap::with_capacity(m + 1);
    for (k, &i) in order.iter().enumerate() {
        heap.push(Reverse(OrdF64(upper[i])));
        if heap.len() > m {
            heap.pop();
        }
        if heap.len() == m {
            kth[k + 1] = heap.peek().map(|r| r.0 .0).unwrap();
        }
    }

    let mut candidates: Vec<f64> = lower.iter().flat_map(|&x| [x, x - d]).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let count_le = |q: f64| sorted_l.partition_point(|&x| x <= q);
    let mut best: Option<(f64, QuantilePair)> = None;
    for &q_lb in &candidates {
        let p1 = count_le(q_lb);
        if p1 < m {
            continue;
        }
        let p2 = count_le(q_lb + d);
        let q_ub = (-(kth[p1] + d)).max(-kth[p2]);
        let total = q_lb + q_ub;
        if best.is_none_or(|(s, _)| total < s) {
            best = Some((total, QuantilePair { q_lb, q_ub }));
        }
    }
    best.map(|(_, p)| p).ok_or(Error::CalibrationInfeasible { usable: b, required: m })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
