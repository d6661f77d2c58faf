//! First-order (delta-method) approximation of the bound estimators.
//!
//! At an optimum `θ*` with multipliers `y_j = ∂value/∂b_j`, the value
//! function moves with the sample as the mean of
//! `ψ(W, θ*) - Σ_j y_j s_j m_j(W, θ*)`, where `s_j = ±1` is the sign the row
//! carries (mirrored rows of split equalities enter negated). Centered, this is
//! the influence function; its standard deviation is the scale of the normal
//! law the bootstrap `L` and `U` samples should resemble.

use serde::Serialize;

use super::IdentifiedSetEstimate;
use crate::lp::LpSolution;
use crate::model::{BoundModel, EmpiricalLp};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaMethodOracle {
    pub sd_lb: f64,
    pub sd_ub: f64,
    pub influence_lb: Vec<f64>,
    pub influence_ub: Vec<f64>,
}

pub fn delta_method_oracle(model: &BoundModel, est: &IdentifiedSetEstimate) -> DeltaMethodOracle {
    let influence_lb = influence(model, &est.lp_lb, &est.sol_lb);
    let influence_ub = influence(model, &est.lp_ub, &est.sol_ub);
    DeltaMethodOracle { sd_lb: sd(&influence_lb), sd_ub: sd(&influence_ub), influence_lb, influence_ub }
}

fn influence(model: &BoundModel, lp: &EmpiricalLp, sol: &LpSolution<f64>) -> Vec<f64> {
    let theta = &sol.primal;
    let mut v: Vec<f64> = (0..model.n())
        .map(|i| {
            let mut x = model.objective_at(i, theta);
            for (origin, &y) in lp.rows.iter().zip(&sol.duals) {
                if y != 0.0 {
                    x -= y * f64::from(origin.sign) * model.moment_at(origin.moment, i, theta);
                }
            }
            x
        })
        .collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

/// Population (divide-by-n) standard deviation of an already centered vector.
fn sd(centered: &[f64]) -> f64 {
    (centered.iter().map(|x| x * x).sum::<f64>() / centered.len() as f64).sqrt()
}
