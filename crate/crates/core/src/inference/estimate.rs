use serde::Serialize;

use super::{InferenceOptions, RelaxPolicy};
use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, Constraint, LinearProgram, LpSolution, LpStatus, Sense, SolverOptions};
use crate::model::{BoundModel, Direction, EmpiricalLp, MomentMeans, Weights};

/// Estimated endpoints of the identified interval together with the LP
/// solutions that produced them.
#[derive(Debug, Clone)]
pub struct IdentifiedSetEstimate {
    pub lb: f64,
    pub ub: f64,
    pub sol_lb: LpSolution<f64>,
    pub sol_ub: LpSolution<f64>,
    pub lp_lb: EmpiricalLp,
    pub lp_ub: EmpiricalLp,
    /// `ub - lb`.
    pub delta: f64,
    pub relaxation_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Relaxation {
    pub c_star: f64,
}

/// Estimates the identified interval on the sample weighted by `weights`.
pub fn estimate_identified_set(
    model: &BoundModel,
    weights: &Weights,
    opts: &InferenceOptions,
) -> Result<IdentifiedSetEstimate> {
    let means = model.moment_means(weights)?;
    estimate_from_means(&means, opts, opts.min_relaxation)
}

/// Solves both bound LPs starting from relaxation `floor`. When either is
/// infeasible and relaxation is enabled, re-solves at `max(floor, c* + ε)`.
pub(crate) fn estimate_from_means(
    means: &MomentMeans,
    opts: &InferenceOptions,
    floor: f64,
) -> Result<IdentifiedSetEstimate> {
    let (lo, hi) = solve_pair(means, floor, &opts.solver)?;
    if lo.1.is_optimal() && hi.1.is_optimal() {
        return finish(lo, hi, floor);
    }
    check_unbounded(&lo.1, &hi.1)?;
    if opts.relax == RelaxPolicy::Off {
        let direction = if lo.1.is_optimal() { "upper" } else { "lower" };
        return Err(Error::Infeasible { direction });
    }
    let c_star = relaxation_from_means(means, &opts.solver)?;
    let eps = opts.relaxation_epsilon * (1.0 + means.rhs_norm());
    let relaxation = floor.max(c_star + eps);
    let (lo, hi) = solve_pair(means, relaxation, &opts.solver)?;
    check_unbounded(&lo.1, &hi.1)?;
    for (s, d) in [(&lo.1, "lower"), (&hi.1, "upper")] {
        if !s.is_optimal() {
            return Err(Error::InfeasibleAfterRelaxation { direction: d, relaxation });
        }
    }
    finish(lo, hi, relaxation)
}

type Solved = (EmpiricalLp, LpSolution<f64>);

fn solve_pair(means: &MomentMeans, relaxation: f64, solver: &SolverOptions<f64>) -> Result<(Solved, Solved)> {
    let lo = means.to_lp(Direction::Lower, relaxation);
    let hi = means.to_lp(Direction::Upper, relaxation);
    let slo = solve_lp_with(&lo.lp, solver)?;
    let shi = solve_lp_with(&hi.lp, solver)?;
    Ok(((lo, slo), (hi, shi)))
}

fn check_unbounded(lo: &LpSolution<f64>, hi: &LpSolution<f64>) -> Result<()> {
    if lo.status == LpStatus::Unbounded {
        return Err(Error::Unbounded { direction: "lower" });
    }
    if hi.status == LpStatus::Unbounded {
        return Err(Error::Unbounded { direction: "upper" });
    }
    Ok(())
}

fn finish(lo: Solved, hi: Solved, relaxation: f64) -> Result<IdentifiedSetEstimate> {
    let (lb, ub) = (lo.1.value, hi.1.value);
    Ok(IdentifiedSetEstimate {
        lb,
        ub,
        delta: ub - lb,
        sol_lb: lo.1,
        sol_ub: hi.1,
        lp_lb: lo.0,
        lp_ub: hi.0,
        relaxation_used: relaxation,
    })
}

/// Smallest uniform slack `c*` that makes the sample moment system feasible:
/// `max(0, min_θ max_j m̂_j(θ))`, with each equality counted in both directions.
pub fn compute_relaxation(model: &BoundModel, weights: &Weights, solver: &SolverOptions<f64>) -> Result<Relaxation> {
    let means = model.moment_means(weights)?;
    Ok(Relaxation { c_star: relaxation_from_means(&means, solver)? })
}

pub(crate) fn relaxation_from_means(means: &MomentMeans, solver: &SolverOptions<f64>) -> Result<f64> {
    let (rows, _) = means.rows(true, 0.0);
    if rows.is_empty() {
        return Ok(0.0);
    }
    let d = means.lower.len();
    // box range of each row's violation a·θ - b bounds the auxiliary variable
    let mut t_lo = f64::INFINITY;
    let mut t_hi = f64::NEG_INFINITY;
    for r in &rows {
        let (mut lo, mut hi) = (-r.rhs, -r.rhs);
        for k in 0..d {
            let (x, y) = (r.coeffs[k] * means.lower[k], r.coeffs[k] * means.upper[k]);
            lo += x.min(y);
            hi += x.max(y);
        }
        t_lo = t_lo.min(lo);
        t_hi = t_hi.max(hi);
    }
    let mut lower = means.lower.clone();
    let mut upper = means.upper.clone();
    lower.push(t_lo - 1.0);
    upper.push(t_hi + 1.0);
    let mut objective = vec![0.0; d];
    objective.push(1.0);
    let mut lp = LinearProgram::new(Sense::Minimize, objective, lower, upper);
    for r in rows {
        let mut coeffs = r.coeffs;
        coeffs.push(-1.0);
        lp.constraints.push(Constraint::leq(coeffs, r.rhs));
    }
    let sol = solve_lp_with(&lp, solver)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value.max(0.0)),
        LpStatus::Infeasible => Err(Error::InvalidArgument(
            "relaxation problem is infeasible; theta bounds are inconsistent".into(),
        )),
        LpStatus::Unbounded => unreachable!("auxiliary variable is boxed"),
    }
}
