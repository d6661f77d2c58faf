//! Sample checks of the regularity conditions behind the bound estimators:
//! linear independence of the active moment gradients, uniqueness of the
//! optimal solutions and multipliers, and a random-perturbation probe of how
//! generic a LICQ failure is.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{estimate_identified_set, threshold_delta, IdentifiedSetEstimate, InferenceOptions, ThresholdMode};
use crate::lp::{assess_solution_uniqueness, solve_lp_with, LinearProgram, LpSolution, Sense};
use crate::model::{BoundModel, Direction, MomentMeans, MomentSense, Weights};
use crate::rng;

pub const CAVEAT: &str = "Only sample analogues are checked. Uniform-over-distributions versions of the \
constraint qualification and uniqueness conditions, and the Donsker and envelope conditions on the moment \
class, cannot be verified from a single sample and are assumed.";

#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsOptions {
    /// Warning floor for the smallest eigenvalue of the row-normalized Gram matrix.
    pub eig_warn: f64,
    pub probe_trials: usize,
    /// Perturbation half-width relative to `1 + ‖b‖∞`.
    pub probe_scale: f64,
    pub seed: u64,
    pub inference: InferenceOptions,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self { eig_warn: 1e-6, probe_trials: 50, probe_scale: 1e-4, seed: 0, inference: InferenceOptions::default() }
    }
}

/// Smallest eigenvalues of `G Gᵀ`, on the raw gradient rows and on rows scaled to unit length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LicqCheck {
    pub min_eig: f64,
    pub min_eig_normalized: f64,
    pub active_labels: Vec<String>,
    /// The active gradients are linearly dependent (both eigenvalues are then reported as exactly 0).
    pub rank_deficient: bool,
}

/// Minimum eigenvalues of the Gram matrix of `rows`, raw and row-normalized.
/// Returns `(0, 0, false)` for no rows and snaps rank-deficient systems to exactly 0.
pub fn gram_min_eig(rows: &[Vec<f64>]) -> (f64, f64, bool) {
    if rows.is_empty() {
        return (0.0, 0.0, false);
    }
    let d = rows[0].len();
    let raw = min_eig(rows);
    let normalized: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                r.iter().map(|v| v / norm).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    let norm_eig = min_eig(&normalized);
    let deficient = rows.len() > d || norm_eig <= 8.0 * f64::EPSILON * rows.len() as f64;
    if deficient {
        (0.0, 0.0, true)
    } else {
        (raw, norm_eig, false)
    }
}

fn min_eig(rows: &[Vec<f64>]) -> f64 {
    let g = DMatrix::from_fn(rows.len(), rows[0].len(), |i, k| rows[i][k]);
    let gram = &g * g.transpose();
    SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Gradient rows of all equality moments and of the inequality moments active
/// at `theta` (within `tol` of the relaxed boundary `relaxation`).
pub fn licq_from_means(
    means: &MomentMeans,
    labels: &[String],
    theta: &[f64],
    relaxation: f64,
    tol: f64,
) -> LicqCheck {
    let values = means.evaluate(theta);
    let mut rows = Vec::new();
    let mut active_labels = Vec::new();
    for (j, ((a, _), sense)) in means.moments.iter().zip(&means.senses).enumerate() {
        let active = match sense {
            MomentSense::Eq => true,
            MomentSense::Leq => (values[j] - relaxation).abs() <= tol,
        };
        if active {
            rows.push(a.clone());
            active_labels.push(labels[j].clone());
        }
    }
    let (min_eig, min_eig_normalized, rank_deficient) = gram_min_eig(&rows);
    LicqCheck { min_eig, min_eig_normalized, active_labels, rank_deficient }
}

/// LICQ check at the optimum of a bound LP solved on `weights` with `relaxation`.
pub fn check_licq(
    model: &BoundModel,
    weights: &Weights,
    sol: &LpSolution<f64>,
    relaxation: f64,
    opts: &InferenceOptions,
) -> Result<LicqCheck> {
    if !sol.is_optimal() {
        return Err(Error::InvalidArgument("LICQ is checked at an optimal solution".into()));
    }
    let means = model.moment_means(weights)?;
    let tol = opts.solver.tol.active(means.rhs_norm() + relaxation);
    Ok(licq_from_means(&means, &labels(model), &sol.primal, relaxation, tol))
}

fn labels(model: &BoundModel) -> Vec<String> {
    model.spec().moments.iter().map(|m| m.label.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub pass_fraction: f64,
    pub trials: usize,
    pub infeasible_trials: usize,
    pub epsilon_scale: f64,
    pub warnings: Vec<String>,
}

/// Perturbs the right-hand sides of the (split) moment rows at random and
/// re-checks LICQ for both bound LPs.
///
/// Inequality rows get `ε ~ U[-s, s]`. The two halves of a split equality get
/// independent `ε ~ U[0, s]`, which widens the equality into a thin band
/// instead of possibly emptying it. A trial passes when both LPs are optimal
/// and both normalized eigenvalues exceed `eig_warn`.
pub fn perturbation_licq_probe(
    model: &BoundModel,
    weights: &Weights,
    epsilon_scale: f64,
    trials: usize,
    seed: u64,
    eig_warn: f64,
    opts: &InferenceOptions,
) -> Result<ProbeResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("probe needs at least one trial".into()));
    }
    if !(epsilon_scale > 0.0 && epsilon_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon_scale must be positive, got {epsilon_scale}")));
    }
    let means = model.moment_means(weights)?;
    let relaxation = match estimate_identified_set(model, weights, opts) {
        Ok(e) => e.relaxation_used,
        Err(_) => 0.0,
    };
    let tol = opts.solver.tol.active(means.rhs_norm() + relaxation + epsilon_scale);
    let (base_rows, origins) = means.rows(true, relaxation);

    let outcomes: Vec<Option<bool>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, t);
            let mut rows = base_rows.clone();
            for (row, o) in rows.iter_mut().zip(&origins) {
                row.rhs += match means.senses[o.moment] {
                    MomentSense::Leq => r.gen_range(-epsilon_scale..=epsilon_scale),
                    MomentSense::Eq => r.gen_range(0.0..=epsilon_scale),
                };
            }
            let mut pass = true;
            for sense in [Sense::Minimize, Sense::Maximize] {
                let lp = LinearProgram {
                    sense,
                    objective: means.objective.clone(),
                    objective_constant: means.objective_constant,
                    constraints: rows.clone(),
                    var_lower: means.lower.clone(),
                    var_upper: means.upper.clone(),
                };
                let sol = match solve_lp_with(&lp, &opts.solver) {
                    Ok(s) if s.is_optimal() => s,
                    _ => return None,
                };
                let active: Vec<Vec<f64>> = rows
                    .iter()
                    .filter(|c| c.rhs - c.activity(&sol.primal) <= tol)
                    .map(|c| c.coeffs.clone())
                    .collect();
                let (_, eig, deficient) = gram_min_eig(&active);
                pass &= active.is_empty() || (!deficient && eig > eig_warn);
            }
            Some(pass)
        })
        .collect();

    let infeasible_trials = outcomes.iter().filter(|o| o.is_none()).count();
    let passed = outcomes.iter().filter(|o| **o == Some(true)).count();
    let mut warnings = Vec::new();
    if infeasible_trials > 0 {
        warnings.push(format!("{infeasible_trials} of {trials} perturbed problems had no optimal solution"));
    }
    Ok(ProbeResult {
        pass_fraction: passed as f64 / trials as f64,
        trials,
        infeasible_trials,
        epsilon_scale,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub lb: f64,
    pub ub: f64,
    pub licq_min_eig_lb: f64,
    pub licq_min_eig_ub: f64,
    pub licq_min_eig_normalized_lb: f64,
    pub licq_min_eig_normalized_ub: f64,
    /// The active gradients are exactly linearly dependent at one of the optima.
    pub licq_violated: bool,
    pub active_labels_lb: Vec<String>,
    pub active_labels_ub: Vec<String>,
    pub primal_unique_lb: bool,
    pub primal_unique_ub: bool,
    pub dual_unique_lb: bool,
    pub dual_unique_ub: bool,
    /// Derivative of each bound with respect to a relaxation of the moment.
    pub multipliers_lb: Vec<LabeledValue>,
    pub multipliers_ub: Vec<LabeledValue>,
    pub delta_hat: f64,
    pub b_n: Option<f64>,
    pub relaxation_used: f64,
    pub probe: Option<ProbeResult>,
    pub warnings: Vec<String>,
    pub caveat: &'static str,
}

/// Multiplier of each moment: the row duals mapped back through the equality split.
pub fn moment_multipliers(model: &BoundModel, est: &IdentifiedSetEstimate, direction: Direction) -> Vec<LabeledValue> {
    let (lp, sol) = match direction {
        Direction::Lower => (&est.lp_lb, &est.sol_lb),
        Direction::Upper => (&est.lp_ub, &est.sol_ub),
    };
    let mut values = vec![0.0; model.spec().moments.len()];
    for (row, o) in lp.rows.iter().enumerate() {
        values[o.moment] += sol.duals[row] * o.sign as f64;
    }
    labels(model).into_iter().zip(values).map(|(label, value)| LabeledValue { label, value }).collect()
}

/// Estimates both bounds on the full sample and runs every check.
pub fn full_report(model: &BoundModel, opts: &DiagnosticsOptions) -> Result<DiagnosticsReport> {
    let w = Weights::uniform(model.n());
    let inf = &opts.inference;
    let est = estimate_identified_set(model, &w, inf)?;
    let relaxation = est.relaxation_used;
    let licq_lb = check_licq(model, &w, &est.sol_lb, relaxation, inf)?;
    let licq_ub = check_licq(model, &w, &est.sol_ub, relaxation, inf)?;
    let uniq_lb = assess_solution_uniqueness(&est.lp_lb.lp, &est.sol_lb, &inf.solver);
    let uniq_ub = assess_solution_uniqueness(&est.lp_ub.lp, &est.sol_ub, &inf.solver);
    let b_n = threshold_delta(est.delta, model.n(), ThresholdMode::Length).ok().map(|t| t.b_n);

    let mut warnings = Vec::new();
    for (name, c) in [("lower", &licq_lb), ("upper", &licq_ub)] {
        if c.rank_deficient {
            warnings.push(format!("LICQ fails at the {name} bound: active moment gradients are linearly dependent"));
        } else if !c.active_labels.is_empty() && c.min_eig_normalized <= opts.eig_warn {
            warnings.push(format!(
                "LICQ nearly fails at the {name} bound: normalized minimum eigenvalue {:.3e} is below {:.1e}",
                c.min_eig_normalized, opts.eig_warn
            ));
        }
    }
    for (name, u) in [("lower", uniq_lb), ("upper", uniq_ub)] {
        if !u.primal_unique {
            warnings.push(format!("the {name} bound is attained at more than one parameter value"));
        }
        if !u.dual_unique {
            warnings.push(format!("the multipliers of the {name} bound are not unique"));
        }
    }
    if let Some(b) = b_n {
        if est.delta <= b {
            warnings.push(format!(
                "estimated interval length {:.4} is at most b_n = {b:.4}; the parameter may be nearly point identified",
                est.delta
            ));
        }
    }
    if relaxation > 0.0 {
        warnings.push(format!("sample moment system was infeasible; constraints relaxed by {relaxation:.3e}"));
    }

    let probe = if opts.probe_trials > 0 && !model.spec().moments.is_empty() {
        let means = model.moment_means(&w)?;
        let scale = opts.probe_scale * (1.0 + means.rhs_norm());
        let p = perturbation_licq_probe(model, &w, scale, opts.probe_trials, opts.seed, opts.eig_warn, inf)?;
        warnings.extend(p.warnings.iter().cloned());
        Some(p)
    } else {
        None
    };

    Ok(DiagnosticsReport {
        n: model.n(),
        lb: est.lb,
        ub: est.ub,
        licq_min_eig_lb: licq_lb.min_eig,
        licq_min_eig_ub: licq_ub.min_eig,
        licq_min_eig_normalized_lb: licq_lb.min_eig_normalized,
        licq_min_eig_normalized_ub: licq_ub.min_eig_normalized,
        licq_violated: licq_lb.rank_deficient || licq_ub.rank_deficient,
        multipliers_lb: moment_multipliers(model, &est, Direction::Lower),
        multipliers_ub: moment_multipliers(model, &est, Direction::Upper),
        active_labels_lb: licq_lb.active_labels,
        active_labels_ub: licq_ub.active_labels,
        primal_unique_lb: uniq_lb.primal_unique,
        primal_unique_ub: uniq_ub.primal_unique,
        dual_unique_lb: uniq_lb.dual_unique,
        dual_unique_ub: uniq_ub.dual_unique,
        delta_hat: est.delta,
        b_n,
        relaxation_used: relaxation,
        probe,
        warnings,
        caveat: CAVEAT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gradients() {
        let (raw, norm, def) = gram_min_eig(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((raw - 1.0).abs() < 1e-12 && (norm - 1.0).abs() < 1e-12 && !def);
    }

    #[test]
    fn hand_computed_two_by_two() {
        // G Gᵀ = [[2, 1], [1, 2]] has eigenvalues 1 and 3
        let (raw, _, _) = gram_min_eig(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]);
        assert!((raw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_rows_are_exactly_singular() {
        let (raw, norm, def) = gram_min_eig(&[vec![0.3, 0.7], vec![0.3, 0.7]]);
        assert_eq!((raw, norm), (0.0, 0.0));
        assert!(def);
        assert_eq!(gram_min_eig(&[]), (0.0, 0.0, false));
    }

    #[test]
    fn scaling_a_row_leaves_normalized_eigenvalue() {
        let a = gram_min_eig(&[vec![1.0, 0.2], vec![0.1, 1.0]]);
        let b = gram_min_eig(&[vec![1000.0, 200.0], vec![0.1, 1.0]]);
        assert!((a.1 - b.1).abs() < 1e-12);
        assert!((a.0 - b.0).abs() > 1e-3);
    }
}
