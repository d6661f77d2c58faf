use super::{ColumnState, LinearProgram, LpSolution, SolverOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Uniqueness {
    pub primal_unique: bool,
    pub dual_unique: bool,
}

/// Reads uniqueness off the optimal basis.
///
/// The primal optimum is flagged non-unique when a movable nonbasic column
/// prices out at zero (an alternative optimal direction). The multipliers are
/// flagged non-unique when the basis is degenerate: a basic column sits at one
/// of its bounds, or a redundant equality kept a phase-one artificial basic.
/// Non-optimal solutions report `false` for both.
pub fn assess_solution_uniqueness<T: Scalar>(
    lp: &LinearProgram<T>,
    sol: &LpSolution<T>,
    opts: &SolverOptions<T>,
) -> Uniqueness {
    let Some(basis) = sol.basis.as_ref().filter(|_| sol.is_optimal()) else {
        return Uniqueness { primal_unique: false, dual_unique: false };
    };
    let cmax = lp.objective.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let tol_cost = opts.tol.cost * (T::one() + cmax) * T::lit(10.0);
    let tol_feas = opts.tol.feas(lp.rhs_norm()) * T::lit(10.0);

    let primal_unique = basis
        .states
        .iter()
        .zip(&basis.reduced_costs)
        .all(|(st, rc)| !matches!(st, ColumnState::AtLower | ColumnState::AtUpper) || rc.abs() > tol_cost);

    let degenerate = !basis.artificial_rows.is_empty()
        || basis
            .basic_values
            .iter()
            .any(|&(x, l, u)| (x - l).abs() <= tol_feas || (u.is_finite() && (u - x).abs() <= tol_feas));

    Uniqueness { primal_unique, dual_unique: !degenerate }
}
