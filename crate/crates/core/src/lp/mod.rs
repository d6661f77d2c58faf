//! Dense linear programming over a finite box.
//!
//! Problems have the form
//!
//! ```text
//! min / max  c·x + c0
//! s.t.       a_j·x  =  b_j   (Relation::Eq)
//!            a_j·x <=  b_j   (Relation::Leq)
//!            l <= x <= u     (finite bounds)
//! ```
//!
//! and are solved by a two-phase bounded-variable revised simplex method
//! ([`solve_lp`]). The solver reports dual multipliers as sensitivities of the
//! optimal value with respect to each right-hand side, for both senses:
//! `duals[j] = d value / d b_j`. For a minimization, an inequality multiplier is
//! therefore `<= 0`; for a maximization it is `>= 0`. Equality multipliers are
//! free-signed.

mod dump;
mod simplex;
mod uniqueness;

pub use dump::{parse_dump, DumpError};
pub use simplex::{solve_lp, solve_lp_with, Pricing, SolverOptions};
pub use uniqueness::{assess_solution_uniqueness, Uniqueness};

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Leq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rhs: T,
    pub relation: Relation,
}

impl<T: Scalar> Constraint<T> {
    pub fn leq(coeffs: Vec<T>, rhs: T) -> Self {
        Self { coeffs, rhs, relation: Relation::Leq }
    }

    pub fn eq(coeffs: Vec<T>, rhs: T) -> Self {
        Self { coeffs, rhs, relation: Relation::Eq }
    }

    /// `a·x` at the given point.
    pub fn activity(&self, x: &[T]) -> T {
        self.coeffs.iter().zip(x).fold(T::zero(), |acc, (&a, &v)| acc + a * v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub sense: Sense,
    pub objective: Vec<T>,
    pub objective_constant: T,
    pub constraints: Vec<Constraint<T>>,
    pub var_lower: Vec<T>,
    pub var_upper: Vec<T>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex did not terminate within {iterations} iterations")]
    NumericalBreakdown { iterations: usize },
}

impl<T: Scalar> LinearProgram<T> {
    /// A problem with no constraints over the box `[lower, upper]`.
    pub fn new(sense: Sense, objective: Vec<T>, lower: Vec<T>, upper: Vec<T>) -> Self {
        Self {
            sense,
            objective,
            objective_constant: T::zero(),
            constraints: Vec::new(),
            var_lower: lower,
            var_upper: upper,
        }
    }

    pub fn with_constraint(mut self, c: Constraint<T>) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.var_lower.len() != n || self.var_upper.len() != n {
            return Err(LpError::Malformed(format!(
                "bounds have lengths {}/{} but there are {n} variables",
                self.var_lower.len(),
                self.var_upper.len()
            )));
        }
        for i in 0..n {
            let (l, u) = (self.var_lower[i], self.var_upper[i]);
            if !l.is_finite() || !u.is_finite() {
                return Err(LpError::Malformed(format!("variable {i} has a non-finite bound")));
            }
            if l > u {
                return Err(LpError::Malformed(format!("variable {i} has lower bound above upper bound")));
            }
            if !self.objective[i].is_finite() {
                return Err(LpError::Malformed(format!("objective coefficient {i} is not finite")));
            }
        }
        if !self.objective_constant.is_finite() {
            return Err(LpError::Malformed("objective constant is not finite".into()));
        }
        for (j, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "constraint {j} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!("constraint {j} has a non-finite entry")));
            }
        }
        Ok(())
    }

    /// `‖b‖∞`, the scale used by the relative tolerances.
    pub fn rhs_norm(&self) -> T {
        self.constraints.iter().fold(T::zero(), |m, c| m.max(c.rhs.abs()))
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective.iter().zip(x).fold(self.objective_constant, |acc, (&c, &v)| acc + c * v)
    }

    /// `b_j - a_j·x` for every constraint.
    pub fn slacks(&self, x: &[T]) -> Vec<T> {
        self.constraints.iter().map(|c| c.rhs - c.activity(x)).collect()
    }

    /// Largest violation of any constraint or bound at `x` (zero when feasible).
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for (c, s) in self.constraints.iter().zip(self.slacks(x)) {
            let v = match c.relation {
                Relation::Eq => s.abs(),
                Relation::Leq => (-s).max(T::zero()),
            };
            worst = worst.max(v);
        }
        for i in 0..self.n_vars() {
            worst = worst.max(self.var_lower[i] - x[i]).max(x[i] - self.var_upper[i]);
        }
        worst
    }

    /// Debug dump in a line-oriented plain-text format (see [`parse_dump`]).
    pub fn dump(&self) -> String {
        dump::write_dump(self)
    }
}

/// Relative and absolute tolerances. Relative ones are multiplied by `1 + ‖b‖∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub feas_rel: T,
    pub cs: T,
    pub gap: T,
    pub active_rel: T,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot: T,
    /// Reduced-cost threshold for optimality and for zero-reduced-cost detection.
    pub cost: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        let floor = T::tolerance_floor();
        Self {
            feas_rel: T::lit(1e-9).max(floor),
            cs: T::lit(1e-7).max(floor),
            gap: T::lit(1e-8).max(floor),
            active_rel: T::lit(1e-7).max(floor),
            pivot: T::lit(1e-9).max(floor),
            cost: T::lit(1e-9).max(floor),
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    pub fn feas(&self, rhs_norm: T) -> T {
        self.feas_rel * (T::one() + rhs_norm)
    }

    pub fn active(&self, rhs_norm: T) -> T {
        self.active_rel * (T::one() + rhs_norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Where a column of the internal standard form sits at termination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnState {
    Basic,
    AtLower,
    AtUpper,
    /// Lower and upper bound coincide.
    Fixed,
}

/// Final simplex basis. Columns `0..n_vars` are the structural variables and
/// column `n_vars + j` is the slack of constraint `j` (fixed at zero for
/// equalities).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisInfo<T> {
    pub states: Vec<ColumnState>,
    /// Reduced cost of every structural and slack column, in the original sense.
    pub reduced_costs: Vec<T>,
    /// Rows whose basic variable is a leftover phase-one artificial (redundant equalities).
    pub artificial_rows: Vec<usize>,
    /// Value of each basic variable together with its bounds: `(value, lower, upper)`.
    pub basic_values: Vec<(T, T, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Optimal value including the objective constant; NaN unless optimal.
    pub value: T,
    pub primal: Vec<T>,
    /// `d value / d b_j` for each constraint.
    pub duals: Vec<T>,
    /// Constraints with `|slack| <= tol_active`.
    pub active_set: Vec<usize>,
    /// Reduced costs of the structural variables, `c_i - duals·A_i`.
    pub reduced_costs: Vec<T>,
    pub slacks: Vec<T>,
    pub iterations: usize,
    pub basis: Option<BasisInfo<T>>,
}

impl<T: Scalar> LpSolution<T> {
    pub(crate) fn non_optimal(status: LpStatus, lp: &LinearProgram<T>, iterations: usize) -> Self {
        Self {
            status,
            value: T::nan(),
            primal: Vec::new(),
            duals: vec![T::zero(); lp.n_constraints()],
            active_set: Vec::new(),
            reduced_costs: Vec::new(),
            slacks: Vec::new(),
            iterations,
            basis: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Dual objective `Σ_j y_j b_j + Σ_i r_i x_i + c0`, where box-bound
    /// multipliers are carried by the reduced costs.
    pub fn dual_objective(&self, lp: &LinearProgram<T>) -> T {
        let rows = self
            .duals
            .iter()
            .zip(&lp.constraints)
            .fold(T::zero(), |acc, (&y, c)| acc + y * c.rhs);
        let bounds = self
            .reduced_costs
            .iter()
            .zip(&self.primal)
            .fold(T::zero(), |acc, (&r, &x)| acc + r * x);
        rows + bounds + lp.objective_constant
    }

    /// `max_j |dual_j · slack_j|`.
    pub fn max_complementarity(&self) -> T {
        self.duals
            .iter()
            .zip(&self.slacks)
            .fold(T::zero(), |m, (&y, &s)| m.max((y * s).abs()))
    }
}
