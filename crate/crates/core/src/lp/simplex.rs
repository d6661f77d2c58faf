//! Two-phase bounded-variable revised simplex with a dense explicit basis inverse.
//!
//! Internal standard form: `A x + s + Σ σ_j e_j a_j = b` with structural columns
//! `0..n`, slack columns `n..n+m` (upper bound `+∞` for `<=` rows, `0` for
//! equalities) and artificial columns `n+m..n+2m`. Phase one minimizes the sum
//! of artificials that start in the basis; phase two pins all artificials to
//! zero and minimizes the (sign-adjusted) objective.

use super::{
    BasisInfo, ColumnState, LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense,
    Tolerances,
};
use crate::scalar::Scalar;

/// Entering-variable rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pricing {
    /// Smallest eligible index enters, smallest basic index leaves on ties.
    Bland,
    /// Most negative reduced cost, switching to Bland's rule for as long as
    /// pivots stay degenerate. Cannot cycle: every degenerate run is priced by Bland.
    #[default]
    DantzigWithBland,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    pub tol: Tolerances<T>,
    /// Iteration cap; `None` means `50 · (n_vars + n_constraints)`.
    pub max_iterations: Option<usize>,
    pub pricing: Pricing,
    /// Refactorize the basis inverse after this many pivots.
    pub refactor_every: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_iterations: None,
            pricing: Pricing::default(),
            refactor_every: 64,
        }
    }
}

pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    solve_lp_with(lp, &SolverOptions::default())
}

pub fn solve_lp_with<T: Scalar>(
    lp: &LinearProgram<T>,
    opts: &SolverOptions<T>,
) -> Result<LpSolution<T>, LpError> {
    lp.validate()?;
    let n = lp.n_vars();
    let m = lp.n_constraints();
    let cap = opts.max_iterations.unwrap_or(50 * (n + m).max(1));
    let rhs_norm = lp.rhs_norm();

    let sign = match lp.sense {
        Sense::Minimize => T::one(),
        Sense::Maximize => -T::one(),
    };
    let mut cost2 = vec![T::zero(); n + 2 * m];
    for (c, &o) in cost2.iter_mut().zip(&lp.objective) {
        *c = sign * o;
    }

    let mut w = Work::new(lp, &cost2, opts, cap);

    let mut cost1 = vec![T::zero(); n + 2 * m];
    for j in 0..m {
        if w.upper[n + m + j] > T::zero() {
            cost1[n + m + j] = T::one();
        }
    }
    if cost1.iter().any(|&c| c > T::zero()) {
        match w.run(&cost1)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => unreachable!("phase one is bounded below by zero"),
        }
        let infeas = (0..m).fold(T::zero(), |acc, j| acc + w.x[n + m + j].max(T::zero()));
        let threshold = opts.tol.feas(rhs_norm) * T::lit(m.max(1) as f64);
        if infeas > threshold {
            let y = w.duals(&cost1);
            let mut sol = LpSolution::non_optimal(LpStatus::Infeasible, lp, w.iterations);
            sol.duals = y;
            return Ok(sol);
        }
        for j in 0..m {
            let a = n + m + j;
            w.upper[a] = T::zero();
            if w.state[a] != State::Basic {
                w.x[a] = T::zero();
                w.state[a] = State::Lower;
            }
        }
        w.refactor()?;
    }

    match w.run(&cost2)? {
        Outcome::Optimal => {}
        Outcome::Unbounded => {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded, lp, w.iterations));
        }
    }

    let y = w.duals(&cost2);
    let primal: Vec<T> = w.x[..n].to_vec();
    let duals: Vec<T> = y.iter().map(|&v| sign * v).collect();
    let reduced_costs: Vec<T> = (0..n).map(|j| sign * (cost2[j] - w.column_dot(j, &y))).collect();
    let slacks = lp.slacks(&primal);
    let tol_active = opts.tol.active(rhs_norm);
    let active_set = lp
        .constraints
        .iter()
        .zip(&slacks)
        .enumerate()
        .filter(|(_, (c, s))| c.relation == Relation::Eq || s.abs() <= tol_active)
        .map(|(j, _)| j)
        .collect();

    let mut states = Vec::with_capacity(n + m);
    let mut all_rc = Vec::with_capacity(n + m);
    for j in 0..n + m {
        let st = match w.state[j] {
            State::Basic => ColumnState::Basic,
            _ if w.upper[j] <= w.lower[j] => ColumnState::Fixed,
            State::Lower => ColumnState::AtLower,
            State::Upper => ColumnState::AtUpper,
        };
        states.push(st);
        all_rc.push(sign * (cost2[j] - w.column_dot(j, &y)));
    }
    let artificial_rows = (0..m).filter(|&r| w.basis[r] >= n + m).collect();
    let basic_values = w.basis.iter().map(|&j| (w.x[j], w.lower[j], w.upper[j])).collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.objective_value(&primal),
        primal,
        duals,
        active_set,
        reduced_costs,
        slacks,
        iterations: w.iterations,
        basis: Some(BasisInfo { states, reduced_costs: all_rc, artificial_rows, basic_values }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Work<'a, T> {
    n: usize,
    m: usize,
    /// Structural columns, each of length `m`.
    cols: Vec<Vec<T>>,
    b: Vec<T>,
    sigma: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    x: Vec<T>,
    state: Vec<State>,
    basis: Vec<usize>,
    /// Row-major `m × m` basis inverse.
    binv: Vec<T>,
    opts: &'a SolverOptions<T>,
    cap: usize,
    iterations: usize,
    since_refactor: usize,
}

impl<'a, T: Scalar> Work<'a, T> {
    fn new(lp: &LinearProgram<T>, cost2: &[T], opts: &'a SolverOptions<T>, cap: usize) -> Self {
        let n = lp.n_vars();
        let m = lp.n_constraints();
        let total = n + 2 * m;
        let cols: Vec<Vec<T>> =
            (0..n).map(|i| lp.constraints.iter().map(|c| c.coeffs[i]).collect()).collect();
        let b: Vec<T> = lp.constraints.iter().map(|c| c.rhs).collect();

        let mut lower = vec![T::zero(); total];
        let mut upper = vec![T::zero(); total];
        let mut x = vec![T::zero(); total];
        let mut state = vec![State::Lower; total];
        for i in 0..n {
            lower[i] = lp.var_lower[i];
            upper[i] = lp.var_upper[i];
            // start each structural at the bound its objective prefers
            if cost2[i] < T::zero() && upper[i] > lower[i] {
                x[i] = upper[i];
                state[i] = State::Upper;
            } else {
                x[i] = lower[i];
            }
        }
        for (j, c) in lp.constraints.iter().enumerate() {
            upper[n + j] = match c.relation {
                Relation::Leq => T::infinity(),
                Relation::Eq => T::zero(),
            };
        }

        let mut sigma = vec![T::one(); m];
        let mut basis = vec![0; m];
        for j in 0..m {
            let r = b[j] - (0..n).fold(T::zero(), |acc, i| acc + cols[i][j] * x[i]);
            let leq = lp.constraints[j].relation == Relation::Leq;
            if leq && r >= T::zero() {
                basis[j] = n + j;
                x[n + j] = r;
                state[n + j] = State::Basic;
            } else {
                if r < T::zero() {
                    sigma[j] = -T::one();
                }
                let a = n + m + j;
                basis[j] = a;
                upper[a] = T::infinity();
                x[a] = r.abs();
                state[a] = State::Basic;
            }
        }
        let mut binv = vec![T::zero(); m * m];
        for j in 0..m {
            binv[j * m + j] = if basis[j] >= n + m { sigma[j] } else { T::one() };
        }

        Self {
            n,
            m,
            cols,
            b,
            sigma,
            lower,
            upper,
            x,
            state,
            basis,
            binv,
            opts,
            cap,
            iterations: 0,
            since_refactor: 0,
        }
    }

    fn ncols(&self) -> usize {
        self.n + 2 * self.m
    }

    fn column_dot(&self, j: usize, y: &[T]) -> T {
        let (n, m) = (self.n, self.m);
        if j < n {
            self.cols[j].iter().zip(y).fold(T::zero(), |acc, (&a, &v)| acc + a * v)
        } else if j < n + m {
            y[j - n]
        } else {
            self.sigma[j - n - m] * y[j - n - m]
        }
    }

    /// Dense column `j` of the constraint matrix.
    fn column(&self, j: usize) -> Vec<T> {
        let (n, m) = (self.n, self.m);
        if j < n {
            self.cols[j].clone()
        } else {
            let mut v = vec![T::zero(); m];
            if j < n + m {
                v[j - n] = T::one();
            } else {
                v[j - n - m] = self.sigma[j - n - m];
            }
            v
        }
    }

    /// `B⁻¹ A_j`.
    fn ftran(&self, j: usize) -> Vec<T> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![T::zero(); m];
        if j < n {
            let col = &self.cols[j];
            for (r, o) in out.iter_mut().enumerate() {
                let row = &self.binv[r * m..(r + 1) * m];
                *o = row.iter().zip(col).fold(T::zero(), |acc, (&a, &v)| acc + a * v);
            }
        } else {
            let (k, s) = if j < n + m { (j - n, T::one()) } else { (j - n - m, self.sigma[j - n - m]) };
            for (r, o) in out.iter_mut().enumerate() {
                *o = s * self.binv[r * m + k];
            }
        }
        out
    }

    /// `yᵀ = c_Bᵀ B⁻¹`.
    fn duals(&self, cost: &[T]) -> Vec<T> {
        let m = self.m;
        let mut y = vec![T::zero(); m];
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != T::zero() {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, &a) in y.iter_mut().zip(row) {
                    *yi = *yi + cb * a;
                }
            }
        }
        y
    }

    /// Recomputes `B⁻¹` by Gauss-Jordan elimination and the basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let mut a = vec![T::zero(); m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for (r, v) in self.column(j).into_iter().enumerate() {
                a[r * m + c] = v;
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= T::epsilon() {
                return Err(LpError::NumericalBreakdown { iterations: self.iterations });
            }
            if piv != col {
                for k in 0..m {
                    a.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let p = a[col * m + col];
            for k in 0..m {
                a[col * m + k] = a[col * m + k] / p;
                inv[col * m + k] = inv[col * m + k] / p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f != T::zero() {
                    for k in 0..m {
                        a[r * m + k] = a[r * m + k] - f * a[col * m + k];
                        inv[r * m + k] = inv[r * m + k] - f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;

        let mut rhs = self.b.clone();
        for j in 0..self.ncols() {
            if self.state[j] == State::Basic || self.x[j] == T::zero() {
                continue;
            }
            let xj = self.x[j];
            for (r, v) in self.column(j).into_iter().enumerate() {
                rhs[r] = rhs[r] - v * xj;
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.basis[r]] = row.iter().zip(&rhs).fold(T::zero(), |acc, (&a, &v)| acc + a * v);
        }
        Ok(())
    }

    fn run(&mut self, cost: &[T]) -> Result<Outcome, LpError> {
        let tol = &self.opts.tol;
        let cmax = cost.iter().fold(T::zero(), |acc, c| acc.max(c.abs()));
        let tol_cost = tol.cost * (T::one() + cmax);
        let rhs_norm = self.b.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let tol_feas = tol.feas(rhs_norm);
        let mut bland = self.opts.pricing == Pricing::Bland;
        let mut fresh = false;

        loop {
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                fresh = true;
            }
            let y = self.duals(cost);

            let mut entering: Option<(usize, T)> = None;
            for j in 0..self.ncols() {
                let st = self.state[j];
                if st == State::Basic || self.upper[j] <= self.lower[j] {
                    continue;
                }
                let d = cost[j] - self.column_dot(j, &y);
                let eligible = match st {
                    State::Lower => d < -tol_cost,
                    State::Upper => d > tol_cost,
                    State::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }

            let Some((q, _)) = entering else {
                if fresh || self.since_refactor == 0 {
                    return Ok(Outcome::Optimal);
                }
                // confirm optimality on a freshly factorized basis
                self.refactor()?;
                fresh = true;
                continue;
            };
            fresh = false;

            self.iterations += 1;
            if self.iterations > self.cap {
                return Err(LpError::NumericalBreakdown { iterations: self.iterations });
            }

            let dir = if self.state[q] == State::Lower { T::one() } else { -T::one() };
            let alpha = self.ftran(q);
            let flip = self.upper[q] - self.lower[q];

            // Harris two-pass ratio test
            let mut relaxed_min = T::infinity();
            for r in 0..self.m {
                let g = dir * alpha[r];
                let j = self.basis[r];
                let lim = if g > tol.pivot {
                    (self.x[j] - self.lower[j] + tol_feas) / g
                } else if g < -tol.pivot && self.upper[j].is_finite() {
                    (self.upper[j] - self.x[j] + tol_feas) / (-g)
                } else {
                    continue;
                };
                relaxed_min = relaxed_min.min(lim);
            }

            let mut leave: Option<(usize, T)> = None;
            if relaxed_min.is_finite() {
                for r in 0..self.m {
                    let g = dir * alpha[r];
                    let j = self.basis[r];
                    let lim = if g > tol.pivot {
                        (self.x[j] - self.lower[j]) / g
                    } else if g < -tol.pivot && self.upper[j].is_finite() {
                        (self.upper[j] - self.x[j]) / (-g)
                    } else {
                        continue;
                    };
                    if lim > relaxed_min {
                        continue;
                    }
                    let better = match leave {
                        None => true,
                        Some((rb, _)) => {
                            if bland {
                                j < self.basis[rb]
                            } else {
                                let gb = alpha[rb].abs();
                                g.abs() > gb || (g.abs() == gb && j < self.basis[rb])
                            }
                        }
                    };
                    if better {
                        leave = Some((r, lim.max(T::zero())));
                    }
                }
            }

            match leave {
                None if !flip.is_finite() => return Ok(Outcome::Unbounded),
                Some((_, t)) if t < flip => {
                    let (r, t) = leave.unwrap();
                    self.pivot(q, r, dir, t, &alpha);
                    if self.opts.pricing != Pricing::Bland {
                        bland = t <= tol_feas;
                    }
                }
                _ => {
                    // entering variable reaches its opposite bound first
                    for (r, &a) in alpha.iter().enumerate() {
                        let j = self.basis[r];
                        self.x[j] = self.x[j] - dir * flip * a;
                    }
                    if self.state[q] == State::Lower {
                        self.x[q] = self.upper[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = State::Lower;
                    }
                    self.since_refactor += 1;
                    if self.opts.pricing != Pricing::Bland {
                        bland = false;
                    }
                }
            }
        }
    }

    fn pivot(&mut self, q: usize, r: usize, dir: T, t: T, alpha: &[T]) {
        let m = self.m;
        for (i, &a) in alpha.iter().enumerate() {
            let j = self.basis[i];
            self.x[j] = self.x[j] - dir * t * a;
        }
        self.x[q] = self.x[q] + dir * t;

        let out = self.basis[r];
        let g = dir * alpha[r];
        if g > T::zero() {
            self.x[out] = self.lower[out];
            self.state[out] = State::Lower;
        } else {
            self.x[out] = self.upper[out];
            self.state[out] = State::Upper;
        }

        let piv = alpha[r];
        let row_r: Vec<T> = self.binv[r * m..(r + 1) * m].iter().map(|&v| v / piv).collect();
        for (i, &a) in alpha.iter().enumerate() {
            if i == r || a == T::zero() {
                continue;
            }
            let row = &mut self.binv[i * m..(i + 1) * m];
            for (v, &rr) in row.iter_mut().zip(&row_r) {
                *v = *v - a * rr;
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&row_r);

        self.basis[r] = q;
        self.state[q] = State::Basic;
        self.since_refactor += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Constraint;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn box_minimum_without_constraints() {
        let lp = LinearProgram::new(Sense::Minimize, vec![1.0], vec![0.0], vec![1.0]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.primal, vec![0.0]);
        assert!(sol.active_set.is_empty());
    }

    #[test]
    fn contradictory_half_lines_are_infeasible() {
        let lp = LinearProgram::new(Sense::Minimize, vec![1.0], vec![-5.0], vec![5.0])
            .with_constraint(Constraint::leq(vec![1.0], 0.0))
            .with_constraint(Constraint::leq(vec![-1.0], -1.0));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_simplex_corner() {
        // min -x-y s.t. x+y <= 1 over the unit square
        let lp = LinearProgram::new(Sense::Minimize, vec![-1.0, -1.0], vec![0.0; 2], vec![1.0; 2])
            .with_constraint(Constraint::leq(vec![1.0, 1.0], 1.0));
        let sol = solve_lp(&lp).unwrap();
        assert_close(sol.value, -1.0);
        assert_close(sol.duals[0], -1.0);
        assert_eq!(sol.active_set, vec![0]);
        // the non-basic coordinate prices out at zero: alternative optima exist
        assert!(sol.reduced_costs.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn maximize_flips_dual_sign() {
        let lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0], vec![0.0; 2], vec![1.0; 2])
            .with_constraint(Constraint::leq(vec![1.0, 1.0], 1.0));
        let sol = solve_lp(&lp).unwrap();
        assert_close(sol.value, 1.0);
        assert_close(sol.duals[0], 1.0);
    }

    #[test]
    fn equality_rows_and_objective_constant() {
        // min 2x + y + 3 s.t. x + y = 1, x - y <= 0.5
        let mut lp = LinearProgram::new(Sense::Minimize, vec![2.0, 1.0], vec![-2.0; 2], vec![2.0; 2])
            .with_constraint(Constraint::eq(vec![1.0, 1.0], 1.0))
            .with_constraint(Constraint::leq(vec![1.0, -1.0], 0.5));
        lp.objective_constant = 3.0;
        let sol = solve_lp(&lp).unwrap();
        // x = -1, y = 2 hits the box on x
        assert_close(sol.primal[0], -1.0);
        assert_close(sol.primal[1], 2.0);
        assert_close(sol.value, -2.0 + 2.0 + 3.0);
        assert_close(sol.dual_objective(&lp), sol.value);
    }

    #[test]
    fn infeasible_equalities_with_artificials() {
        let lp = LinearProgram::new(Sense::Minimize, vec![0.0, 0.0], vec![0.0; 2], vec![1.0; 2])
            .with_constraint(Constraint::eq(vec![1.0, 1.0], 3.0));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn iteration_cap_reports_breakdown() {
        let lp = LinearProgram::new(Sense::Minimize, vec![-1.0, -2.0], vec![0.0; 2], vec![4.0; 2])
            .with_constraint(Constraint::leq(vec![1.0, 1.0], 3.0))
            .with_constraint(Constraint::leq(vec![1.0, -1.0], -1.0));
        let opts = SolverOptions { max_iterations: Some(0), ..SolverOptions::default() };
        assert!(matches!(solve_lp_with(&lp, &opts), Err(LpError::NumericalBreakdown { .. })));
    }

    #[test]
    fn bland_and_dantzig_agree_on_value() {
        let lp = LinearProgram::new(Sense::Maximize, vec![3.0, 2.0, 4.0], vec![0.0; 3], vec![5.0; 3])
            .with_constraint(Constraint::leq(vec![1.0, 1.0, 2.0], 4.0))
            .with_constraint(Constraint::leq(vec![2.0, 0.0, 3.0], 5.0))
            .with_constraint(Constraint::leq(vec![2.0, 1.0, 3.0], 7.0));
        let a = solve_lp(&lp).unwrap();
        let opts = SolverOptions { pricing: Pricing::Bland, ..SolverOptions::default() };
        let b = solve_lp_with(&lp, &opts).unwrap();
        assert_close(a.value, b.value);
    }

    #[test]
    fn f32_solves_the_same_corner() {
        let lp = LinearProgram::<f32>::new(Sense::Minimize, vec![-1.0, -1.0], vec![0.0; 2], vec![1.0; 2])
            .with_constraint(Constraint::leq(vec![1.0, 1.0], 1.0));
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value + 1.0).abs() < 1e-5);
        assert!((sol.duals[0] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn redundant_equalities_keep_an_artificial_basic() {
        let lp = LinearProgram::new(Sense::Minimize, vec![1.0, 0.0], vec![0.0; 2], vec![1.0; 2])
            .with_constraint(Constraint::eq(vec![1.0, 1.0], 1.0))
            .with_constraint(Constraint::eq(vec![2.0, 2.0], 2.0));
        let sol = solve_lp(&lp).unwrap();
        assert_close(sol.value, 0.0);
        assert_close(sol.primal[1], 1.0);
        assert_close(sol.dual_objective(&lp), 0.0);
    }
}
