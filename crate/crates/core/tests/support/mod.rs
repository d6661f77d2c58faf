//! Brute-force oracles and model builders shared by the integration tests.
#![allow(dead_code)]

use pibound::lp::{Constraint, LinearProgram, Relation, Sense};
use pibound::model::{AffineForm, Dataset, ModelSpec, Moment, MomentSense, Source};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solves a small square system by Gaussian elimination with partial pivoting.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let d = b.len();
    for col in 0..d {
        let p = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..d {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..d {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..d).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Optimal value by enumerating every vertex of the (boxed) feasible region;
/// `None` when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram<f64>) -> Option<f64> {
    let d = lp.n_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = lp.constraints.iter().map(|c| (c.coeffs.clone(), c.rhs)).collect();
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        planes.push((e.clone(), lp.var_lower[k]));
        planes.push((e, lp.var_upper[k]));
    }
    let scale = 1.0 + lp.rhs_norm().max(lp.var_upper.iter().chain(&lp.var_lower).fold(0.0, |m, v| m.max(v.abs())));
    let tol = 1e-9 * scale;
    let mut best: Option<f64> = None;
    for combo in combinations(planes.len(), d) {
        let a = combo.iter().map(|&i| planes[i].0.clone()).collect();
        let b = combo.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        let in_box = (0..d).all(|k| x[k] >= lp.var_lower[k] - tol && x[k] <= lp.var_upper[k] + tol);
        let rows_ok = lp.constraints.iter().all(|c| {
            let act = c.activity(&x);
            match c.relation {
                Relation::Leq => act <= c.rhs + tol,
                Relation::Eq => (act - c.rhs).abs() <= tol,
            }
        });
        if in_box && rows_ok {
            let v = lp.objective_value(&x);
            best = Some(match (best, lp.sense) {
                (None, _) => v,
                (Some(b), Sense::Minimize) => b.min(v),
                (Some(b), Sense::Maximize) => b.max(v),
            });
        }
    }
    best
}

/// A random LP with at most 3 variables and 6 constraints. Integer data makes
/// degenerate vertices and duplicated rows common.
pub fn random_small_lp(r: &mut ChaCha8Rng) -> LinearProgram<f64> {
    let d = r.gen_range(1..=3);
    let m = r.gen_range(0..=6);
    let integer = r.gen_bool(0.5);
    let draw = |r: &mut ChaCha8Rng, lo: f64, hi: f64| {
        if integer {
            r.gen_range(lo as i64..=hi as i64) as f64
        } else {
            r.gen_range(lo..hi)
        }
    };
    let lower: Vec<f64> = (0..d).map(|_| draw(r, -4.0, 0.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + draw(r, 1.0, 5.0)).collect();
    let objective: Vec<f64> = (0..d).map(|_| draw(r, -3.0, 3.0)).collect();
    let sense = if r.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::new(sense, objective, lower.clone(), upper.clone());
    lp.objective_constant = draw(r, -2.0, 2.0);
    let x0: Vec<f64> = (0..d).map(|k| if integer { lower[k] } else { r.gen_range(lower[k]..upper[k]) }).collect();
    for _ in 0..m {
        if !lp.constraints.is_empty() && r.gen_bool(0.15) {
            let dup = lp.constraints[r.gen_range(0..lp.constraints.len())].clone();
            lp.constraints.push(dup);
            continue;
        }
        let a: Vec<f64> = (0..d).map(|_| draw(r, -3.0, 3.0)).collect();
        let at_x0: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
        // mostly consistent with x0, sometimes shifted so the system may be infeasible
        let shift = if r.gen_bool(0.8) { draw(r, 0.0, 2.0) } else { draw(r, -3.0, 0.0) };
        if r.gen_bool(0.25) {
            let off = if r.gen_bool(0.85) { 0.0 } else { shift };
            lp.constraints.push(Constraint::eq(a, at_x0 + off));
        } else {
            lp.constraints.push(Constraint::leq(a, at_x0 + shift));
        }
    }
    lp
}

/// Exhaustive search for the shortest pair satisfying both coverage counts.
/// Ties in `q_lb + q_ub` go to the smaller `q_lb`.
pub fn brute_force_calibration(lower: &[f64], upper: &[f64], d: f64, m: usize) -> Option<(f64, f64)> {
    let lbs: Vec<f64> = lower.iter().flat_map(|&l| [l, l - d]).collect();
    let ubs: Vec<f64> = upper.iter().flat_map(|&u| [-u, -(u + d)]).collect();
    let mut best: Option<(f64, f64)> = None;
    for &q_lb in &lbs {
        for &q_ub in &ubs {
            let c1 = lower.iter().zip(upper).filter(|(&l, &u)| l <= q_lb && u + d >= -q_ub).count();
            let c2 = lower.iter().zip(upper).filter(|(&l, &u)| l <= q_lb + d && u >= -q_ub).count();
            if c1 < m || c2 < m {
                continue;
            }
            let better = match best {
                None => true,
                Some((bl, bu)) => {
                    let (s, bs) = (q_lb + q_ub, bl + bu);
                    s < bs || (s == bs && q_lb < bl)
                }
            };
            if better {
                best = Some((q_lb, q_ub));
            }
        }
    }
    best
}

fn ternary(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    // coarse grid first, then shrink around the best grid point
    let grid = 64;
    let step = (hi - lo) / grid as f64;
    let best = (0..=grid).map(|i| lo + i as f64 * step).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `max(0, min over the box of max_j (a_j·θ + c_j))` for one or two parameters.
pub fn minimax_oracle(rows: &[(Vec<f64>, f64)], lower: &[f64], upper: &[f64]) -> f64 {
    let f = |theta: &[f64]| {
        rows.iter()
            .map(|(a, c)| a.iter().zip(theta).map(|(p, q)| p * q).sum::<f64>() + c)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let v = match lower.len() {
        1 => ternary(lower[0], upper[0], |t| f(&[t])).1,
        2 => ternary(lower[0], upper[0], |t0| ternary(lower[1], upper[1], |t1| f(&[t0, t1])).1).1,
        d => panic!("oracle handles one or two parameters, got {d}"),
    };
    v.max(0.0)
}

/// One-observation literal model `a_j·θ + c_j ≤ 0` (or `= 0`).
pub fn literal_model(d: usize, lower: f64, upper: f64, objective: &[f64], rows: &[(Vec<f64>, f64, bool)]) -> (ModelSpec, Dataset) {
    let spec = ModelSpec {
        d_theta: d,
        theta_lower: vec![lower; d],
        theta_upper: vec![upper; d],
        objective: AffineForm::literal(objective, 0.0),
        moments: rows
            .iter()
            .enumerate()
            .map(|(j, (a, c, eq))| Moment {
                label: format!("m{j}"),
                sense: if *eq { MomentSense::Eq } else { MomentSense::Leq },
                form: AffineForm::literal(a, *c),
            })
            .collect(),
    };
    (spec, Dataset::new(vec![("one".into(), vec![1.0])]).unwrap())
}

/// Inconsistent one- or two-parameter literal system: a pair of opposing
/// half-spaces with positive constants plus random extra rows.
pub fn inconsistent_rows(r: &mut ChaCha8Rng, d: usize) -> Vec<(Vec<f64>, f64)> {
    let a: Vec<f64> = (0..d).map(|_| r.gen_range(-2.0..2.0)).collect();
    let mut rows = vec![
        (a.clone(), r.gen_range(0.05..1.0)),
        (a.iter().map(|v| -v).collect(), r.gen_range(0.05..1.0)),
    ];
    for _ in 0..r.gen_range(0..4) {
        rows.push(((0..d).map(|_| r.gen_range(-2.0..2.0)).collect(), r.gen_range(-1.0..1.0)));
    }
    rows
}

/// Random sample-based model that is strictly feasible at `θ = 0` under any
/// reweighting. Moment `j` uses its own columns `a{j}_{k}` and `c{j}`.
pub fn random_feasible_model(r: &mut ChaCha8Rng, n: usize) -> (ModelSpec, Dataset) {
    let d = r.gen_range(2..=3);
    let k = r.gen_range(2..=5);
    let mut cols = Vec::new();
    let mut moments = Vec::new();
    for j in 0..k {
        let mut coeffs = Vec::new();
        for t in 0..d {
            let mu = r.gen_range(-2.0..2.0);
            let name = format!("a{j}_{t}");
            cols.push((name.clone(), (0..n).map(|_| mu + r.gen_range(-1.0..1.0)).collect::<Vec<f64>>()));
            coeffs.push(Source::col(name));
        }
        let c_name = format!("c{j}");
        cols.push((c_name.clone(), (0..n).map(|_| -r.gen_range(0.2..1.5)).collect()));
        moments.push(Moment { label: format!("m{j}"), sense: MomentSense::Leq, form: AffineForm::new(coeffs, Source::col(c_name)) });
    }
    let objective: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
    let spec = ModelSpec {
        d_theta: d,
        theta_lower: vec![-1.0; d],
        theta_upper: vec![1.0; d],
        objective: AffineForm::literal(&objective, 0.0),
        moments,
    };
    (spec, Dataset::new(cols).unwrap())
}

/// Multiplies every column of moment `j` in a model from [`random_feasible_model`] by `s`.
pub fn scale_moment(data: &Dataset, j: usize, s: f64) -> Dataset {
    let prefix_a = format!("a{j}_");
    let c_name = format!("c{j}");
    let cols = data
        .names()
        .iter()
        .map(|name| {
            let v = data.column(name).unwrap();
            let scaled = name.starts_with(&prefix_a) || *name == c_name;
            (name.clone(), if scaled { v.iter().map(|x| x * s).collect() } else { v.to_vec() })
        })
        .collect();
    Dataset::new(cols).unwrap()
}

/// Two-parameter model whose lower-bound optimum sits on a duplicated inequality.
pub fn duplicated_inequality_model() -> (ModelSpec, Dataset) {
    let half = || AffineForm::new(vec![Source::lit(-1.0), Source::lit(-1.0)], Source::col("b"));
    let spec = ModelSpec {
        d_theta: 2,
        theta_lower: vec![0.0; 2],
        theta_upper: vec![1.0; 2],
        objective: AffineForm::literal(&[1.0, 2.0], 0.0),
        moments: vec![
            Moment { label: "sum".into(), sense: MomentSense::Leq, form: half() },
            Moment { label: "sum_again".into(), sense: MomentSense::Leq, form: half() },
            Moment { label: "gap".into(), sense: MomentSense::Leq, form: AffineForm::literal(&[1.0, -1.0], -0.9) },
        ],
    };
    (spec, Dataset::new(vec![("b".into(), vec![0.4, 0.6, 0.5, 0.5])]).unwrap())
}

/// Large synthetic model: `d` parameters in `[0, 1]`, `k` inequalities with
/// fixed coefficients and sample-mean right-hand sides that leave slack at
/// `θ = 1/2`, and a random linear objective.
pub fn large_synthetic_model(d: usize, k: usize, n: usize, seed: u64) -> (ModelSpec, Dataset) {
    let mut r = rng(seed);
    let mut cols = Vec::new();
    let mut moments = Vec::new();
    for j in 0..k {
        let a: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
        let at_half: f64 = a.iter().sum::<f64>() * 0.5;
        // a·θ - b ≤ 0, with the column holding -b
        let name = format!("neg_b{j}");
        cols.push((name.clone(), (0..n).map(|_| -(at_half + 1.0 + r.gen_range(-1.0..1.0))).collect::<Vec<f64>>()));
        let coeffs = a.iter().map(|&v| Source::lit(v)).collect();
        moments.push(Moment { label: format!("row{j}"), sense: MomentSense::Leq, form: AffineForm::new(coeffs, Source::col(name)) });
    }
    let objective: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
    let spec = ModelSpec {
        d_theta: d,
        theta_lower: vec![0.0; d],
        theta_upper: vec![1.0; d],
        objective: AffineForm::literal(&objective, 0.0),
        moments,
    };
    (spec, Dataset::new(cols).unwrap())
}

/// Kolmogorov–Smirnov distance between a sample and a continuous cdf.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
