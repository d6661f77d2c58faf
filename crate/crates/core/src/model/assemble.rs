//! Weighted-mean assembly of the bound LPs.

use serde::{Deserialize, Serialize};

use super::{Dataset, ModelSpec, MomentSense, Source, Weights};
use crate::error::{Error, Result};
use crate::lp::{Constraint, LinearProgram, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

impl Direction {
    pub fn sense(self) -> Sense {
        match self {
            Direction::Lower => Sense::Minimize,
            Direction::Upper => Sense::Maximize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Col(usize),
    Lit(f64),
}

#[derive(Debug, Clone)]
struct Resolved {
    coeffs: Vec<Slot>,
    constant: Slot,
}

/// A model spec bound to a dataset, with column references resolved.
#[derive(Debug, Clone)]
pub struct BoundModel {
    spec: ModelSpec,
    data: Dataset,
    /// Dataset column index for each slot.
    slot_columns: Vec<usize>,
    objective: Resolved,
    moments: Vec<Resolved>,
}

impl BoundModel {
    pub fn new(spec: ModelSpec, data: Dataset) -> Result<Self> {
        spec.validate()?;
        let mut slot_columns = Vec::new();
        let mut slot_of = std::collections::HashMap::new();
        for name in spec.referenced_columns() {
            let idx = data.column_index(name).ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
            slot_of.insert(name.to_string(), slot_columns.len());
            slot_columns.push(idx);
        }
        let resolve_src = |s: &Source| match s {
            Source::Column(c) => Slot::Col(slot_of[c]),
            Source::Literal(v) => Slot::Lit(*v),
        };
        let resolve = |f: &super::AffineForm| Resolved {
            coeffs: f.coeffs.iter().map(resolve_src).collect(),
            constant: resolve_src(&f.constant),
        };
        let objective = resolve(&spec.objective);
        let moments = spec.moments.iter().map(|m| resolve(&m.form)).collect();
        Ok(Self { spec, data, slot_columns, objective, moments })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn d_theta(&self) -> usize {
        self.spec.d_theta
    }

    fn check_weights(&self, w: &Weights) -> Result<()> {
        if w.len() != self.n() {
            return Err(Error::Dimension(format!("{} weights for {} observations", w.len(), self.n())));
        }
        Ok(())
    }

    /// Weighted means of every referenced column and the affine forms built from them.
    pub fn moment_means(&self, w: &Weights) -> Result<MomentMeans> {
        self.check_weights(w)?;
        let ws = w.as_slice();
        let total = w.total();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        let means: Vec<f64> = self
            .slot_columns
            .iter()
            .map(|&c| {
                let col = self.data.column_at(c);
                col.iter().zip(ws).map(|(&v, &wi)| v * wi).sum::<f64>() / total
            })
            .collect();
        let val = |s: &Slot| match *s {
            Slot::Col(i) => means[i],
            Slot::Lit(v) => v,
        };
        let eval = |r: &Resolved| (r.coeffs.iter().map(val).collect::<Vec<_>>(), val(&r.constant));
        let (objective, objective_constant) = eval(&self.objective);
        Ok(MomentMeans {
            objective,
            objective_constant,
            moments: self.moments.iter().map(eval).collect(),
            senses: self.spec.moments.iter().map(|m| m.sense).collect(),
            lower: self.spec.theta_lower.clone(),
            upper: self.spec.theta_upper.clone(),
        })
    }

    /// Weighted mean of each moment at `theta`.
    pub fn evaluate_moments(&self, w: &Weights, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        Ok(self.moment_means(w)?.evaluate(theta))
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.d_theta() {
            return Err(Error::Dimension(format!("theta has {} entries, expected {}", theta.len(), self.d_theta())));
        }
        Ok(())
    }

    fn form_at(&self, r: &Resolved, i: usize, theta: &[f64]) -> f64 {
        let val = |s: &Slot| match *s {
            Slot::Col(k) => self.data.column_at(self.slot_columns[k])[i],
            Slot::Lit(v) => v,
        };
        r.coeffs.iter().zip(theta).fold(val(&r.constant), |acc, (s, &t)| acc + val(s) * t)
    }

    /// `ψ(W_i, θ)` for observation `i`.
    pub fn objective_at(&self, i: usize, theta: &[f64]) -> f64 {
        self.form_at(&self.objective, i, theta)
    }

    /// `m_j(W_i, θ)` for observation `i`.
    pub fn moment_at(&self, j: usize, i: usize, theta: &[f64]) -> f64 {
        self.form_at(&self.moments[j], i, theta)
    }
}

/// Sample-mean affine forms under one weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMeans {
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    /// `(mean coefficients, mean constant)` per moment.
    pub moments: Vec<(Vec<f64>, f64)>,
    pub senses: Vec<MomentSense>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Which moment, and with which sign, an LP row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowOrigin {
    pub moment: usize,
    /// `+1` for `m_j <= r`, `-1` for the mirrored half `-m_j <= r` of a split equality.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLp {
    pub lp: LinearProgram<f64>,
    pub rows: Vec<RowOrigin>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl MomentMeans {
    pub fn evaluate(&self, theta: &[f64]) -> Vec<f64> {
        self.moments.iter().map(|(a, c)| dot(a, theta) + c).collect()
    }

    pub fn objective_value(&self, theta: &[f64]) -> f64 {
        dot(&self.objective, theta) + self.objective_constant
    }

    /// `‖b‖∞` of the unrelaxed constraint system.
    pub fn rhs_norm(&self) -> f64 {
        self.moments.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    /// Constraint rows `a·θ <= b` (or `=`), with equalities split into mirrored
    /// inequality pairs when `split_equalities` is set. Each row carries its
    /// origin; `shift` is added to every inequality right-hand side.
    pub fn rows(&self, split_equalities: bool, shift: f64) -> (Vec<Constraint<f64>>, Vec<RowOrigin>) {
        let mut rows = Vec::with_capacity(self.moments.len());
        let mut origin = Vec::with_capacity(self.moments.len());
        for (j, ((a, c), sense)) in self.moments.iter().zip(&self.senses).enumerate() {
            match sense {
                MomentSense::Leq => {
                    rows.push(Constraint::leq(a.clone(), -c + shift));
                    origin.push(RowOrigin { moment: j, sign: 1 });
                }
                MomentSense::Eq if !split_equalities => {
                    rows.push(Constraint::eq(a.clone(), -c));
                    origin.push(RowOrigin { moment: j, sign: 1 });
                }
                MomentSense::Eq => {
                    rows.push(Constraint::leq(a.clone(), -c + shift));
                    origin.push(RowOrigin { moment: j, sign: 1 });
                    rows.push(Constraint::leq(a.iter().map(|v| -v).collect(), c + shift));
                    origin.push(RowOrigin { moment: j, sign: -1 });
                }
            }
        }
        (rows, origin)
    }

    /// The bound LP with every inequality relaxed by `relaxation`.
    /// Equalities are split into pairs whenever `relaxation > 0`.
    pub fn to_lp(&self, direction: Direction, relaxation: f64) -> EmpiricalLp {
        let (constraints, rows) = self.rows(relaxation > 0.0, relaxation);
        let lp = LinearProgram {
            sense: direction.sense(),
            objective: self.objective.clone(),
            objective_constant: self.objective_constant,
            constraints,
            var_lower: self.lower.clone(),
            var_upper: self.upper.clone(),
        };
        EmpiricalLp { lp, rows }
    }
}

/// Assembles the weighted empirical bound LP.
pub fn build_empirical_lp(
    model: &BoundModel,
    weights: &Weights,
    direction: Direction,
    relaxation: f64,
) -> Result<EmpiricalLp> {
    if !(relaxation >= 0.0 && relaxation.is_finite()) {
        return Err(Error::InvalidArgument(format!("relaxation must be finite and nonnegative, got {relaxation}")));
    }
    Ok(model.moment_means(weights)?.to_lp(direction, relaxation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;
    use crate::model::{AffineForm, Moment};

    fn toy_data() -> Dataset {
        Dataset::new(vec![("a".into(), vec![1.0, 3.0]), ("c".into(), vec![0.1, 0.3])]).unwrap()
    }

    fn spec(sense: MomentSense) -> ModelSpec {
        ModelSpec {
            d_theta: 1,
            theta_lower: vec![-1.0],
            theta_upper: vec![1.0],
            objective: AffineForm::literal(&[1.0], 0.0),
            moments: vec![Moment {
                label: "m".into(),
                sense,
                form: AffineForm::new(vec![Source::col("a")], Source::col("c")),
            }],
        }
    }

    #[test]
    fn uniform_weights_give_plain_means() {
        let model = BoundModel::new(spec(MomentSense::Leq), toy_data()).unwrap();
        let e = build_empirical_lp(&model, &Weights::uniform(2), Direction::Lower, 0.0).unwrap();
        assert_eq!(e.lp.constraints[0].coeffs, vec![2.0]);
        assert!((e.lp.constraints[0].rhs + 0.2).abs() < 1e-15);
        assert_eq!(e.lp.sense, Sense::Minimize);
    }

    #[test]
    fn zero_weight_excludes_observation() {
        let model = BoundModel::new(spec(MomentSense::Leq), toy_data()).unwrap();
        let w = Weights::new(vec![2.0, 0.0]).unwrap();
        let e = build_empirical_lp(&model, &w, Direction::Upper, 0.0).unwrap();
        assert_eq!(e.lp.constraints[0].coeffs, vec![1.0]);
        assert_eq!(e.lp.sense, Sense::Maximize);
    }

    #[test]
    fn relaxation_shifts_leq_rhs() {
        let mut s = spec(MomentSense::Leq);
        s.moments[0].form = AffineForm::new(vec![Source::lit(1.0)], Source::lit(0.2));
        let model = BoundModel::new(s, toy_data()).unwrap();
        let e = build_empirical_lp(&model, &Weights::uniform(2), Direction::Lower, 0.5).unwrap();
        assert!((e.lp.constraints[0].rhs - 0.3).abs() < 1e-15);
    }

    #[test]
    fn relaxed_equality_is_split() {
        let model = BoundModel::new(spec(MomentSense::Eq), toy_data()).unwrap();
        let e = build_empirical_lp(&model, &Weights::uniform(2), Direction::Lower, 0.0).unwrap();
        assert_eq!(e.lp.constraints.len(), 1);
        assert_eq!(e.lp.constraints[0].relation, Relation::Eq);

        let e = build_empirical_lp(&model, &Weights::uniform(2), Direction::Lower, 0.1).unwrap();
        assert_eq!(e.lp.constraints.len(), 2);
        assert_eq!(e.rows[1], RowOrigin { moment: 0, sign: -1 });
        assert_eq!(e.lp.constraints[1].coeffs, vec![-2.0]);
        assert!((e.lp.constraints[0].rhs - (-0.2 + 0.1)).abs() < 1e-15);
        assert!((e.lp.constraints[1].rhs - (0.2 + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn unknown_column_is_named() {
        let mut s = spec(MomentSense::Leq);
        s.moments[0].form.constant = Source::col("y_star");
        let err = BoundModel::new(s, toy_data()).unwrap_err();
        assert!(matches!(&err, Error::UnknownColumn(c) if c == "y_star"));
        assert!(err.to_string().contains("y_star"));
    }

    #[test]
    fn literal_moment_evaluates_to_zero_at_root() {
        let mut s = spec(MomentSense::Leq);
        s.moments[0].form = AffineForm::literal(&[1.0], -0.5);
        let model = BoundModel::new(s, toy_data()).unwrap();
        assert_eq!(model.evaluate_moments(&Weights::uniform(2), &[0.5]).unwrap(), vec![0.0]);
        assert!(model.evaluate_moments(&Weights::uniform(2), &[0.5, 1.0]).is_err());
    }

    #[test]
    fn moments_are_linear_in_the_constant_column() {
        let model = BoundModel::new(spec(MomentSense::Leq), toy_data()).unwrap();
        let base = model.evaluate_moments(&Weights::uniform(2), &[0.5]).unwrap()[0];
        let mut data = toy_data();
        data = Dataset::new(vec![
            ("a".into(), data.column("a").unwrap().to_vec()),
            ("c".into(), data.column("c").unwrap().iter().map(|v| 2.0 * v).collect()),
        ])
        .unwrap();
        let doubled = BoundModel::new(spec(MomentSense::Leq), data).unwrap();
        let m2 = doubled.evaluate_moments(&Weights::uniform(2), &[0.5]).unwrap()[0];
        // coefficient part 2.0 * 0.5 = 1.0, constant part 0.2
        assert!((base - 1.2).abs() < 1e-15);
        assert!((m2 - (1.0 + 2.0 * 0.2)).abs() < 1e-15);
    }
}
