//! Declarative model specification and its JSON form.
//!
//! Every function in the model is an observation-level affine form in `θ`:
//! `f(w, θ) = Σ_k coeff_k(w) θ_k + const(w)`, where each coefficient and the
//! constant is either a dataset column or a literal. A moment imposes
//! `mean f(W, θ) <= 0` (`leq`) or `= 0` (`eq`).
//!
//! The measurability and envelope conditions a valid moment class needs cannot
//! be checked from data and are assumed.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a coefficient or constant comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum Source {
    #[serde(rename = "col")]
    Column(String),
    #[serde(rename = "lit")]
    Literal(f64),
}

impl Source {
    pub fn col(name: impl Into<String>) -> Self {
        Source::Column(name.into())
    }

    pub fn lit(v: f64) -> Self {
        Source::Literal(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineForm {
    pub coeffs: Vec<Source>,
    #[serde(rename = "const")]
    pub constant: Source,
}

impl AffineForm {
    pub fn new(coeffs: Vec<Source>, constant: Source) -> Self {
        Self { coeffs, constant }
    }

    /// All-literal form.
    pub fn literal(coeffs: &[f64], constant: f64) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| Source::Literal(c)).collect(),
            constant: Source::Literal(constant),
        }
    }

    pub(crate) fn sources(&self) -> impl Iterator<Item = &Source> {
        self.coeffs.iter().chain(std::iter::once(&self.constant))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSense {
    Eq,
    Leq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Moment {
    pub label: String,
    pub sense: MomentSense,
    #[serde(flatten)]
    pub form: AffineForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub d_theta: usize,
    pub theta_lower: Vec<f64>,
    pub theta_upper: Vec<f64>,
    pub objective: AffineForm,
    #[serde(default)]
    pub moments: Vec<Moment>,
}

/// Parses and validates a JSON model spec.
pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let spec: ModelSpec = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

impl ModelSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }

    pub fn n_moments(&self) -> usize {
        self.moments.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d_theta;
        if d == 0 {
            return Err(Error::Schema("d_theta must be at least 1".into()));
        }
        for (name, v) in [("theta_lower", &self.theta_lower), ("theta_upper", &self.theta_upper)] {
            if v.len() != d {
                return Err(Error::Dimension(format!("{name} has {} entries, expected d_theta = {d}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Schema(format!("{name} must be finite")));
            }
        }
        for k in 0..d {
            if self.theta_lower[k] >= self.theta_upper[k] {
                return Err(Error::Schema(format!(
                    "theta_lower[{k}] = {} is not below theta_upper[{k}] = {}",
                    self.theta_lower[k], self.theta_upper[k]
                )));
            }
        }
        check_form("objective", &self.objective, d)?;
        let mut labels = HashSet::new();
        for (j, m) in self.moments.iter().enumerate() {
            check_form(&format!("moments[{j}]"), &m.form, d)?;
            if !labels.insert(m.label.as_str()) {
                return Err(Error::Schema(format!("moments[{j}].label {:?} is not unique", m.label)));
            }
        }
        Ok(())
    }

    /// Every column name the spec refers to, in first-use order.
    pub fn referenced_columns(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let forms = std::iter::once(&self.objective).chain(self.moments.iter().map(|m| &m.form));
        for form in forms {
            for s in form.sources() {
                if let Source::Column(c) = s {
                    if seen.insert(c.as_str()) {
                        out.push(c.as_str());
                    }
                }
            }
        }
        out
    }
}

fn check_form(field: &str, form: &AffineForm, d: usize) -> Result<()> {
    if form.coeffs.len() != d {
        return Err(Error::Dimension(format!(
            "{field}.coeffs has {} entries, expected d_theta = {d}",
            form.coeffs.len()
        )));
    }
    for s in form.sources() {
        match s {
            Source::Literal(v) if !v.is_finite() => {
                return Err(Error::Schema(format!("{field} has a non-finite literal")));
            }
            Source::Column(c) if c.is_empty() => {
                return Err(Error::Schema(format!("{field} has an empty column name")));
            }
            _ => {}
        }
    }
    Ok(())
}
