//! Simulators for the two Monte Carlo designs: a five-point outcome missing
//! at random-ish rates, and a linear regression whose outcome is only known to
//! lie in an interval. Each returns a dataset, a matching model spec, and the
//! true value of the functional.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AffineForm, Dataset, ModelSpec, Moment, MomentSense, Source};
use crate::rng;

#[derive(Debug, Clone)]
pub struct GeneratedExample {
    pub data: Dataset,
    pub spec: ModelSpec,
    pub psi_true: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleKind {
    MissingData,
    IntervalRegression,
}

impl ExampleKind {
    pub fn name(self) -> &'static str {
        match self {
            ExampleKind::MissingData => "missing-data",
            ExampleKind::IntervalRegression => "interval-regression",
        }
    }
}

impl std::str::FromStr for ExampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "missing-data" => Ok(ExampleKind::MissingData),
            "interval-regression" => Ok(ExampleKind::IntervalRegression),
            other => Err(Error::InvalidArgument(format!("unknown example {other:?}"))),
        }
    }
}

/// `max(c/√n, δ)`.
fn local_scale(n: usize, c: f64, delta: f64) -> f64 {
    (c / (n as f64).sqrt()).max(delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissingDataConfig {
    pub n: usize,
    pub c: f64,
    pub delta: f64,
    pub seed: u64,
}

impl MissingDataConfig {
    pub fn new(n: usize, c: f64, seed: u64) -> Self {
        Self { n, c, delta: 1e-6, seed }
    }

    /// Probability that the outcome is missing.
    pub fn missing_probability(&self) -> f64 {
        local_scale(self.n, self.c, self.delta)
    }
}

pub const OUTCOMES: [u8; 5] = [1, 2, 3, 4, 5];

/// Spec for the missing-data bounds. Parameters are ordered
/// `θ_10..θ_50, θ_11..θ_51` with `θ_yd = P(Y = y, D = d)`.
pub fn missing_data_spec() -> ModelSpec {
    let mut objective = Vec::with_capacity(10);
    for _ in 0..2 {
        objective.extend(OUTCOMES.iter().map(|&y| Source::lit(y as f64)));
    }
    let mut moments = Vec::with_capacity(6);
    let mut coeffs = vec![Source::lit(0.0); 10];
    coeffs[..5].fill(Source::lit(1.0));
    moments.push(Moment {
        label: "missing_mass".into(),
        sense: MomentSense::Eq,
        form: AffineForm::new(coeffs, Source::col("neg_d0")),
    });
    for (k, &y) in OUTCOMES.iter().enumerate() {
        let mut coeffs = vec![Source::lit(0.0); 10];
        coeffs[5 + k] = Source::lit(1.0);
        moments.push(Moment {
            label: format!("observed_y{y}"),
            sense: MomentSense::Eq,
            form: AffineForm::new(coeffs, Source::col(format!("neg_y{y}_d1"))),
        });
    }
    ModelSpec {
        d_theta: 10,
        theta_lower: vec![0.0; 10],
        theta_upper: vec![1.0; 10],
        objective: AffineForm::new(objective, Source::lit(0.0)),
        moments,
    }
}

/// Builds the missing-data columns from observed `(Y·D, D)` pairs.
pub fn missing_data_dataset(yd: &[u8], d: &[u8]) -> Result<Dataset> {
    let mut cols = vec![
        ("yd".to_string(), yd.iter().map(|&v| v as f64).collect()),
        ("d".to_string(), d.iter().map(|&v| v as f64).collect()),
        ("neg_d0".to_string(), d.iter().map(|&v| if v == 0 { -1.0 } else { 0.0 }).collect::<Vec<f64>>()),
    ];
    for &y in &OUTCOMES {
        cols.push((
            format!("neg_y{y}_d1"),
            yd.iter().zip(d).map(|(&o, &di)| if di == 1 && o == y { -1.0 } else { 0.0 }).collect(),
        ));
    }
    Dataset::new(cols)
}

pub fn generate_missing_data(cfg: &MissingDataConfig) -> Result<GeneratedExample> {
    let q = cfg.missing_probability();
    if !(0.0..=1.0).contains(&q) || cfg.n == 0 {
        return Err(Error::InvalidArgument(format!("missing probability {q} outside [0, 1] or n = 0")));
    }
    let mut r = rng::stream(cfg.seed, 0);
    let mut yd = Vec::with_capacity(cfg.n);
    let mut d = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let y = OUTCOMES[r.gen_range(0..5)];
        let observed = r.gen::<f64>() >= q;
        d.push(observed as u8);
        yd.push(if observed { y } else { 0 });
    }
    Ok(GeneratedExample { data: missing_data_dataset(&yd, &d)?, spec: missing_data_spec(), psi_true: 3.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRegressionConfig {
    pub n: usize,
    pub c: f64,
    pub delta: f64,
    pub theta_true: [f64; 4],
    pub seed: u64,
}

impl IntervalRegressionConfig {
    pub fn new(n: usize, c: f64, seed: u64) -> Self {
        Self { n, c, delta: 1e-6, theta_true: [1.15, 1.0, 1.0, 1.0], seed }
    }

    pub fn half_width(&self) -> f64 {
        local_scale(self.n, self.c, self.delta)
    }
}

pub const REGRESSORS: usize = 4;
pub const SUPPORT_POINTS: usize = 1 << REGRESSORS;

/// The support point with index `r`: bit `k` of `r` is component `k`.
pub fn support_point(r: usize) -> [f64; REGRESSORS] {
    std::array::from_fn(|k| ((r >> k) & 1) as f64)
}

/// Spec for the interval regression: for every support point `x_r`,
/// `E[Y_lo 1{X = x_r}] - x_rᵀθ P(X = x_r) <= 0` and
/// `x_rᵀθ P(X = x_r) - E[Y_hi 1{X = x_r}] <= 0`; the functional is `θ_1`.
pub fn interval_regression_spec() -> ModelSpec {
    let mut moments = Vec::with_capacity(2 * SUPPORT_POINTS);
    for r in 0..SUPPORT_POINTS {
        let x = support_point(r);
        let coeffs = |neg: bool| -> Vec<Source> {
            x.iter()
                .map(|&xk| {
                    if xk == 0.0 {
                        Source::lit(0.0)
                    } else if neg {
                        Source::col(format!("neg_ind_r{r}"))
                    } else {
                        Source::col(format!("ind_r{r}"))
                    }
                })
                .collect()
        };
        moments.push(Moment {
            label: format!("lower_r{r}"),
            sense: MomentSense::Leq,
            form: AffineForm::new(coeffs(true), Source::col(format!("ylo_r{r}"))),
        });
        moments.push(Moment {
            label: format!("upper_r{r}"),
            sense: MomentSense::Leq,
            form: AffineForm::new(coeffs(false), Source::col(format!("neg_yhi_r{r}"))),
        });
    }
    let mut objective = vec![Source::lit(0.0); REGRESSORS];
    objective[0] = Source::lit(1.0);
    ModelSpec {
        d_theta: REGRESSORS,
        theta_lower: vec![-10.0; REGRESSORS],
        theta_upper: vec![10.0; REGRESSORS],
        objective: AffineForm::new(objective, Source::lit(0.0)),
        moments,
    }
}

/// Builds the interval-regression columns from support indices and interval endpoints.
pub fn interval_regression_dataset(cell: &[usize], y_lo: &[f64], y_hi: &[f64]) -> Result<Dataset> {
    let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
    for k in 0..REGRESSORS {
        cols.push((format!("x{}", k + 1), cell.iter().map(|&r| support_point(r)[k]).collect()));
    }
    cols.push(("y_lo".into(), y_lo.to_vec()));
    cols.push(("y_hi".into(), y_hi.to_vec()));
    for r in 0..SUPPORT_POINTS {
        let ind: Vec<f64> = cell.iter().map(|&c| if c == r { 1.0 } else { 0.0 }).collect();
        cols.push((format!("neg_ind_r{r}"), ind.iter().map(|v| -v).collect()));
        cols.push((format!("ylo_r{r}"), ind.iter().zip(y_lo).map(|(i, y)| i * y).collect()));
        cols.push((format!("neg_yhi_r{r}"), ind.iter().zip(y_hi).map(|(i, y)| -i * y).collect()));
        cols.push((format!("ind_r{r}"), ind));
    }
    Dataset::new(cols)
}

pub fn generate_interval_regression(cfg: &IntervalRegressionConfig) -> Result<GeneratedExample> {
    if cfg.n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let h = cfg.half_width();
    let mut r = rng::stream(cfg.seed, 0);
    let mut cell = Vec::with_capacity(cfg.n);
    let mut y_lo = Vec::with_capacity(cfg.n);
    let mut y_hi = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let mut idx = 0;
        for k in 0..REGRESSORS {
            if r.gen::<bool>() {
                idx |= 1 << k;
            }
        }
        let x = support_point(idx);
        let eps: f64 = r.sample(StandardNormal);
        let y = x.iter().zip(&cfg.theta_true).map(|(a, b)| a * b).sum::<f64>() + eps;
        cell.push(idx);
        y_lo.push(y - h);
        y_hi.push(y + h);
    }
    Ok(GeneratedExample {
        data: interval_regression_dataset(&cell, &y_lo, &y_hi)?,
        spec: interval_regression_spec(),
        psi_true: cfg.theta_true[0],
    })
}
