//! Monte Carlo coverage experiments on the built-in designs.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dgp::{
    generate_interval_regression, generate_missing_data, ExampleKind, GeneratedExample, IntervalRegressionConfig,
    MissingDataConfig,
};
use crate::error::{Error, Result};
use crate::inference::{
    bootstrap_value_functions, confidence_set_from_draws, estimate_identified_set, InferenceOptions,
};
use crate::model::{BoundModel, Weights};
use crate::rng::derive_seed;

const DATA_DOMAIN: u64 = 1;
const BOOT_DOMAIN: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub example: ExampleKind,
    pub n: usize,
    pub c: f64,
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub boot: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub reps: usize,
    pub boot: usize,
    /// Share of successful replications whose confidence set covers the true value.
    pub coverage: f64,
    pub avg_lb: f64,
    pub avg_ub: f64,
    pub avg_ci_lower: f64,
    pub avg_ci_upper: f64,
    /// Replications that produced no confidence set.
    pub failures: usize,
    pub wall_seconds: f64,
}

/// One replication's estimate and confidence sets, one per level.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub lb: f64,
    pub ub: f64,
    pub psi_true: f64,
    pub sets: Vec<(f64, f64)>,
}

pub fn generate(example: ExampleKind, n: usize, c: f64, seed: u64) -> Result<GeneratedExample> {
    match example {
        ExampleKind::MissingData => generate_missing_data(&MissingDataConfig::new(n, c, seed)),
        ExampleKind::IntervalRegression => generate_interval_regression(&IntervalRegressionConfig::new(n, c, seed)),
    }
}

/// Replication `rep`: its data and bootstrap seeds are derived from `(cfg.seed, rep)`.
/// All levels share the same bootstrap draws.
pub fn run_replication(cfg: &SimulationConfig, rep: usize, opts: &InferenceOptions) -> Result<Replication> {
    let g = generate(cfg.example, cfg.n, cfg.c, derive_seed(cfg.seed, DATA_DOMAIN, rep as u64))?;
    let model = BoundModel::new(g.spec, g.data)?;
    let est = estimate_identified_set(&model, &Weights::uniform(cfg.n), opts)?;
    let draws = bootstrap_value_functions(&model, &est, cfg.boot, derive_seed(cfg.seed, BOOT_DOMAIN, rep as u64), opts)?;
    let sets = cfg
        .alphas
        .iter()
        .map(|&a| confidence_set_from_draws(&est, &draws, a, opts).map(|s| (s.lower, s.upper)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Replication { lb: est.lb, ub: est.ub, psi_true: g.psi_true, sets })
}

pub fn run_simulation(cfg: &SimulationConfig, opts: &InferenceOptions) -> Result<Vec<SimulationRow>> {
    if cfg.reps == 0 || cfg.boot == 0 {
        return Err(Error::InvalidArgument("reps and boot must be at least 1".into()));
    }
    if cfg.alphas.is_empty() || cfg.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::InvalidArgument("every alpha must lie in (0, 1)".into()));
    }
    let start = Instant::now();
    let reps: Vec<Option<Replication>> =
        (0..cfg.reps).into_par_iter().map(|r| run_replication(cfg, r, opts).ok()).collect();
    let wall_seconds = start.elapsed().as_secs_f64();

    let ok: Vec<&Replication> = reps.iter().flatten().collect();
    let failures = cfg.reps - ok.len();
    let count = ok.len() as f64;
    let mean = |f: &dyn Fn(&Replication) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / count
        }
    };
    Ok(cfg
        .alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| SimulationRow {
            n: cfg.n,
            c: cfg.c,
            alpha,
            reps: cfg.reps,
            boot: cfg.boot,
            coverage: mean(&|r| {
                let (lo, hi) = r.sets[k];
                (lo <= r.psi_true && r.psi_true <= hi) as u8 as f64
            }),
            avg_lb: mean(&|r| r.lb),
            avg_ub: mean(&|r| r.ub),
            avg_ci_lower: mean(&|r| r.sets[k].0),
            avg_ci_upper: mean(&|r| r.sets[k].1),
            failures,
            wall_seconds,
        })
        .collect())
}

pub const CSV_HEADER: [&str; 12] = [
    "n",
    "c",
    "alpha",
    "reps",
    "boot",
    "coverage",
    "avg_lb",
    "avg_ub",
    "avg_ci_lower",
    "avg_ci_upper",
    "failures",
    "wall_seconds",
];

pub fn write_csv<W: Write>(rows: &[SimulationRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    Ok(w.flush()?)
}

/// Right-aligned plain-text table with the CSV columns.
pub fn render_table(rows: &[SimulationRow]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                format!("{}", r.c),
                format!("{}", r.alpha),
                r.reps.to_string(),
                r.boot.to_string(),
                format!("{:.3}", r.coverage),
                format!("{:.3}", r.avg_lb),
                format!("{:.3}", r.avg_ub),
                format!("{:.3}", r.avg_ci_lower),
                format!("{:.3}", r.avg_ci_upper),
                r.failures.to_string(),
                format!("{:.2}", r.wall_seconds),
            ]
        })
        .collect();
    let widths: Vec<usize> = CSV_HEADER
        .iter()
        .enumerate()
        .map(|(k, h)| cells.iter().map(|c| c[k].len()).max().unwrap_or(0).max(h.len()))
        .collect();
    let line = |items: Vec<&str>| {
        items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect::<Vec<_>>().join("  ") + "\n"
    };
    let mut out = line(CSV_HEADER.to_vec());
    for c in &cells {
        out += &line(c.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reps: usize) -> SimulationConfig {
        SimulationConfig {
            example: ExampleKind::MissingData,
            n: 100,
            c: 1.0,
            alphas: vec![0.1, 0.05],
            reps,
            boot: 20,
            seed: 3,
        }
    }

    #[test]
    fn one_row_per_alpha() {
        let rows = run_simulation(&small(2), &InferenceOptions::default()).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.coverage));
            assert!(r.avg_lb <= r.avg_ub + 1e-8);
            assert!(r.avg_ci_lower <= r.avg_ci_upper);
        }
        // a smaller alpha never gives a shorter average set
        assert!(rows[1].avg_ci_upper - rows[1].avg_ci_lower >= rows[0].avg_ci_upper - rows[0].avg_ci_lower - 1e-12);
    }

    #[test]
    fn csv_layout() {
        let rows = run_simulation(&small(1), &InferenceOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(!text.contains('\r'));
        assert_eq!(render_table(&rows).lines().count(), 3);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small(0);
        assert!(run_simulation(&cfg, &InferenceOptions::default()).is_err());
        cfg.reps = 1;
        cfg.alphas = vec![1.5];
        assert!(run_simulation(&cfg, &InferenceOptions::default()).is_err());
    }
}
