//! Command-line front end: `estimate`, `infer`, `diagnose` and `simulate`.
//!
//! Each command writes one JSON document (CSV for `simulate`) to `--output` or
//! stdout. Exit codes: 0 success, 2 bad input, 3 solver failure, 4 no
//! admissible critical values, 5 exact LICQ failure found by `diagnose`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use pibound::diagnostics::{full_report, moment_multipliers, DiagnosticsOptions};
use pibound::dgp::ExampleKind;
use pibound::inference::{
    construct_confidence_set, estimate_identified_set, InferenceOptions, RelaxPolicy, ThresholdMode,
};
use pibound::model::{parse_model, BoundModel, Dataset, Direction, Weights};
use pibound::simulate::{render_table, run_simulation, write_csv, SimulationConfig, SimulationRow};
use pibound::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "pibound", version, about = "Bounds and confidence sets for partially identified linear functionals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the identified interval.
    Estimate(InputArgs),
    /// Estimate and build a bootstrap confidence set.
    Infer(InferArgs),
    /// Check LICQ, uniqueness and near point identification on a sample.
    Diagnose(DiagnoseArgs),
    /// Monte Carlo coverage study on a built-in design.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, env = "PIBOUND_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = RelaxArg::Auto)]
    pub relax: RelaxArg,
    #[arg(long, value_enum, default_value_t = ThresholdArg::Length)]
    pub threshold_mode: ThresholdArg,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct InputArgs {
    /// Model spec (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Data (CSV with a header row).
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Clone)]
pub struct InferArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.10)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub boot: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Clone)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials of the random-perturbation LICQ probe (0 disables it).
    #[arg(long, default_value_t = 50)]
    pub probe_trials: usize,
}

#[derive(Debug, Args, Clone)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub example: ExampleArg,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Design constants c, comma separated; the missing probability or interval half-width is max(c/√n, 1e-6).
    #[arg(long, value_delimiter = ',', required = true)]
    pub c: Vec<f64>,
    /// Levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.10")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1000)]
    pub boot: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Aligned text table instead of CSV.
    #[arg(long)]
    pub pretty: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelaxArg {
    Auto,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdArg {
    Length,
    Indicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleArg {
    MissingData,
    IntervalRegression,
}

impl From<ExampleArg> for ExampleKind {
    fn from(e: ExampleArg) -> Self {
        match e {
            ExampleArg::MissingData => ExampleKind::MissingData,
            ExampleArg::IntervalRegression => ExampleKind::IntervalRegression,
        }
    }
}

impl CommonArgs {
    pub fn inference_options(&self) -> InferenceOptions {
        InferenceOptions {
            relax: match self.relax {
                RelaxArg::Auto => RelaxPolicy::Auto,
                RelaxArg::Off => RelaxPolicy::Off,
            },
            threshold_mode: match self.threshold_mode {
                ThresholdArg::Length => ThresholdMode::Length,
                ThresholdArg::Indicator => ThresholdMode::Indicator,
            },
            ..InferenceOptions::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("LICQ fails exactly: active moment gradients are linearly dependent")]
    LicqViolated,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } => 2,
            CliError::LicqViolated => 5,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(Error::CalibrationInfeasible { .. }) => 4,
            CliError::Core(_) => 3,
        }
    }
}

/// Result of a command: the bytes to write and warnings for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.display().to_string(), source })
}

pub fn load_model(input: &InputArgs) -> Result<BoundModel, CliError> {
    let spec = parse_model(&read(&input.model)?)?;
    let data = Dataset::from_csv(read(&input.data)?.as_bytes())?;
    Ok(BoundModel::new(spec, data)?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

fn estimate_json(model: &BoundModel, opts: &InferenceOptions) -> Result<Value, CliError> {
    let est = estimate_identified_set(model, &Weights::uniform(model.n()), opts)?;
    Ok(json!({
        "lb": est.lb,
        "ub": est.ub,
        "delta": est.delta,
        "relaxation_used": est.relaxation_used,
        "theta_lb": est.sol_lb.primal,
        "theta_ub": est.sol_ub.primal,
        "multipliers": {
            "lb": moment_multipliers(model, &est, Direction::Lower),
            "ub": moment_multipliers(model, &est, Direction::Upper),
        },
    }))
}

pub fn cmd_estimate(args: &InputArgs) -> Result<Output, CliError> {
    let model = load_model(args)?;
    let mut v = estimate_json(&model, &args.common.inference_options())?;
    v["schema_version"] = json!(SCHEMA_VERSION);
    v["command"] = json!("estimate");
    v["n"] = json!(model.n());
    Ok(Output { body: to_json(&v), warnings: Vec::new(), exit_code: 0 })
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summary(mut v: Vec<f64>) -> Value {
    v.sort_by(f64::total_cmp);
    let probs: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
    let q: serde_json::Map<String, Value> =
        probs.iter().map(|&p| (format!("q{:02}", (p * 100.0).round() as u32), json!(quantile(&v, p)))).collect();
    Value::Object(q)
}

pub fn cmd_infer(args: &InferArgs) -> Result<Output, CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("--alpha must lie in (0, 1), got {}", args.alpha)).into());
    }
    if args.boot == 0 {
        return Err(Error::InvalidArgument("--boot must be at least 1".into()).into());
    }
    let model = load_model(&args.input)?;
    let opts = args.input.common.inference_options();
    let inf = construct_confidence_set(&model, args.alpha, args.boot, args.seed, &opts)?;
    let mut warnings = Vec::new();
    if args.boot == 1 {
        warnings.push("only one bootstrap draw: the critical values are degenerate".to_string());
    }
    if inf.draws.failure_rate() > 0.0 {
        warnings.push(format!("{:.1}% of bootstrap draws failed and were dropped", 100.0 * inf.draws.failure_rate()));
    }
    if inf.estimate.relaxation_used > 0.0 {
        warnings.push(format!("moment constraints relaxed by {:.3e}", inf.estimate.relaxation_used));
    }
    let (l, u) = inf.draws.usable();
    let est = &inf.estimate;
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "infer",
        "n": model.n(),
        "confidence_set": inf.set,
        "estimate": {
            "lb": est.lb,
            "ub": est.ub,
            "delta": est.delta,
            "relaxation_used": est.relaxation_used,
            "theta_lb": est.sol_lb.primal,
            "theta_ub": est.sol_ub.primal,
        },
        "draws": {
            "boot": inf.draws.len(),
            "seed": args.seed,
            "usable": l.len(),
            "relaxed": inf.draws.count(pibound::inference::DrawFlag::Relaxed),
            "failed": inf.draws.count(pibound::inference::DrawFlag::Failed),
            "failure_rate": inf.draws.failure_rate(),
            "lower": summary(l),
            "upper": summary(u),
        },
        "warnings": warnings,
    });
    Ok(Output { body: to_json(&v), warnings, exit_code: 0 })
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<Output, CliError> {
    let model = load_model(&args.input)?;
    let opts = DiagnosticsOptions {
        probe_trials: args.probe_trials,
        seed: args.seed,
        inference: args.input.common.inference_options(),
        ..DiagnosticsOptions::default()
    };
    let report = full_report(&model, &opts)?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["schema_version"] = json!(SCHEMA_VERSION);
    v["command"] = json!("diagnose");
    let exit_code = if report.licq_violated { CliError::LicqViolated.exit_code() } else { 0 };
    Ok(Output { body: to_json(&v), warnings: report.warnings, exit_code })
}

pub fn simulation_rows(args: &SimulateArgs) -> Result<Vec<SimulationRow>, CliError> {
    let opts = args.common.inference_options();
    let mut rows = Vec::new();
    for &n in &args.n {
        for &c in &args.c {
            let cfg = SimulationConfig {
                example: args.example.into(),
                n,
                c,
                alphas: args.alpha.clone(),
                reps: args.reps,
                boot: args.boot,
                seed: args.seed,
            };
            rows.extend(run_simulation(&cfg, &opts)?);
        }
    }
    Ok(rows)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Output, CliError> {
    let rows = simulation_rows(args)?;
    let body = if args.pretty {
        render_table(&rows)
    } else {
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf)?;
        String::from_utf8(buf).expect("CSV is UTF-8")
    };
    let warnings = rows
        .iter()
        .filter(|r| r.failures > 0)
        .map(|r| format!("n={} c={}: {} of {} replications failed", r.n, r.c, r.failures, r.reps))
        .collect();
    Ok(Output { body, warnings, exit_code: 0 })
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Estimate(a) => &a.common,
            Command::Infer(a) => &a.input.common,
            Command::Diagnose(a) => &a.input.common,
            Command::Simulate(a) => &a.common,
        }
    }

    pub fn execute(&self) -> Result<Output, CliError> {
        match self {
            Command::Estimate(a) => cmd_estimate(a),
            Command::Infer(a) => cmd_infer(a),
            Command::Diagnose(a) => cmd_diagnose(a),
            Command::Simulate(a) => cmd_simulate(a),
        }
    }
}

/// Runs a parsed command on a pool of `--threads` workers, writes its output,
/// and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let common = cli.command.common().clone();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads.filter(|&t| t > 0) {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 2;
        }
    };
    let result = pool.install(|| cli.command.execute());
    match result {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            let written = match &common.output {
                Some(path) => fs::write(path, &out.body),
                None => std::io::stdout().lock().write_all(out.body.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            if out.exit_code == 5 {
                eprintln!("error: {}", CliError::LicqViolated);
            }
            out.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
