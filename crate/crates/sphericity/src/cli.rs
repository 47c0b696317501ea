//! Command-line front end.
//!
//! Subcommands:
//!
//! * `test`     — run SR/SK/John on a CSV data matrix
//! * `simulate` — run a size/power experiment grid from a JSON config
//! * `power`    — evaluate the analytic power for a spiked diagonal scale
//! * `diagnose` — emit mean/sd-ratio and variance-ratio series across p
//!
//! Exit codes: 0 success, 2 user/input error, 1 internal error. All output
//! is deterministic given the flags (seeds included): numbers are printed
//! locale-independently and no timing information is emitted.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use sphericity_core::dist::{shape_from_v, Scenario};
use sphericity_core::matrix::SampleMatrix;
use sphericity_core::testing::{
    analytic_power, john_statistic, sigma0, sigma1, spearman_kendall_tests, Method, TestResult,
};

use crate::montecarlo::{run_experiment, ExperimentConfig, HarnessError};
use crate::report::{emit_diagnose_csv, emit_report, ReportFormat};

#[derive(Parser)]
#[command(
    name = "sphericity",
    version,
    about = "High-dimensional sphericity rank tests (SR/SK) and a Monte Carlo harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run sphericity tests on a CSV matrix (rows = observations)
    Test {
        /// Input CSV file, one observation per line
        #[arg(long)]
        input: PathBuf,
        /// Which statistic(s) to compute
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        /// Significance level for the one-sided rejection rule
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
        /// Skip the first line of the input file
        #[arg(long)]
        header: bool,
    },
    /// Run a Monte Carlo experiment described by a JSON config
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Report file to write
        #[arg(long)]
        out: PathBuf,
        /// Override the config's replication count
        #[arg(long)]
        reps: Option<usize>,
        /// Override the config's master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's worker thread count
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value_t = CsvOrJson::Csv)]
        format: CsvOrJson,
    },
    /// Analytic power of the SR/SK tests for the spiked diagonal scale
    Power {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        /// Spike fraction in [0, 1]
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Null-calibration diagnostics across a list of dimensions
    Diagnose {
        /// Scenario label: I, II, III, IV, or V
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        n: usize,
        /// Comma-separated dimensions, e.g. 100,200,400,800
        #[arg(long = "p-list")]
        p_list: String,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV file to write (p, method, mean_sd_ratio, variance_ratio)
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        threads: Option<usize>,
        /// Comma-separated methods, e.g. sr,sk
        #[arg(long, default_value = "sr,sk")]
        methods: String,
    },
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Sr,
    Sk,
    John,
    All,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum CsvOrJson {
    Csv,
    Json,
}

#[derive(Debug)]
enum CliError {
    User(String),
    Internal(String),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Internal(msg) => CliError::Internal(msg),
            other => CliError::User(other.to_string()),
        }
    }
}

/// Parse arguments, dispatch, and map errors onto the exit-code contract.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Test { input, method, alpha, format, header } => {
            cmd_test(&input, method, alpha, format, header)
        }
        Command::Simulate { config, out, reps, seed, threads, format } => {
            cmd_simulate(&config, &out, reps, seed, threads, format)
        }
        Command::Power { n, p, v, alpha } => cmd_power(n, p, v, alpha),
        Command::Diagnose { scenario, n, p_list, reps, seed, out, alpha, threads, methods } => {
            cmd_diagnose(&scenario, n, &p_list, reps, seed, &out, alpha, threads, &methods)
        }
    }
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

/// JSON document printed by `sphericity test --format json`; the schema is
/// committed at `schemas/test-output.schema.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TestReport {
    pub alpha: f64,
    pub results: Vec<TestResultRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TestResultRow {
    pub method: String,
    pub n: usize,
    pub p: usize,
    pub statistic: f64,
    pub sigma0: Option<f64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub reject: Option<bool>,
    pub tie_count: usize,
}

impl From<&TestResult> for TestResultRow {
    fn from(r: &TestResult) -> Self {
        TestResultRow {
            method: r.method.as_str().to_string(),
            n: r.n,
            p: r.p,
            statistic: r.statistic,
            sigma0: r.sigma0,
            z: r.z,
            p_value: r.p_value,
            reject: r.reject,
            tie_count: r.tie_count,
        }
    }
}

fn cmd_test(
    input: &PathBuf,
    method: MethodArg,
    alpha: f64,
    format: TextOrJson,
    header: bool,
) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::User("alpha must be in (0, 1)".to_string()));
    }
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::User(format!("cannot read {}: {e}", input.display())))?;
    let x = parse_matrix(&text, header, &input.display().to_string())?;

    let methods: Vec<Method> = match method {
        MethodArg::Sr => vec![Method::Spearman],
        MethodArg::Sk => vec![Method::Kendall],
        MethodArg::John => vec![Method::John],
        MethodArg::All => vec![Method::Spearman, Method::Kendall, Method::John],
    };

    let mut results: Vec<TestResult> = Vec::new();
    let wants_rank = methods
        .iter()
        .any(|m| matches!(m, Method::Spearman | Method::Kendall));
    let rank_pair = if wants_rank {
        Some(spearman_kendall_tests(&x, alpha).map_err(|e| CliError::User(e.to_string()))?)
    } else {
        None
    };
    for m in &methods {
        match m {
            Method::Spearman => results.push(rank_pair.as_ref().unwrap().0.clone()),
            Method::Kendall => results.push(rank_pair.as_ref().unwrap().1.clone()),
            Method::John => {
                results.push(john_statistic(&x).map_err(|e| CliError::User(e.to_string()))?)
            }
        }
    }

    match format {
        TextOrJson::Text => {
            for r in &results {
                println!(
                    "method={} n={} p={} statistic={} sigma0={} z={} p_value={} reject={} tie_count={}",
                    r.method,
                    r.n,
                    r.p,
                    r.statistic,
                    opt_display(r.sigma0),
                    opt_display(r.z),
                    opt_display(r.p_value),
                    r.reject.map_or("NA".to_string(), |b| b.to_string()),
                    r.tie_count
                );
            }
        }
        TextOrJson::Json => {
            let doc = TestReport {
                alpha,
                results: results.iter().map(TestResultRow::from).collect(),
            };
            let json = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            println!("{json}");
        }
    }
    Ok(())
}

fn opt_display(v: Option<f64>) -> String {
    v.map_or("NA".to_string(), |x| x.to_string())
}

/// Parse a CSV numeric matrix, reporting 1-based line numbers on failure.
fn parse_matrix(text: &str, header: bool, path: &str) -> Result<SampleMatrix, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if header && idx == 0 {
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let field = field.trim();
            let value: f64 = field.parse().map_err(|_| {
                CliError::User(format!("{path}: line {lineno}: malformed numeric field '{field}'"))
            })?;
            if !value.is_finite() {
                return Err(CliError::User(format!(
                    "{path}: line {lineno}: non-finite value '{field}'"
                )));
            }
            row.push(value);
        }
        if let Some(w) = width {
            if row.len() != w {
                return Err(CliError::User(format!(
                    "{path}: line {lineno}: expected {w} columns, found {}",
                    row.len()
                )));
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::User(format!("{path}: no data rows")));
    }
    SampleMatrix::from_rows(&rows).map_err(|e| CliError::User(e.to_string()))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// On-disk JSON config; keys mirror [`ExperimentConfig`] field names.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimConfig {
    scenarios: Vec<String>,
    n_list: Vec<usize>,
    p_list: Vec<usize>,
    v_list: Vec<f64>,
    #[serde(default = "default_reps")]
    reps: usize,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_methods")]
    methods: Vec<String>,
    #[serde(default)]
    master_seed: u64,
    #[serde(default)]
    threads: Option<usize>,
    #[serde(default = "default_kappa")]
    kappa: f64,
}

fn default_reps() -> usize {
    2000
}

fn default_alpha() -> f64 {
    0.05
}

fn default_methods() -> Vec<String> {
    vec!["SR".to_string(), "SK".to_string()]
}

fn default_kappa() -> f64 {
    0.8
}

impl RawSimConfig {
    fn into_experiment(self) -> Result<ExperimentConfig, CliError> {
        let scenarios = self
            .scenarios
            .iter()
            .map(|s| {
                s.parse::<Scenario>()
                    .map_err(|e| CliError::User(format!("config key 'scenarios': {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let methods = self
            .methods
            .iter()
            .map(|s| {
                s.parse::<Method>()
                    .map_err(|e| CliError::User(format!("config key 'methods': {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExperimentConfig {
            scenarios,
            n_list: self.n_list,
            p_list: self.p_list,
            v_list: self.v_list,
            reps: self.reps,
            alpha: self.alpha,
            methods,
            master_seed: self.master_seed,
            threads: self.threads,
            kappa: self.kappa,
        })
    }
}

fn cmd_simulate(
    config: &PathBuf,
    out: &PathBuf,
    reps: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    format: CsvOrJson,
) -> Result<(), CliError> {
    let text = fs::read_to_string(config)
        .map_err(|e| CliError::User(format!("cannot read {}: {e}", config.display())))?;
    let raw: RawSimConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::User(format!("config error in {}: {e}", config.display())))?;
    let mut cfg = raw.into_experiment()?;
    if let Some(r) = reps {
        cfg.reps = r;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(t) = threads {
        cfg.threads = Some(t);
    }

    let report = run_experiment(&cfg)?;
    let bytes = emit_report(
        &report,
        match format {
            CsvOrJson::Csv => ReportFormat::Csv,
            CsvOrJson::Json => ReportFormat::Json,
        },
    );
    fs::write(out, bytes)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", out.display())))?;

    for cell in &report.cells {
        println!("{}", summary_line(cell));
    }
    Ok(())
}

fn summary_line(cell: &crate::montecarlo::CellSummary) -> String {
    let mut line = format!(
        "{} n={} p={} v={} {}:",
        cell.scenario, cell.n, cell.p, cell.v, cell.method
    );
    if let Some(r) = cell.rejection_rate {
        let _ = write!(line, " rejection_rate={r:.6}");
    }
    if let Some(r) = cell.mean_sd_ratio {
        let _ = write!(line, " mean_sd_ratio={r:.6}");
    }
    if let Some(r) = cell.variance_ratio {
        let _ = write!(line, " variance_ratio={r:.6}");
    }
    line
}

// ---------------------------------------------------------------------------
// power
// ---------------------------------------------------------------------------

fn cmd_power(n: usize, p: usize, v: f64, alpha: f64) -> Result<(), CliError> {
    let user = |e: sphericity_core::Error| CliError::User(e.to_string());
    let shape = shape_from_v(p, v).map_err(user)?;
    let s0 = sigma0(n, p).map_err(user)?;
    let s1 = sigma1(n, &shape).map_err(user)?;
    let beta = analytic_power(n, &shape, alpha).map_err(user)?;
    println!(
        "n={n} p={p} v={v} tr_d2={:.6} sigma0={:.6} sigma1={:.6} power={:.6}",
        shape.tr_d2(),
        s0,
        s1,
        beta
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_diagnose(
    scenario: &str,
    n: usize,
    p_list: &str,
    reps: usize,
    seed: u64,
    out: &PathBuf,
    alpha: f64,
    threads: Option<usize>,
    methods: &str,
) -> Result<(), CliError> {
    let scenario: Scenario = scenario
        .parse()
        .map_err(|e: sphericity_core::Error| CliError::User(e.to_string()))?;
    let p_list = parse_usize_list(p_list)?;
    if p_list.is_empty() {
        return Err(CliError::User("p-list must be non-empty".to_string()));
    }
    let methods = methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<Method>()
                .map_err(|e| CliError::User(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(CliError::User("methods must be non-empty".to_string()));
    }

    let cfg = ExperimentConfig {
        scenarios: vec![scenario],
        n_list: vec![n],
        p_list,
        v_list: vec![0.0],
        reps,
        alpha,
        methods,
        master_seed: seed,
        threads,
        kappa: 0.8,
    };
    let report = run_experiment(&cfg)?;
    fs::write(out, emit_diagnose_csv(&report))
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", out.display())))?;
    for cell in &report.cells {
        println!("{}", summary_line(cell));
    }
    Ok(())
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| CliError::User(format!("malformed integer '{s}' in p-list")))
        })
        .collect()
}
