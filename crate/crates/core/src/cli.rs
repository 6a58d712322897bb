//! The `subfuse` command line: fit, tune, simulate and bench.
//!
//! Results are written as JSON lines, one record per line, each carrying
//! `schema_version`. Exit codes: 2 usage, 3 data, 4 numeric failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error as ThisError;

use crate::admm::{AdmmConfig, ResidualRecord};
use crate::data::{Dataset, Standardization};
use crate::error::Error;
use crate::losses::LossSpec;
use crate::penalties::{PenaltyKind, PenaltySpec};
use crate::sim::{run_monte_carlo, simulate_rep, ErrorKind, SimScenario, SimTruth, SummaryRow};
use crate::structure::DEFAULT_K_MAX;
use crate::tuning::{
    self, lambda1_max, lambda2_max, report_for_state, BicSpec, FitReport, SearchOptions, TuneConfig,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Model(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse { .. } | CliError::Io { .. } => EXIT_DATA,
            CliError::Model(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Model(_) => EXIT_DATA,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "subfuse", version, about = "Subgroup detection by pairwise-fused penalized M-regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on worker threads for every parallel section.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Progress messages on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit at fixed (λ1, λ2) and extract the subgroup structure.
    Fit(FitArgs),
    /// Grid search over (λ1, λ2) with the modified BIC.
    Tune(TuneArgs),
    /// Write a simulated dataset and its truth sidecar.
    Simulate(SimulateArgs),
    /// Monte-Carlo benchmark of one method on one scenario.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    L1,
    L2,
    Huber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    Lasso,
    Scad,
    Mcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ErrorArg {
    Gauss,
    T5,
    Mixture,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "l1")]
    pub loss: LossArg,
    #[arg(long, value_enum, default_value = "scad")]
    pub penalty: PenaltyArg,
    /// Concavity for both penalties; defaults to 3.7 (SCAD) or 3 (MCP).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = crate::losses::DEFAULT_HUBER_C)]
    pub huber_c: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    #[arg(long)]
    pub r3: Option<f64>,
    /// Largest cluster count tried when collapsing intercepts.
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    /// mBIC constant; defaults to 10 for l2 and 5 otherwise.
    #[arg(long)]
    pub bic_c: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScaleArgs {
    /// Center and scale covariates before fitting (default).
    #[arg(long, overrides_with = "no_standardize")]
    pub standardize: bool,
    #[arg(long, overrides_with = "standardize")]
    pub no_standardize: bool,
}

impl ScaleArgs {
    pub fn enabled(&self) -> bool {
        !self.no_standardize
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = tuning::DEFAULT_GRID_POINTS)]
    pub grid_n1: usize,
    #[arg(long, default_value_t = tuning::DEFAULT_GRID_POINTS)]
    pub grid_n2: usize,
    #[arg(long, default_value_t = tuning::DEFAULT_DECADES)]
    pub decades: f64,
    #[arg(long, default_value_t = tuning::DEFAULT_BURN)]
    pub n_burn: usize,
    /// Start every grid point cold and fit them in parallel.
    #[arg(long)]
    pub no_warm_start: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Fusion level; defaults to its upper bound.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Coefficient level; defaults to its upper bound.
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scale: ScaleArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TuneArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub scale: ScaleArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 5)]
    pub q: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,1")]
    pub centers: Vec<f64>,
    /// Active coefficients; defaults to all ones.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta_active: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "gauss")]
    pub error: ErrorArg,
    #[arg(long, default_value_t = 0.5)]
    pub error_scale: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(short, long)]
    pub output: PathBuf,
    /// Truth sidecar path; defaults to the output with a `.truth.json` extension.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Replicate index; replicate `r` matches replicate `r` of `bench`.
    #[arg(long, default_value_t = 0)]
    pub rep: u64,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

impl ModelArgs {
    fn loss(&self) -> LossSpec {
        match self.loss {
            LossArg::L1 => LossSpec::l1(),
            LossArg::L2 => LossSpec::l2(),
            LossArg::Huber => LossSpec::huber(self.huber_c),
        }
    }

    fn penalty_kind(&self) -> PenaltyKind {
        match self.penalty {
            PenaltyArg::Lasso => PenaltyKind::Lasso,
            PenaltyArg::Scad => PenaltyKind::Scad,
            PenaltyArg::Mcp => PenaltyKind::Mcp,
        }
    }

    /// Solver settings starting from `base`, validated before any work.
    fn admm(&self, base: AdmmConfig) -> Result<AdmmConfig, CliError> {
        let mut cfg = base;
        if let Some(g) = self.gamma {
            let kind = self.penalty_kind();
            cfg.fusion_penalty = PenaltySpec::new(kind, 0.0, g).map_err(usage)?;
            cfg.coef_penalty = cfg.fusion_penalty;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.r1 {
            cfg.r1 = v;
        }
        if let Some(v) = self.r2 {
            cfg.r2 = v;
        }
        if let Some(v) = self.r3 {
            cfg.r3 = v;
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    fn search(&self, warm_start: bool) -> Result<SearchOptions, CliError> {
        let loss = self.loss();
        let bic = match self.bic_c {
            Some(c) if c > 0.0 && c.is_finite() => BicSpec::new(c),
            Some(c) => return Err(CliError::Usage(format!("--bic-c must be positive, got {c}"))),
            None => BicSpec::for_loss(&loss),
        };
        if self.k_max < 1 {
            return Err(CliError::Usage("--k-max must be ≥ 1".into()));
        }
        Ok(SearchOptions {
            bic,
            k_max: self.k_max,
            warm_start,
        })
    }

    fn tune_config(&self, grid: &GridArgs) -> Result<TuneConfig, CliError> {
        let mut cfg = TuneConfig::new(self.loss(), self.penalty_kind());
        cfg.admm = self.admm(cfg.admm)?;
        cfg.search = self.search(!grid.no_warm_start)?;
        cfg.grid_n1 = grid.grid_n1;
        cfg.grid_n2 = grid.grid_n2;
        cfg.decades = grid.decades;
        cfg.n_burn = grid.n_burn;
        if cfg.grid_n1 < 2 || cfg.grid_n2 < 2 || cfg.decades.is_nan() || cfg.decades <= 0.0 {
            return Err(CliError::Usage(
                "grids need at least 2 points and a positive number of decades".into(),
            ));
        }
        Ok(cfg)
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<SimScenario, CliError> {
        let kind = match self.error {
            ErrorArg::Gauss => ErrorKind::Gauss,
            ErrorArg::T5 => ErrorKind::T5,
            ErrorArg::Mixture => ErrorKind::Mixture,
        };
        let mut s = SimScenario::new(self.n, self.p, self.q, self.centers.clone(), kind, self.seed);
        if let Some(b) = &self.beta_active {
            s.beta_active = b.clone();
        }
        s.error_scale = self.error_scale;
        s.validate().map_err(usage)?;
        Ok(s)
    }
}

/// Reads `response, covariates...` rows. A first row that does not parse as
/// numbers is taken as a header.
pub fn read_csv(path: &Path) -> Result<(Dataset, Option<Vec<String>>), CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let name = path.display().to_string();
    let parse_err = |line: u64, msg: String| CliError::Parse {
        path: name.clone(),
        line,
        msg,
    };
    let mut header = None;
    let mut y = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(k as u64 + 1, |p| p.line());
        let parsed: Vec<Result<f64, _>> = rec.iter().map(str::parse::<f64>).collect();
        if k == 0 && parsed.iter().any(Result::is_err) {
            header = Some(rec.iter().map(str::to_owned).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(parse_err(
                line,
                format!("expected {expected} fields, found {}", rec.len()),
            ));
        }
        let mut values = Vec::with_capacity(rec.len());
        for (j, (v, raw)) in parsed.into_iter().zip(rec.iter()).enumerate() {
            match v {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(_) => return Err(parse_err(line, format!("field {}: non-finite value", j + 1))),
                Err(_) => {
                    return Err(parse_err(line, format!("field {}: cannot parse {raw:?} as a number", j + 1)))
                }
            }
        }
        y.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    if y.is_empty() {
        return Err(CliError::Model(Error::EmptySample));
    }
    Ok((Dataset::from_rows(&y, &rows)?, header))
}

/// Writes `y, x1, ..., xp` with a header; values round-trip exactly.
pub fn write_csv(path: &Path, data: &Dataset) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| CliError::Io {
        path: path.display().to_string(),
        source: io::Error::other(e),
    };
    let mut head = vec!["y".to_string()];
    head.extend((1..=data.p()).map(|j| format!("x{j}")));
    w.write_record(&head).map_err(csv_err)?;
    for i in 0..data.n() {
        let mut row = vec![data.y()[i].to_string()];
        row.extend((0..data.p()).map(|j| data.x()[(i, j)].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// One fitted model on the original covariate scale.
#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub schema_version: u32,
    pub record: &'static str,
    pub loss: String,
    pub penalty: String,
    pub n: usize,
    pub p: usize,
    pub standardized: bool,
    pub lambda1: f64,
    pub lambda2: f64,
    pub k_hat: usize,
    pub q_hat: usize,
    /// Group-center intercept of every observation.
    pub mu_hat: Vec<f64>,
    /// Unclustered ADMM intercepts.
    pub mu_raw: Vec<f64>,
    /// Sparse coefficients.
    pub beta_hat: Vec<f64>,
    pub assignment: Vec<usize>,
    pub centers: Vec<f64>,
    pub active_set: Vec<usize>,
    pub mbic: f64,
    pub iterations: usize,
    pub residual_history: Vec<ResidualRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPointRecord {
    pub schema_version: u32,
    pub record: &'static str,
    pub index: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub k_hat: usize,
    pub q_hat: usize,
    pub mbic: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub burn_in: bool,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateRecord<'a> {
    pub schema_version: u32,
    pub record: &'static str,
    pub scenario: &'a SimScenario,
    pub rep: u64,
    pub truth: &'a SimTruth,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord<'a> {
    pub schema_version: u32,
    pub record: &'static str,
    pub scenario: &'a SimScenario,
    pub method: &'a TuneConfig,
    pub summary: &'a SummaryRow,
}

fn fit_record(
    report: &FitReport,
    cfg: &AdmmConfig,
    data: &Dataset,
    scaling: Option<&Standardization>,
    record: &'static str,
) -> FitRecord {
    let (beta_hat, shift) = match scaling {
        Some(s) => (s.coefficients(&report.w), s.intercept_shift(&report.w)),
        None => (report.w.clone(), 0.0),
    };
    let shifted = |v: &[f64]| v.iter().map(|m| m + shift).collect::<Vec<_>>();
    FitRecord {
        schema_version: SCHEMA_VERSION,
        record,
        loss: format!("{:?}", cfg.loss.kind).to_lowercase(),
        penalty: format!("{:?}", cfg.fusion_penalty.kind).to_lowercase(),
        n: data.n(),
        p: data.p(),
        standardized: scaling.is_some(),
        lambda1: report.lambda1,
        lambda2: report.lambda2,
        k_hat: report.k_hat(),
        q_hat: report.q_hat(),
        mu_hat: shifted(&report.fitted_mu),
        mu_raw: shifted(&report.mu),
        beta_hat,
        assignment: report.structure.assignment.clone(),
        centers: shifted(&report.structure.centers),
        active_set: report.structure.active_set.clone(),
        mbic: report.mbic,
        iterations: report.iterations,
        residual_history: report.history.clone(),
    }
}

/// Line-delimited JSON sink: a file, or stdout when no path is given.
struct RecordSink {
    out: Box<dyn Write>,
    path: String,
}

impl RecordSink {
    fn open(path: Option<&Path>) -> Result<Self, CliError> {
        Ok(match path {
            Some(p) => Self {
                out: Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
                path: p.display().to_string(),
            },
            None => Self {
                out: Box::new(io::stdout().lock()),
                path: "<stdout>".into(),
            },
        })
    }

    fn write<T: Serialize>(&mut self, rec: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(rec).expect("records serialize");
        writeln!(self.out, "{line}").map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|source| CliError::Io {
            path: self.path,
            source,
        })
    }
}

fn prepare(input: &Path, scale: &ScaleArgs) -> Result<(Dataset, Option<Standardization>), CliError> {
    let (data, _) = read_csv(input)?;
    Ok(if scale.enabled() && data.p() > 0 {
        let (std_data, s) = data.standardized();
        (std_data, Some(s))
    } else {
        (data, None)
    })
}

pub fn cmd_fit(args: &FitArgs, verbose: u8) -> Result<(), CliError> {
    let loss = args.model.loss();
    let base = AdmmConfig::converged(loss, args.model.penalty_kind());
    let mut cfg = args.model.admm(base)?;
    let opts = args.model.search(true)?;
    for (name, v) in [("--lambda1", args.lambda1), ("--lambda2", args.lambda2)] {
        if let Some(v) = v {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be nonnegative, got {v}")));
            }
        }
    }
    let (data, scaling) = prepare(&args.input, &args.scale)?;
    let l1 = match args.lambda1 {
        Some(v) => v,
        None => lambda1_max(&data, &loss)?,
    };
    let l2 = match args.lambda2 {
        Some(v) => v,
        None => lambda2_max(&data, &loss)?,
    };
    cfg = cfg.with_lambdas(l1, l2);
    if verbose > 0 {
        eprintln!("fitting n = {}, p = {} at λ1 = {l1:e}, λ2 = {l2:e}", data.n(), data.p());
    }
    let state = crate::admm::fit(&data, &cfg, None)?;
    let report = report_for_state(&data, &cfg, &state, &opts.bic, opts.k_max)?;
    let rec = fit_record(&report, &cfg, &data, scaling.as_ref(), "fit");
    let mut sink = RecordSink::open(args.output.as_deref())?;
    sink.write(&rec)?;
    sink.finish()?;
    if args.output.is_some() {
        println!(
            "K = {}  q = {}  mBIC = {:.4}  iterations = {}",
            rec.k_hat, rec.q_hat, rec.mbic, rec.iterations
        );
    }
    Ok(())
}

pub fn cmd_tune(args: &TuneArgs, verbose: u8) -> Result<(), CliError> {
    let cfg = args.model.tune_config(&args.grid)?;
    let (data, scaling) = prepare(&args.input, &args.scale)?;
    if verbose > 0 {
        eprintln!(
            "tuning n = {}, p = {} over a {}×{} grid",
            data.n(),
            data.p(),
            cfg.grid_n1,
            cfg.grid_n2
        );
    }
    let (_, search) = tuning::tune(&data, &cfg)?;
    let mut sink = RecordSink::open(args.output.as_deref())?;
    for (index, r) in search.reports.iter().enumerate() {
        sink.write(&GridPointRecord {
            schema_version: SCHEMA_VERSION,
            record: "grid_point",
            index,
            lambda1: r.lambda1,
            lambda2: r.lambda2,
            k_hat: r.k_hat(),
            q_hat: r.q_hat(),
            mbic: r.mbic,
            iterations: r.iterations,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            burn_in: r.burn_in,
            selected: index == search.best,
        })?;
    }
    let best = search.best_report();
    let rec = fit_record(best, &cfg.admm, &data, scaling.as_ref(), "selected");
    sink.write(&rec)?;
    sink.finish()?;
    if args.output.is_some() {
        println!("{:>12} {:>12} {:>4} {:>4} {:>10} {:>5}", "lambda1", "lambda2", "K", "q", "mBIC", "iter");
        for (i, r) in search.reports.iter().enumerate() {
            let mark = if i == search.best { " *" } else if r.burn_in { " b" } else { "" };
            println!(
                "{:>12.4e} {:>12.4e} {:>4} {:>4} {:>10.4} {:>5}{mark}",
                r.lambda1,
                r.lambda2,
                r.k_hat(),
                r.q_hat(),
                r.mbic,
                r.iterations
            );
        }
    }
    Ok(())
}

fn truth_path(output: &Path) -> PathBuf {
    output.with_extension("truth.json")
}

pub fn cmd_simulate(args: &SimulateArgs, _verbose: u8) -> Result<(), CliError> {
    let scenario = args.scenario.scenario()?;
    let (data, truth) = simulate_rep(&scenario, args.rep)?;
    write_csv(&args.output, &data)?;
    let tpath = args.truth.clone().unwrap_or_else(|| truth_path(&args.output));
    let mut sink = RecordSink::open(Some(&tpath))?;
    sink.write(&SimulateRecord {
        schema_version: SCHEMA_VERSION,
        record: "truth",
        scenario: &scenario,
        rep: args.rep,
        truth: &truth,
    })?;
    sink.finish()
}

pub fn cmd_bench(args: &BenchArgs, verbose: u8) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be ≥ 1".into()));
    }
    let scenario = args.scenario.scenario()?;
    let cfg = args.model.tune_config(&args.grid)?;
    if verbose > 0 {
        eprintln!("running {} replicates", args.reps);
    }
    let row = run_monte_carlo(&scenario, args.reps, &cfg)?;
    let mut sink = RecordSink::open(args.output.as_deref())?;
    sink.write(&BenchRecord {
        schema_version: SCHEMA_VERSION,
        record: "summary",
        scenario: &scenario,
        method: &cfg,
        summary: &row,
    })?;
    sink.finish()?;
    if args.output.is_some() {
        println!("{}", SummaryRow::header());
        println!("{row}");
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let verbose = cli.verbose;
    let go = || match &cli.command {
        Command::Fit(a) => cmd_fit(a, verbose),
        Command::Tune(a) => cmd_tune(a, verbose),
        Command::Simulate(a) => cmd_simulate(a, verbose),
        Command::Bench(a) => cmd_bench(a, verbose),
    };
    match cli.workers {
        Some(0) => Err(CliError::Usage("--workers must be ≥ 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(go),
        None => go(),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
