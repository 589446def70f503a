//! Command-line front end.
//!
//! Every command writes pretty-printed JSON to stdout (or to `--out` where
//! noted); sweeps additionally write CSV tables. Exit status: 0 on success,
//! 2 for unparseable input or invalid flags, 3 for violated preconditions
//! (not an EP, degenerate coupling, ...), 4 for numerical failures and 1 for
//! output I/O errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::cmatrix::{ComplexMatrix, ComplexScalar};
use crate::compose::{
    block_compose, composite_response, response_upper_bound, ComposeOptions, CompositeSystem,
    Genericity,
};
use crate::ep::{default_nil_tol, detect_ep, machine_precision_bound, EpReport, MACHINE_EPSILON};
use crate::error::Error;
use crate::jordan::{factorized_response, jordan_chain, response_from_chain, DEFAULT_CHAIN_TOL};
use crate::models::{dimer_trimer_system, NamedSystem};
use crate::perturb::{
    fit_slope, log_grid, max_splitting, random_generic, records_to_csv, sweep, Ensemble,
    PerturbationMode, SlopeFit, SweepRecord,
};

#[derive(Debug, Parser)]
#[command(name = "hiep", version)]
#[command(about = "Detect, compose and perturb exceptional points of non-Hermitian matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect an EP and report its order, eigenvalue and response strength.
    Analyze(AnalyzeArgs),
    /// Compute the gauge-fixed Jordan chain of a full-order EP.
    Jordan(JordanArgs),
    /// Couple two EPs unidirectionally and report the composite response.
    Compose(ComposeArgs),
    /// Sweep the perturbation strength and fit the splitting exponent.
    Sweep(SweepArgs),
    /// Generic and preserving sweeps of the dimer-trimer EP5 with fixed defaults.
    #[command(name = "reproduce-fig3")]
    ReproduceFig3(Fig3Args),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Matrix JSON (`rows`, `cols`, `entries`) or named-system JSON (`model`).
    #[arg(long)]
    pub input: PathBuf,
    /// Nilpotency threshold; defaults to 1e-10 times the dimension.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JordanArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Relative tolerance for the chain conditions.
    #[arg(long, default_value_t = DEFAULT_CHAIN_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Named `dimer_trimer` system, as an alternative to `--a/--b/--k`.
    #[arg(long, conflicts_with_all = ["a", "b", "k"])]
    pub input: Option<PathBuf>,
    /// Matrix JSON of the driving subsystem.
    #[arg(long, requires_all = ["b", "k"])]
    pub a: Option<PathBuf>,
    /// Matrix JSON of the driven subsystem.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Matrix JSON of the coupling (rows of `b` by columns of `a`).
    #[arg(long)]
    pub k: Option<PathBuf>,
    /// Largest accepted difference between the subsystem EP eigenvalues.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Shift `b` onto the EP eigenvalue of `a` instead of rejecting a mismatch.
    #[arg(long)]
    pub align: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub eps_max: f64,
    /// Number of logarithmically spaced eps values.
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[arg(long, default_value_t = 8)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Lower end of the slope-fit window.
    #[arg(long, default_value_t = 1e-8)]
    pub fit_min: f64,
    /// Upper end of the slope-fit window.
    #[arg(long, default_value_t = 1e-3)]
    pub fit_max: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "generic")]
    pub mode: PerturbationMode,
    /// Dimension of the driving subsystem, needed for preserving sweeps of a
    /// plain matrix input.
    #[arg(long)]
    pub split: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// CSV destination; the fit is printed to stdout.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Fig3Args {
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
    #[arg(long, default_value_t = 1.5)]
    pub g_a: f64,
    #[arg(long, default_value_t = 1.3)]
    pub g_b: f64,
    /// Real coupling strength.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Directory receiving `fig3_generic.csv`, `fig3_preserving.csv` and
    /// `fig3_fits.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Usage(_) => 2,
            CliError::Output { .. } => 1,
            CliError::Core(e) => e.exit_code(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Contents of an input file.
#[derive(Debug, Clone)]
pub enum Input {
    Matrix(ComplexMatrix),
    Named(NamedSystem),
}

impl Input {
    pub fn hamiltonian(&self) -> crate::Result<ComplexMatrix> {
        match self {
            Input::Matrix(m) => Ok(m.clone()),
            Input::Named(sys) => sys.hamiltonian(),
        }
    }

    pub fn composite(&self) -> crate::Result<Option<CompositeSystem>> {
        match self {
            Input::Matrix(_) => Ok(None),
            Input::Named(sys) => sys.composite(),
        }
    }

    /// EP report; composite systems use the structured top power.
    pub fn report(&self, nil_tol: Option<f64>) -> crate::Result<EpReport> {
        let h = self.hamiltonian()?;
        let tol = nil_tol.unwrap_or_else(|| default_nil_tol(h.rows()));
        match self.composite()? {
            Some(sys) => sys.ep_report(tol),
            None => detect_ep(&h, tol),
        }
    }
}

/// Parses matrix JSON or named-system JSON (recognized by its `model` key).
pub fn parse_input(text: &str) -> crate::Result<Input> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if value.get("model").is_some() {
        serde_json::from_value(value)
            .map(Input::Named)
            .map_err(|e| Error::Parse(format!("named system: {e}")))
    } else {
        serde_json::from_value(value)
            .map(Input::Matrix)
            .map_err(|e| Error::Parse(format!("matrix: {e}")))
    }
}

fn load_input(path: &Path) -> CliResult<Input> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_input(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn load_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    match load_input(path)? {
        Input::Matrix(m) => Ok(m),
        Input::Named(_) => Err(CliError::Input {
            path: path.to_path_buf(),
            message: "expected a matrix, found a named system".into(),
        }),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `out` if given, otherwise returns the text for stdout.
fn emit(out: Option<&Path>, text: String) -> CliResult<Option<String>> {
    match out {
        Some(path) => write_file(path, &text).map(|_| None),
        None => Ok(Some(text)),
    }
}

fn check_positive(name: &str, value: f64) -> CliResult<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be positive and finite, got {value}"
        )))
    }
}

impl GridArgs {
    fn validate(&self) -> CliResult<Vec<f64>> {
        check_positive("eps-min", self.eps_min)?;
        check_positive("eps-max", self.eps_max)?;
        check_positive("fit-min", self.fit_min)?;
        check_positive("fit-max", self.fit_max)?;
        if self.eps_min >= self.eps_max {
            return Err(CliError::Usage("--eps-min must be below --eps-max".into()));
        }
        if self.fit_min >= self.fit_max {
            return Err(CliError::Usage("--fit-min must be below --fit-max".into()));
        }
        if self.points < 2 {
            return Err(CliError::Usage("--points must be at least 2".into()));
        }
        if self.trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        Ok(log_grid(self.eps_min, self.eps_max, self.points)?)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.fit_min, self.fit_max)
    }
}

impl Default for GridArgs {
    fn default() -> Self {
        GridArgs {
            eps_min: 1e-12,
            eps_max: 1e-2,
            points: 41,
            trials: 8,
            seed: 42,
            fit_min: 1e-8,
            fit_max: 1e-3,
        }
    }
}

/// Runs a parsed command; returns what should go to stdout.
pub fn run(cli: &Cli) -> CliResult<Option<String>> {
    match &cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Jordan(args) => jordan(args),
        Command::Compose(args) => compose(args),
        Command::Sweep(args) => run_sweep(args),
        Command::ReproduceFig3(args) => run_fig3(args),
    }
}

fn analyze(args: &AnalyzeArgs) -> CliResult<Option<String>> {
    if let Some(tol) = args.tol {
        check_positive("tol", tol)?;
    }
    let input = load_input(&args.input)?;
    let report = input.report(args.tol)?;
    emit(args.out.as_deref(), to_json(&report))
}

#[derive(Serialize)]
struct ChainReport<'a> {
    n: usize,
    ep_eigenvalue: [f64; 2],
    response_strength: f64,
    #[serde(flatten)]
    chain: &'a crate::jordan::JordanChain,
}

fn jordan(args: &JordanArgs) -> CliResult<Option<String>> {
    check_positive("tol", args.tol)?;
    let input = load_input(&args.input)?;
    let report = input.report(None)?;
    let chain = jordan_chain(&report, args.tol)?;
    let out = ChainReport {
        n: chain.n,
        ep_eigenvalue: pair(report.ep_eigenvalue),
        response_strength: response_from_chain(&chain),
        chain: &chain,
    };
    emit(args.out.as_deref(), to_json(&out))
}

#[derive(Serialize)]
struct ComposeReport<'a> {
    n_a: usize,
    n_b: usize,
    order: Option<usize>,
    xi_a: f64,
    xi_b: f64,
    genericity: Genericity,
    response_strength: f64,
    factorized_response_strength: f64,
    upper_bound: f64,
    system: &'a CompositeSystem,
}

fn compose(args: &ComposeArgs) -> CliResult<Option<String>> {
    check_positive("tol", args.tol)?;
    let options = ComposeOptions {
        eigenvalue_tol: args.tol,
        align_eigenvalues: args.align,
        ..ComposeOptions::default()
    };
    let sys = match (&args.input, &args.a, &args.b, &args.k) {
        (Some(path), None, None, None) => match load_input(path)?.composite()? {
            Some(sys) => sys,
            None => {
                return Err(CliError::Usage(
                    "--input must name a composite model such as dimer_trimer".into(),
                ))
            }
        },
        (None, Some(a), Some(b), Some(k)) => block_compose(
            &load_matrix(a)?,
            &load_matrix(b)?,
            &load_matrix(k)?,
            &options,
        )?,
        _ => {
            return Err(CliError::Usage(
                "give either --input or all of --a, --b and --k".into(),
            ))
        }
    };

    let xi = composite_response(&sys)?;
    let report = sys.ep_report(default_nil_tol(sys.dim()))?;
    let out = ComposeReport {
        n_a: sys.n_a,
        n_b: sys.n_b,
        order: report.order,
        xi_a: sys.xi_a(),
        xi_b: sys.xi_b(),
        genericity: sys.genericity()?,
        response_strength: xi,
        factorized_response_strength: factorized_response(&sys, DEFAULT_CHAIN_TOL)?,
        upper_bound: response_upper_bound(sys.xi_a(), sys.xi_b(), &sys.k),
        system: &sys,
    };
    emit(args.out.as_deref(), to_json(&out))
}

#[derive(Serialize)]
struct SweepSummary {
    mode: PerturbationMode,
    seed: u64,
    trials: u64,
    points: usize,
    ep_eigenvalue: [f64; 2],
    fit: SlopeFit,
}

fn run_sweep(args: &SweepArgs) -> CliResult<Option<String>> {
    let grid = args.grid.validate()?;
    let input = load_input(&args.input)?;
    let h = input.hamiltonian()?;
    let composite = input.composite()?;
    let ensemble = match args.mode {
        PerturbationMode::Generic => Ensemble::Generic,
        PerturbationMode::Preserving => {
            let n_a = args
                .split
                .or_else(|| composite.as_ref().map(|s| s.n_a))
                .ok_or_else(|| {
                    CliError::Usage("preserving sweeps of a plain matrix need --split".into())
                })?;
            Ensemble::Preserving { n_a }
        }
    };
    let report = input.report(None)?;
    report.xi()?;

    let records = sweep(
        &h,
        report.ep_eigenvalue,
        ensemble,
        &grid,
        args.grid.trials,
        args.grid.seed,
    )?;
    write_file(&args.out, &records_to_csv(&records))?;
    let fit = fit_slope(&records, args.grid.window())?;
    Ok(Some(to_json(&SweepSummary {
        mode: args.mode,
        seed: args.grid.seed,
        trials: args.grid.trials,
        points: grid.len(),
        ep_eigenvalue: pair(report.ep_eigenvalue),
        fit,
    })))
}

/// Parameters of the two-ensemble scaling experiment on the dimer-trimer EP.
#[derive(Debug, Clone, Serialize)]
pub struct Fig3Config {
    pub omega0: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub k: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    pub trials: u64,
    pub seed: u64,
    pub fit_window: (f64, f64),
}

impl Default for Fig3Config {
    fn default() -> Self {
        let grid = GridArgs::default();
        Fig3Config {
            omega0: 1.0,
            g_a: 1.5,
            g_b: 1.3,
            k: 1.0,
            eps_min: grid.eps_min,
            eps_max: grid.eps_max,
            points: grid.points,
            trials: grid.trials,
            seed: grid.seed,
            fit_window: grid.window(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Saturation {
    /// `(2√n ε_mp ξ)^{1/n}`.
    pub bound: f64,
    /// Largest splitting at zero perturbation strength over the trials.
    pub measured: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig3Summary {
    pub config: Fig3Config,
    pub response_strength: f64,
    pub generic: SlopeFit,
    pub preserving: SlopeFit,
    pub saturation: Saturation,
}

#[derive(Debug, Clone)]
pub struct Fig3Output {
    pub generic: Vec<SweepRecord>,
    pub preserving: Vec<SweepRecord>,
    pub summary: Fig3Summary,
}

pub fn reproduce_fig3(config: &Fig3Config) -> crate::Result<Fig3Output> {
    let sys = dimer_trimer_system(
        config.omega0,
        config.g_a,
        config.g_b,
        Complex64::new(config.k, 0.0),
    )?;
    let xi = composite_response(&sys)?;
    let grid = log_grid(config.eps_min, config.eps_max, config.points)?;
    let run = |ensemble| {
        sweep(
            &sys.h,
            sys.ep_eigenvalue,
            ensemble,
            &grid,
            config.trials,
            config.seed,
        )
    };
    let generic = run(Ensemble::Generic)?;
    let preserving = run(Ensemble::Preserving { n_a: sys.n_a })?;

    let measured = (0..config.trials)
        .map(|t| {
            let h1 = random_generic(sys.dim(), crate::perturb::child_seed(config.seed, t))?.matrix;
            max_splitting(&sys.h, sys.ep_eigenvalue, &h1, 0.0)
        })
        .collect::<crate::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let summary = Fig3Summary {
        config: config.clone(),
        response_strength: xi,
        generic: fit_slope(&generic, config.fit_window)?,
        preserving: fit_slope(&preserving, config.fit_window)?,
        saturation: Saturation {
            bound: machine_precision_bound(xi, sys.dim(), MACHINE_EPSILON),
            measured,
        },
    };
    Ok(Fig3Output {
        generic,
        preserving,
        summary,
    })
}

fn run_fig3(args: &Fig3Args) -> CliResult<Option<String>> {
    args.grid.validate()?;
    check_positive("g-a", args.g_a)?;
    check_positive("g-b", args.g_b)?;
    if !args.omega0.is_finite() || !args.k.is_finite() {
        return Err(CliError::Usage("--omega0 and --k must be finite".into()));
    }
    let config = Fig3Config {
        omega0: args.omega0,
        g_a: args.g_a,
        g_b: args.g_b,
        k: args.k,
        eps_min: args.grid.eps_min,
        eps_max: args.grid.eps_max,
        points: args.grid.points,
        trials: args.grid.trials,
        seed: args.grid.seed,
        fit_window: args.grid.window(),
    };
    let output = reproduce_fig3(&config)?;
    fs::create_dir_all(&args.out).map_err(|source| CliError::Output {
        path: args.out.clone(),
        source,
    })?;
    write_file(
        &args.out.join("fig3_generic.csv"),
        &records_to_csv(&output.generic),
    )?;
    write_file(
        &args.out.join("fig3_preserving.csv"),
        &records_to_csv(&output.preserving),
    )?;
    let summary = to_json(&output.summary);
    write_file(&args.out.join("fig3_fits.json"), &summary)?;
    Ok(Some(summary))
}

fn pair(z: ComplexScalar) -> [f64; 2] {
    [z.re, z.im]
}
