//! Command-line front end.

pub mod document;
pub mod experiment;
pub mod gallery;
pub mod io;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::manifold::{Status, TraceEntry};
use crate::objective::{Mode, ObjectiveError};
use crate::region::{is_hurwitz_2x2, RegionSpec};
use crate::scalar::Entry;
use crate::solver::{
    default_starts, nearest_stable, Method, SolveConfig, SolveError, SolveOutcome,
};
use document::ResultDocument;
use experiment::Experiment;
use io::{MatrixData, MatrixFormat, MatrixIoError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "nearstable",
    version,
    about = "Nearest stable matrix by optimization over the orthogonal group"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a nearest stable matrix.
    Solve(SolveArgs),
    /// Write a benchmark matrix.
    Gallery(GalleryArgs),
    /// Run one of the bundled experiments.
    Experiment(ExperimentArgs),
    /// Sample the 2x2 Hurwitz-stable set on the slice A22 = A11.
    SectionData(SectionArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Hurwitz,
    Schur,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Mm,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::Mm => MatrixFormat::MatrixMarket,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Tr,
    Gd,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Input matrix file.
    #[arg(
        long = "in",
        value_name = "PATH",
        conflicts_with = "gallery",
        required_unless_present = "gallery"
    )]
    pub input: Option<PathBuf>,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Benchmark matrix instead of a file, e.g. grcar:10.
    #[arg(long, value_name = "NAME:N")]
    pub gallery: Option<String>,
    #[arg(long, value_enum, default_value = "hurwitz")]
    pub region: RegionArg,
    #[arg(long, value_enum, default_value = "real")]
    pub field: FieldArg,
    /// Number of starting points (10 for n <= 50, else 4).
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gradient-norm tolerance, relative to max(1, |A|_F).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value = "tr")]
    pub method: MethodArg,
    /// Result document (JSON).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Per-iteration trace of the best start (CSV).
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Report zero elapsed time so repeated runs give identical files.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct GalleryArgs {
    /// NAME:N with NAME one of type1, grcar, randn, rand.
    #[arg(value_name = "NAME:N")]
    pub spec: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// grcar-suite, real-eig-suite, conjecture or perf-profile.
    pub name: String,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SectionArgs {
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Matrix(#[from] MatrixIoError),
    #[error(transparent)]
    Gallery(#[from] gallery::GalleryError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Experiment(#[from] experiment::ExperimentError),
    #[error("{region} region is not supported for {field} matrices")]
    Mismatch { region: String, field: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("optimizer stopped with {0:?}")]
    Failed(Status),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Matrix(MatrixIoError::Io(_)) => EXIT_FAILURE,
            Self::Matrix(_) | Self::Gallery(_) | Self::InvalidGrid(_) => EXIT_PARSE,
            Self::Experiment(experiment::ExperimentError::Unknown(_)) => EXIT_PARSE,
            Self::Mismatch { .. } => EXIT_MISMATCH,
            Self::Solve(SolveError::Objective(
                ObjectiveError::FieldMismatch { .. } | ObjectiveError::UnsupportedRegion { .. },
            )) => EXIT_MISMATCH,
            Self::Solve(SolveError::Objective(_)) => EXIT_PARSE,
            _ => EXIT_FAILURE,
        }
    }
}

/// Fixed number of significant digits; plain decimals for moderate
/// magnitudes, exponent form otherwise.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..digits as i32).contains(&e) {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

fn region_spec(r: RegionArg) -> RegionSpec {
    match r {
        RegionArg::Hurwitz => RegionSpec::hurwitz(),
        RegionArg::Schur => RegionSpec::schur(),
        RegionArg::Real => RegionSpec::real_line(),
    }
}

/// Splitting used for a region/field pair. Real matrices with the unit
/// disk have no real 2×2 projection and are rejected.
pub fn select_mode(region: RegionArg, field: FieldArg) -> Result<Mode, CliError> {
    match (region, field) {
        (_, FieldArg::Complex) => Ok(Mode::ComplexTriangular),
        (RegionArg::Hurwitz, FieldArg::Real) => Ok(Mode::RealBlock),
        (RegionArg::Real, FieldArg::Real) => Ok(Mode::RealTriangular),
        (RegionArg::Schur, FieldArg::Real) => Err(CliError::Mismatch {
            region: "schur".into(),
            field: "real".into(),
        }),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

pub fn write_trace<W: Write>(out: W, trace: &[TraceEntry], timing: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "time_s", "objfun_sqrt", "gradnorm"])?;
    for e in trace {
        let t = if timing { e.seconds } else { 0.0 };
        w.write_record([
            e.iteration.to_string(),
            t.to_string(),
            e.value.max(0.0).sqrt().to_string(),
            e.grad_norm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn finish<T: Entry>(
    args: &SolveArgs,
    input: &str,
    mut outcome: SolveOutcome<T>,
) -> Result<(), CliError> {
    if args.no_timing {
        outcome.seconds = 0.0;
    }
    if let Some(path) = &args.out {
        let doc = ResultDocument::from_outcome(
            input,
            region_spec(args.region).name(),
            args.seed,
            &outcome,
        );
        fs::write(path, doc.to_json())?;
    }
    if let Some(path) = &args.trace {
        write_trace(
            fs::File::create(path)?,
            &outcome.objective_trace,
            !args.no_timing,
        )?;
    }
    println!("{}", format_significant(outcome.distance, 6));
    match outcome.status {
        Status::Converged | Status::IterationLimit => Ok(()),
        s => Err(CliError::Failed(s)),
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let (data, input) = match (&args.input, &args.gallery) {
        (Some(path), _) => (
            io::read_matrix(path, args.format.map(Into::into))?,
            path.display().to_string(),
        ),
        (None, Some(spec)) => {
            let (name, n) = gallery::parse_spec(spec)?;
            (
                MatrixData::Real(gallery::gallery(&name, n, args.seed)?),
                spec.clone(),
            )
        }
        (None, None) => unreachable!("clap requires --in or --gallery"),
    };
    let mode = select_mode(args.region, args.field)?;
    let n = data.dim();
    let mut config =
        SolveConfig::with_starts(args.starts.unwrap_or_else(|| default_starts(n)), args.seed);
    if let Some(tol) = args.tol {
        config.optimizer.grad_tolerance = tol;
    }
    if let Some(m) = args.max_iter {
        config.optimizer.max_iterations = m;
    }
    config.method = match args.method {
        MethodArg::Tr => Method::TrustRegion,
        MethodArg::Gd => Method::GradientDescent,
    };
    let region = region_spec(args.region);
    match (mode, data) {
        (Mode::ComplexTriangular, data) => {
            let a: DMatrix<Complex64> = data.into_complex();
            finish(args, &input, nearest_stable(&a, &region, mode, &config)?)
        }
        (_, MatrixData::Real(a)) => {
            finish(args, &input, nearest_stable(&a, &region, mode, &config)?)
        }
        (_, MatrixData::Complex(_)) => Err(CliError::Mismatch {
            region: region.name().to_string(),
            field: "real".into(),
        }),
    }
}

pub fn cmd_gallery(args: &GalleryArgs) -> Result<(), CliError> {
    let (name, n) = gallery::parse_spec(&args.spec)?;
    let a = gallery::gallery(&name, n, args.seed)?;
    let mut buf = Vec::new();
    io::write_matrix(&mut buf, &MatrixData::Real(a), args.format.into())?;
    write_output(args.out.as_deref(), &buf)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let which: Experiment = args.name.parse()?;
    let starts = args.starts.unwrap_or(10);
    let config = SolveConfig::with_starts(starts, args.seed);
    let mut buf = Vec::new();
    experiment::run(which, &config, &mut buf)?;
    write_output(args.out.as_deref(), &buf)
}

/// Grid points `min, min + step, …` up to `max` (inclusive up to rounding).
pub fn grid_points(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(CliError::InvalidGrid(
            "bounds and step must be finite".into(),
        ));
    }
    if step <= 0.0 {
        return Err(CliError::InvalidGrid(format!(
            "step must be positive, got {step}"
        )));
    }
    if min > max {
        return Err(CliError::InvalidGrid(format!(
            "min {min} exceeds max {max}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() + 1.0;
    if count > 1000.0 {
        return Err(CliError::InvalidGrid(format!(
            "{count} points per axis is too many"
        )));
    }
    Ok((0..count as usize).map(|k| min + k as f64 * step).collect())
}

/// Rows `(a11, a12, a21, stable)` for `[[a11, a12], [a21, a11]]`.
pub fn section_rows(min: f64, max: f64, step: f64) -> Result<Vec<(f64, f64, f64, bool)>, CliError> {
    let g = grid_points(min, max, step)?;
    let mut rows = Vec::with_capacity(g.len().pow(3));
    for &a11 in &g {
        for &a12 in &g {
            for &a21 in &g {
                let m = nalgebra::Matrix2::new(a11, a12, a21, a11);
                rows.push((a11, a12, a21, is_hurwitz_2x2(&m, 0.0)));
            }
        }
    }
    Ok(rows)
}

pub fn cmd_section_data(args: &SectionArgs) -> Result<(), CliError> {
    let rows = section_rows(args.min, args.max, args.step)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["a11", "a12", "a21", "stable"])?;
    for (a11, a12, a21, s) in rows {
        w.write_record([
            a11.to_string(),
            a12.to_string(),
            a21.to_string(),
            u8::from(s).to_string(),
        ])?;
    }
    let buf = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_output(args.out.as_deref(), &buf)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Gallery(a) => cmd_gallery(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::SectionData(a) => cmd_section_data(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
