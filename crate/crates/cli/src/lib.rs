//! Front end for the `project` binary.
//!
//! Exit codes: 0 ok, 1 output failure, 2 parse or usage error, 3 invalid
//! model, 4 numerical failure, 5 singular input.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use projection_core::config::{
    DEFAULT_ANGULAR_POINTS, DEFAULT_QUADRATURE_POINTS, DEFAULT_RADIAL_POINTS, DISK_LEAK_TOL, INTEGRAL_PROJECTOR_TOL,
    RADIAL_IDENTITY_TOL, SERIES_PROJECTOR_TOL,
};
use projection_core::spectrum::Route;

pub mod commands;
pub mod format;
pub mod model_file;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::InvalidModel(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Singular(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "project", version, about = "Angular-momentum projected spectra of Slater determinants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Both,
    Brillouin,
    Lowdin,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Both => Route::Both,
            RouteArg::Brillouin => Route::Brillouin,
            RouteArg::Lowdin => Route::Lowdin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Projected energies E_J of the determinant in a model file.
    Spectrum {
        model: PathBuf,
        /// Gauss-Legendre nodes on [0, pi].
        #[arg(long, default_value_t = DEFAULT_QUADRATURE_POINTS)]
        points: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Both)]
        route: RouteArg,
        /// `auto` for every allowed J, or a list such as `1,2` or `1/2,3/2`.
        #[arg(long = "J", default_value = "auto")]
        j: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Determinant of A with columns replaced by right-hand sides.
    Cramer {
        /// Square matrix as a JSON array of rows.
        matrix: PathBuf,
        /// Right-hand sides as a JSON array of vectors.
        rhs: PathBuf,
        /// 1-based column positions; the k-th right-hand side replaces the k-th column listed.
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<usize>,
    },
    /// Series, integral and radial-identity checks of the J-projectors.
    CheckProjectors {
        #[arg(long, default_value = "3")]
        jmax: String,
        /// Largest m checked; defaults to jmax.
        #[arg(long)]
        mmax: Option<String>,
        #[arg(long, default_value_t = DEFAULT_RADIAL_POINTS)]
        radial_points: usize,
        #[arg(long, default_value_t = DEFAULT_ANGULAR_POINTS)]
        angular_points: usize,
        #[arg(long, default_value_t = SERIES_PROJECTOR_TOL)]
        series_tol: f64,
        #[arg(long, default_value_t = INTEGRAL_PROJECTOR_TOL)]
        integral_tol: f64,
        #[arg(long, default_value_t = DISK_LEAK_TOL)]
        leak_tol: f64,
        #[arg(long, default_value_t = RADIAL_IDENTITY_TOL)]
        radial_tol: f64,
    },
}

/// Runs one command, writing the report to `out` unless redirected to a file.
pub fn run(cli: Cli, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { model, points, route, j, format, out: path } => {
            let report = commands::spectrum(&model, points, route.into(), &j, format, err)?;
            emit(&report, path.as_deref(), out)
        }
        Command::Cramer { matrix, rhs, columns } => {
            let report = commands::cramer(&matrix, &rhs, &columns)?;
            emit(&report.text, None, out)?;
            report.status
        }
        Command::CheckProjectors {
            jmax,
            mmax,
            radial_points,
            angular_points,
            series_tol,
            integral_tol,
            leak_tol,
            radial_tol,
        } => {
            let cfg = commands::ProjectorCheckConfig {
                two_j_max: format::parse_half_integer(&jmax)?,
                two_m_max: mmax.as_deref().map(format::parse_half_integer).transpose()?,
                radial_points,
                angular_points,
                series_tol,
                integral_tol,
                leak_tol,
                radial_tol,
            };
            let report = commands::check_projectors(&cfg)?;
            emit(&report.text, None, out)?;
            report.status
        }
    }
}

fn emit(text: &str, path: Option<&std::path::Path>, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}
