//! Command-line front end: `meandim-lab <command> [--config] [--out] [--json]
//! [--csv] [--seed]`.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::elliptic::EllipticError;
use crate::helmholtz::HelmholtzError;
use crate::nevanlinna::NevanlinnaError;
use crate::numerics::{NumericsError, QuadratureError};
use crate::widim::WidimError;

pub use commands::{cmd_characteristic, cmd_extremal, cmd_helmholtz, cmd_widim, WidimCommand};
pub use config::RunConfig;
pub use report::{Cell, Check, Provenance, ReportDocument, Scalar, Table};
pub use verify::{cmd_verify, VerifyOutcome, CRITERIA};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MEANDIM_LAB_THREADS";

#[derive(Debug, Clone, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Nevanlinna(#[from] NevanlinnaError),
    #[error(transparent)]
    Widim(#[from] WidimError),
    #[error(transparent)]
    Helmholtz(#[from] HelmholtzError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl CliError {
    /// 2 for usage, configuration and I/O problems; 1 for failed computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

const CSV_HELP: &str = "\
CSV tables (written with --csv, one file <command>_<table>.csv per table;
floats carry 17 significant digits):
  extremal        df_field: x, y, df
  characteristic  characteristic: r, T, ratio, brody_bound
  widim cube      cover_boxes: box, axis, lo, hi
  widim shift     shift_slope: n, widim_bound, ratio, method, upper_bound
  widim residual  fixed_point_dim: n, dim
                  residual_slope: n, widim_bound, ratio, method, upper_bound
  widim formula   riemann_roch: N, deg, n, dim
  helmholtz       w_samples: r, w
                  residual_convergence: h, residual, order
                  barrier_profile: x, u
  verify          every table above, prefixed c<criterion>_

Exit codes: 0 success, 1 verification or computation failure,
2 usage, configuration or I/O error.
Environment: MEANDIM_LAB_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "meandim-lab", version, about = "Mean energy, characteristic, cover and barrier computations for elliptic Brody curves", after_help = CSV_HELP)]
struct Cli {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Write report.json.
    #[arg(long, global = true)]
    json: bool,
    /// Write the CSV tables.
    #[arg(long, global = true)]
    csv: bool,
    /// Override the configured seed.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the extremal curve and report its energy and normalization.
    Extremal,
    /// Characteristic profile T(r) up to r_max.
    Characteristic,
    /// Cover multiplicities, window slopes and dimension formulas.
    Widim {
        #[arg(value_enum)]
        which: WidimCommand,
    },
    /// Barrier function samples, stencil convergence and the grid demo.
    Helmholtz,
    /// Run every acceptance criterion.
    Verify {
        /// Print the criteria without running them.
        #[arg(long)]
        list: bool,
    },
}

/// Applies the thread cap from the environment to the global pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = Some(out.clone());
    }
    cfg.output.json |= cli.json;
    cfg.output.csv |= cli.csv;
    if cli.out.is_some() && !cli.json && !cli.csv {
        cfg.output.json = true;
        cfg.output.csv = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(cfg: &RunConfig, doc: &ReportDocument) -> Result<(), CliError> {
    if !(cfg.output.json || cfg.output.csv) {
        return Ok(());
    }
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    if cfg.output.json {
        doc.write_json(&dir)?;
    }
    if cfg.output.csv {
        doc.write_csv(&dir)?;
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn run_command(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    if let Command::Verify { list: true } = cli.command {
        let _ = write!(out, "{}", verify::list_text());
        return Ok(0);
    }
    configure_threads()?;
    let cfg = load_config(cli)?;
    let mut doc = match cli.command {
        Command::Extremal => cmd_extremal(&cfg)?,
        Command::Characteristic => cmd_characteristic(&cfg)?,
        Command::Widim { which } => cmd_widim(&cfg, which)?,
        Command::Helmholtz => cmd_helmholtz(&cfg)?,
        Command::Verify { .. } => {
            let outcome = cmd_verify(&cfg);
            for o in &outcome.outcomes {
                let _ = writeln!(out, "{}", o.line());
            }
            write_outputs(&cfg, &outcome.report)?;
            return Ok(match outcome.first_failure() {
                Some(reason) => {
                    let _ = writeln!(err, "verify failed: {reason}");
                    1
                }
                None => {
                    let _ = writeln!(out, "verify: all {} criteria passed", CRITERIA.len());
                    0
                }
            });
        }
    };
    doc.stamp();
    let _ = write!(out, "{}", doc.render_text());
    write_outputs(&cfg, &doc)?;
    Ok(match doc.first_failure() {
        Some(reason) => {
            let _ = writeln!(err, "{} failed: {reason}", doc.command);
            1
        }
        None => 0,
    })
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match run_command(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary, writing to the process streams.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("meandim-lab").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&[]).0, 2);
        assert_eq!(run_args(&["bogus"]).0, 2);
        assert_eq!(run_args(&["widim", "nope"]).0, 2);
        assert_eq!(
            run_args(&["helmholtz", "--config", "/nonexistent/cfg.json"]).0,
            2
        );
    }

    #[test]
    fn help_lists_csv_columns() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("df_field: x, y, df"));
    }

    #[test]
    fn list_prints_criteria() {
        let (code, out, _) = run_args(&["verify", "--list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 10);
    }

    #[test]
    fn widim_cube_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let (code, out, _) = run_args(&["widim", "cube", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
        let report: ReportDocument =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report.command, "widim cube");
        assert!(dir.path().join("widim_cube_cover_boxes.csv").exists());
    }
}
