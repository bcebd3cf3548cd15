//! The `tau2` command line: `gen`, `verify`, `spectrum` and `tq`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::suites::{verify, Level, SuiteOptions};
use crate::tables::{spectrum_table, tq_table};

/// Numerical verification of the open τ₂-model with non-diagonal boundaries.
#[derive(Debug, Parser)]
#[command(name = "tau2", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random configuration as JSON.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        p: usize,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites and print a JSON report.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::All)]
        level: Level,
        /// Seed for sample points; defaults to the config's seed, else 1.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalue curves of the transfer matrix as CSV.
    Spectrum {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Bethe roots of the inhomogeneous T-Q relation as CSV.
    Tq {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Negative control: perturb the constant c by 0.1%.
        #[arg(long)]
        corrupt_c: bool,
    },
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("TAU2_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Input(format!("TAU2_THREADS must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Io(e.to_string()))
}

/// Runs one command; returns the exit code.
fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let note = |stderr: &mut dyn Write, s: String| {
        let _ = writeln!(stderr, "{s}");
    };
    match cmd {
        Command::Gen { seed, p, n, out } => {
            let cfg = ConfigFile::generate(seed, p, n)?;
            write_out(out.as_deref(), &cfg.to_json(), stdout)?;
            Ok(0)
        }
        Command::Verify { config, level, seed, tol_scale, out } => {
            if !(tol_scale > 0.0 && tol_scale.is_finite()) {
                return Err(CliError::Input(format!("--tol-scale must be positive, got {tol_scale}")));
            }
            let file = ConfigFile::load(&config)?;
            let model = file.to_model()?;
            let opts =
                SuiteOptions { seed: seed.or(file.seed).unwrap_or(1), tol_scale, tolerances: file.tolerances.clone() };
            let report = verify(&[model], level, &opts, file.digest());
            write_out(out.as_deref(), &report.to_json(), stdout)?;
            for c in report.failures() {
                let why = c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
                note(
                    stderr,
                    format!("FAIL {}: {} residual {:e} tolerance {:e}{why}", c.name, c.anchor, c.residual, c.tolerance),
                );
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Spectrum { config, csv } => {
            let model = ConfigFile::load(&config)?.to_model()?;
            let t = spectrum_table(&model)?;
            write_out(csv.as_deref(), &t.csv, stdout)?;
            note(stderr, format!("{} curves; sum of curves vs trace of t(u): {:e}", t.rows, t.trace_residual));
            Ok(0)
        }
        Command::Tq { config, csv, corrupt_c } => {
            let model = ConfigFile::load(&config)?.to_model()?;
            let t = tq_table(&model, corrupt_c)?;
            write_out(csv.as_deref(), &t.csv, stdout)?;
            note(stderr, format!("{} curves; median T-Q residual {:e}", t.rows, t.median_tq_residual));
            if t.failed.is_empty() {
                Ok(0)
            } else {
                note(stderr, format!("failed curves: {:?}", t.failed));
                Ok(1)
            }
        }
    }
}

/// Parses `args` and runs the command, reporting errors on `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let result = thread_pool().and_then(|pool| pool.install(|| execute(cli.command, &mut out, &mut err)));
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
