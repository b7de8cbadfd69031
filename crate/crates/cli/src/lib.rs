//! Command-line frontend: surface generation, verification reports, limit
//! studies, the ODE bridge and mesh export.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on usage or
//! runtime errors.

pub mod args;
pub mod commands;
pub mod config;
pub mod mesh;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command, OdeCommand};
use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] solsurf::Error),
    #[error("cannot write {0}: {1}")]
    Io(String, std::io::Error),
}

fn emit_report(report: &Report, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let json = report.to_json();
    match path {
        Some(p) => fs::write(p, json + "\n").map_err(|e| CliError::Io(p.display().to_string(), e)),
        None => writeln!(out, "{json}").map_err(|e| CliError::Io("stdout".into(), e)),
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T, CliError>) -> Result<(T, f64), CliError> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64() * 1e3))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let (report, path, text) = match &cli.command {
        Command::Generate(a) => {
            let (r, ms) = timed(|| commands::generate(a))?;
            (with_time(r, ms), a.output.report.clone(), None)
        }
        Command::Verify(a) => {
            let (r, ms) = timed(|| commands::verify(a))?;
            (with_time(r, ms), a.report.clone(), None)
        }
        Command::Limit(a) => {
            let (r, ms) = timed(|| commands::limit(a))?;
            (with_time(r, ms), a.report.clone(), None)
        }
        Command::Ode(OdeCommand::ToOde(a)) => {
            let (r, ms) = timed(|| commands::to_ode(a))?;
            (with_time(r.report, ms), a.report.clone(), Some(r.text))
        }
        Command::Ode(OdeCommand::FromOde(a)) => {
            let (r, ms) = timed(|| commands::from_ode(a))?;
            (with_time(r.report, ms), a.report.clone(), Some(r.text))
        }
        Command::Ode(OdeCommand::ErfExample(a)) => {
            let (r, ms) = timed(|| commands::erf_example(a))?;
            (with_time(r, ms), a.output.report.clone(), None)
        }
    };
    match text {
        // text commands print their result; the report goes to a file on request
        Some(t) => {
            write!(out, "{t}").map_err(|e| CliError::Io("stdout".into(), e))?;
            if let Some(p) = &path {
                emit_report(&report, Some(p), out)?;
            }
        }
        None => emit_report(&report, path.as_deref(), out)?,
    }
    Ok(report.all_pass())
}

fn with_time(mut r: Report, ms: f64) -> Report {
    r.wall_ms = ms;
    r
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match config::merge_config_file(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_ERROR,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
