//! Command-line front end: argument types, command implementations and the
//! verification suite. `main.rs` only parses and maps results to exit codes.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::io::Write;

use msgdp_core::MdpError;

pub mod args;
pub mod commands;
pub mod grid;
pub mod verify;

use args::{Cli, Command, VerifyArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NONCONVERGED: u8 = 2;
pub const EXIT_VERIFY_FAILED: u8 = 3;

/// Resolved settings, printed by `--dump-config`.
pub type Config = Vec<(String, String)>;

pub type CliResult = Result<u8, CliError>;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Model(MdpError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(MdpError::NonConvergence { .. }) => EXIT_NONCONVERGED,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<MdpError> for CliError {
    fn from(e: MdpError) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn verify_config(a: &VerifyArgs) -> Config {
    let only = if a.only.is_empty() {
        "all".to_string()
    } else {
        a.only.join(",")
    };
    vec![
        ("command".into(), "verify".into()),
        ("only".into(), only),
        ("seed".into(), a.seed.to_string()),
        ("mdps".into(), a.mdps.to_string()),
        ("max_states".into(), a.max_states.to_string()),
        ("max_actions".into(), a.max_actions.to_string()),
        ("out".into(), a.out.display().to_string()),
    ]
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    if a.list {
        for inv in verify::registry() {
            writeln!(out, "{:<30} {}", inv.name, inv.about)?;
        }
        return Ok(EXIT_OK);
    }
    if a.mdps == 0 || a.max_states < 2 || a.max_actions < 2 {
        return Err(CliError::Usage(
            "verify needs --mdps >= 1, --max-states >= 2 and --max-actions >= 2".into(),
        ));
    }
    let batch = verify::Batch::new(a.seed, a.mdps, a.max_states, a.max_actions);
    let report = verify::run_suite(&batch, &a.only).map_err(CliError::Usage)?;
    write!(out, "{}", report.lines())?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    let path = a.out.join("verify_report.csv");
    std::fs::write(&path, report.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let failed: Vec<_> = report.rows.iter().filter(|r| !r.1.passed()).collect();
    if failed.is_empty() {
        writeln!(out, "all {} invariants hold", report.rows.len())?;
        return Ok(EXIT_OK);
    }
    for (name, o) in failed {
        let seed = o.first_failure.unwrap_or_default();
        let (s, n_a, g) = verify::case_shape(seed, a.max_states, a.max_actions);
        writeln!(
            out,
            "violated: {name} (case seed {seed}: {s} states, {n_a} actions, gamma {g})"
        )?;
    }
    Ok(EXIT_VERIFY_FAILED)
}

/// Runs one parsed command line, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult {
    if cli.dump_config {
        let config = match &cli.command {
            Command::Solve(a) => commands::solve_config(a),
            Command::Sweep(a) => commands::sweep_config(a),
            Command::Verify(a) => verify_config(a),
            Command::Bounds(a) => commands::bounds_config(a),
            Command::Gridworld(a) => commands::gridworld_config(a),
        };
        for (k, v) in config {
            writeln!(out, "{k}={v}")?;
        }
    }
    match &cli.command {
        Command::Solve(a) => commands::cmd_solve(a, out),
        Command::Sweep(a) => commands::cmd_sweep(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Bounds(a) => commands::cmd_bounds(a, out),
        Command::Gridworld(a) => commands::cmd_gridworld(a, out),
    }
}
