//! Command-line front end: `check`, `infer`, `resolve`, and `combine`.
//!
//! Exit codes: 0 on success, 1 on parse or validation failures, 2 when
//! Dempster's rule is indeterminate because of total conflict.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::belief::{combine_all, BeliefError, MassFunction};
use crate::kb::{parse_kb, parse_mass_file, KnowledgeBase};
use crate::network::{build_network, NetworkError};
use crate::report;
use crate::revision::{resolve_loop, EngineParams, RevisionError};

/// Exit code for parse and validation failures.
pub const EXIT_INVALID: i32 = 1;
/// Exit code for total-conflict indeterminacy.
pub const EXIT_CONFLICT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "nmp",
    version,
    about = "Evidence combination with assumption tracking and conflict-driven belief revision"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a knowledge base.
    Check {
        /// Knowledge-base file.
        file: PathBuf,
    },
    /// Propagate beliefs once and print the per-statement report.
    Infer {
        /// Knowledge-base file.
        file: PathBuf,
        /// Emit line-delimited JSON records instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Run the conflict-resolution loop.
    Resolve {
        /// Knowledge-base file.
        file: PathBuf,
        /// Significance exponent (overrides the KB's `param gamma`).
        #[arg(long)]
        gamma: Option<f64>,
        /// Revision step size (overrides the KB's `param delta`).
        #[arg(long)]
        delta: Option<f64>,
        /// Iteration bound (overrides the KB's `param maxiter`).
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        /// Print one line per loop iteration.
        #[arg(long)]
        trace: bool,
        /// Emit line-delimited JSON records instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Combine mass files by Dempster's rule and print the result.
    Combine {
        /// Mass files sharing one frame.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Emit line-delimited JSON records instead of the table.
        #[arg(long)]
        json: bool,
    },
}

/// A command failure: message for the error stream plus an exit code.
struct Failure {
    message: String,
    code: i32,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Failure {
        Failure {
            message: message.into(),
            code: EXIT_INVALID,
        }
    }
}

fn belief_code(err: &BeliefError) -> i32 {
    match err {
        BeliefError::TotalConflict => EXIT_CONFLICT,
        _ => EXIT_INVALID,
    }
}

fn network_code(err: &NetworkError) -> i32 {
    match err {
        NetworkError::Propagation { source, .. } => belief_code(source),
        NetworkError::Belief(source) => belief_code(source),
        _ => EXIT_INVALID,
    }
}

fn revision_code(err: &RevisionError) -> i32 {
    match err {
        RevisionError::Network(source) => network_code(source),
        RevisionError::Aborted { source, .. } => revision_code(source),
        _ => EXIT_INVALID,
    }
}

/// Run the CLI against explicit argument and output streams. `args` includes
/// the program name. Returns the process exit code.
pub fn run_cli<O: Write, E: Write>(args: &[String], stdout: &mut O, stderr: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{err}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{err}");
                    EXIT_INVALID
                }
            };
        }
    };
    match run_command(cli.command, stdout) {
        Ok(()) => 0,
        Err(failure) => {
            let _ = writeln!(stderr, "nmp: {}", failure.message);
            failure.code
        }
    }
}

fn run_command(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Check { file } => check(&file, stdout),
        Command::Infer { file, json } => infer(&file, json, stdout),
        Command::Resolve {
            file,
            gamma,
            delta,
            max_iter,
            trace,
            json,
        } => resolve(&file, gamma, delta, max_iter, trace, json, stdout),
        Command::Combine { files, json } => combine(&files, json, stdout),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, Failure> {
    let text = read_file(path)?;
    parse_kb(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn check(path: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    let kb = load_kb(path)?;
    build_network(&kb).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let _ = writeln!(
        stdout,
        "ok: {} statements, {} sources, {} queries",
        kb.statements.len(),
        kb.sources.len(),
        kb.queries.len()
    );
    Ok(())
}

fn infer(path: &Path, json: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    let kb = load_kb(path)?;
    let net = build_network(&kb).map_err(|e| Failure::invalid(e.to_string()))?;
    let beliefs = net.propagate().map_err(|e| Failure {
        message: e.to_string(),
        code: network_code(&e),
    })?;
    let report = report::Report::from_state(&beliefs, &kb.monitored());
    let result = if json {
        report.write_json(stdout)
    } else {
        report.write_human(stdout)
    };
    result.map_err(|e| Failure::invalid(e.to_string()))
}

fn resolve(
    path: &Path,
    gamma: Option<f64>,
    delta: Option<f64>,
    max_iter: Option<usize>,
    trace: bool,
    json: bool,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let kb = load_kb(path)?;
    let mut params = EngineParams::for_kb(&kb);
    if let Some(g) = gamma {
        params.gamma = g;
    }
    if let Some(d) = delta {
        params.delta = d;
    }
    if let Some(m) = max_iter {
        params.max_iter = m;
    }
    match resolve_loop(&kb, &params) {
        Ok(outcome) => {
            let mut write = || -> io::Result<()> {
                if json {
                    if trace {
                        report::write_trace_json(&outcome.trace, stdout)?;
                    }
                    let rep = report::Report::from_state(&outcome.beliefs, &outcome.kb.monitored());
                    rep.write_json(stdout)?;
                    report::write_resolve_summary_json(
                        outcome.trace.len(),
                        outcome.revisions,
                        outcome.stopped,
                        stdout,
                    )?;
                } else {
                    if trace {
                        report::write_trace_human(&outcome.trace, stdout)?;
                    }
                    let rep = report::Report::from_state(&outcome.beliefs, &outcome.kb.monitored());
                    rep.write_human(stdout)?;
                    report::write_resolve_summary_human(
                        outcome.trace.len(),
                        outcome.revisions,
                        outcome.stopped,
                        stdout,
                    )?;
                }
                Ok(())
            };
            write().map_err(|e| Failure::invalid(e.to_string()))
        }
        Err(err) => {
            // Surface whatever partial trace the loop produced.
            if trace {
                if let RevisionError::Aborted { trace: partial, .. } = &err {
                    let _ = if json {
                        report::write_trace_json(partial, stdout)
                    } else {
                        report::write_trace_human(partial, stdout)
                    };
                }
            }
            Err(Failure {
                message: err.to_string(),
                code: revision_code(&err),
            })
        }
    }
}

fn combine(files: &[PathBuf], json: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut masses: Vec<MassFunction> = Vec::with_capacity(files.len());
    let mut first: Option<&Path> = None;
    for path in files {
        let text = read_file(path)?;
        let mf = parse_mass_file(&text)
            .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
        if let (Some(first_path), Some(prev)) = (first, masses.first()) {
            if prev.frame() != &mf.frame {
                return Err(Failure::invalid(format!(
                    "frames differ between {} and {}",
                    first_path.display(),
                    path.display()
                )));
            }
        }
        first.get_or_insert(path);
        masses.push(mf.effective());
    }
    let combined = combine_all(masses.iter()).map_err(|e| Failure {
        message: e.to_string(),
        code: belief_code(&e),
    })?;
    let result = if json {
        report::write_combined_json(&combined, stdout)
    } else {
        report::write_combined_human(&combined, stdout)
    };
    result.map_err(|e| Failure::invalid(e.to_string()))
}
