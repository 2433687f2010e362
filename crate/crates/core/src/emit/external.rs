//! Running emitted programs through an external ASP or ASP(Q) solver.
//!
//! The solver command is taken from `OPTREP_ASP_SOLVER` (split on
//! whitespace, the program file path appended). Its output is scanned for
//! `UNSATISFIABLE`/`INCOHERENT` or `SATISFIABLE`/`COHERENT`, falling back to
//! the exit codes 20 and 10.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use super::EmitOptions;
use crate::optimality::RepairKind;
use crate::solver::{Semantics, Verdict};

pub const SOLVER_ENV: &str = "OPTREP_ASP_SOLVER";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Coherent,
    Incoherent,
}

#[derive(Error, Debug)]
pub enum ExternalError {
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("could not run solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("could not read a result from solver output (exit status {status:?}): {output}")]
    Unrecognized { status: Option<i32>, output: String },
}

#[derive(Clone, Debug)]
pub struct ExternalSolver {
    command: Vec<String>,
    timeout: Duration,
}

impl ExternalSolver {
    pub fn new(command: &str, timeout: Duration) -> Result<Self, ExternalError> {
        let command: Vec<String> = command.split_whitespace().map(str::to_string).collect();
        if command.is_empty() {
            return Err(ExternalError::EmptyCommand);
        }
        Ok(Self { command, timeout })
    }

    /// The solver configured in the environment, if any.
    pub fn from_env(timeout: Duration) -> Option<Self> {
        let cmd = std::env::var(SOLVER_ENV).ok()?;
        Self::new(&cmd, timeout).ok()
    }

    pub fn run(&self, program: &str) -> Result<Outcome, ExternalError> {
        let mut file = tempfile::Builder::new().suffix(".lp").tempfile()?;
        file.write_all(program.as_bytes())?;
        file.flush()?;
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .arg(file.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });
        let start = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if start.elapsed() > self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Err(ExternalError::Timeout(self.timeout));
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let output = reader.join().unwrap_or_default();
        parse_outcome(&output, status.code())
    }
}

fn parse_outcome(output: &str, status: Option<i32>) -> Result<Outcome, ExternalError> {
    for token in output.split_whitespace() {
        match token {
            "UNSATISFIABLE" | "INCOHERENT" => return Ok(Outcome::Incoherent),
            "SATISFIABLE" | "COHERENT" => return Ok(Outcome::Coherent),
            _ => {}
        }
    }
    match status {
        Some(10) => Ok(Outcome::Coherent),
        Some(20) => Ok(Outcome::Incoherent),
        _ => Err(ExternalError::Unrecognized {
            status,
            output: output.chars().take(200).collect(),
        }),
    }
}

/// Reads the verdict of the program emitted for `semantics` with `options`
/// off the solver outcome. Only brave and AR programs have a verdict.
pub fn verdict_from(semantics: Semantics, options: EmitOptions, outcome: Outcome) -> Option<Verdict> {
    let coherent = outcome == Outcome::Coherent;
    let holds = match semantics {
        Semantics::Brave(_) => coherent,
        Semantics::Ar(RepairKind::G) if options.gar_variant == 2 => coherent,
        Semantics::Ar(_) => !coherent,
        _ => return None,
    };
    Some(if holds { Verdict::Yes } else { Verdict::No })
}
