use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use twistor_core::Error;

pub const SCHEMA: &str = "twistor-report/1";

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const CHECK_FAILED: u8 = 3;
    pub const UNSUPPORTED: u8 = 4;
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Unsupported(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::Unsupported(_) => exit::UNSUPPORTED,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Unsupported(m) => write!(f, "unsupported: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedSignature { .. } => CliError::Unsupported(e.to_string()),
            Error::NoPhase(_) | Error::Intertwiner(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("malformed JSON: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn exact(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, residual: None, tol: None, witness: None }
    }

    /// Passes iff `residual < tol`.
    pub fn below(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        let ok = residual < tol;
        Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, residual: Some(residual), tol: Some(tol), witness: None }
    }

    /// Passes iff `value > floor`.
    pub fn above(name: impl Into<String>, value: f64, floor: f64) -> Self {
        Check { residual: Some(value), tol: Some(floor), ..Check::exact(name, value > floor) }
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// What a command hands back before it is wrapped into a [`RunReport`].
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub result: Value,
    pub summary: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub status: Status,
    pub checks: Vec<Check>,
    pub result: Value,
}

impl RunReport {
    pub fn new(command: Vec<String>, inputs: Vec<InputDigest>, seed: Option<u64>, outcome: &Outcome) -> Self {
        let status = if outcome.checks.iter().all(Check::passed) { Status::Pass } else { Status::Fail };
        RunReport { schema: SCHEMA, command, inputs, seed, status, checks: outcome.checks.clone(), result: outcome.result.clone() }
    }

    pub fn text(&self, summary: &[String]) -> String {
        let mut out = String::new();
        for line in summary {
            out.push_str(line);
            out.push('\n');
        }
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {}", c.name));
            if let (Some(r), Some(t)) = (c.residual, c.tol) {
                out.push_str(&format!(" ({r:.3e} vs {t:.0e})"));
            }
            if let Some(w) = &c.witness {
                out.push_str(&format!(": {w}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a file and records its digest.
pub fn read_input(path: &Path, inputs: &mut Vec<InputDigest>) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let sha = Sha256::digest(&bytes);
    inputs.push(InputDigest { path: path.display().to_string(), sha256: sha.iter().map(|b| format!("{b:02x}")).collect() });
    String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{} is not UTF-8", path.display())))
}
