//! The report document every subcommand emits, and the failures that map to exit codes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use fpaut_core::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// One checked item of a report.
#[derive(Clone, Debug, Serialize)]
pub struct ResultLine {
    pub id: String,
    pub pass: bool,
    pub witness: Value,
}

impl ResultLine {
    pub fn new(id: impl Into<String>, pass: bool, witness: Value) -> Self {
        ResultLine {
            id: id.into(),
            pass,
            witness,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// SHA-256 of each input file, keyed by the flag that named it.
    pub inputs: BTreeMap<String, String>,
    pub results: Vec<ResultLine>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            inputs: BTreeMap::new(),
            results: Vec::new(),
        }
    }

    pub fn push(&mut self, line: ResultLine) {
        self.results.push(line);
    }

    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    /// Reads and parses a JSON input, recording its hash.
    pub fn input(&mut self, flag: &str, path: &Path) -> Result<Value, Failure> {
        let bytes = fs::read(path)
            .map_err(|e| Failure::Schema(format!("cannot read {}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(flag.to_string(), hex);
        serde_json::from_slice(&bytes)
            .map_err(|e| Failure::Schema(format!("{} is not JSON: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

/// Reasons a run stops before producing a report.
#[derive(Debug)]
pub enum Failure {
    /// Malformed or inconsistent input (exit status 2).
    Schema(String),
    /// A library invariant was violated (exit status 3).
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Schema(m) => write!(f, "input error: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(m) => Failure::Internal(m),
            other => Failure::Schema(other.to_string()),
        }
    }
}

pub fn write_json(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Schema(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::Internal("x".into())).exit_code(), 3);
        assert_eq!(Failure::from(Error::BaseMismatch).exit_code(), 2);
        assert_eq!(Failure::from(Error::Precondition("x".into())).exit_code(), 2);
        assert_eq!(Failure::from(Error::Invalid("schema: x".into())).exit_code(), 2);
    }

    #[test]
    fn report_passes_only_when_every_line_passes() {
        let mut r = Report::new("selftest", 3);
        assert!(r.pass());
        r.push(ResultLine::new("a", true, Value::Null));
        assert!(r.pass());
        r.push(ResultLine::new("b", false, Value::Null));
        assert!(!r.pass());
        let doc: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(doc["seed"], 3);
        assert_eq!(doc["results"][1]["pass"], false);
    }

    #[test]
    fn inputs_are_hashed() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("empty.json");
        fs::write(&path, "{}").unwrap();
        let mut r = Report::new("height", 0);
        r.input("system", &path).unwrap();
        assert_eq!(
            r.inputs["system"],
            "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
        );
    }
}
