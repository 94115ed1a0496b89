//! Append-only JSON Lines ledgers with a schema version on every record.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::adapters::AnalysisOutcome;

pub const SCHEMA_VERSION: u32 = 1;

pub const MUTANTS: &str = "mutants.jsonl";
pub const OUTCOMES: &str = "outcomes.jsonl";
pub const VIOLATIONS: &str = "violations.jsonl";
pub const SKIPS: &str = "skips.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema: u32,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, thiserror::Error)]
pub enum LedgerError {
    #[error("{path}:{line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> LedgerError + '_ {
    move |source| LedgerError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Appends records, one line each, flushed per record.
pub struct Ledger {
    path: PathBuf,
    file: File,
}

impl Ledger {
    /// Opens for append. A torn final line left by a killed run is cut off.
    pub fn open(path: &Path) -> Result<Ledger, LedgerError> {
        if let Ok(bytes) = std::fs::read(path) {
            if !bytes.is_empty() && !bytes.ends_with(b"\n") {
                let keep = bytes.iter().rposition(|b| *b == b'\n').map(|i| i + 1).unwrap_or(0);
                let f = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
                f.set_len(keep as u64).map_err(io_err(path))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err(path))?;
        Ok(Ledger {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn append<T: Serialize>(&mut self, body: &T) -> Result<(), LedgerError> {
        let rec = Versioned {
            schema: SCHEMA_VERSION,
            body,
        };
        let mut line = serde_json::to_string(&rec).expect("ledger records serialize");
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(io_err(&self.path))?;
        self.file.flush().map_err(io_err(&self.path))
    }
}

/// Reads a ledger; a missing file is empty and a torn last line is ignored.
pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, LedgerError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let torn = !text.is_empty() && !text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |message: String| LedgerError::Corrupt {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        match serde_json::from_str::<Versioned<T>>(line) {
            Ok(v) if v.schema == SCHEMA_VERSION => out.push(v.body),
            Ok(v) => return Err(corrupt(format!("schema version {} is not supported", v.schema))),
            Err(_) if torn && i + 1 == lines.len() => {}
            Err(e) => return Err(corrupt(e.to_string())),
        }
    }
    Ok(out)
}

/// Which program an analyzer run looked at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ProgramKey {
    Baseline(String),
    Mutant(String),
    Processed(String),
}

impl ProgramKey {
    /// Stable label, also used for violation sides.
    pub fn label(&self) -> String {
        match self {
            ProgramKey::Baseline(s) => format!("baseline:{s}"),
            ProgramKey::Mutant(s) => format!("mutant:{s}"),
            ProgramKey::Processed(s) => format!("processed:{s}"),
        }
    }

    pub fn parse(label: &str) -> Option<ProgramKey> {
        let (kind, id) = label.split_once(':')?;
        let id = id.to_string();
        match kind {
            "baseline" => Some(ProgramKey::Baseline(id)),
            "mutant" => Some(ProgramKey::Mutant(id)),
            "processed" => Some(ProgramKey::Processed(id)),
            _ => None,
        }
    }

    /// Program directory relative to the work directory.
    pub fn src_dir(&self) -> String {
        match self {
            ProgramKey::Baseline(s) => format!("baselines/{s}/src"),
            ProgramKey::Mutant(s) => crate::mutagen::scratch_dir(s),
            ProgramKey::Processed(s) => format!("processed/{s}/src"),
        }
    }

    pub fn run_dir(&self, analyzer: &str) -> String {
        let (kind, id) = match self {
            ProgramKey::Baseline(s) => ("baseline", s),
            ProgramKey::Mutant(s) => ("mutant", s),
            ProgramKey::Processed(s) => ("processed", s),
        };
        format!("runs/{analyzer}/{kind}-{id}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub analyzer: String,
    /// Profile fingerprint; outcomes from a changed profile are not reused.
    pub profile: String,
    pub program: ProgramKey,
    /// Hash of the analyzed program's files.
    pub digest: String,
    pub outcome: AnalysisOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipStage {
    Processing,
    Analysis,
    Grouping,
}

/// A unit of work that could not be carried out. Never a violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub stage: SkipStage,
    pub subject: String,
    pub analyzer: Option<String>,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torn_tail_is_dropped_and_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.jsonl");
        let mut l = Ledger::open(&path).unwrap();
        l.append(&SkipRecord {
            stage: SkipStage::Grouping,
            subject: "s".into(),
            analyzer: None,
            message: "m".into(),
        })
        .unwrap();
        drop(l);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"schema\":1,\"sta").unwrap();
        assert_eq!(read::<SkipRecord>(&path).unwrap().len(), 1);
        let mut l = Ledger::open(&path).unwrap();
        l.append(&SkipRecord {
            stage: SkipStage::Analysis,
            subject: "t".into(),
            analyzer: Some("a".into()),
            message: String::new(),
        })
        .unwrap();
        let back = read::<SkipRecord>(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].subject, "t");
    }

    #[test]
    fn rejects_unknown_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.jsonl");
        std::fs::write(&path, "{\"schema\":9,\"stage\":\"grouping\",\"subject\":\"s\",\"analyzer\":null,\"message\":\"\"}\n").unwrap();
        assert!(matches!(read::<SkipRecord>(&path), Err(LedgerError::Corrupt { line: 1, .. })));
    }

    #[test]
    fn program_labels_round_trip() {
        for k in [ProgramKey::Baseline("Color".into()), ProgramKey::Mutant("ab".into()), ProgramKey::Processed("cd".into())] {
            assert_eq!(ProgramKey::parse(&k.label()), Some(k));
        }
    }
}
