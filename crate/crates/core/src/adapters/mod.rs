//! Running an analyzer under test and normalizing what it reports.

pub mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::metamorph::Checker;
use crate::proc::{self, ExitStatus, ProcError};
use crate::textfmt::{self, FormatError, Record};
pub use report::{parse_report, RawFinding, ReportError, ReportFormat};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerProfile {
    pub name: String,
    pub run_template: String,
    pub report_format: ReportFormat,
    pub config_file: Option<PathBuf>,
    pub classpath: String,
    pub requires_compilation: bool,
    pub checker_policy: BTreeSet<Checker>,
    pub timeout: Duration,
    pub env: Vec<(String, String)>,
    /// Drop `line` from finding identity for analyzers with unstable line attribution.
    pub line_identity: bool,
    pub ok_exit: BTreeSet<i32>,
    pub error_exit: BTreeSet<i32>,
    /// stderr pattern that turns an otherwise successful exit into ERROR.
    pub error_pattern: Option<String>,
}

impl AnalyzerProfile {
    pub fn new(name: &str, run_template: &str, report_format: ReportFormat) -> AnalyzerProfile {
        AnalyzerProfile {
            name: name.to_string(),
            run_template: run_template.to_string(),
            report_format,
            config_file: None,
            classpath: String::new(),
            requires_compilation: false,
            checker_policy: Checker::ALL.into_iter().collect(),
            timeout: DEFAULT_TIMEOUT,
            env: Vec::new(),
            line_identity: true,
            ok_exit: [0].into(),
            error_exit: BTreeSet::new(),
            error_pattern: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for p in ["{src_dir}", "{report_path}"] {
            if !self.run_template.contains(p) {
                return Err(format!("profile {}: run template lacks {p}", self.name));
            }
        }
        if let Some(p) = &self.error_pattern {
            Regex::new(p).map_err(|e| format!("profile {}: bad error_pattern: {e}", self.name))?;
        }
        if self.timeout.is_zero() {
            return Err(format!("profile {}: timeout must be positive", self.name));
        }
        Ok(())
    }

    /// Stable hash of everything that can influence an outcome.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("profile serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

fn int_set(rec: &Record, key: &str, v: Option<Vec<String>>, default: BTreeSet<i32>) -> Result<BTreeSet<i32>, FormatError> {
    match v {
        None => Ok(default),
        Some(items) => items
            .iter()
            .map(|s| s.parse().map_err(|_| rec.error(format!("`{key}` wants integers, got `{s}`"))))
            .collect(),
    }
}

pub(crate) fn parse_profile(rec: &mut Record, base: &Path) -> Result<AnalyzerProfile, FormatError> {
    let name = rec.single_positional()?;
    let run = rec.require("run")?;
    let format = rec.require("report")?.parse().map_err(|e: String| rec.error(e))?;
    let mut p = AnalyzerProfile::new(&name, &run, format);
    p.config_file = rec.take("config").map(|c| base.join(c));
    p.classpath = rec.take("classpath").unwrap_or_default();
    p.requires_compilation = rec.take_bool("requires_compilation", false)?;
    if let Some(list) = rec.take_list("checkers") {
        p.checker_policy = list
            .iter()
            .map(|c| c.parse().map_err(|e: String| rec.error(e)))
            .collect::<Result<_, _>>()?;
    }
    if let Some(secs) = rec.take_parsed::<u64>("timeout")? {
        p.timeout = Duration::from_secs(secs);
    }
    for kv in rec.take_list("env").unwrap_or_default() {
        let (k, v) = kv.split_once('=').ok_or_else(|| rec.error(format!("env entry `{kv}` is not K=V")))?;
        p.env.push((k.to_string(), v.to_string()));
    }
    p.line_identity = rec.take_bool("line_identity", true)?;
    let ok = rec.take_list("ok_exit");
    p.ok_exit = int_set(rec, "ok_exit", ok, [0].into())?;
    let er = rec.take_list("error_exit");
    p.error_exit = int_set(rec, "error_exit", er, BTreeSet::new())?;
    p.error_pattern = rec.take("error_pattern");
    rec.finish()?;
    p.validate().map_err(|m| rec.error(m))?;
    Ok(p)
}

/// Parses a profile file. Relative `config=` paths resolve against `base`.
pub fn parse_profiles(text: &str, base: &Path) -> Result<Vec<AnalyzerProfile>, FormatError> {
    let mut out: Vec<AnalyzerProfile> = Vec::new();
    for mut rec in textfmt::parse(text, "profile")? {
        if rec.keyword != "analyzer" {
            return Err(rec.error("unknown record"));
        }
        let p = parse_profile(&mut rec, base)?;
        if out.iter().any(|o| o.name == p.name) {
            return Err(rec.error(format!("duplicate analyzer `{}`", p.name)));
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("profile file {path}: {source}")]
    Profile { path: String, source: FormatError },
}

pub fn load_profiles(path: &Path) -> Result<Vec<AnalyzerProfile>, AdapterError> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_profiles(&text, base).map_err(|source| AdapterError::Profile {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TerminationClass {
    Ok,
    Crash,
    Timeout,
    Error,
}

impl TerminationClass {
    pub fn name(self) -> &'static str {
        match self {
            TerminationClass::Ok => "OK",
            TerminationClass::Crash => "CRASH",
            TerminationClass::Timeout => "TIMEOUT",
            TerminationClass::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Ok,
    Crash { status: String, fingerprint: String },
    Timeout,
    Error { message: String },
}

impl Termination {
    pub fn class(&self) -> TerminationClass {
        match self {
            Termination::Ok => TerminationClass::Ok,
            Termination::Crash { .. } => TerminationClass::Crash,
            Termination::Timeout => TerminationClass::Timeout,
            Termination::Error { .. } => TerminationClass::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub path: String,
    pub line: Option<u32>,
    pub message_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutcome {
    pub termination: Termination,
    /// Multiset, kept sorted.
    pub findings: Vec<Finding>,
    pub raw_artifacts: Vec<String>,
    pub duration_secs: f64,
}

fn crash_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)(exception|error|panicked|fatal|segmentation|abort)").expect("static regex")
    })
}

/// Line of stderr that best identifies a crash, masked.
pub fn stderr_fingerprint(stderr: &str, src_dir: &Path) -> String {
    let line = stderr
        .lines()
        .find(|l| crash_line_re().is_match(l))
        .or_else(|| stderr.lines().rev().find(|l| !l.trim().is_empty()))
        .unwrap_or("");
    let masked = mask(line.trim(), src_dir);
    masked.chars().take(200).collect()
}

/// Four-way classification from exit status and stderr only.
pub fn classify(profile: &AnalyzerProfile, status: ExitStatus, stderr: &str, src_dir: &Path) -> Termination {
    match status {
        ExitStatus::TimedOut => Termination::Timeout,
        ExitStatus::Signal(sig) => Termination::Crash {
            status: format!("signal {sig}"),
            fingerprint: stderr_fingerprint(stderr, src_dir),
        },
        ExitStatus::Code(c) if profile.ok_exit.contains(&c) => {
            let pattern = profile.error_pattern.as_deref().and_then(|p| Regex::new(p).ok());
            match pattern.and_then(|re| stderr.lines().find(|l| re.is_match(l)).map(str::to_string)) {
                Some(l) => Termination::Error {
                    message: mask(l.trim(), src_dir),
                },
                None => Termination::Ok,
            }
        }
        ExitStatus::Code(c) if profile.error_exit.contains(&c) => Termination::Error {
            message: format!("exit {c}: {}", stderr_fingerprint(stderr, src_dir)),
        },
        ExitStatus::Code(c) => Termination::Crash {
            status: format!("exit {c}"),
            fingerprint: stderr_fingerprint(stderr, src_dir),
        },
    }
}

struct Masks {
    abs_path: Regex,
    timestamp: Regex,
    hex_addr: Regex,
    identity_hash: Regex,
    thread_id: Regex,
}

fn masks() -> &'static Masks {
    static M: OnceLock<Masks> = OnceLock::new();
    M.get_or_init(|| Masks {
        abs_path: Regex::new(r#"(^|[\s'"(=\[])(/[^\s'"():\]]+)"#).expect("static regex"),
        timestamp: Regex::new(r"\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}(?::\d{2}(?:[.,]\d+)?)?(?:Z|[+-]\d{2}:?\d{2})?")
            .expect("static regex"),
        hex_addr: Regex::new(r"\b0x[0-9a-fA-F]+\b").expect("static regex"),
        identity_hash: Regex::new(r"@[0-9a-f]{5,8}\b").expect("static regex"),
        thread_id: Regex::new(r"thread '([^']*)' \(\d+\)").expect("static regex"),
    })
}

fn dir_variants(dir: &Path) -> Vec<String> {
    let mut v = vec![dir.display().to_string()];
    if let Ok(c) = dir.canonicalize() {
        let c = c.display().to_string();
        if !v.contains(&c) {
            v.push(c);
        }
    }
    v.sort_by_key(|s| std::cmp::Reverse(s.len()));
    v
}

/// Masks volatile substrings: the scratch prefix, other absolute paths,
/// timestamps, memory addresses and thread ids.
pub fn mask(message: &str, src_dir: &Path) -> String {
    let mut s = message.to_string();
    for d in dir_variants(src_dir) {
        if d.is_empty() || d == "/" {
            continue;
        }
        s = s.replace(&format!("{d}/"), "").replace(&d, ".");
    }
    let m = masks();
    let s = m.timestamp.replace_all(&s, "<time>");
    let s = m.hex_addr.replace_all(&s, "<addr>");
    let s = m.identity_hash.replace_all(&s, "@<addr>");
    let s = m.thread_id.replace_all(&s, "thread '$1'");
    m.abs_path.replace_all(&s, "${1}<path>").into_owned()
}

/// Corpus-relative form of a reported path.
pub fn relativize(path: &str, src_dir: &Path) -> String {
    let p = path.replace('\\', "/");
    for d in dir_variants(src_dir) {
        if let Some(rest) = p.strip_prefix(&format!("{d}/")) {
            return rest.to_string();
        }
    }
    p.strip_prefix("./").unwrap_or(&p).to_string()
}

pub fn normalize(profile: &AnalyzerProfile, raw: Vec<RawFinding>, src_dir: &Path) -> Vec<Finding> {
    let mut out: Vec<Finding> = raw
        .into_iter()
        .map(|r| Finding {
            rule_id: r.rule_id,
            path: relativize(&r.path, src_dir),
            line: if profile.line_identity { r.line } else { None },
            message_class: mask(&r.message, src_dir),
        })
        .collect();
    out.sort();
    out
}

/// Runs the analyzer on an already materialized program in a fresh `run_dir`.
pub fn run_analyzer(
    profile: &AnalyzerProfile,
    src_dir: &Path,
    run_dir: &Path,
    extra_vars: &BTreeMap<&str, String>,
) -> Result<AnalysisOutcome, AdapterError> {
    profile.validate().map_err(AdapterError::Config)?;
    if !src_dir.is_dir() {
        return Err(AdapterError::Config(format!("program not materialized at {}", src_dir.display())));
    }
    if run_dir.exists() {
        std::fs::remove_dir_all(run_dir)?;
    }
    std::fs::create_dir_all(run_dir)?;
    let ext = match profile.report_format {
        ReportFormat::Sarif => "sarif",
        _ => "txt",
    };
    let report_path = run_dir.join(format!("report.{ext}"));
    let stdout_path = run_dir.join("stdout.txt");
    let stderr_path = run_dir.join("stderr.txt");
    let mut vars = extra_vars.clone();
    vars.insert("src_dir", src_dir.display().to_string());
    vars.insert("report_path", report_path.display().to_string());
    vars.insert("run_dir", run_dir.display().to_string());
    vars.insert(
        "config",
        profile.config_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
    );
    vars.insert("classpath", profile.classpath.clone());
    vars.insert("bin_dir", proc::bin_dir());
    let argv = proc::expand(&profile.run_template, &vars).map_err(|e| AdapterError::Config(e.to_string()))?;
    let result = proc::run(&argv, run_dir, &profile.env, Some(profile.timeout), &stdout_path, &stderr_path);
    let result = match result {
        Ok(r) => r,
        Err(e @ (ProcError::NotRunnable { .. } | ProcError::EmptyTemplate | ProcError::BadTemplate(_))) => {
            return Err(AdapterError::Config(e.to_string()))
        }
        Err(ProcError::Io { source, .. }) => return Err(AdapterError::Io(source)),
    };
    let stderr = std::fs::read_to_string(&stderr_path).unwrap_or_default();
    let mut termination = classify(profile, result.status, &stderr, src_dir);
    let mut findings = Vec::new();
    if matches!(termination, Termination::Ok | Termination::Error { .. }) {
        match std::fs::read(&report_path) {
            Ok(bytes) => match parse_report(profile.report_format, &bytes) {
                Ok(raw) => findings = normalize(profile, raw, src_dir),
                Err(e) if termination == Termination::Ok => {
                    termination = Termination::Error {
                        message: format!("unparseable report: {e}"),
                    }
                }
                Err(_) => {}
            },
            Err(_) if termination == Termination::Ok => {
                termination = Termination::Error {
                    message: "analyzer wrote no report".into(),
                }
            }
            Err(_) => {}
        }
    }
    Ok(AnalysisOutcome {
        termination,
        findings,
        raw_artifacts: [&stdout_path, &stderr_path, &report_path]
            .iter()
            .filter(|p| p.exists())
            .map(|p| p.display().to_string())
            .collect(),
        duration_secs: result.duration.as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_file() {
        let text = "format profile version=1\n\
                    analyzer toy run=\"toy --src {src_dir} --report {report_path}\" report=toy\n\
                    \x20 checkers=ASC,EAC timeout=5 ok_exit=0,4 env=A=1,B=2 line_identity=false config=cfg.xml\n";
        let ps = parse_profiles(text, Path::new("/etc/x")).unwrap();
        let p = &ps[0];
        assert_eq!(p.checker_policy, [Checker::Asc, Checker::Eac].into());
        assert_eq!(p.timeout, Duration::from_secs(5));
        assert_eq!(p.ok_exit, [0, 4].into());
        assert_eq!(p.env, [("A".into(), "1".into()), ("B".into(), "2".into())]);
        assert_eq!(p.config_file.as_deref(), Some(Path::new("/etc/x/cfg.xml")));
        assert!(!p.line_identity);
        let bad = "format profile version=1\nanalyzer t run=\"t {src_dir}\" report=toy\n";
        assert!(parse_profiles(bad, Path::new(".")).is_err());
        let dup = "format profile version=1\nanalyzer t run=\"{src_dir} {report_path}\" report=toy\nanalyzer t run=\"{src_dir} {report_path}\" report=toy\n";
        assert_eq!(parse_profiles(dup, Path::new(".")).unwrap_err().line, 3);
    }

    #[test]
    fn masking_is_deterministic() {
        let src = Path::new("/work/run7/src");
        assert_eq!(
            mask("opened at /work/run7/src/A.java:3 on 2024-01-02T10:11:12Z by 0xdeadbeef in /opt/jdk/lib", src),
            "opened at A.java:3 on <time> by <addr> in <path>"
        );
        assert_eq!(mask("obj Foo@1a2b3c4d", src), "obj Foo@<addr>");
        assert_eq!(mask("thread 'main' (26468) panicked at x.rs:1:2:", src), "thread 'main' panicked at x.rs:1:2:");
        assert_eq!(relativize("/work/run7/src/p/A.java", src), "p/A.java");
        assert_eq!(relativize("./p/A.java", src), "p/A.java");
    }

    #[test]
    fn classification() {
        let mut p = AnalyzerProfile::new("t", "{src_dir} {report_path}", ReportFormat::Toy);
        p.error_exit = [3].into();
        p.error_pattern = Some("^WARN.*failed".into());
        let d = Path::new("/s");
        assert_eq!(classify(&p, ExitStatus::Code(0), "", d), Termination::Ok);
        assert_eq!(classify(&p, ExitStatus::Code(0), "WARN rule failed", d).class(), TerminationClass::Error);
        assert_eq!(classify(&p, ExitStatus::Code(3), "", d).class(), TerminationClass::Error);
        assert_eq!(classify(&p, ExitStatus::Code(101), "thread panicked at x", d).class(), TerminationClass::Crash);
        assert_eq!(classify(&p, ExitStatus::Signal(11), "", d).class(), TerminationClass::Crash);
        assert_eq!(classify(&p, ExitStatus::TimedOut, "", d), Termination::Timeout);
    }

    #[cfg(unix)]
    #[test]
    fn timeout_and_missing_command() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src");
        std::fs::create_dir_all(&src).unwrap();
        let mut p = AnalyzerProfile::new("sleepy", "sh -c 'sleep 30' {src_dir} {report_path}", ReportFormat::Toy);
        p.timeout = Duration::from_secs(1);
        let out = run_analyzer(&p, &src, &dir.path().join("run"), &BTreeMap::new()).unwrap();
        assert_eq!(out.termination, Termination::Timeout);
        assert!(out.findings.is_empty());
        let p = AnalyzerProfile::new("missing", "/no/such/tool {src_dir} {report_path}", ReportFormat::Toy);
        assert!(matches!(
            run_analyzer(&p, &src, &dir.path().join("run"), &BTreeMap::new()),
            Err(AdapterError::Config(_))
        ));
        let p = AnalyzerProfile::new("silent", "true {src_dir} {report_path}", ReportFormat::Toy);
        let out = run_analyzer(&p, &src, &dir.path().join("run"), &BTreeMap::new()).unwrap();
        assert_eq!(out.termination.class(), TerminationClass::Error);
    }
}
