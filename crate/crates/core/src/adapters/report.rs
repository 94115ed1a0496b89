//! Report parsers. Each turns raw analyzer output into raw findings.

use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    /// `RULE<TAB>path<TAB>line<TAB>msg`, one finding per line.
    Toy,
    /// PMD text renderer: `path:line:<TAB>Rule:<TAB>message` (rule optional).
    PmdText,
    /// Checkstyle plain output: `[WARN] path:line:col: message [Rule]`.
    CheckstylePlain,
    /// SARIF 2.1 JSON.
    Sarif,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 4] = [
        ReportFormat::Toy,
        ReportFormat::PmdText,
        ReportFormat::CheckstylePlain,
        ReportFormat::Sarif,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Toy => "toy",
            ReportFormat::PmdText => "pmd-text",
            ReportFormat::CheckstylePlain => "checkstyle-plain",
            ReportFormat::Sarif => "sarif",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ReportFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown report format `{s}`"))
    }
}

/// A finding as the analyzer printed it, before path relativization and masking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFinding {
    pub rule_id: String,
    pub path: String,
    pub line: Option<u32>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed report at byte {offset}: {message}")]
pub struct ReportError {
    pub offset: usize,
    pub message: String,
}

fn err(offset: usize, message: impl Into<String>) -> ReportError {
    ReportError {
        offset,
        message: message.into(),
    }
}

/// Lines paired with their starting byte offsets.
fn lines(raw: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    raw.split_inclusive('\n').map(move |l| {
        let start = offset;
        offset += l.len();
        (start, l.trim_end_matches(['\n', '\r']))
    })
}

fn parse_line_no(s: &str, offset: usize) -> Result<Option<u32>, ReportError> {
    match s {
        "" | "?" | "UNKNOWN" => Ok(None),
        _ => s
            .parse()
            .map(Some)
            .map_err(|_| err(offset, format!("bad line number `{s}`"))),
    }
}

pub fn parse_report(format: ReportFormat, raw: &[u8]) -> Result<Vec<RawFinding>, ReportError> {
    let text = std::str::from_utf8(raw).map_err(|e| err(e.valid_up_to(), "report is not UTF-8"))?;
    match format {
        ReportFormat::Toy => parse_toy(text),
        ReportFormat::PmdText => parse_pmd_text(text),
        ReportFormat::CheckstylePlain => parse_checkstyle(text),
        ReportFormat::Sarif => parse_sarif(text),
    }
}

fn parse_toy(text: &str) -> Result<Vec<RawFinding>, ReportError> {
    let mut out = Vec::new();
    for (off, line) in lines(text) {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(4, '\t').collect();
        let [rule, path, ln, msg] = parts.as_slice() else {
            return Err(err(off, "expected 4 tab-separated fields"));
        };
        if rule.is_empty() {
            return Err(err(off, "empty rule id"));
        }
        out.push(RawFinding {
            rule_id: rule.to_string(),
            path: path.to_string(),
            line: parse_line_no(ln, off)?,
            message: msg.to_string(),
        });
    }
    Ok(out)
}

/// Inverse of the toy parser, used by the toy analyzer itself.
pub fn write_toy(findings: &[RawFinding]) -> String {
    findings
        .iter()
        .map(|f| {
            let line = f.line.map(|l| l.to_string()).unwrap_or_else(|| "?".into());
            format!("{}\t{}\t{}\t{}\n", f.rule_id, f.path, line, f.message)
        })
        .collect()
}

fn parse_pmd_text(text: &str) -> Result<Vec<RawFinding>, ReportError> {
    let re = Regex::new(r"^(.+?):(\d+):\t(?:([A-Za-z][A-Za-z0-9_]*):\t)?(.*)$").expect("static regex");
    let mut out = Vec::new();
    for (off, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        let c = re.captures(line).ok_or_else(|| err(off, "expected `path:line:<TAB>message`"))?;
        out.push(RawFinding {
            rule_id: c.get(3).map(|m| m.as_str()).unwrap_or("pmd").to_string(),
            path: c[1].to_string(),
            line: parse_line_no(&c[2], off)?,
            message: c[4].to_string(),
        });
    }
    Ok(out)
}

fn parse_checkstyle(text: &str) -> Result<Vec<RawFinding>, ReportError> {
    let re = Regex::new(r"^\[(?:WARN|ERROR|INFO)\] (.+?):(\d+)(?::\d+)?: (.*?)(?: \[([A-Za-z0-9_.]+)\])?$")
        .expect("static regex");
    let mut out = Vec::new();
    for (off, line) in lines(text) {
        let t = line.trim();
        if t.is_empty() || t.starts_with("Starting audit") || t.starts_with("Audit done") {
            continue;
        }
        let c = re.captures(t).ok_or_else(|| err(off, "expected `[LEVEL] path:line: message [Rule]`"))?;
        out.push(RawFinding {
            rule_id: c.get(4).map(|m| m.as_str()).unwrap_or("checkstyle").to_string(),
            path: c[1].to_string(),
            line: parse_line_no(&c[2], off)?,
            message: c[3].to_string(),
        });
    }
    Ok(out)
}

fn offset_of(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn parse_sarif(text: &str) -> Result<Vec<RawFinding>, ReportError> {
    use serde_json::Value;
    let v: Value = serde_json::from_str(text).map_err(|e| err(offset_of(text, e.line(), e.column()), e.to_string()))?;
    let runs = v
        .get("runs")
        .and_then(Value::as_array)
        .ok_or_else(|| err(0, "missing `runs` array"))?;
    let mut out = Vec::new();
    for run in runs {
        for r in run.get("results").and_then(Value::as_array).into_iter().flatten() {
            let rule_id = r
                .get("ruleId")
                .and_then(Value::as_str)
                .ok_or_else(|| err(0, "result without `ruleId`"))?
                .to_string();
            let message = r
                .pointer("/message/text")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            let loc = r.pointer("/locations/0/physicalLocation");
            let path = loc
                .and_then(|l| l.pointer("/artifactLocation/uri"))
                .and_then(Value::as_str)
                .unwrap_or_default();
            let path = path.strip_prefix("file://").unwrap_or(path).to_string();
            let line = loc
                .and_then(|l| l.pointer("/region/startLine"))
                .and_then(Value::as_u64)
                .and_then(|l| u32::try_from(l).ok());
            out.push(RawFinding {
                rule_id,
                path,
                line,
                message,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_round_trip_and_multiset() {
        let f = RawFinding {
            rule_id: "unused-field".into(),
            path: "/tmp/x/A.java".into(),
            line: Some(3),
            message: "field 'x' is never read".into(),
        };
        let text = write_toy(&[f.clone(), f.clone()]);
        assert_eq!(parse_report(ReportFormat::Toy, text.as_bytes()).unwrap(), vec![f.clone(), f]);
        assert!(parse_report(ReportFormat::Toy, b"").unwrap().is_empty());
        let e = parse_report(ReportFormat::Toy, b"a\tb\t1\tm\nbroken\n").unwrap_err();
        assert_eq!(e.offset, 8);
    }

    #[test]
    fn pmd_and_checkstyle() {
        let pmd = "/s/A.java:3:\tUnusedPrivateField:\tAvoid unused private fields such as 'x'.\n/s/B.java:9:\tno rule here\n";
        let got = parse_report(ReportFormat::PmdText, pmd.as_bytes()).unwrap();
        assert_eq!(got[0].rule_id, "UnusedPrivateField");
        assert_eq!(got[0].line, Some(3));
        assert_eq!(got[1].rule_id, "pmd");
        let cs = "Starting audit...\n[WARN] /s/A.java:4:5: Missing a Javadoc comment. [MissingJavadocMethod]\nAudit done.\n";
        let got = parse_report(ReportFormat::CheckstylePlain, cs.as_bytes()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].rule_id, "MissingJavadocMethod");
        assert_eq!(got[0].message, "Missing a Javadoc comment.");
    }

    #[test]
    fn sarif() {
        let s = r#"{"runs":[{"results":[{"ruleId":"R1","message":{"text":"m"},
            "locations":[{"physicalLocation":{"artifactLocation":{"uri":"file:///s/A.java"},"region":{"startLine":7}}}]}]}]}"#;
        let got = parse_report(ReportFormat::Sarif, s.as_bytes()).unwrap();
        assert_eq!(got[0].path, "/s/A.java");
        assert_eq!(got[0].line, Some(7));
        let e = parse_report(ReportFormat::Sarif, b"{\n  \"runs\": [x]}").unwrap_err();
        assert_eq!(e.offset, 13);
    }
}
