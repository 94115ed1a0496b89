//! Campaign summary: counts per analyzer and checker, as text and JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metamorph::{Checker, Cluster};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub analyzer: String,
    pub checker: Option<Checker>,
    /// Mutants of the payload kind this checker consumes.
    pub generated: usize,
    pub valid: usize,
    /// Valid mutants that took part in a comparison.
    pub analyzed: usize,
    pub violations: usize,
    pub clusters: usize,
    /// Shortest and longest analyzer run behind this row, in seconds.
    pub time_min: Option<f64>,
    pub time_max: Option<f64>,
}

impl Row {
    pub fn add_time(&mut self, secs: f64) {
        self.time_min = Some(self.time_min.map_or(secs, |t| t.min(secs)));
        self.time_max = Some(self.time_max.map_or(secs, |t| t.max(secs)));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub rows: Vec<Row>,
    pub generated: usize,
    pub valid: usize,
    pub invalid: usize,
    pub discard_rate: f64,
    /// Invalidity reasons and how often each occurred.
    pub invalid_reasons: BTreeMap<String, usize>,
    pub skipped: usize,
    pub violations: usize,
    pub clusters: Vec<Cluster>,
}

impl CampaignSummary {
    pub fn row(&self, analyzer: &str, checker: Checker) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.analyzer == analyzer && r.checker == Some(checker))
    }

    /// Cluster count per checker for one analyzer.
    pub fn clusters_by_checker(&self, analyzer: &str) -> BTreeMap<Checker, usize> {
        let mut out = BTreeMap::new();
        for c in self.clusters.iter().filter(|c| c.analyzer == analyzer) {
            *out.entry(c.checker).or_insert(0) += 1;
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let fmt_t = |t: Option<f64>| t.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<16} {:<4} {:>9} {:>6} {:>8} {:>10} {:>8} {:>8} {:>8}",
            "analyzer", "mr", "generated", "valid", "analyzed", "violations", "clusters", "min_s", "max_s"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16} {:<4} {:>9} {:>6} {:>8} {:>10} {:>8} {:>8} {:>8}",
                r.analyzer,
                r.checker.map(|c| c.name()).unwrap_or("-"),
                r.generated,
                r.valid,
                r.analyzed,
                r.violations,
                r.clusters,
                fmt_t(r.time_min),
                fmt_t(r.time_max)
            );
        }
        let _ = writeln!(
            s,
            "\nmutants: {} generated, {} valid, {} invalid (discard rate {:.2}%)",
            self.generated,
            self.valid,
            self.invalid,
            self.discard_rate * 100.0
        );
        for (reason, n) in &self.invalid_reasons {
            let _ = writeln!(s, "  {n:>5}  {reason}");
        }
        let _ = writeln!(
            s,
            "violations: {} in {} candidate-unique clusters; {} work items skipped",
            self.violations,
            self.clusters.len(),
            self.skipped
        );
        s
    }
}

/// Plain-text triage report: one block per cluster.
pub fn triage_text(clusters: &[Cluster]) -> String {
    let mut s = String::new();
    let mut table: BTreeMap<(&str, Checker), (usize, usize)> = BTreeMap::new();
    for c in clusters {
        let e = table.entry((c.analyzer.as_str(), c.checker)).or_default();
        e.0 += c.members.len();
        e.1 += 1;
    }
    let _ = writeln!(s, "{:<16} {:<4} {:>10} {:>8}", "analyzer", "mr", "violations", "clusters");
    for ((a, c), (v, n)) in &table {
        let _ = writeln!(s, "{a:<16} {:<4} {v:>10} {n:>8}", c.name());
    }
    for c in clusters {
        let _ = writeln!(s, "\n[{}] {} member(s)", c.signature, c.members.len());
        let _ = writeln!(s, "  representative: {}", c.representative);
        for m in c.members.iter().filter(|m| **m != c.representative) {
            let _ = writeln!(s, "  also: {m}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_has_one_line_per_row() {
        let mut r = Row {
            analyzer: "toy".into(),
            checker: Some(Checker::Asc),
            generated: 3,
            valid: 2,
            analyzed: 2,
            ..Row::default()
        };
        r.add_time(0.5);
        r.add_time(0.25);
        assert_eq!((r.time_min, r.time_max), (Some(0.25), Some(0.5)));
        let s = CampaignSummary {
            rows: vec![r],
            ..CampaignSummary::default()
        };
        let text = s.to_text();
        assert!(text.lines().nth(1).unwrap().starts_with("toy"));
        assert!(text.contains("discard rate 0.00%"));
    }
}
