//! The three metamorphic checkers and the analysis-equivalence predicate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adapters::{AnalysisOutcome, AnalyzerProfile, Finding, TerminationClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Checker {
    Isc,
    Asc,
    Eac,
}

impl Checker {
    pub const ALL: [Checker; 3] = [Checker::Isc, Checker::Asc, Checker::Eac];

    pub fn name(self) -> &'static str {
        match self {
            Checker::Isc => "ISC",
            Checker::Asc => "ASC",
            Checker::Eac => "EAC",
        }
    }
}

impl fmt::Display for Checker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Checker {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Checker::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown checker `{s}` (expected ISC, ASC or EAC)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub termination_match: bool,
    pub left_termination: TerminationClass,
    pub right_termination: TerminationClass,
    pub only_in_left: Vec<Finding>,
    pub only_in_right: Vec<Finding>,
    pub allowlisted: Vec<Finding>,
}

impl EquivalenceVerdict {
    pub fn diff_rules(&self) -> BTreeSet<String> {
        self.only_in_left
            .iter()
            .chain(&self.only_in_right)
            .map(|f| f.rule_id.clone())
            .collect()
    }
}

/// Multiset difference `a - b` over sorted inputs.
fn multiset_minus(a: &[Finding], b: &[Finding]) -> Vec<Finding> {
    let mut counts: BTreeMap<&Finding, isize> = BTreeMap::new();
    for f in a {
        *counts.entry(f).or_default() += 1;
    }
    for f in b {
        *counts.entry(f).or_default() -= 1;
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n > 0)
        .flat_map(|(f, n)| std::iter::repeat_n(f.clone(), n as usize))
        .collect()
}

pub fn analysis_equivalent(left: &AnalysisOutcome, right: &AnalysisOutcome, allowlist: &BTreeSet<String>) -> EquivalenceVerdict {
    let lt = left.termination.class();
    let rt = right.termination.class();
    let (mut only_in_left, mut allowlisted): (Vec<Finding>, Vec<Finding>) = multiset_minus(&left.findings, &right.findings)
        .into_iter()
        .partition(|f| !allowlist.contains(&f.rule_id));
    let (only_in_right, more): (Vec<Finding>, Vec<Finding>) = multiset_minus(&right.findings, &left.findings)
        .into_iter()
        .partition(|f| !allowlist.contains(&f.rule_id));
    allowlisted.extend(more);
    allowlisted.sort();
    only_in_left.sort();
    let termination_match = lt == rt;
    EquivalenceVerdict {
        equivalent: termination_match && only_in_left.is_empty() && only_in_right.is_empty(),
        termination_match,
        left_termination: lt,
        right_termination: rt,
        only_in_left,
        only_in_right,
        allowlisted,
    }
}

/// One side of a comparison: what ran and where its evidence lives.
#[derive(Debug, Clone)]
pub struct Side<'a> {
    pub id: &'a str,
    pub outcome: &'a AnalysisOutcome,
    /// Program directory followed by raw analyzer artifacts.
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub violation_id: String,
    pub checker: Checker,
    pub analyzer: String,
    pub left: String,
    pub right: String,
    pub verdict: EquivalenceVerdict,
    pub signature: String,
    pub witness_paths: Vec<String>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("checker {checker} is disabled for analyzer {analyzer}")]
    Policy { checker: Checker, analyzer: String },
    #[error("an equivalence group needs at least two members, got {0}")]
    GroupTooSmall(usize),
}

pub fn signature(analyzer: &str, checker: Checker, verdict: &EquivalenceVerdict) -> String {
    let rules: Vec<String> = verdict.diff_rules().into_iter().collect();
    format!(
        "{analyzer}|{checker}|{}|{}/{}",
        rules.join(","),
        verdict.left_termination.name(),
        verdict.right_termination.name()
    )
}

pub fn violation_id(analyzer: &str, checker: Checker, left: &str, right: &str) -> String {
    let mut h = Sha256::new();
    for part in [analyzer, checker.name(), left, right] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..8])
}

fn policy(profile: &AnalyzerProfile, checker: Checker) -> Result<(), CheckError> {
    if profile.checker_policy.contains(&checker) {
        Ok(())
    } else {
        Err(CheckError::Policy {
            checker,
            analyzer: profile.name.clone(),
        })
    }
}

fn compare(
    profile: &AnalyzerProfile,
    checker: Checker,
    left: &Side,
    right: &Side,
    allowlist: &BTreeSet<String>,
    exclude_paths: &BTreeSet<String>,
) -> Option<Violation> {
    let strip = |o: &AnalysisOutcome| AnalysisOutcome {
        findings: o.findings.iter().filter(|f| !exclude_paths.contains(&f.path)).cloned().collect(),
        ..o.clone()
    };
    let verdict = analysis_equivalent(&strip(left.outcome), &strip(right.outcome), allowlist);
    if verdict.equivalent {
        return None;
    }
    Some(Violation {
        violation_id: violation_id(&profile.name, checker, left.id, right.id),
        checker,
        analyzer: profile.name.clone(),
        left: left.id.to_string(),
        right: right.id.to_string(),
        signature: signature(&profile.name, checker, &verdict),
        verdict,
        witness_paths: left.witness.iter().chain(&right.witness).cloned().collect(),
    })
}

/// MR1: the program with source-level annotations against its processed form.
pub fn check_isc(
    profile: &AnalyzerProfile,
    mutant: &Side,
    processed: &Side,
    allowlist: &BTreeSet<String>,
) -> Result<Option<Violation>, CheckError> {
    policy(profile, Checker::Isc)?;
    Ok(compare(profile, Checker::Isc, mutant, processed, allowlist, &BTreeSet::new()))
}

/// MR2: baseline against a dummy-annotated mutant. Findings on support files are ignored.
pub fn check_asc(
    profile: &AnalyzerProfile,
    baseline: &Side,
    mutant: &Side,
    support_files: &BTreeSet<String>,
    allowlist: &BTreeSet<String>,
) -> Result<Option<Violation>, CheckError> {
    policy(profile, Checker::Asc)?;
    Ok(compare(profile, Checker::Asc, baseline, mutant, allowlist, support_files))
}

/// MR3: every unordered pair of a tuple group at one site.
pub fn check_eac(
    profile: &AnalyzerProfile,
    group: &[Side],
    allowlist: &BTreeSet<String>,
) -> Result<Vec<Violation>, CheckError> {
    policy(profile, Checker::Eac)?;
    if group.len() < 2 {
        return Err(CheckError::GroupTooSmall(group.len()));
    }
    let mut out = Vec::new();
    for i in 0..group.len() {
        for j in i + 1..group.len() {
            out.extend(compare(profile, Checker::Eac, &group[i], &group[j], allowlist, &BTreeSet::new()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub signature: String,
    pub analyzer: String,
    pub checker: Checker,
    pub representative: String,
    pub members: Vec<String>,
}

/// Groups violations by signature. The first member of each cluster represents it.
pub fn dedup(violations: &[Violation]) -> Vec<Cluster> {
    let mut by_sig: BTreeMap<&str, Cluster> = BTreeMap::new();
    for v in violations {
        by_sig
            .entry(&v.signature)
            .or_insert_with(|| Cluster {
                signature: v.signature.clone(),
                analyzer: v.analyzer.clone(),
                checker: v.checker,
                representative: v.violation_id.clone(),
                members: Vec::new(),
            })
            .members
            .push(v.violation_id.clone());
    }
    by_sig.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapters::{ReportFormat, Termination};

    fn finding(rule: &str, line: u32) -> Finding {
        Finding {
            rule_id: rule.into(),
            path: "A.java".into(),
            line: Some(line),
            message_class: "m".into(),
        }
    }

    fn outcome(termination: Termination, findings: Vec<Finding>) -> AnalysisOutcome {
        AnalysisOutcome {
            termination,
            findings,
            raw_artifacts: vec![],
            duration_secs: 0.0,
        }
    }

    fn profile(checkers: &[Checker]) -> AnalyzerProfile {
        let mut p = AnalyzerProfile::new("toy", "{src_dir} {report_path}", ReportFormat::Toy);
        p.checker_policy = checkers.iter().copied().collect();
        p
    }

    fn side<'a>(id: &'a str, o: &'a AnalysisOutcome) -> Side<'a> {
        Side {
            id,
            outcome: o,
            witness: vec![],
        }
    }

    #[test]
    fn verdict_examples() {
        let f = finding("unused-field", 3);
        let left = outcome(Termination::Ok, vec![f.clone()]);
        let right = outcome(Termination::Ok, vec![]);
        assert!(analysis_equivalent(&left, &left, &BTreeSet::new()).equivalent);
        let v = analysis_equivalent(&left, &right, &BTreeSet::new());
        assert!(!v.equivalent);
        assert_eq!(v.only_in_left, std::slice::from_ref(&f));
        let v = analysis_equivalent(&left, &right, &["unused-field".to_string()].into());
        assert!(v.equivalent);
        assert_eq!(v.allowlisted, std::slice::from_ref(&f));
        let dup = outcome(Termination::Ok, vec![f.clone(), f.clone()]);
        assert_eq!(analysis_equivalent(&dup, &left, &BTreeSet::new()).only_in_left, [f]);
    }

    #[test]
    fn policy_and_group_size() {
        let o = outcome(Termination::Ok, vec![]);
        let p = profile(&[Checker::Asc]);
        assert!(matches!(
            check_isc(&p, &side("a", &o), &side("b", &o), &BTreeSet::new()),
            Err(CheckError::Policy { .. })
        ));
        let p = profile(&Checker::ALL);
        assert_eq!(
            check_eac(&p, &[side("a", &o)], &BTreeSet::new()),
            Err(CheckError::GroupTooSmall(1))
        );
    }

    #[test]
    fn eac_pairs() {
        let p = profile(&Checker::ALL);
        let outs: Vec<AnalysisOutcome> = (0..4).map(|i| outcome(Termination::Ok, vec![finding("r", i)])).collect();
        let ids = ["a", "b", "c", "d"];
        let sides: Vec<Side> = ids.iter().zip(&outs).map(|(i, o)| side(i, o)).collect();
        assert_eq!(check_eac(&p, &sides, &BTreeSet::new()).unwrap().len(), 6);
        let same: Vec<Side> = ids.iter().map(|i| side(i, &outs[0])).collect();
        assert!(check_eac(&p, &same, &BTreeSet::new()).unwrap().is_empty());
    }

    #[test]
    fn asc_ignores_support_files() {
        let p = profile(&Checker::ALL);
        let base = outcome(Termination::Ok, vec![]);
        let mut f = finding("r", 1);
        f.path = "annaforge/MockAnnotation.java".into();
        let m = outcome(Termination::Ok, vec![f]);
        let support: BTreeSet<String> = ["annaforge/MockAnnotation.java".to_string()].into();
        assert!(check_asc(&p, &side("b", &base), &side("m", &m), &support, &BTreeSet::new()).unwrap().is_none());
        assert!(check_asc(&p, &side("b", &base), &side("m", &m), &BTreeSet::new(), &BTreeSet::new()).unwrap().is_some());
    }

    #[test]
    fn clustering() {
        let p = profile(&Checker::ALL);
        let ok = outcome(Termination::Ok, vec![finding("r", 1)]);
        let ok2 = outcome(Termination::Ok, vec![]);
        let crash = outcome(
            Termination::Crash {
                status: "exit 101".into(),
                fingerprint: "x".into(),
            },
            vec![],
        );
        let none = BTreeSet::new();
        let v1 = check_asc(&p, &side("b", &ok), &side("m1", &ok2), &none, &none).unwrap().unwrap();
        let v2 = check_asc(&p, &side("b", &ok), &side("m2", &ok2), &none, &none).unwrap().unwrap();
        let v3 = check_asc(&p, &side("b", &ok), &side("m3", &crash), &none, &none).unwrap().unwrap();
        let clusters = dedup(&[v1.clone(), v2, v3]);
        assert_eq!(clusters.len(), 2);
        let big = clusters.iter().find(|c| c.members.len() == 2).unwrap();
        assert_eq!(big.representative, v1.violation_id);
        assert!(dedup(&[]).is_empty());
    }
}
