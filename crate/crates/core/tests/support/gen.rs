//! Random analysis outcomes over a small vocabulary, so pairs overlap often.

use std::collections::BTreeSet;

use annaforge::adapters::{AnalysisOutcome, Finding, Termination};
use proptest::prelude::*;

pub const RULES: [&str; 4] = ["r0", "r1", "r2", "r3"];

fn termination() -> impl Strategy<Value = Termination> {
    prop_oneof![
        3 => Just(Termination::Ok),
        1 => "[a-c]".prop_map(|f| Termination::Crash { status: "exit 101".into(), fingerprint: f }),
        1 => Just(Termination::Timeout),
        1 => "[a-c]".prop_map(|m| Termination::Error { message: m }),
    ]
}

fn finding() -> impl Strategy<Value = Finding> {
    (0..RULES.len(), prop::sample::select(vec!["A.java", "p/B.java"]), prop::option::of(1u32..4), "[xy]")
        .prop_map(|(r, path, line, msg)| Finding {
            rule_id: RULES[r].to_string(),
            path: path.to_string(),
            line,
            message_class: msg,
        })
}

pub fn outcome() -> impl Strategy<Value = AnalysisOutcome> {
    (termination(), prop::collection::vec(finding(), 0..6), 0.0f64..2.0).prop_map(|(termination, mut findings, d)| {
        findings.sort();
        AnalysisOutcome {
            termination,
            findings,
            raw_artifacts: Vec::new(),
            duration_secs: d,
        }
    })
}

pub fn allowlist() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(prop::sample::select(RULES.to_vec()).prop_map(String::from), 0..3)
}

/// A pair that is sometimes identical, so the equivalent branch gets exercised.
pub fn pair() -> impl Strategy<Value = (AnalysisOutcome, AnalysisOutcome)> {
    prop_oneof![
        3 => (outcome(), outcome()),
        1 => outcome().prop_map(|o| (o.clone(), o)),
    ]
}

use annaforge::metamorph::analysis_equivalent;
use proptest::test_runner::TestCaseError;

pub fn reflexive(o: &AnalysisOutcome, allow: &BTreeSet<String>) -> Result<(), TestCaseError> {
    let v = analysis_equivalent(o, o, &BTreeSet::new());
    prop_assert!(v.equivalent);
    prop_assert!(v.only_in_left.is_empty() && v.only_in_right.is_empty() && v.allowlisted.is_empty());
    prop_assert!(analysis_equivalent(o, o, allow).equivalent);
    Ok(())
}

pub fn symmetric(l: &AnalysisOutcome, r: &AnalysisOutcome, allow: &BTreeSet<String>) -> Result<(), TestCaseError> {
    let a = analysis_equivalent(l, r, allow);
    let b = analysis_equivalent(r, l, allow);
    prop_assert_eq!(a.equivalent, b.equivalent);
    prop_assert_eq!(a.termination_match, b.termination_match);
    prop_assert_eq!(&a.only_in_left, &b.only_in_right);
    prop_assert_eq!(&a.only_in_right, &b.only_in_left);
    prop_assert_eq!(&a.allowlisted, &b.allowlisted);
    prop_assert_eq!(
        a.equivalent,
        a.termination_match && a.only_in_left.is_empty() && a.only_in_right.is_empty()
    );
    Ok(())
}

pub fn monotone(
    l: &AnalysisOutcome,
    r: &AnalysisOutcome,
    small: &BTreeSet<String>,
    extra: &BTreeSet<String>,
) -> Result<(), TestCaseError> {
    let big: BTreeSet<String> = small.union(extra).cloned().collect();
    let a = analysis_equivalent(l, r, small);
    let b = analysis_equivalent(l, r, &big);
    if a.equivalent {
        prop_assert!(b.equivalent, "enlarging the allowlist broke equivalence");
    }
    prop_assert!(b.only_in_left.len() <= a.only_in_left.len());
    prop_assert!(b.only_in_right.len() <= a.only_in_right.len());
    Ok(())
}
