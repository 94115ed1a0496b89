//! Checks shared by the focused tests and the acceptance harness. Each
//! returns a description of the first mismatch instead of panicking.

use std::collections::BTreeSet;
use std::path::Path;

use annaforge::minijavac::check_program;
use annaforge::mutagen::{gen_source_level, inject};
use annaforge::processor::{process, ProcessorConfig};
use annaforge::registry::{load_registry, parse_registry, write_registry, Registry};
use annaforge::source::sites::{all_kinds, enumerate_sites};
use annaforge::source::{parse_unit, render, ProgramSet};
use regex::Regex;

use super::oracle::{format_sites, oracle_sites, parse_sites};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn oracle_matches_golden() -> Check {
    for (rel, text) in super::corpus_files() {
        let found = oracle_sites(&rel, &text);
        let golden = super::golden_path(&rel);
        if super::blessing() {
            std::fs::write(&golden, format_sites(&found)).map_err(|e| e.to_string())?;
        }
        let expected = parse_sites(&super::read(&golden));
        ensure(found == expected, || format!("{rel}: oracle drifted from golden file"))?;
    }
    Ok(())
}

pub fn sites_match_golden() -> Check {
    for (rel, text) in super::corpus_files() {
        let unit = parse_unit("corpus", &rel, &text);
        let sites: BTreeSet<_> = enumerate_sites(&unit, &all_kinds())
            .into_iter()
            .map(|s| (s.anchor, s.kind, s.subkind))
            .collect();
        let expected = parse_sites(&super::read(&super::golden_path(&rel)));
        let missing: Vec<_> = expected.difference(&sites).collect();
        let spurious: Vec<_> = sites.difference(&expected).collect();
        ensure(missing.is_empty() && spurious.is_empty(), || {
            format!("{rel}: missing {missing:?}, spurious {spurious:?}")
        })?;
    }
    Ok(())
}

pub fn registry_round_trips() -> Check {
    let path = super::crate_dir().join("data/registry.txt");
    let reg = load_registry(&path).map_err(|e| e.to_string())?;
    ensure(reg == Registry::curated(), || "bundled registry differs from the curated one".into())?;
    let text = write_registry(&reg);
    let back = parse_registry(&text).map_err(|e| e.to_string())?;
    ensure(back == reg, || "registry changed on a write/parse cycle".into())?;
    ensure(write_registry(&back) == text, || "registry text not stable".into())
}

pub fn materialization_round_trips() -> Check {
    let root = super::corpus_dir();
    let mut ps = ProgramSet::load("corpus", &root).map_err(|e| e.to_string())?;
    let original = ps.clone();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    ps.materialize(dir.path()).map_err(|e| e.to_string())?;
    let back = ProgramSet::load("corpus", dir.path()).map_err(|e| e.to_string())?;
    ensure(back == original, || "reloaded program set differs".into())?;
    for (rel, text) in super::corpus_files() {
        ensure(super::read(&dir.path().join(&rel)) == text, || format!("{rel}: bytes changed"))?;
    }
    Ok(())
}

pub fn zero_edit_render_is_identity() -> Check {
    for (rel, text) in super::corpus_files() {
        let out = render(&text, &[]).map_err(|e| e.to_string())?;
        ensure(out == text, || format!("{rel}: zero-edit render changed bytes"))?;
    }
    Ok(())
}

fn corpus() -> ProgramSet {
    ProgramSet::load("corpus", &super::corpus_dir()).unwrap()
}

fn run(ps: &ProgramSet) -> Result<ProgramSet, String> {
    let out = process(ps, &ProcessorConfig::default(), Path::new("/nonexistent")).map_err(|e| format!("{}: {e}", ps.id))?;
    ensure(out.all_parse(), || format!("{}: processed program does not parse", ps.id))?;
    Ok(out)
}

fn texts(ps: &ProgramSet) -> Vec<(String, String)> {
    ps.units.iter().map(|u| (u.path.clone(), u.text.clone())).collect()
}

/// Valid mutants for every source-level annotation the built-in rules cover.
pub fn covered_mutants() -> Vec<ProgramSet> {
    let reg = Registry::curated();
    let cfg = ProcessorConfig::default();
    let base = corpus();
    let mut out = Vec::new();
    for p in gen_source_level(&reg, usize::MAX) {
        if cfg.rule_for(&p.spec.fq_name).is_none() {
            continue;
        }
        let sites: Vec<_> = base.units.iter().flat_map(|u| enumerate_sites(u, &p.spec.targets)).collect();
        for m in inject(&base, &p, &sites).unwrap() {
            let ps = m.materialized.unwrap();
            if m.valid && check_program(&reg, &ps).is_empty() {
                out.push(ps);
            }
        }
    }
    out
}

pub fn annotation_free_identity() -> Check {
    let mut ps = ProgramSet::new("stripped", Path::new("."));
    for (rel, text) in super::corpus_files() {
        ps.put_unit(parse_unit("stripped", &rel, &super::strip_annotations(&rel, &text)));
    }
    ensure(texts(&run(&ps)?) == texts(&ps), || "processing changed an annotation-free program".into())
}

/// A covered annotation left behind, written fully qualified or resolvable by simple name.
fn leftover_patterns(cfg: &ProcessorConfig) -> Vec<(Regex, Regex)> {
    cfg.builtin_rules
        .iter()
        .map(|r| {
            let (pkg, simple) = r.annotation.rsplit_once('.').unwrap();
            let fq = Regex::new(&format!(r"@\s*{}\b", regex::escape(&r.annotation))).unwrap();
            let resolvable = if pkg == "java.lang" {
                format!(r"@\s*{}\b", regex::escape(simple))
            } else {
                format!(
                    r"(?s)import\s+{}\s*;.*@\s*{s}\b|import\s+{}\.\*\s*;.*@\s*{s}\b",
                    regex::escape(&r.annotation),
                    regex::escape(pkg),
                    s = regex::escape(simple)
                )
            };
            (fq, Regex::new(&resolvable).unwrap())
        })
        .collect()
}

pub fn processing_is_idempotent() -> Check {
    let leftovers = leftover_patterns(&ProcessorConfig::default());
    let mut programs = vec![corpus()];
    programs.extend(covered_mutants());
    ensure(programs.len() > 50, || format!("expected a sizeable fixture set, got {}", programs.len()))?;
    for ps in &programs {
        let once = run(ps)?;
        let twice = run(&once)?;
        ensure(texts(&twice) == texts(&once), || format!("{}: second pass changed the program", ps.id))?;
        for u in &once.units {
            for (fq, resolvable) in &leftovers {
                ensure(!fq.is_match(&u.text) && !resolvable.is_match(&u.text), || {
                    format!("{}: covered annotation left in\n{}", u.path, u.text)
                })?;
            }
            let before = ps.unit(&u.path).ok_or_else(|| format!("{}: unit appeared", u.path))?;
            ensure(u.text.lines().count() == before.text.lines().count(), || {
                format!("{} changed its line count", u.path)
            })?;
        }
    }
    Ok(())
}

/// Compares the canonical form of two work directories' ledgers.
pub fn ledgers_equal(a: &Path, b: &Path) -> Check {
    let load = |p: &Path| annaforge::campaign::canonical_ledgers(p).map_err(|e| format!("{}: {e}", p.display()));
    let (a, b) = (load(a)?, load(b)?);
    for (name, x, y) in [
        ("mutants", &a.mutants, &b.mutants),
        ("outcomes", &a.outcomes, &b.outcomes),
        ("violations", &a.violations, &b.violations),
        ("skips", &a.skips, &b.skips),
    ] {
        ensure(x.len() == y.len(), || format!("{name}: {} records vs {}", x.len(), y.len()))?;
        if let Some((l, r)) = x.iter().zip(y).find(|(l, r)| l != r) {
            return Err(format!("{name} differ:\n{l}\n{r}"));
        }
    }
    Ok(())
}
