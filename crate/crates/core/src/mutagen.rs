//! Annotation payload generation and injection.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::proc;
use crate::registry::{self, AnnotationSpec, ElementKind, Registry, RegistryError, Retention};
use crate::source::sites::InjectionSite;
use crate::source::{parse_unit, render, Edit, ProgramSet, RenderError};

pub const DUMMY_FQ_NAME: &str = "annaforge.MockAnnotation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PayloadKind {
    SourceLevel,
    Dummy,
    EquivMember,
}

impl PayloadKind {
    pub fn name(self) -> &'static str {
        match self {
            PayloadKind::SourceLevel => "SOURCE_LEVEL",
            PayloadKind::Dummy => "DUMMY",
            PayloadKind::EquivMember => "EQUIV_MEMBER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportFile {
    pub path: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    pub kind: PayloadKind,
    pub spec: AnnotationSpec,
    pub tuple_id: Option<String>,
    pub insertion_text: String,
    pub support_files: Vec<SupportFile>,
}

impl Payload {
    fn from_spec(kind: PayloadKind, spec: &AnnotationSpec, tuple_id: Option<&str>) -> Payload {
        let support_files = spec
            .definition_source
            .iter()
            .map(|text| SupportFile {
                path: format!("{}.java", spec.fq_name.replace('.', "/")),
                text: text.clone(),
            })
            .collect();
        Payload {
            kind,
            spec: spec.clone(),
            tuple_id: tuple_id.map(String::from),
            insertion_text: format!("@{}", spec.fq_name),
            support_files,
        }
    }

    /// Stable textual identity, e.g. `EQUIV_MEMBER:inject:javax.inject.Inject`.
    pub fn id(&self) -> String {
        match &self.tuple_id {
            Some(t) => format!("{}:{}:{}", self.kind.name(), t, self.spec.fq_name),
            None => format!("{}:{}", self.kind.name(), self.spec.fq_name),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MutagenError {
    #[error("site {site} has kind {kind}, which {payload} does not target")]
    SiteKindNotTargeted {
        site: String,
        kind: ElementKind,
        payload: String,
    },
    #[error("site refers to unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("support file `{0}` collides with a program unit")]
    SupportCollision(String),
    #[error("{0} cannot be injected without arguments")]
    RequiresArguments(String),
    #[error("{0} is not a source-retention annotation")]
    NotSourceLevel(String),
    #[error("unknown annotation `{0}`")]
    UnknownAnnotation(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("compile mode requires a compile hook")]
    MissingCompileHook,
    #[error("compile hook: {0}")]
    Hook(#[from] proc::ProcError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn source_eligible(a: &AnnotationSpec) -> bool {
    a.retention == Retention::Source && a.all_defaulted()
}

/// Source-retention annotations usable without arguments, in fq-name order.
pub fn gen_source_level(reg: &Registry, limit: usize) -> Vec<Payload> {
    let mut eligible: Vec<&AnnotationSpec> = reg.annotations.iter().filter(|a| source_eligible(a)).collect();
    eligible.sort_by(|a, b| a.fq_name.cmp(&b.fq_name));
    eligible
        .into_iter()
        .take(limit)
        .map(|a| Payload::from_spec(PayloadKind::SourceLevel, a, None))
        .collect()
}

/// Source-level payloads for an explicit list of names.
pub fn gen_source_named(reg: &Registry, names: &[String]) -> Result<Vec<Payload>, MutagenError> {
    names
        .iter()
        .map(|n| {
            let a = reg.get(n).ok_or_else(|| MutagenError::UnknownAnnotation(n.clone()))?;
            if a.retention != Retention::Source {
                return Err(MutagenError::NotSourceLevel(n.clone()));
            }
            if !a.all_defaulted() {
                return Err(MutagenError::RequiresArguments(n.clone()));
            }
            Ok(Payload::from_spec(PayloadKind::SourceLevel, a, None))
        })
        .collect()
}

/// The semantics-free dummy annotation with its definition as a support file.
pub fn gen_dummy() -> Payload {
    let reg = Registry::curated();
    let spec = reg.get(DUMMY_FQ_NAME).expect("bundled registry ships the dummy annotation");
    Payload::from_spec(PayloadKind::Dummy, spec, None)
}

/// One payload group per selected tuple.
pub fn gen_equiv(reg: &Registry, selection: Option<&[String]>) -> Result<Vec<(String, Vec<Payload>)>, MutagenError> {
    let mut out = Vec::new();
    for t in registry::equivalence_tuples(reg, selection)? {
        let mut group = Vec::new();
        for spec in reg.tuple_members(t) {
            if !spec.all_defaulted() {
                return Err(MutagenError::RequiresArguments(spec.fq_name.clone()));
            }
            group.push(Payload::from_spec(PayloadKind::EquivMember, spec, Some(&t.name)));
        }
        out.push((t.name.clone(), group));
    }
    Ok(out)
}

/// Targets shared by every payload of a group.
pub fn shared_targets(group: &[Payload]) -> BTreeSet<ElementKind> {
    let mut iter = group.iter();
    let Some(first) = iter.next() else {
        return BTreeSet::new();
    };
    iter.fold(first.spec.targets.clone(), |acc, p| acc.intersection(&p.spec.targets).copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mutant {
    pub mutant_id: String,
    pub seed_id: String,
    pub site: InjectionSite,
    pub payload_id: String,
    pub payload_kind: PayloadKind,
    pub tuple_id: Option<String>,
    pub annotation: String,
    pub insertion: Edit,
    pub support_files: Vec<String>,
    /// Scratch location relative to the campaign work directory.
    pub materialized_dir: String,
    pub valid: bool,
    pub parse_valid: bool,
    pub compile_valid: Option<bool>,
    pub invalidity_reason: Option<String>,
    #[serde(skip)]
    pub materialized: Option<ProgramSet>,
}

pub fn mutant_id(seed_id: &str, payload: &Payload, site: &InjectionSite) -> String {
    let mut h = Sha256::new();
    for part in [
        seed_id,
        &payload.id(),
        &site.path,
        &site.anchor.to_string(),
        site.kind.name(),
        site.subkind_name(),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..8])
}

pub fn scratch_dir(mutant_id: &str) -> String {
    format!("mutants/{mutant_id}/src")
}

/// One mutant per site. Mutants start out parse-checked only.
pub fn inject(baseline: &ProgramSet, payload: &Payload, sites: &[InjectionSite]) -> Result<Vec<Mutant>, MutagenError> {
    for s in sites {
        if !payload.spec.targets.contains(&s.kind) {
            return Err(MutagenError::SiteKindNotTargeted {
                site: s.dump_line(),
                kind: s.kind,
                payload: payload.id(),
            });
        }
    }
    for f in &payload.support_files {
        if baseline.unit(&f.path).is_some() {
            return Err(MutagenError::SupportCollision(f.path.clone()));
        }
    }
    let mut out = Vec::with_capacity(sites.len());
    for site in sites {
        let unit = baseline
            .unit(&site.path)
            .ok_or_else(|| MutagenError::UnknownUnit(site.path.clone()))?;
        let edit = Edit::insert(site.anchor, format!("{} ", payload.insertion_text));
        let text = render(&unit.text, std::slice::from_ref(&edit))?;
        let mut materialized = baseline.clone();
        materialized.put_unit(parse_unit(&unit.seed_id, &unit.path, &text));
        for f in &payload.support_files {
            materialized.put_unit(parse_unit(&baseline.id, &f.path, &f.text));
        }
        let id = mutant_id(&baseline.id, payload, site);
        let mut m = Mutant {
            mutant_id: id.clone(),
            seed_id: baseline.id.clone(),
            site: site.clone(),
            payload_id: payload.id(),
            payload_kind: payload.kind,
            tuple_id: payload.tuple_id.clone(),
            annotation: payload.spec.fq_name.clone(),
            insertion: edit,
            support_files: payload.support_files.iter().map(|f| f.path.clone()).collect(),
            materialized_dir: scratch_dir(&id),
            valid: false,
            parse_valid: false,
            compile_valid: None,
            invalidity_reason: None,
            materialized: Some(materialized),
        };
        let v = parse_validity(&m);
        m.parse_valid = v.valid;
        m.valid = v.valid;
        m.invalidity_reason = v.reason;
        out.push(m);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityMode {
    ParseOnly,
    Compile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileHook {
    pub template: String,
    pub classpath: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validity {
    pub valid: bool,
    pub reason: Option<String>,
}

/// Re-parses the edited unit and every support file.
pub fn parse_validity(m: &Mutant) -> Validity {
    let Some(ps) = &m.materialized else {
        return Validity {
            valid: false,
            reason: Some("mutant not materialized".into()),
        };
    };
    let mut paths = vec![m.site.path.as_str()];
    paths.extend(m.support_files.iter().map(String::as_str));
    for p in paths {
        match ps.unit(p) {
            Some(u) if u.parse_ok() => {}
            Some(u) => {
                let msg = u.diagnostic.as_ref().map(|d| d.message.clone()).unwrap_or_default();
                return Validity {
                    valid: false,
                    reason: Some(format!("parse error: {msg}")),
                };
            }
            None => {
                return Validity {
                    valid: false,
                    reason: Some(format!("missing unit {p}")),
                }
            }
        }
    }
    Validity {
        valid: true,
        reason: None,
    }
}

/// Short reason from compiler output: text after `error: ` up to the next `: `.
pub fn extract_reason(output: &str) -> Option<String> {
    output.lines().find_map(|l| {
        let i = l.find("error: ")?;
        let rest = &l[i + "error: ".len()..];
        Some(rest.split(": ").next().unwrap_or(rest).trim().to_string())
    })
}

/// Writes the mutant's program set to `<work_dir>/<materialized_dir>`.
pub fn materialize(m: &mut Mutant, work_dir: &Path) -> Result<PathBuf, MutagenError> {
    let dir = work_dir.join(&m.materialized_dir);
    if dir.exists() {
        std::fs::remove_dir_all(&dir)?;
    }
    if let Some(ps) = m.materialized.as_mut() {
        ps.materialize(&dir)?;
    }
    Ok(dir)
}

/// Runs the compile hook on an already materialized mutant.
pub fn compile_validity(
    src_dir: &Path,
    hook: &CompileHook,
    scratch: &Path,
    timeout: Duration,
) -> Result<Validity, MutagenError> {
    let out_dir = scratch.join("classes");
    std::fs::create_dir_all(&out_dir)?;
    let mut vars = BTreeMap::new();
    vars.insert("src_dir", src_dir.display().to_string());
    vars.insert("out_dir", out_dir.display().to_string());
    vars.insert("classpath", hook.classpath.clone());
    vars.insert("bin_dir", proc::bin_dir());
    let argv = proc::expand(&hook.template, &vars)?;
    let stdout = scratch.join("compile.stdout");
    let stderr = scratch.join("compile.stderr");
    let r = proc::run(&argv, scratch, &[], Some(timeout), &stdout, &stderr)?;
    if r.status == proc::ExitStatus::Code(0) {
        return Ok(Validity {
            valid: true,
            reason: None,
        });
    }
    let text = format!(
        "{}\n{}",
        std::fs::read_to_string(&stdout).unwrap_or_default(),
        std::fs::read_to_string(&stderr).unwrap_or_default()
    );
    let reason = match r.status {
        proc::ExitStatus::TimedOut => "compile timeout".to_string(),
        _ => extract_reason(&text).unwrap_or_else(|| "compilation failed".to_string()),
    };
    Ok(Validity {
        valid: false,
        reason: Some(reason),
    })
}

/// Applies the filter in `mode`, updating the mutant's validity fields.
pub fn validity_filter(
    m: &mut Mutant,
    mode: ValidityMode,
    hook: Option<&CompileHook>,
    work_dir: &Path,
    timeout: Duration,
) -> Result<Validity, MutagenError> {
    let parsed = parse_validity(m);
    m.parse_valid = parsed.valid;
    let result = match mode {
        ValidityMode::ParseOnly => parsed,
        ValidityMode::Compile => {
            let hook = hook.ok_or(MutagenError::MissingCompileHook)?;
            let src = materialize(m, work_dir)?;
            let scratch = src.parent().expect("scratch dir has a parent").to_path_buf();
            let compiled = compile_validity(&src, hook, &scratch, timeout)?;
            m.compile_valid = Some(compiled.valid);
            if parsed.valid {
                compiled
            } else {
                parsed
            }
        }
    };
    m.valid = result.valid;
    m.invalidity_reason = result.reason.clone();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::parse_registry;
    use crate::source::sites::{all_kinds, enumerate_sites};
    use crate::source::strip;

    fn program(text: &str) -> ProgramSet {
        let mut ps = ProgramSet::new("seed", Path::new("."));
        ps.put_unit(parse_unit("seed", "A.java", text));
        ps
    }

    #[test]
    fn source_level_requires_defaults() {
        let reg = parse_registry(
            "format registry version=1\n\
             annotation p.Req lib=g:a:1 targets=METHOD retention=SOURCE props=value:String:false\n",
        )
        .unwrap();
        assert!(gen_source_level(&reg, 10).is_empty());
        let curated = Registry::curated();
        let all = gen_source_level(&curated, 100);
        assert!(all.iter().any(|p| p.spec.fq_name == "lombok.Cleanup"));
        assert!(all.iter().all(|p| p.spec.retention == Retention::Source && p.spec.all_defaulted()));
        assert!(gen_source_level(&curated, 0).is_empty());
        assert!(matches!(
            gen_source_named(&curated, &["java.lang.SuppressWarnings".into()]),
            Err(MutagenError::RequiresArguments(_))
        ));
    }

    #[test]
    fn dummy_payload() {
        let d = gen_dummy();
        assert_eq!(d.spec.retention, Retention::Runtime);
        assert_eq!(d.spec.targets, all_kinds());
        assert_eq!(d.support_files.len(), 1);
        assert_eq!(d.support_files[0].path, "annaforge/MockAnnotation.java");
        assert!(parse_unit("x", &d.support_files[0].path, &d.support_files[0].text).parse_ok());
        assert_eq!(d.insertion_text, "@annaforge.MockAnnotation");
    }

    #[test]
    fn equivalence_groups() {
        let reg = Registry::curated();
        let groups = gen_equiv(&reg, Some(&["nullable".into()])).unwrap();
        let texts: Vec<&str> = groups[0].1.iter().map(|p| p.insertion_text.as_str()).collect();
        assert_eq!(texts, ["@android.support.annotation.Nullable", "@android.annotation.Nullable"]);
        let inject = gen_equiv(&reg, Some(&["inject".into()])).unwrap();
        let names: Vec<&str> = inject[0].1.iter().map(|p| p.spec.fq_name.as_str()).collect();
        assert_eq!(names, ["javax.inject.Inject", "com.google.inject.Inject"]);
        assert!(gen_equiv(&reg, Some(&[])).unwrap().is_empty());
        assert!(gen_equiv(&reg, Some(&["generated".into()])).is_err());
    }

    #[test]
    fn inject_checks_targets() {
        let ps = program("class A { int f; void m() {} }");
        let sites = enumerate_sites(ps.unit("A.java").unwrap(), &all_kinds());
        let reg = Registry::curated();
        let method_only = Payload::from_spec(PayloadKind::SourceLevel, reg.get("java.lang.Override").unwrap(), None);
        let field_site: Vec<_> = sites.iter().filter(|s| s.kind == ElementKind::Field).cloned().collect();
        assert!(matches!(
            inject(&ps, &method_only, &field_site),
            Err(MutagenError::SiteKindNotTargeted { .. })
        ));
    }

    #[test]
    fn single_site_round_trip() {
        let text = "class A { void m() {} }";
        let ps = program(text);
        let sites: Vec<_> = enumerate_sites(ps.unit("A.java").unwrap(), &[ElementKind::Method].into())
            .into_iter()
            .collect();
        let dummy = gen_dummy();
        let mutants = inject(&ps, &dummy, &sites).unwrap();
        assert_eq!(mutants.len(), 1);
        let m = &mutants[0];
        assert!(m.valid);
        let mat = m.materialized.as_ref().unwrap();
        let edited = &mat.unit("A.java").unwrap().text;
        assert_eq!(edited, "class A { @annaforge.MockAnnotation void m() {} }");
        assert_eq!(strip(edited, std::slice::from_ref(&m.insertion)).unwrap(), text);
        assert!(mat.unit("annaforge/MockAnnotation.java").is_some());
        assert_eq!(ps.units.len(), 1);
        let again = inject(&ps, &dummy, &sites).unwrap();
        assert_eq!(again[0].mutant_id, m.mutant_id);
    }

    #[test]
    fn reason_extraction() {
        assert_eq!(
            extract_reason("A.java:3: error: duplicate annotation: @X\n").as_deref(),
            Some("duplicate annotation")
        );
        assert_eq!(extract_reason("warning only").as_deref(), None);
    }

    #[test]
    fn compile_mode_needs_hook() {
        let ps = program("class A { void m() {} }");
        let sites = enumerate_sites(ps.unit("A.java").unwrap(), &[ElementKind::Method].into());
        let mut m = inject(&ps, &gen_dummy(), &sites).unwrap().remove(0);
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            validity_filter(&mut m, ValidityMode::Compile, None, dir.path(), Duration::from_secs(5)),
            Err(MutagenError::MissingCompileHook)
        ));
    }
}
