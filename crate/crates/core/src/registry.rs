//! Annotation metadata and equivalence tuples.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::textfmt::{self, FormatError, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ElementKind {
    Type,
    Field,
    Method,
    Parameter,
    Constructor,
    LocalVariable,
    AnnotationType,
    Package,
    TypeParameter,
    TypeUse,
    Module,
    RecordComponent,
}

impl ElementKind {
    pub const ALL: [ElementKind; 12] = [
        ElementKind::Type,
        ElementKind::Field,
        ElementKind::Method,
        ElementKind::Parameter,
        ElementKind::Constructor,
        ElementKind::LocalVariable,
        ElementKind::AnnotationType,
        ElementKind::Package,
        ElementKind::TypeParameter,
        ElementKind::TypeUse,
        ElementKind::Module,
        ElementKind::RecordComponent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Type => "TYPE",
            ElementKind::Field => "FIELD",
            ElementKind::Method => "METHOD",
            ElementKind::Parameter => "PARAMETER",
            ElementKind::Constructor => "CONSTRUCTOR",
            ElementKind::LocalVariable => "LOCAL_VARIABLE",
            ElementKind::AnnotationType => "ANNOTATION_TYPE",
            ElementKind::Package => "PACKAGE",
            ElementKind::TypeParameter => "TYPE_PARAMETER",
            ElementKind::TypeUse => "TYPE_USE",
            ElementKind::Module => "MODULE",
            ElementKind::RecordComponent => "RECORD_COMPONENT",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ElementKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown element kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Retention {
    Source,
    Class,
    Runtime,
}

impl Retention {
    pub fn name(self) -> &'static str {
        match self {
            Retention::Source => "SOURCE",
            Retention::Class => "CLASS",
            Retention::Runtime => "RUNTIME",
        }
    }
}

impl FromStr for Retention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "SOURCE" => Ok(Retention::Source),
            "CLASS" => Ok(Retention::Class),
            "RUNTIME" => Ok(Retention::Runtime),
            _ => Err(format!("unknown retention `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub name: String,
    pub kind: String,
    pub has_default: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSpec {
    pub fq_name: String,
    pub simple_name: String,
    pub library: String,
    pub targets: BTreeSet<ElementKind>,
    pub retention: Retention,
    pub properties: Vec<PropertySpec>,
    pub definition_source: Option<String>,
}

impl AnnotationSpec {
    /// True when `@Name` with no arguments is legal.
    pub fn all_defaulted(&self) -> bool {
        self.properties.iter().all(|p| p.has_default)
    }

    pub fn package(&self) -> &str {
        self.fq_name
            .rsplit_once('.')
            .map(|(p, _)| p)
            .unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceTuple {
    pub name: String,
    pub members: Vec<String>,
    pub rationale: String,
    pub verified: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("registry {0}")]
    Format(#[from] FormatError),
    #[error("unknown tuple `{0}`")]
    UnknownTuple(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    pub annotations: Vec<AnnotationSpec>,
    pub tuples: Vec<EquivalenceTuple>,
}

const CURATED: &str = include_str!("../data/registry.txt");

pub fn load_registry(path: &Path) -> Result<Registry, RegistryError> {
    let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_registry(&text)?)
}

pub fn parse_registry(text: &str) -> Result<Registry, FormatError> {
    let mut reg = Registry::default();
    let mut tuple_lines = Vec::new();
    for mut rec in textfmt::parse(text, "registry")? {
        match rec.keyword.as_str() {
            "annotation" => reg.annotations.push(parse_annotation(&mut rec)?),
            "tuple" => {
                let name = rec.single_positional()?;
                let members = rec.take_list("members").ok_or_else(|| rec.error("missing `members=`"))?;
                let verified = rec.take_bool("verified", false)?;
                let rationale = rec.take("rationale").unwrap_or_default();
                rec.finish()?;
                tuple_lines.push(rec.line);
                reg.tuples.push(EquivalenceTuple {
                    name,
                    members,
                    rationale,
                    verified,
                });
            }
            other => return Err(rec.error(format!("unknown record `{other}`"))),
        }
    }
    let mut seen = HashSet::new();
    for a in &reg.annotations {
        if !seen.insert(a.fq_name.as_str()) {
            return Err(textfmt::error(0, format!("duplicate annotation `{}`", a.fq_name)));
        }
    }
    let mut names = HashSet::new();
    for (t, line) in reg.tuples.iter().zip(tuple_lines) {
        if !names.insert(t.name.as_str()) {
            return Err(textfmt::error(line, format!("duplicate tuple `{}`", t.name)));
        }
        reg.validate_tuple(t).map_err(|m| textfmt::error(line, format!("tuple {}: {m}", t.name)))?;
    }
    Ok(reg)
}

fn parse_annotation(rec: &mut Record) -> Result<AnnotationSpec, FormatError> {
    let fq_name = rec.single_positional()?;
    if fq_name.is_empty() || fq_name.split('.').any(|s| s.is_empty()) {
        return Err(rec.error(format!("malformed name `{fq_name}`")));
    }
    let simple_name = fq_name.rsplit('.').next().unwrap_or_default().to_string();
    if let Some(sn) = rec.take("simple") {
        if sn != simple_name {
            return Err(rec.error(format!("simple name `{sn}` does not match `{fq_name}`")));
        }
    }
    let library = rec.require("lib")?;
    let targets_raw = rec.require("targets")?;
    let mut targets = BTreeSet::new();
    for t in textfmt::split_list(&targets_raw) {
        targets.insert(t.parse::<ElementKind>().map_err(|e| rec.error(e))?);
    }
    if targets.is_empty() {
        return Err(rec.error(format!("{fq_name} has no targets")));
    }
    let retention = rec
        .require("retention")?
        .parse::<Retention>()
        .map_err(|e| rec.error(e))?;
    let mut properties = Vec::new();
    for p in rec.take_list("props").unwrap_or_default() {
        let parts: Vec<&str> = p.split(':').collect();
        let [name, kind, default] = parts.as_slice() else {
            return Err(rec.error(format!("property `{p}` must be name:kind:true|false")));
        };
        let has_default = match *default {
            "true" => true,
            "false" => false,
            _ => return Err(rec.error(format!("property `{p}` default flag must be true or false"))),
        };
        properties.push(PropertySpec {
            name: name.to_string(),
            kind: kind.to_string(),
            has_default,
        });
    }
    let definition_source = rec.take("source");
    rec.finish()?;
    Ok(AnnotationSpec {
        fq_name,
        simple_name,
        library,
        targets,
        retention,
        properties,
        definition_source,
    })
}

pub fn write_registry(reg: &Registry) -> String {
    use textfmt::quote;
    let mut out = textfmt::header("registry");
    for a in &reg.annotations {
        let targets: Vec<&str> = a.targets.iter().map(|t| t.name()).collect();
        out.push_str(&format!(
            "annotation {} lib={} targets={} retention={}",
            quote(&a.fq_name),
            quote(&a.library),
            targets.join(","),
            a.retention.name()
        ));
        if !a.properties.is_empty() {
            let props: Vec<String> = a
                .properties
                .iter()
                .map(|p| format!("{}:{}:{}", p.name, p.kind, p.has_default))
                .collect();
            out.push_str(&format!(" props={}", quote(&props.join(","))));
        }
        if let Some(src) = &a.definition_source {
            out.push_str(&format!(" source={}", quote(src)));
        }
        out.push('\n');
    }
    for t in &reg.tuples {
        out.push_str(&format!(
            "tuple {} members={} verified={}",
            quote(&t.name),
            quote(&t.members.join(",")),
            t.verified
        ));
        if !t.rationale.is_empty() {
            out.push_str(&format!(" rationale={}", quote(&t.rationale)));
        }
        out.push('\n');
    }
    out
}

impl Registry {
    /// The registry bundled with the crate.
    pub fn curated() -> Registry {
        parse_registry(CURATED).expect("bundled registry is valid")
    }

    pub fn get(&self, fq_name: &str) -> Option<&AnnotationSpec> {
        self.annotations.iter().find(|a| a.fq_name == fq_name)
    }

    pub fn by_simple_name<'a>(&'a self, simple: &'a str) -> impl Iterator<Item = &'a AnnotationSpec> {
        self.annotations.iter().filter(move |a| a.simple_name == simple)
    }

    fn validate_tuple(&self, t: &EquivalenceTuple) -> Result<(), String> {
        if t.members.len() < 2 {
            return Err("needs at least two members".into());
        }
        let distinct: HashSet<&String> = t.members.iter().collect();
        if distinct.len() != t.members.len() {
            return Err("members must be distinct".into());
        }
        let mut specs = Vec::new();
        for m in &t.members {
            specs.push(self.get(m).ok_or_else(|| format!("unknown member `{m}`"))?);
        }
        let first = specs[0];
        for s in &specs[1..] {
            if s.simple_name != first.simple_name {
                return Err(format!(
                    "members `{}` and `{}` have different simple names",
                    first.fq_name, s.fq_name
                ));
            }
            if s.targets != first.targets {
                return Err(format!(
                    "members `{}` and `{}` have different target sets",
                    first.fq_name, s.fq_name
                ));
            }
        }
        Ok(())
    }

    /// Members of `t`, resolved.
    pub fn tuple_members(&self, t: &EquivalenceTuple) -> Vec<&AnnotationSpec> {
        t.members.iter().filter_map(|m| self.get(m)).collect()
    }
}

pub fn query_by_target(reg: &Registry, kind: ElementKind, retention: Option<Retention>) -> Vec<&AnnotationSpec> {
    let mut out: Vec<&AnnotationSpec> = reg
        .annotations
        .iter()
        .filter(|a| a.targets.contains(&kind) && retention.is_none_or(|r| a.retention == r))
        .collect();
    out.sort_by(|a, b| a.fq_name.cmp(&b.fq_name));
    out
}

/// Selected tuples, or all verified ones when `selection` is `None`.
pub fn equivalence_tuples<'r>(
    reg: &'r Registry,
    selection: Option<&[String]>,
) -> Result<Vec<&'r EquivalenceTuple>, RegistryError> {
    match selection {
        None => Ok(reg.tuples.iter().filter(|t| t.verified).collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                reg.tuples
                    .iter()
                    .find(|t| &t.name == n)
                    .ok_or_else(|| RegistryError::UnknownTuple(n.clone()))
            })
            .collect(),
    }
}
