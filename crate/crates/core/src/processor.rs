//! Annotation processing: turns a program into its processed form.
//!
//! Built-in transforms never add or remove line breaks, so findings keep
//! their line numbers across processing.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::proc::{self, ExitStatus};
use crate::source::syntax::{annotation_name, simple_name, Node, NodeKind as K};
use crate::source::{parse_unit, render, CompilationUnit, Edit, ProgramSet, RenderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Drop the annotation; it has no code-level semantics.
    Erase,
    NoArgsCtor,
    Getter,
    Cleanup,
}

impl Transform {
    pub const ALL: [Transform; 4] = [Transform::Erase, Transform::NoArgsCtor, Transform::Getter, Transform::Cleanup];

    pub fn name(self) -> &'static str {
        match self {
            Transform::Erase => "erase",
            Transform::NoArgsCtor => "no-args-ctor",
            Transform::Getter => "getter",
            Transform::Cleanup => "cleanup",
        }
    }
}

impl std::str::FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Transform::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown transform `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessingRule {
    pub annotation: String,
    pub transform: Transform,
    pub description: String,
}

impl ProcessingRule {
    pub fn new(annotation: &str, transform: Transform, description: &str) -> Self {
        ProcessingRule {
            annotation: annotation.to_string(),
            transform,
            description: description.to_string(),
        }
    }
}

pub fn default_rules() -> Vec<ProcessingRule> {
    vec![
        ProcessingRule::new("annaforge.toy.GenerateNoArgsCtor", Transform::NoArgsCtor, "public no-argument constructor"),
        ProcessingRule::new("lombok.NoArgsConstructor", Transform::NoArgsCtor, "public no-argument constructor"),
        ProcessingRule::new("lombok.Getter", Transform::Getter, "getter per field"),
        ProcessingRule::new("lombok.Cleanup", Transform::Cleanup, "try/finally calling close()"),
        ProcessingRule::new("java.lang.Override", Transform::Erase, "compile-time check only"),
        ProcessingRule::new("java.lang.SuppressWarnings", Transform::Erase, "compile-time hint only"),
        ProcessingRule::new("android.annotation.Nullable", Transform::Erase, "documentation only"),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessorMode {
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessorConfig {
    pub mode: ProcessorMode,
    /// Command with `{src_dir}` and `{out_dir}`, e.g. a delombok-style tool.
    pub external_template: Option<String>,
    pub builtin_rules: Vec<ProcessingRule>,
    pub timeout: Duration,
}

impl Default for ProcessorConfig {
    fn default() -> Self {
        ProcessorConfig {
            mode: ProcessorMode::Builtin,
            external_template: None,
            builtin_rules: default_rules(),
            timeout: crate::adapters::DEFAULT_TIMEOUT,
        }
    }
}

impl ProcessorConfig {
    pub fn rule_for(&self, fq: &str) -> Option<&ProcessingRule> {
        self.builtin_rules.iter().find(|r| r.annotation == fq)
    }

    /// Checks the config against the source-level annotations a campaign will inject.
    pub fn validate(&self, source_level: &[String]) -> Result<(), ProcessError> {
        match self.mode {
            ProcessorMode::External => {
                let t = self
                    .external_template
                    .as_deref()
                    .ok_or_else(|| ProcessError::Config("external mode requires a template".into()))?;
                for p in ["{src_dir}", "{out_dir}"] {
                    if !t.contains(p) {
                        return Err(ProcessError::Config(format!("external template lacks {p}")));
                    }
                }
            }
            ProcessorMode::Builtin => {
                if self.builtin_rules.is_empty() {
                    return Err(ProcessError::Config("builtin mode needs at least one rule".into()));
                }
                if let Some(missing) = source_level.iter().find(|a| self.rule_for(a).is_none()) {
                    return Err(ProcessError::Config(format!("no builtin rule covers {missing}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProcessError {
    #[error("processor configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Precondition { path: String, message: String },
    #[error("{path}: processing produced unparseable code: {message}")]
    Broken { path: String, message: String },
    #[error("external processor: {0}")]
    External(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Imports and package of a unit, enough to resolve annotation names.
struct Scope {
    package: String,
    single: Vec<String>,
    on_demand: Vec<String>,
}

fn dotted(n: &Node, src: &str) -> String {
    n.walk()
        .filter(|c| c.kind == K::Identifier)
        .map(|c| c.text(src))
        .collect::<Vec<_>>()
        .join(".")
}

fn scope(tree: &Node, src: &str) -> Scope {
    let package = tree
        .child(K::PackageDecl)
        .and_then(|p| p.child(K::Name))
        .map(|n| dotted(n, src))
        .unwrap_or_default();
    let mut s = Scope {
        package,
        single: Vec::new(),
        on_demand: Vec::new(),
    };
    for i in tree.children_of(K::ImportDecl) {
        if i.child(K::Modifier).is_some() {
            continue;
        }
        let Some(n) = i.child(K::Name) else { continue };
        if i.text(src).contains('*') {
            s.on_demand.push(dotted(n, src));
        } else {
            s.single.push(dotted(n, src));
        }
    }
    s
}

fn resolves_to(name: &str, fq: &str, scope: &Scope) -> bool {
    if name == fq {
        return true;
    }
    if name.contains('.') || simple_name(fq) != name {
        return false;
    }
    let pkg = fq.rsplit_once('.').map(|(p, _)| p).unwrap_or("");
    if let Some(imported) = scope.single.iter().find(|i| simple_name(i) == name) {
        return imported == fq;
    }
    pkg == "java.lang" || pkg == scope.package || scope.on_demand.iter().any(|p| p == pkg)
}

/// End of the annotation plus the spaces and tabs after it.
fn removal(anno: &Node, src: &str) -> Edit {
    let rest = &src[anno.end..];
    let trailing = rest.len() - rest.trim_start_matches([' ', '\t']).len();
    let newlines = "\n".repeat(anno.text(src).matches('\n').count());
    Edit::replace(anno.start, anno.end + trailing, newlines)
}

/// Offset of the first byte after whitespace, commas and comments.
fn skip_trivia(src: &str, mut at: usize) -> usize {
    let b = src.as_bytes();
    loop {
        while at < b.len() && (b[at].is_ascii_whitespace() || b[at] == b',') {
            at += 1;
        }
        if src[at..].starts_with("//") {
            at += src[at..].find('\n').unwrap_or(src.len() - at);
        } else if src[at..].starts_with("/*") {
            at += src[at..].find("*/").map(|i| i + 2).unwrap_or(src.len() - at);
        } else {
            return at;
        }
    }
}

/// Where members may be inserted in a type body, and the text needed before them.
fn member_slot(owner: &Node, src: &str, at_end: bool) -> Option<(usize, &'static str)> {
    if let Some(body) = owner.child(K::ClassBody) {
        return Some(if at_end { (body.end - 1, "") } else { (body.start + 1, "") });
    }
    let body = owner.child(K::EnumBody)?;
    let after = body
        .children_of(K::EnumConstant)
        .last()
        .map(|c| c.end)
        .unwrap_or(body.start + 1);
    let at = skip_trivia(src, after);
    if src[at..].starts_with(';') {
        Some((at + 1, ""))
    } else {
        Some((after, ";"))
    }
}

fn annotation_value(anno: &Node, src: &str) -> Option<String> {
    let args = anno.child(K::AnnotationArgs)?;
    let v = args.children.iter().find(|c| match c.kind {
        K::ElementValuePair => c.ident(src) == Some("value"),
        _ => true,
    })?;
    let lit = if v.kind == K::ElementValuePair { v.children.last()? } else { v };
    (lit.kind == K::Literal).then(|| lit.text(src).trim_matches('"').to_string())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn precondition(unit: &CompilationUnit, msg: impl Into<String>) -> ProcessError {
    ProcessError::Precondition {
        path: unit.path.clone(),
        message: msg.into(),
    }
}

fn type_body_members(owner: &Node) -> impl Iterator<Item = &Node> {
    owner
        .children
        .iter()
        .filter(|c| matches!(c.kind, K::ClassBody | K::EnumBody))
        .flat_map(|b| b.children.iter())
}

fn getters(fields: &[&Node], owner: &Node, src: &str) -> String {
    let existing: Vec<&str> = type_body_members(owner)
        .filter(|m| m.kind == K::MethodDecl)
        .filter(|m| m.child(K::FormalParameters).is_some_and(|p| p.children.is_empty()))
        .filter_map(|m| m.ident(src))
        .collect();
    let mut out = String::new();
    for f in fields {
        let Some(ty) = f.children.iter().find(|c| c.kind.is_type()) else { continue };
        let is_static = f.has_modifier(src, "static");
        for d in f.children_of(K::VariableDeclarator) {
            let Some(name) = d.ident(src) else { continue };
            let dims = d.child(K::Dims).map(|ds| ds.children.len()).unwrap_or(0);
            let ty_text = format!("{}{}", one_line(ty.text(src)), "[]".repeat(dims));
            let prefix = if ty_text == "boolean" { "is" } else { "get" };
            let mut cap = name.chars();
            let method = match cap.next() {
                Some(c) => format!("{prefix}{}{}", c.to_uppercase(), cap.as_str()),
                None => continue,
            };
            if existing.contains(&method.as_str()) {
                continue;
            }
            let (stat, target) = if is_static {
                ("static ", name.to_string())
            } else {
                ("", format!("this.{name}"))
            };
            out.push_str(&format!(" public {stat}{ty_text} {method}() {{ return {target}; }}"));
        }
    }
    out
}

/// Edits that process one annotation occurrence.
fn transform_edits(rule: &ProcessingRule, unit: &CompilationUnit, anno: &Node, anc: &[&Node]) -> Result<Vec<Edit>, ProcessError> {
    let src = unit.text.as_str();
    let mut edits = vec![removal(anno, src)];
    if rule.transform == Transform::Erase {
        return Ok(edits);
    }
    let in_modifiers = anc.last().is_some_and(|p| p.kind == K::Modifiers);
    let owner = match (in_modifiers, anc.len().checked_sub(2)) {
        (true, Some(i)) => anc[i],
        _ => return Err(precondition(unit, format!("@{} is not on a declaration", rule.annotation))),
    };
    match rule.transform {
        Transform::Erase => {}
        Transform::NoArgsCtor => {
            let name = owner.ident(src).unwrap_or_default();
            let (access, at_end) = match owner.kind {
                K::ClassDecl => ("public", false),
                K::EnumDecl => ("private", false),
                _ => return Err(precondition(unit, format!("@{} needs a class or enum", rule.annotation))),
            };
            let (at, sep) = member_slot(owner, src, at_end).ok_or_else(|| precondition(unit, "type without body"))?;
            edits.push(Edit::insert(at, format!("{sep} {access} {name}() {{}}")));
        }
        Transform::Getter => {
            let (ty, fields): (&Node, Vec<&Node>) = match owner.kind {
                K::FieldDecl => {
                    // [.., type, body, field, modifiers]; anonymous bodies have no type decl.
                    let ty = anc
                        .len()
                        .checked_sub(4)
                        .map(|i| anc[i])
                        .filter(|t| matches!(t.kind, K::ClassDecl | K::EnumDecl))
                        .ok_or_else(|| precondition(unit, "@Getter field outside a class or enum"))?;
                    (ty, vec![owner])
                }
                K::ClassDecl | K::EnumDecl => {
                    let fields = type_body_members(owner)
                        .filter(|m| m.kind == K::FieldDecl && !m.has_modifier(src, "static"))
                        .collect();
                    (owner, fields)
                }
                _ => return Err(precondition(unit, "@Getter needs a class, enum or field")),
            };
            let text = getters(&fields, ty, src);
            if !text.is_empty() {
                let at_end = ty.kind == K::ClassDecl;
                let (at, sep) = member_slot(ty, src, at_end).ok_or_else(|| precondition(unit, "type without body"))?;
                edits.push(Edit::insert(at, format!("{sep}{text}")));
            }
        }
        Transform::Cleanup => {
            let block = anc
                .len()
                .checked_sub(3)
                .map(|i| anc[i])
                .filter(|b| b.kind == K::Block && owner.kind == K::LocalVarDecl)
                .ok_or_else(|| precondition(unit, "@Cleanup needs a local variable in a block"))?;
            let var = owner
                .child(K::VariableDeclarator)
                .and_then(|d| d.ident(src))
                .ok_or_else(|| precondition(unit, "@Cleanup without a variable"))?;
            let method = annotation_value(anno, src).unwrap_or_else(|| "close".to_string());
            edits.push(Edit::insert(owner.end, " try {"));
            edits.push(Edit::insert(block.end - 1, format!("}} finally {{ {var}.{method}(); }} ")));
        }
    }
    Ok(edits)
}

/// First annotation in `unit` covered by a rule, with its ancestors.
fn next_occurrence<'a>(
    cfg: &'a ProcessorConfig,
    tree: &'a Node,
    src: &str,
) -> Option<(&'a ProcessingRule, &'a Node, Vec<&'a Node>)> {
    let sc = scope(tree, src);
    let mut found = None;
    tree.walk_with_ancestors(&mut |n, anc| {
        if found.is_some() || n.kind != K::Annotation {
            return;
        }
        if anc.iter().any(|a| a.kind == K::AnnotationArgs) {
            return;
        }
        let name = annotation_name(n, src);
        if let Some(rule) = cfg.builtin_rules.iter().find(|r| resolves_to(&name, &r.annotation, &sc)) {
            found = Some((rule, n, anc.to_vec()));
        }
    });
    found
}

fn process_unit(cfg: &ProcessorConfig, unit: &CompilationUnit) -> Result<CompilationUnit, ProcessError> {
    let mut current = unit.clone();
    loop {
        let Some(tree) = &current.tree else {
            let message = current.diagnostic.as_ref().map(|d| d.message.clone()).unwrap_or_default();
            return Err(if current.text == unit.text {
                precondition(unit, format!("does not parse: {message}"))
            } else {
                ProcessError::Broken {
                    path: unit.path.clone(),
                    message,
                }
            });
        };
        let Some((rule, anno, anc)) = next_occurrence(cfg, tree, &current.text) else {
            return Ok(current);
        };
        let edits = transform_edits(rule, &current, anno, &anc)?;
        let text = render(&current.text, &edits)?;
        current = parse_unit(&unit.seed_id, &unit.path, &text);
    }
}

/// Produces the processed program. Units without covered annotations are untouched.
pub fn process(ps: &ProgramSet, cfg: &ProcessorConfig, scratch: &Path) -> Result<ProgramSet, ProcessError> {
    match cfg.mode {
        ProcessorMode::Builtin => {
            let mut out = ps.clone();
            for u in out.units.iter_mut() {
                *u = process_unit(cfg, u)?;
            }
            Ok(out)
        }
        ProcessorMode::External => process_external(ps, cfg, scratch),
    }
}

fn process_external(ps: &ProgramSet, cfg: &ProcessorConfig, scratch: &Path) -> Result<ProgramSet, ProcessError> {
    let template = cfg
        .external_template
        .as_deref()
        .ok_or_else(|| ProcessError::Config("external mode requires a template".into()))?;
    if scratch.exists() {
        std::fs::remove_dir_all(scratch)?;
    }
    let src_dir = scratch.join("in");
    let out_dir = scratch.join("out");
    std::fs::create_dir_all(&out_dir)?;
    let mut input = ps.clone();
    input.materialize(&src_dir)?;
    let mut vars = BTreeMap::new();
    vars.insert("src_dir", src_dir.display().to_string());
    vars.insert("out_dir", out_dir.display().to_string());
    vars.insert("bin_dir", proc::bin_dir());
    let argv = proc::expand(template, &vars).map_err(|e| ProcessError::Config(e.to_string()))?;
    let r = proc::run(
        &argv,
        scratch,
        &[],
        Some(cfg.timeout),
        &scratch.join("stdout.txt"),
        &scratch.join("stderr.txt"),
    )
    .map_err(|e| ProcessError::External(e.to_string()))?;
    if r.status != ExitStatus::Code(0) {
        let stderr = std::fs::read_to_string(scratch.join("stderr.txt")).unwrap_or_default();
        let last = stderr.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("");
        return Err(ProcessError::External(format!("{:?}: {last}", r.status)));
    }
    let mut out = ProgramSet::load(&ps.id, &out_dir)?;
    for u in out.units.iter_mut() {
        if let Some(orig) = ps.unit(&u.path) {
            u.seed_id = orig.seed_id.clone();
        }
    }
    if let Some(bad) = out.units.iter().find(|u| !u.parse_ok()) {
        return Err(ProcessError::Broken {
            path: bad.path.clone(),
            message: "external processor output does not parse".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> String {
        let u = parse_unit("t", "A.java", src);
        process_unit(&ProcessorConfig::default(), &u).unwrap().text
    }

    #[test]
    fn identity_without_annotations() {
        let src = "class A { @Deprecated void m() {} }\n";
        assert_eq!(run(src), src);
    }

    #[test]
    fn no_args_ctor() {
        assert_eq!(
            run("@annaforge.toy.GenerateNoArgsCtor class A { private A(int x){} }"),
            "class A { public A() {} private A(int x){} }"
        );
        assert_eq!(
            run("@lombok.NoArgsConstructor enum E { X, Y }"),
            "enum E { X, Y; private E() {} }"
        );
    }

    #[test]
    fn cleanup() {
        let src = "class A { void m() throws Exception {\n  @lombok.Cleanup java.io.InputStream in = open();\n  in.read();\n} }";
        assert_eq!(
            run(src),
            "class A { void m() throws Exception {\n  java.io.InputStream in = open(); try {\n  in.read();\n} finally { in.close(); } } }"
        );
    }

    #[test]
    fn getter() {
        let src = "import lombok.Getter;\nclass A {\n  @Getter private int x;\n  @Getter boolean on;\n}";
        assert_eq!(
            run(src),
            "import lombok.Getter;\nclass A {\n  private int x;\n  boolean on;\n public int getX() { return this.x; } public boolean isOn() { return this.on; }}"
        );
    }

    #[test]
    fn getter_in_anonymous_class_is_rejected() {
        let src = "class A { Object o = new Object() { @lombok.Getter int x; }; }";
        let u = parse_unit("t", "A.java", src);
        let e = process_unit(&ProcessorConfig::default(), &u).unwrap_err();
        assert!(matches!(e, ProcessError::Precondition { .. }), "{e}");
    }

    #[test]
    fn respects_imports() {
        let src = "import other.Getter;\nclass A { @Getter int x; }";
        assert_eq!(run(src), src);
    }

    #[test]
    fn multiline_annotation_keeps_lines() {
        let src = "class A {\n  @SuppressWarnings(\n    \"x\")\n  void m() {}\n}";
        let out = run(src);
        assert_eq!(out.lines().count(), src.lines().count());
        assert!(!out.contains('@'));
    }

    #[test]
    fn config_validation() {
        let cfg = ProcessorConfig::default();
        assert!(cfg.validate(&["lombok.Getter".into()]).is_ok());
        assert!(cfg.validate(&["lombok.Data".into()]).is_err());
        let ext = ProcessorConfig {
            mode: ProcessorMode::External,
            ..ProcessorConfig::default()
        };
        assert!(ext.validate(&[]).is_err());
    }
}
