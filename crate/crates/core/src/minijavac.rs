//! A small annotation-focused compile checker.
//!
//! It does not compile anything. It rejects the annotation placements javac
//! (plus the Lombok processor) would reject, which is what mutant validity
//! needs. Everything else about the program is taken on trust.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::registry::{ElementKind, Registry};
use crate::source::syntax::{annotation_name, simple_name, Node, NodeKind as K};
use crate::source::{line_of, CompilationUnit, ProgramSet};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub path: String,
    pub line: usize,
    pub kind: String,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: error: {}: {}", self.path, self.line, self.kind, self.detail)
    }
}

#[derive(Debug, Clone)]
struct AnnoInfo {
    fq: String,
    targets: BTreeSet<ElementKind>,
    repeatable: bool,
    required: Vec<String>,
}

const META: [&str; 5] = ["Retention", "Target", "Documented", "Inherited", "Repeatable"];

fn meta_info(simple: &str) -> AnnoInfo {
    AnnoInfo {
        fq: format!("java.lang.annotation.{simple}"),
        targets: [ElementKind::AnnotationType].into(),
        repeatable: false,
        required: match simple {
            "Retention" | "Target" | "Repeatable" => vec!["value".into()],
            _ => vec![],
        },
    }
}

fn declaration_kinds() -> BTreeSet<ElementKind> {
    ElementKind::ALL.into_iter().filter(|k| *k != ElementKind::TypeUse).collect()
}

/// Identifier texts under `n`, in source order.
fn idents<'a>(n: &'a Node, src: &'a str) -> Vec<&'a str> {
    n.walk().filter(|c| c.kind == K::Identifier).map(|c| c.text(src)).collect()
}

fn dotted(n: &Node, src: &str) -> String {
    idents(n, src).join(".")
}

fn package_of(tree: &Node, src: &str) -> String {
    tree.child(K::PackageDecl)
        .and_then(|p| p.child(K::Name))
        .map(|n| dotted(n, src))
        .unwrap_or_default()
}

/// Element names supplied by an annotation's arguments.
fn supplied_elements(anno: &Node, src: &str) -> BTreeSet<String> {
    let Some(args) = anno.child(K::AnnotationArgs) else {
        return BTreeSet::new();
    };
    args.children
        .iter()
        .map(|c| match c.kind {
            K::ElementValuePair => c.ident(src).unwrap_or("value").to_string(),
            _ => "value".to_string(),
        })
        .collect()
}

fn in_source_annotation(decl: &Node, fq: String, src: &str) -> AnnoInfo {
    let mut targets = None;
    let mut repeatable = false;
    for a in decl.annotations() {
        match simple_name(&annotation_name(a, src)) {
            "Target" => {
                let set: BTreeSet<ElementKind> = a
                    .child(K::AnnotationArgs)
                    .into_iter()
                    .flat_map(|args| args.walk())
                    .filter(|n| matches!(n.kind, K::Name | K::FieldAccess))
                    .filter_map(|n| idents(n, src).last().and_then(|s| ElementKind::from_str(s).ok()))
                    .collect();
                targets = Some(set);
            }
            "Repeatable" => repeatable = true,
            _ => {}
        }
    }
    let required = decl
        .child(K::ClassBody)
        .into_iter()
        .flat_map(|b| b.children_of(K::AnnotationElementDecl))
        .filter(|e| {
            let after_name = e.children.iter().skip_while(|c| c.kind != K::Identifier).skip(1);
            after_name.filter(|c| c.kind != K::Dims).count() == 0
        })
        .filter_map(|e| e.ident(src).map(String::from))
        .collect();
    AnnoInfo {
        fq,
        targets: targets.unwrap_or_else(declaration_kinds),
        repeatable,
        required,
    }
}

#[derive(Default)]
struct ProgramFacts {
    annotations: BTreeMap<String, AnnoInfo>,
    /// (outer simple name, nested simple name) -> nested type is static.
    nested: BTreeMap<(String, String), bool>,
}

fn collect_facts(ps: &ProgramSet) -> ProgramFacts {
    let mut facts = ProgramFacts::default();
    for u in &ps.units {
        let Some(tree) = &u.tree else { continue };
        let src = u.text.as_str();
        let pkg = package_of(tree, src);
        tree.walk_with_ancestors(&mut |n, anc| {
            if !n.kind.is_type_decl() {
                return;
            }
            let Some(name) = n.ident(src) else { return };
            let outers: Vec<&Node> = anc.iter().copied().filter(|a| a.kind.is_type_decl()).collect();
            if n.kind == K::AnnotationTypeDecl {
                let mut parts: Vec<&str> = Vec::new();
                if !pkg.is_empty() {
                    parts.push(&pkg);
                }
                parts.extend(outers.iter().filter_map(|o| o.ident(src)));
                parts.push(name);
                let fq = parts.join(".");
                facts.annotations.insert(fq.clone(), in_source_annotation(n, fq, src));
            }
            let direct_parent_is_body = anc.last().is_some_and(|p| matches!(p.kind, K::ClassBody | K::EnumBody));
            if let (Some(outer), true) = (outers.last(), direct_parent_is_body) {
                let implicitly_static = n.kind != K::ClassDecl
                    || matches!(outer.kind, K::InterfaceDecl | K::AnnotationTypeDecl);
                let is_static = implicitly_static || n.has_modifier(src, "static");
                if let Some(o) = outer.ident(src) {
                    facts.nested.insert((o.to_string(), name.to_string()), is_static);
                }
            }
        });
    }
    facts
}

struct UnitScope {
    package: String,
    single: BTreeMap<String, String>,
    on_demand: Vec<String>,
    local: BTreeMap<String, String>,
}

impl UnitScope {
    fn new(tree: &Node, src: &str, facts: &ProgramFacts) -> UnitScope {
        let package = package_of(tree, src);
        let mut single = BTreeMap::new();
        let mut on_demand = Vec::new();
        for imp in tree.children_of(K::ImportDecl) {
            if imp.child(K::Modifier).is_some() {
                continue;
            }
            let Some(name) = imp.child(K::Name) else { continue };
            let fq = dotted(name, src);
            if imp.text(src).contains('*') {
                on_demand.push(fq);
            } else {
                single.insert(simple_name(&fq).to_string(), fq);
            }
        }
        let prefix = if package.is_empty() { String::new() } else { format!("{package}.") };
        let local = facts
            .annotations
            .keys()
            .filter(|fq| fq.starts_with(&prefix) && (!package.is_empty() || !fq.contains('.')))
            .map(|fq| (simple_name(fq).to_string(), fq.clone()))
            .collect();
        UnitScope {
            package,
            single,
            on_demand,
            local,
        }
    }
}

struct Resolver<'a> {
    reg: &'a Registry,
    facts: &'a ProgramFacts,
}

impl Resolver<'_> {
    fn known(&self, fq: &str) -> Option<AnnoInfo> {
        if let Some(i) = self.facts.annotations.get(fq) {
            return Some(i.clone());
        }
        if let Some(spec) = self.reg.get(fq) {
            return Some(AnnoInfo {
                fq: spec.fq_name.clone(),
                targets: spec.targets.clone(),
                repeatable: false,
                required: spec.properties.iter().filter(|p| !p.has_default).map(|p| p.name.clone()).collect(),
            });
        }
        let simple = fq.strip_prefix("java.lang.annotation.")?;
        META.contains(&simple).then(|| meta_info(simple))
    }

    /// Unresolvable names yield `None`: they are treated as opaque but legal.
    fn resolve(&self, scope: &UnitScope, name: &str) -> Option<AnnoInfo> {
        if name.contains('.') {
            if let Some(i) = self.known(name) {
                return Some(i);
            }
            if !scope.package.is_empty() {
                return self.known(&format!("{}.{name}", scope.package));
            }
            return None;
        }
        if let Some(fq) = scope.single.get(name) {
            return self.known(fq);
        }
        if let Some(fq) = scope.local.get(name) {
            return self.known(fq);
        }
        if let Some(i) = self.known(&format!("java.lang.{name}")) {
            return Some(i);
        }
        for pkg in &scope.on_demand {
            if let Some(i) = self.known(&format!("{pkg}.{name}")) {
                return Some(i);
            }
        }
        META.contains(&name).then(|| meta_info(name))
    }
}

/// Declaration kinds an annotation in `owner`'s modifiers may target.
fn declaration_context(owner: &Node) -> Option<Vec<ElementKind>> {
    use ElementKind as E;
    Some(match owner.kind {
        K::AnnotationTypeDecl => vec![E::AnnotationType, E::Type],
        k if k.is_type_decl() => vec![E::Type],
        K::FieldDecl | K::EnumConstant => vec![E::Field],
        K::MethodDecl | K::AnnotationElementDecl => vec![E::Method],
        K::ConstructorDecl | K::CompactConstructorDecl => vec![E::Constructor],
        K::FormalParameter | K::VarargParameter | K::CatchParameter => vec![E::Parameter],
        K::ReceiverParameter => vec![],
        K::LocalVarDecl | K::EnhancedForStmt | K::Resource => vec![E::LocalVariable],
        K::RecordComponent => vec![E::RecordComponent, E::Field, E::Method, E::Parameter],
        K::PackageDecl => vec![E::Package],
        K::ModuleDecl => vec![E::Module],
        _ => return None,
    })
}

fn starts_lower(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_lowercase())
}

struct Checker<'a> {
    resolver: Resolver<'a>,
    unit: &'a CompilationUnit,
    src: &'a str,
    scope: UnitScope,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, at: &Node, kind: &str, detail: String) {
        self.out.push(Diagnostic {
            path: self.unit.path.clone(),
            line: line_of(self.src, at.start),
            kind: kind.to_string(),
            detail,
        });
    }

    /// Annotating segment `idx` of `ty` would annotate a scoping construct.
    fn scoping_construct(&self, ty: &Node, idx: usize) -> bool {
        let segs: Vec<&Node> = ty.children_of(K::TypeSegment).collect();
        if idx + 1 >= segs.len() {
            return false;
        }
        let here = segs[idx].ident(self.src).unwrap_or("");
        let next = segs[idx + 1].ident(self.src).unwrap_or("");
        if starts_lower(here) {
            return true;
        }
        match self.resolver.facts.nested.get(&(here.to_string(), next.to_string())) {
            Some(is_static) => *is_static,
            // Library nested types are overwhelmingly static.
            None => !starts_lower(next),
        }
    }

    /// Whether a type-use annotation written before `ty` lands on an admissible type.
    fn admissible(&self, ty: &Node) -> bool {
        match ty.kind {
            K::PrimitiveType => true,
            K::ArrayType => ty.children.first().is_some_and(|e| self.admissible(e)),
            K::ClassType => {
                if crate::source::sites::declares_var_type(ty, self.src) {
                    return false;
                }
                !self.scoping_construct(ty, 0)
            }
            _ => false,
        }
    }

    fn declared_type(owner: &Node) -> Option<&Node> {
        owner.children.iter().find(|c| c.kind.is_type() || c.kind == K::CatchType)
    }

    fn type_use_fallback(&self, owner: &Node) -> bool {
        match owner.kind {
            k if k.is_type_decl() => true,
            K::ConstructorDecl | K::CompactConstructorDecl => true,
            K::MethodDecl | K::AnnotationElementDecl | K::FieldDecl | K::FormalParameter | K::VarargParameter
            | K::LocalVarDecl | K::EnhancedForStmt | K::Resource | K::RecordComponent | K::ReceiverParameter => {
                match Self::declared_type(owner) {
                    Some(t) if t.kind == K::VoidType => false,
                    Some(t) => self.admissible(t),
                    None => false,
                }
            }
            K::CatchParameter => Self::declared_type(owner)
                .map(|ct| ct.children.iter().all(|t| self.admissible(t)))
                .unwrap_or(false),
            _ => false,
        }
    }

    fn check_unit(&mut self, tree: &Node) {
        let mut found: Vec<(&Node, Vec<&Node>)> = Vec::new();
        tree.walk_with_ancestors(&mut |n, anc| {
            if n.kind == K::Annotation {
                found.push((n, anc.to_vec()));
            }
        });
        #[allow(clippy::type_complexity)]
        let mut groups: BTreeMap<(usize, usize), Vec<(String, bool, usize)>> = BTreeMap::new();
        for (anno, anc) in &found {
            let name = annotation_name(anno, self.src);
            let Some(info) = self.resolver.resolve(&self.scope, &name) else {
                continue;
            };
            let Some(parent) = anc.last().copied() else { continue };
            if matches!(parent.kind, K::AnnotationArgs | K::ElementValuePair | K::ElementValueArray) {
                continue;
            }
            groups
                .entry((parent.start, parent.end))
                .or_default()
                .push((info.fq.clone(), info.repeatable, anno.start));
            let missing: Vec<&String> = {
                let supplied = supplied_elements(anno, self.src);
                info.required.iter().filter(|r| !supplied.contains(*r)).collect()
            };
            if let Some(m) = missing.first() {
                self.report(anno, "missing element value", format!("@{name} requires element '{m}'"));
            }
            self.check_placement(anno, &name, &info, anc);
        }
        for entries in groups.values() {
            let mut seen = BTreeSet::new();
            for (fq, repeatable, start) in entries {
                if !seen.insert(fq.clone()) && !repeatable {
                    let at = Node::new(K::Annotation, *start, *start, vec![]);
                    self.report(&at, "duplicate annotation", format!("@{fq}"));
                }
            }
        }
    }

    fn check_placement(&mut self, anno: &Node, name: &str, info: &AnnoInfo, anc: &[&Node]) {
        let parent = anc[anc.len() - 1];
        let type_use = info.targets.contains(&ElementKind::TypeUse);
        match parent.kind {
            K::Modifiers => {
                let Some(owner) = anc.len().checked_sub(2).map(|i| anc[i]) else { return };
                let Some(kinds) = declaration_context(owner) else { return };
                let declared = kinds.iter().any(|k| info.targets.contains(k));
                if !declared && !(type_use && self.type_use_fallback(owner)) {
                    self.report(anno, "annotation not applicable", format!("@{name} on {:?}", owner.kind));
                    return;
                }
                if owner.kind == K::PackageDecl && !self.unit.path.ends_with("package-info.java") {
                    self.report(anno, "misplaced package annotation", format!("@{name} outside package-info.java"));
                    return;
                }
                self.check_semantics(anno, &info.fq, owner, anc);
            }
            K::TypeParameter => {
                if !info.targets.contains(&ElementKind::TypeParameter) && !type_use {
                    self.report(anno, "annotation not applicable", format!("@{name} on type parameter"));
                }
            }
            K::TypeSegment | K::PrimitiveType | K::Dim | K::DimExpr | K::Ellipsis | K::Wildcard => {
                if !type_use {
                    self.report(anno, "annotation not applicable", format!("@{name} in type context"));
                    return;
                }
                if parent.kind != K::TypeSegment {
                    return;
                }
                let Some(ty) = anc.len().checked_sub(2).map(|i| anc[i]) else { return };
                let idx = ty
                    .children_of(K::TypeSegment)
                    .position(|s| std::ptr::eq(s, parent))
                    .unwrap_or(0);
                if self.scoping_construct(ty, idx) {
                    self.report(anno, "scoping construct cannot be annotated", format!("@{name}"));
                    return;
                }
                let holder = anc.len().checked_sub(3).map(|i| anc[i]);
                if let Some(h) = holder {
                    let first = h.children.first().is_some_and(|c| std::ptr::eq(c, ty));
                    let single = ty.children.len() == 1;
                    if h.kind == K::MethodRef && first && single && starts_lower(parent.ident(self.src).unwrap_or("")) {
                        let what = parent.ident(self.src).unwrap_or("").to_string();
                        self.report(anno, "cannot find symbol", format!("class {what}"));
                    }
                }
            }
            _ => {}
        }
    }

    /// Processor-level and java.lang annotation rules.
    fn check_semantics(&mut self, anno: &Node, fq: &str, owner: &Node, anc: &[&Node]) {
        let src = self.src;
        let short = simple_name(fq).to_string();
        let class_only = |o: &Node| o.kind == K::ClassDecl;
        let err = match fq {
            "lombok.Cleanup" => cleanup_error(owner, anc, src),
            "lombok.NoArgsConstructor" | "annaforge.toy.GenerateNoArgsCtor" => no_args_error(owner, &short, src),
            "lombok.Data" | "lombok.Value" | "lombok.AllArgsConstructor" | "lombok.RequiredArgsConstructor" => {
                (!class_only(owner)).then(|| format!("@{short} is only supported on a class"))
            }
            "lombok.ToString" | "lombok.EqualsAndHashCode" => (!matches!(owner.kind, K::ClassDecl | K::EnumDecl))
                .then(|| format!("@{short} is only supported on a class or enum")),
            "lombok.Getter" | "lombok.Setter" => accessor_error(owner, anc, &short, src),
            "lombok.Builder" => (owner.kind.is_type_decl() && !matches!(owner.kind, K::ClassDecl | K::RecordDecl))
                .then(|| "@Builder is only supported on classes, records, constructors, and methods".to_string()),
            "lombok.SneakyThrows" => {
                (owner.child(K::Block).is_none()).then(|| "@SneakyThrows used on a method without a body".to_string())
            }
            "lombok.extern.slf4j.Slf4j" => {
                (!matches!(owner.kind, K::ClassDecl | K::EnumDecl)).then(|| "@Slf4j is legal only on classes and enums".to_string())
            }
            "java.lang.Override" => override_error(owner, anc, src),
            "java.lang.FunctionalInterface" => functional_error(owner, src),
            "java.lang.SafeVarargs" => safe_varargs_error(owner, anc, src),
            _ => None,
        };
        if let Some(detail) = err {
            let kind = if fq.starts_with("lombok.") || fq.starts_with("annaforge.toy.") {
                "annotation processing failed"
            } else {
                "invalid annotation use"
            };
            self.report(anno, kind, detail);
        }
    }
}

fn enclosing_type<'a>(anc: &[&'a Node]) -> Option<&'a Node> {
    anc.iter().rev().copied().find(|a| a.kind.is_type_decl())
}

/// True when the nearest enclosing body belongs to an anonymous class or enum constant.
fn in_anonymous_body(anc: &[&Node]) -> bool {
    for w in anc.windows(2).rev() {
        if w[1].kind == K::ClassBody {
            return matches!(w[0].kind, K::ObjectCreation | K::EnumConstant);
        }
    }
    false
}

const BOXED: [&str; 9] = ["String", "Object", "Integer", "Long", "Short", "Byte", "Character", "Boolean", "Double"];

fn cleanup_error(owner: &Node, anc: &[&Node], src: &str) -> Option<String> {
    let in_block = owner.kind == K::LocalVarDecl && anc.len() >= 3 && anc[anc.len() - 3].kind == K::Block;
    if !in_block {
        return Some("@Cleanup is legal only on local variable declarations".into());
    }
    let decls: Vec<&Node> = owner.children_of(K::VariableDeclarator).collect();
    if decls.len() != 1 || decls[0].children.len() < 2 {
        return Some("@Cleanup variable declarations need to be initialized".into());
    }
    let ty = owner.children.iter().find(|c| c.kind.is_type())?;
    let closeable = match ty.kind {
        K::ClassType => {
            let last = ty.children.last().and_then(|s| s.ident(src)).unwrap_or("");
            !BOXED.contains(&last) && last != "Float" && last != "var"
        }
        _ => false,
    };
    (!closeable).then(|| format!("@Cleanup: type {} has no close() method", ty.text(src)))
}

fn members(ty: &Node) -> impl Iterator<Item = &Node> {
    ty.children
        .iter()
        .filter(|c| matches!(c.kind, K::ClassBody | K::EnumBody))
        .flat_map(|b| b.children.iter())
}

fn constructors(ty: &Node) -> Vec<&Node> {
    members(ty).filter(|m| m.kind == K::ConstructorDecl).collect()
}

fn no_args_error(owner: &Node, short: &str, src: &str) -> Option<String> {
    if !matches!(owner.kind, K::ClassDecl | K::EnumDecl) {
        return Some(format!("@{short} is only supported on a class or an enum"));
    }
    let has_no_arg = constructors(owner)
        .iter()
        .any(|c| c.child(K::FormalParameters).is_some_and(|p| p.children.is_empty()));
    if has_no_arg {
        return Some("a no-args constructor already exists".into());
    }
    let uninit_final = members(owner)
        .filter(|m| m.kind == K::FieldDecl)
        .filter(|f| f.has_modifier(src, "final") && !f.has_modifier(src, "static"))
        .flat_map(|f| f.children_of(K::VariableDeclarator))
        .find(|d| d.children.iter().skip(1).all(|c| c.kind == K::Dims));
    uninit_final.map(|d| format!("variable {} might not have been initialized", d.ident(src).unwrap_or("?")))
}

fn accessor_error(owner: &Node, anc: &[&Node], short: &str, src: &str) -> Option<String> {
    match owner.kind {
        K::ClassDecl | K::EnumDecl => None,
        K::FieldDecl => {
            let enclosing = enclosing_type(anc)?;
            if !matches!(enclosing.kind, K::ClassDecl | K::EnumDecl) || in_anonymous_body(anc) {
                return Some(format!("@{short} is only supported on a class or a field"));
            }
            (short == "Setter" && owner.has_modifier(src, "final"))
                .then(|| "@Setter cannot be used on a final field".to_string())
        }
        _ => Some(format!("@{short} is only supported on a class or a field")),
    }
}

fn params(method: &Node) -> usize {
    method
        .child(K::FormalParameters)
        .map(|p| p.children.iter().filter(|c| c.kind != K::ReceiverParameter).count())
        .unwrap_or(0)
}

fn override_error(owner: &Node, anc: &[&Node], src: &str) -> Option<String> {
    if owner.kind != K::MethodDecl {
        return Some("@Override is only legal on methods".into());
    }
    if owner.has_modifier(src, "static") || owner.has_modifier(src, "private") {
        return Some("static or private method does not override".into());
    }
    let name = owner.ident(src).unwrap_or("");
    let object_method = matches!((name, params(owner)), ("toString" | "hashCode" | "clone" | "finalize", 0) | ("equals", 1));
    if object_method || in_anonymous_body(anc) {
        return None;
    }
    let ty = enclosing_type(anc)?;
    let has_super = ty.child(K::Superclass).is_some() || ty.child(K::SuperInterfaces).is_some();
    let record_accessor = ty.kind == K::RecordDecl && params(owner) == 0;
    (!has_super && !record_accessor).then(|| "method does not override or implement a method from a supertype".into())
}

fn functional_error(owner: &Node, src: &str) -> Option<String> {
    if owner.kind != K::InterfaceDecl {
        return Some("Unexpected @FunctionalInterface annotation: not a functional interface".into());
    }
    let abstract_methods = owner
        .child(K::ClassBody)
        .into_iter()
        .flat_map(|b| b.children_of(K::MethodDecl))
        .filter(|m| m.child(K::Block).is_none() && !m.has_modifier(src, "static"))
        .count();
    let extends = owner.child(K::SuperInterfaces).is_some();
    let ok = abstract_methods == 1 || (extends && abstract_methods == 0);
    (!ok).then(|| format!("Unexpected @FunctionalInterface annotation: {abstract_methods} abstract methods"))
}

fn safe_varargs_error(owner: &Node, anc: &[&Node], src: &str) -> Option<String> {
    let varargs = owner
        .child(K::FormalParameters)
        .is_some_and(|p| p.child(K::VarargParameter).is_some());
    if !varargs {
        return Some("Invalid SafeVarargs annotation: not a varargs method".into());
    }
    if owner.kind == K::ConstructorDecl {
        return None;
    }
    let in_interface = enclosing_type(anc).is_some_and(|t| t.kind == K::InterfaceDecl);
    let fixed = ["static", "final", "private"].iter().any(|m| owner.has_modifier(src, m));
    (!fixed || in_interface && !owner.has_modifier(src, "private") && !owner.has_modifier(src, "static"))
        .then(|| "Invalid SafeVarargs annotation: instance method is neither final nor private".into())
}

/// Checks every unit of `ps`. An empty result means "compiles".
pub fn check_program(reg: &Registry, ps: &ProgramSet) -> Vec<Diagnostic> {
    let facts = collect_facts(ps);
    let mut out = Vec::new();
    for unit in &ps.units {
        let Some(tree) = &unit.tree else {
            let d = unit.diagnostic.as_ref();
            out.push(Diagnostic {
                path: unit.path.clone(),
                line: d.map(|d| line_of(&unit.text, d.offset)).unwrap_or(1),
                kind: "parse error".into(),
                detail: d.map(|d| d.message.clone()).unwrap_or_default(),
            });
            continue;
        };
        let mut checker = Checker {
            resolver: Resolver { reg, facts: &facts },
            unit,
            src: &unit.text,
            scope: UnitScope::new(tree, &unit.text, &facts),
            out: Vec::new(),
        };
        checker.check_unit(tree);
        out.extend(checker.out);
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_unit;
    use std::path::Path;

    fn check(files: &[(&str, &str)]) -> Vec<String> {
        let mut ps = ProgramSet::new("t", Path::new("."));
        for (p, t) in files {
            ps.put_unit(parse_unit("t", p, t));
        }
        check_program(&Registry::curated(), &ps).iter().map(|d| d.kind.clone()).collect()
    }

    fn one(text: &str) -> Vec<String> {
        check(&[("A.java", text)])
    }

    #[test]
    fn clean_program() {
        assert!(one("import lombok.Cleanup; class A { void m() { @Cleanup java.io.InputStream in = open(); } }").is_empty());
        assert!(one("class A { @Deprecated int f; @SuppressWarnings(\"x\") void m() {} }").is_empty());
    }

    #[test]
    fn duplicate_annotation() {
        assert_eq!(one("class A { @Deprecated @java.lang.Deprecated int f; }"), ["duplicate annotation"]);
        let ok = "import java.lang.annotation.*; @Repeatable(Xs.class) @interface X {} @interface Xs { X[] value(); } \
                  class A { @X @X int f; }";
        assert!(one(ok).is_empty());
    }

    #[test]
    fn applicability() {
        assert_eq!(one("class A { @Override int f; }"), ["annotation not applicable"]);
        assert_eq!(one("class A { void m() { @Override int x = 1; } }"), ["annotation not applicable"]);
        let tu = "import java.lang.annotation.*; @Target(ElementType.TYPE_USE) @interface T {}";
        assert!(one(&format!("{tu} class A {{ java.util.List<@T String> f; @T int g; }}")).is_empty());
        assert_eq!(one(&format!("{tu} class A {{ @T void m() {{}} }}")), ["annotation not applicable"]);
        assert_eq!(one(&format!("{tu} class A {{ @T java.util.List f; }}")), ["annotation not applicable"]);
        assert_eq!(
            one(&format!("{tu} class A {{ java.@T util.List f; }}")),
            ["scoping construct cannot be annotated"]
        );
        assert!(one(&format!("{tu} class A {{ java.util.@T List f; }}")).is_empty());
        assert_eq!(one("class A { int @Deprecated [] f; }"), ["annotation not applicable"]);
        // no @Target: every declaration context, no type contexts
        assert!(one("@interface N {} @N class A { @N A() {} }").is_empty());
        assert_eq!(one("@interface N {} class A { java.util.List<@N String> f; }"), ["annotation not applicable"]);
    }

    #[test]
    fn required_elements() {
        assert_eq!(one("@SuppressWarnings class A {}"), ["missing element value"]);
        assert_eq!(one("@interface N { int v(); } @N class A {}"), ["missing element value"]);
        assert!(one("@interface N { int v(); } @N(v = 1) class A {}").is_empty());
    }

    #[test]
    fn method_reference_qualifier() {
        let src = "class A { void m(String s) { Runnable r = @annaforge.MockAnnotation s::length; } }";
        assert_eq!(check(&[("A.java", src), ("annaforge/MockAnnotation.java", &mock())]), ["cannot find symbol"]);
    }

    fn mock() -> String {
        Registry::curated().get("annaforge.MockAnnotation").unwrap().definition_source.clone().unwrap()
    }

    #[test]
    fn lombok_rules() {
        assert_eq!(one("class A { void m() { @lombok.Cleanup int x = 1; } }"), ["annotation processing failed"]);
        assert_eq!(one("class A { @lombok.NoArgsConstructor A() {} }"), ["annotation not applicable"]);
        assert_eq!(one("@lombok.NoArgsConstructor class A { A() {} }"), ["annotation processing failed"]);
        assert_eq!(one("@lombok.NoArgsConstructor class A { final int x; A(int x) { this.x = x; } }"), ["annotation processing failed"]);
        assert!(one("@lombok.NoArgsConstructor class A { final int x = 1; A(int y) {} }").is_empty());
        assert_eq!(one("@lombok.Getter interface A {}"), ["annotation processing failed"]);
        assert!(one("class A { @lombok.Getter int x; }").is_empty());
    }

    #[test]
    fn java_lang_rules() {
        assert_eq!(one("class A { @Override void m() {} }"), ["invalid annotation use"]);
        assert!(one("class A { @Override public String toString() { return \"\"; } }").is_empty());
        assert!(one("class A extends B { @Override void m() {} }").is_empty());
        assert_eq!(one("@FunctionalInterface interface F { void a(); void b(); }"), ["invalid annotation use"]);
        assert!(one("@FunctionalInterface interface F { void a(); default void b() {} }").is_empty());
        assert_eq!(one("class A { @SafeVarargs void m(String... s) {} }"), ["invalid annotation use"]);
        assert!(one("class A { @SafeVarargs static void m(String... s) {} }").is_empty());
    }

    #[test]
    fn parse_errors_are_reported() {
        assert_eq!(one("class A {"), ["parse error"]);
        assert_eq!(check(&[("p/A.java", "@Deprecated package p;")]), ["misplaced package annotation"]);
    }
}
