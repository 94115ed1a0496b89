//! A miniature Java analyzer with switchable seeded faults.
//!
//! Rules: unused-field, unnecessary-constructor, private-ctors-not-final,
//! nullable-primitive, long-method, unclosed-resource. With every fault off the
//! rules treat annotations by their meaning and ignore everything else.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::adapters::RawFinding;
use crate::source::syntax::{annotation_name, simple_name, Node, NodeKind as K};
use crate::source::{line_of, CompilationUnit, ProgramSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    /// Ignores what structural (Lombok-style) annotations generate.
    pub incomplete_semantics: bool,
    /// Crashes on annotated array dimensions.
    pub array_dim_crash: bool,
    /// Recognizes only `javax.inject.Inject` among the Inject annotations.
    pub unrecognized_equivalent: bool,
}

impl FromStr for Faults {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut f = Faults::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "is" => f.incomplete_semantics = true,
                "iag" => f.array_dim_crash = true,
                "uea" => f.unrecognized_equivalent = true,
                "none" => {}
                o => return Err(format!("unknown fault `{o}` (expected is, iag, uea or none)")),
            }
        }
        Ok(f)
    }
}

pub const LONG_METHOD_LINES: usize = 25;

const INJECT: [&str; 4] = [
    "javax.inject.Inject",
    "com.google.inject.Inject",
    "jakarta.inject.Inject",
    "org.springframework.beans.factory.annotation.Autowired",
];

const RESOURCE_TYPES: [&str; 10] = [
    "InputStream",
    "OutputStream",
    "FileInputStream",
    "FileOutputStream",
    "Reader",
    "Writer",
    "FileReader",
    "FileWriter",
    "BufferedReader",
    "Socket",
];

/// Fully-qualified names an annotation may refer to, given the unit's imports.
fn candidates(name: &str, imports: &Imports) -> Vec<String> {
    if name.contains('.') {
        return vec![name.to_string()];
    }
    if let Some(fq) = imports.single.get(name) {
        return vec![fq.clone()];
    }
    imports.on_demand.iter().map(|p| format!("{p}.{name}")).collect()
}

#[derive(Default)]
struct Imports {
    single: BTreeMap<String, String>,
    on_demand: Vec<String>,
}

fn dotted(n: &Node, src: &str) -> String {
    n.walk()
        .filter(|c| c.kind == K::Identifier)
        .map(|c| c.text(src))
        .collect::<Vec<_>>()
        .join(".")
}

fn imports(tree: &Node, src: &str) -> Imports {
    let mut im = Imports::default();
    for i in tree.children_of(K::ImportDecl) {
        if i.child(K::Modifier).is_some() {
            continue;
        }
        let Some(n) = i.child(K::Name) else { continue };
        let fq = dotted(n, src);
        if i.text(src).contains('*') {
            im.on_demand.push(fq);
        } else {
            im.single.insert(simple_name(&fq).to_string(), fq);
        }
    }
    im
}

struct Unit<'a> {
    unit: &'a CompilationUnit,
    src: &'a str,
    imports: Imports,
    faults: Faults,
    abs_path: String,
    out: Vec<RawFinding>,
}

impl Unit<'_> {
    fn report(&mut self, rule: &str, at: usize, message: String) {
        self.out.push(RawFinding {
            rule_id: rule.to_string(),
            path: self.abs_path.clone(),
            line: Some(line_of(self.src, at) as u32),
            message,
        });
    }

    /// Whether `n` carries a Lombok-style annotation with one of `names`.
    fn has_lombok(&self, n: &Node, names: &[&str]) -> bool {
        n.annotations().any(|a| {
            let name = annotation_name(a, self.src);
            let simple = simple_name(&name);
            names.contains(&simple)
                && (!name.contains('.') || name.starts_with("lombok.") || name.starts_with("annaforge.toy."))
        })
    }

    fn structural(&self, n: &Node, names: &[&str]) -> bool {
        !self.faults.incomplete_semantics && self.has_lombok(n, names)
    }

    fn injected(&self, ctor: &Node) -> bool {
        ctor.annotations().any(|a| {
            let name = annotation_name(a, self.src);
            let cands = candidates(&name, &self.imports);
            if self.faults.unrecognized_equivalent {
                cands.iter().any(|c| c == "javax.inject.Inject")
            } else {
                cands.iter().any(|c| INJECT.contains(&c.as_str()))
            }
        })
    }

    fn run(&mut self, tree: &Node) {
        let mut types = Vec::new();
        let mut methods = Vec::new();
        let mut nullable = Vec::new();
        let mut locals = Vec::new();
        tree.walk_with_ancestors(&mut |n, anc| match n.kind {
            k if k.is_type_decl() => types.push(n),
            K::MethodDecl => methods.push(n),
            K::LocalVarDecl => {
                if anc.last().is_some_and(|p| p.kind == K::Block) {
                    locals.push((n, *anc.last().expect("checked")));
                }
                nullable.push(n);
            }
            K::FieldDecl | K::FormalParameter => nullable.push(n),
            _ => {}
        });
        if self.faults.array_dim_crash {
            let annotated_dim = tree
                .walk()
                .any(|n| matches!(n.kind, K::Dim | K::DimExpr) && n.child(K::Annotation).is_some());
            if annotated_dim {
                panic!("unexpected annotation node while resolving array type in {}", self.unit.path);
            }
        }
        for t in &types {
            self.unused_fields(tree, t);
            self.constructors(t);
        }
        for m in &methods {
            self.long_method(m);
            nullable.push(m);
        }
        nullable.sort_by_key(|n| n.start);
        for n in nullable {
            self.nullable_primitive(n);
        }
        for (decl, block) in locals {
            self.unclosed_resource(decl, block);
        }
        self.out.sort_by(|a, b| (a.line, &a.rule_id, &a.message).cmp(&(b.line, &b.rule_id, &b.message)));
    }

    fn unused_fields(&mut self, tree: &Node, ty: &Node) {
        if !matches!(ty.kind, K::ClassDecl | K::EnumDecl) {
            return;
        }
        let getter_on_type = self.structural(ty, &["Getter", "Data", "Value"]);
        let members: Vec<&Node> = ty
            .children
            .iter()
            .filter(|c| matches!(c.kind, K::ClassBody | K::EnumBody))
            .flat_map(|b| b.children.iter())
            .filter(|m| m.kind == K::FieldDecl)
            .collect();
        for f in members {
            if !f.has_modifier(self.src, "private") || getter_on_type || self.structural(f, &["Getter"]) {
                continue;
            }
            for d in f.children_of(K::VariableDeclarator) {
                let Some(id) = d.child(K::Identifier) else { continue };
                let name = id.text(self.src);
                let used = tree
                    .walk()
                    .any(|n| n.kind == K::Identifier && n.start != id.start && n.text(self.src) == name);
                if !used {
                    self.report("unused-field", f.start, format!("private field '{name}' is never used"));
                }
            }
        }
    }

    fn constructors(&mut self, ty: &Node) {
        if ty.kind != K::ClassDecl {
            return;
        }
        let Some(body) = ty.child(K::ClassBody) else { return };
        let ctors: Vec<&Node> = body.children_of(K::ConstructorDecl).collect();
        let name = ty.ident(self.src).unwrap_or("?").to_string();
        if let [only] = ctors.as_slice() {
            let no_params = only.child(K::FormalParameters).is_some_and(|p| p.children.is_empty());
            let empty = only.child(K::Block).is_some_and(|b| b.children.is_empty());
            if only.has_modifier(self.src, "public") && no_params && empty && !self.injected(only) {
                self.report(
                    "unnecessary-constructor",
                    only.start,
                    format!("constructor of '{name}' is unnecessary"),
                );
            }
        }
        let generated_public = self.structural(
            ty,
            &[
                "NoArgsConstructor",
                "GenerateNoArgsCtor",
                "AllArgsConstructor",
                "RequiredArgsConstructor",
                "Data",
            ],
        );
        let all_private = !ctors.is_empty() && ctors.iter().all(|c| c.has_modifier(self.src, "private"));
        if all_private && !generated_public && !ty.has_modifier(self.src, "final") {
            self.report(
                "private-ctors-not-final",
                ty.start,
                format!("class '{name}' has only private constructors and should be final"),
            );
        }
    }

    fn long_method(&mut self, m: &Node) {
        let Some(body) = m.child(K::Block) else { return };
        let lines = line_of(self.src, body.end.saturating_sub(1)) - line_of(self.src, m.start) + 1;
        if lines > LONG_METHOD_LINES {
            let name = m.ident(self.src).unwrap_or("?").to_string();
            self.report("long-method", m.start, format!("method '{name}' spans {lines} lines"));
        }
    }

    fn nullable_primitive(&mut self, n: &Node) {
        let flagged = n.annotations().any(|a| {
            let name = annotation_name(a, self.src);
            matches!(simple_name(&name), "Nullable" | "CheckForNull")
        });
        if !flagged {
            return;
        }
        let Some(ty) = n.children.iter().find(|c| c.kind.is_type()) else { return };
        if ty.kind == K::PrimitiveType {
            let what = n.ident(self.src).or_else(|| {
                n.child(K::VariableDeclarator).and_then(|d| d.ident(self.src))
            });
            self.report(
                "nullable-primitive",
                n.start,
                format!("'{}' of primitive type {} is marked nullable", what.unwrap_or("?"), ty.text(self.src)),
            );
        }
    }

    fn unclosed_resource(&mut self, decl: &Node, block: &Node) {
        let Some(ty) = decl.children.iter().find(|c| c.kind == K::ClassType) else { return };
        let tname = ty.children.last().and_then(|s| s.ident(self.src)).unwrap_or("");
        if !RESOURCE_TYPES.contains(&tname) {
            return;
        }
        if self.structural(decl, &["Cleanup"]) {
            return;
        }
        for d in decl.children_of(K::VariableDeclarator) {
            let Some(var) = d.ident(self.src) else { continue };
            let creates = d.child(K::ObjectCreation).is_some();
            let close = format!("{var}.close");
            let closed = block.walk().any(|n| {
                n.kind == K::MethodCall
                    && n.text(self.src).chars().filter(|c| !c.is_whitespace()).collect::<String>().starts_with(&close)
            });
            if creates && !closed {
                let msg = format!(
                    "resource '{var}' opened at {}:{} is never closed",
                    self.abs_path,
                    line_of(self.src, decl.start)
                );
                self.report("unclosed-resource", decl.start, msg);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ToyError {
    Parse { path: String, line: usize, message: String },
}

/// Analyzes `ps`. Paths in findings are `root/<unit path>`.
pub fn analyze(ps: &ProgramSet, root: &str, faults: Faults) -> Result<Vec<RawFinding>, ToyError> {
    let mut out = Vec::new();
    for u in &ps.units {
        let Some(tree) = &u.tree else {
            let d = u.diagnostic.as_ref();
            return Err(ToyError::Parse {
                path: u.path.clone(),
                line: d.map(|d| line_of(&u.text, d.offset)).unwrap_or(1),
                message: d.map(|d| d.message.clone()).unwrap_or_default(),
            });
        };
        let mut unit = Unit {
            unit: u,
            src: &u.text,
            imports: imports(tree, &u.text),
            faults,
            abs_path: format!("{root}/{}", u.path),
            out: Vec::new(),
        };
        unit.run(tree);
        out.extend(unit.out);
    }
    Ok(out)
}
