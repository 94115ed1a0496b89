//! Brute-force injection-site oracle.
//!
//! Inserts a marker annotation before every token and at end of file,
//! re-parses, and classifies the marker by the node it attached to. Each
//! (kind, subkind, owner node) keeps the smallest anchor that reached it.

use std::collections::{BTreeMap, BTreeSet};

use annaforge::registry::ElementKind;
use annaforge::source::lexer;
use annaforge::source::parser::parse_compilation_unit;
use annaforge::source::sites::{declares_var, inside_anonymous_class, TypeUseKind};
use annaforge::source::syntax::{annotation_name, Node, NodeKind as K};

const MARKER: &str = "@__Marker ";

pub type OracleSite = (usize, ElementKind, Option<TypeUseKind>);

fn type_context(chain: &[&Node], ty_index: usize) -> Option<TypeUseKind> {
    let mut root = ty_index;
    if root >= 1 && chain[root - 1].kind == K::ArrayType && std::ptr::eq(&chain[root - 1].children[0], chain[root]) {
        root -= 1;
    }
    let ctx = chain.get(root.checked_sub(1)?)?;
    match ctx.kind {
        K::TypeArguments => Some(TypeUseKind::GenericArgument),
        K::Cast => Some(TypeUseKind::Cast),
        K::Throws => Some(TypeUseKind::Throws),
        K::MethodRef if std::ptr::eq(&ctx.children[0], chain[root]) => Some(TypeUseKind::MethodReferenceQualifier),
        _ => None,
    }
}

fn type_owner<'a>(chain: &[&'a Node], ty_index: usize) -> &'a Node {
    if ty_index >= 1 && chain[ty_index - 1].kind == K::ArrayType && std::ptr::eq(&chain[ty_index - 1].children[0], chain[ty_index]) {
        chain[ty_index - 1]
    } else {
        chain[ty_index]
    }
}

/// `chain` runs from the root down to the marker annotation itself.
fn classify<'a>(chain: &[&'a Node], src: &str, path: &str) -> Vec<(ElementKind, Option<TypeUseKind>, &'a Node)> {
    let n = chain.len();
    let parent = chain[n - 2];
    let mut out = Vec::new();
    match parent.kind {
        K::Modifiers => {
            let owner = chain[n - 3];
            let anc = &chain[..n - 3];
            let anon = inside_anonymous_class(anc);
            let kind = match owner.kind {
                k if k.is_type_decl() => {
                    if k == K::AnnotationTypeDecl {
                        out.push((ElementKind::AnnotationType, None, owner));
                    }
                    Some(ElementKind::Type)
                }
                K::FieldDecl | K::EnumConstant => Some(ElementKind::Field),
                K::MethodDecl | K::AnnotationElementDecl => Some(ElementKind::Method),
                K::ConstructorDecl | K::CompactConstructorDecl => Some(ElementKind::Constructor),
                K::FormalParameter | K::VarargParameter => {
                    let in_list = anc.last().is_some_and(|p| p.kind == K::FormalParameters);
                    (in_list && !declares_var(owner, src) && !anon).then_some(ElementKind::Parameter)
                }
                K::CatchParameter => (!anon).then_some(ElementKind::Parameter),
                K::RecordComponent => Some(ElementKind::RecordComponent),
                K::LocalVarDecl | K::EnhancedForStmt => {
                    (!declares_var(owner, src) && !anon).then_some(ElementKind::LocalVariable)
                }
                K::Resource => (owner.child(K::VariableDeclarator).is_some() && !declares_var(owner, src) && !anon)
                    .then_some(ElementKind::LocalVariable),
                K::PackageDecl => path.ends_with("package-info.java").then_some(ElementKind::Package),
                K::ModuleDecl => Some(ElementKind::Module),
                _ => None,
            };
            if let Some(k) = kind {
                out.push((k, None, owner));
            }
        }
        K::TypeSegment => {
            let class_type = chain[n - 3];
            if !std::ptr::eq(&class_type.children[0], parent) {
                out.push((ElementKind::TypeUse, Some(TypeUseKind::QualifiedNameSegment), parent));
            } else if let Some(sub) = type_context(chain, n - 3) {
                out.push((ElementKind::TypeUse, Some(sub), type_owner(chain, n - 3)));
            }
        }
        K::PrimitiveType => {
            if let Some(sub) = type_context(chain, n - 2) {
                out.push((ElementKind::TypeUse, Some(sub), type_owner(chain, n - 2)));
            }
        }
        K::Dim | K::DimExpr => out.push((ElementKind::TypeUse, Some(TypeUseKind::ArrayDimension), parent)),
        K::Ellipsis => out.push((ElementKind::TypeUse, Some(TypeUseKind::Vararg), parent)),
        K::Wildcard => out.push((ElementKind::TypeUse, Some(TypeUseKind::GenericArgument), parent)),
        K::TypeParameter => out.push((ElementKind::TypeParameter, None, parent)),
        _ => {}
    }
    out
}

/// Every site the oracle can discover in `text`, as `(anchor, kind, subkind)`.
pub fn oracle_sites(path: &str, text: &str) -> BTreeSet<OracleSite> {
    let toks = lexer::tokenize(text).expect("oracle input must lex");
    let mut positions: Vec<usize> = toks.iter().map(|t| t.start).collect();
    positions.dedup();
    let mut best: BTreeMap<(ElementKind, Option<TypeUseKind>, usize, usize, K), usize> = BTreeMap::new();
    for p in positions {
        let marked = format!("{}{}{}", &text[..p], MARKER, &text[p..]);
        let Ok(tree) = parse_compilation_unit(&marked) else {
            continue;
        };
        let mut found = Vec::new();
        tree.walk_with_ancestors(&mut |node, anc| {
            if node.kind == K::Annotation && annotation_name(node, &marked) == "__Marker" {
                let mut chain: Vec<&Node> = anc.to_vec();
                chain.push(node);
                for (kind, sub, owner) in classify(&chain, &marked, path) {
                    assert!(owner.start <= p, "owner must contain the marker");
                    let key = (kind, sub, owner.start, owner.end - MARKER.len(), owner.kind);
                    found.push(key);
                }
            }
        });
        for key in found {
            let e = best.entry(key).or_insert(p);
            *e = (*e).min(p);
        }
    }
    best.into_iter().map(|((k, s, ..), p)| (p, k, s)).collect()
}

pub fn format_sites(sites: &BTreeSet<OracleSite>) -> String {
    let mut out = String::new();
    for (anchor, kind, sub) in sites {
        out.push_str(&format!("{anchor}\t{kind}\t{}\n", sub.map_or("-", |s| s.name())));
    }
    out
}

pub fn parse_sites(text: &str) -> BTreeSet<OracleSite> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let sub = if f[2] == "-" { None } else { Some(f[2].parse().unwrap()) };
            (f[0].parse().unwrap(), f[1].parse().unwrap(), sub)
        })
        .collect()
}
