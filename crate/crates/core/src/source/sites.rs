//! Injection-site enumeration.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::syntax::{Node, NodeKind as K};
use super::CompilationUnit;
use crate::registry::ElementKind;

/// Where a TYPE_USE annotation sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TypeUseKind {
    GenericArgument,
    ArrayDimension,
    Cast,
    Throws,
    MethodReferenceQualifier,
    QualifiedNameSegment,
    Vararg,
}

impl TypeUseKind {
    pub const ALL: [TypeUseKind; 7] = [
        TypeUseKind::GenericArgument,
        TypeUseKind::ArrayDimension,
        TypeUseKind::Cast,
        TypeUseKind::Throws,
        TypeUseKind::MethodReferenceQualifier,
        TypeUseKind::QualifiedNameSegment,
        TypeUseKind::Vararg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TypeUseKind::GenericArgument => "GENERIC_ARGUMENT",
            TypeUseKind::ArrayDimension => "ARRAY_DIMENSION",
            TypeUseKind::Cast => "CAST",
            TypeUseKind::Throws => "THROWS",
            TypeUseKind::MethodReferenceQualifier => "METHOD_REFERENCE_QUALIFIER",
            TypeUseKind::QualifiedNameSegment => "QUALIFIED_NAME_SEGMENT",
            TypeUseKind::Vararg => "VARARG",
        }
    }
}

impl fmt::Display for TypeUseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TypeUseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TypeUseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown type-use subkind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InjectionSite {
    pub seed_id: String,
    pub path: String,
    pub kind: ElementKind,
    pub subkind: Option<TypeUseKind>,
    pub anchor: usize,
    pub node_path: String,
}

impl InjectionSite {
    pub fn subkind_name(&self) -> &'static str {
        self.subkind.map_or("-", TypeUseKind::name)
    }

    /// One tab-separated dump line: `path anchor kind subkind node_path`.
    pub fn dump_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.path,
            self.anchor,
            self.kind,
            self.subkind_name(),
            self.node_path
        )
    }
}

/// Declared type of a declaration node, if it is the contextual `var`.
pub fn declares_var(decl: &Node, src: &str) -> bool {
    decl.children
        .iter()
        .find(|c| c.kind.is_type())
        .is_some_and(|ty| declares_var_type(ty, src))
}

/// True if `ty` is the contextual `var` type.
pub fn declares_var_type(ty: &Node, src: &str) -> bool {
    ty.kind == K::ClassType
        && ty.children.len() == 1
        && ty.children[0].children.len() == 1
        && ty.children[0].ident(src) == Some("var")
}

/// True if `ancestors` place a node inside an anonymous class body.
pub fn inside_anonymous_class(ancestors: &[&Node]) -> bool {
    ancestors
        .windows(2)
        .any(|w| w[0].kind == K::ObjectCreation && w[1].kind == K::ClassBody)
}

fn node_path(node: &Node, ancestors: &[&Node]) -> String {
    let mut parts = Vec::with_capacity(ancestors.len() + 1);
    let chain: Vec<&Node> = ancestors.iter().copied().chain(std::iter::once(node)).collect();
    parts.push(format!("{:?}", chain[0].kind));
    for w in chain.windows(2) {
        let (parent, child) = (w[0], w[1]);
        let idx = parent
            .children
            .iter()
            .filter(|c| c.kind == child.kind)
            .position(|c| std::ptr::eq(c, child))
            .unwrap_or(0);
        parts.push(format!("{:?}[{idx}]", child.kind));
    }
    parts.join("/")
}

fn is_package_info(path: &str) -> bool {
    path.rsplit('/').next() == Some("package-info.java")
}

/// All sites of the requested kinds, ordered by anchor then kind name.
pub fn enumerate_sites(unit: &CompilationUnit, kinds: &BTreeSet<ElementKind>) -> Vec<InjectionSite> {
    let Some(tree) = &unit.tree else {
        return Vec::new();
    };
    let src = unit.text.as_str();
    let mut raw: Vec<(ElementKind, Option<TypeUseKind>, usize, String)> = Vec::new();
    tree.walk_with_ancestors(&mut |n, anc| {
        let mut push = |kind: ElementKind, sub: Option<TypeUseKind>, anchor: usize, at: &Node| {
            if kinds.contains(&kind) {
                let mut path = node_path(n, anc);
                if !std::ptr::eq(at, n) {
                    path.push_str(&format!("/@{anchor}"));
                }
                raw.push((kind, sub, anchor, path));
            }
        };
        let anon = || inside_anonymous_class(anc);
        let parent = anc.last().map(|p| p.kind);
        match n.kind {
            k if k.is_type_decl() => {
                push(ElementKind::Type, None, n.start, n);
                if k == K::AnnotationTypeDecl {
                    push(ElementKind::AnnotationType, None, n.start, n);
                }
            }
            K::FieldDecl | K::EnumConstant => push(ElementKind::Field, None, n.start, n),
            K::MethodDecl | K::AnnotationElementDecl => push(ElementKind::Method, None, n.start, n),
            K::ConstructorDecl | K::CompactConstructorDecl => push(ElementKind::Constructor, None, n.start, n),
            K::FormalParameter | K::VarargParameter => {
                if parent == Some(K::FormalParameters) && !declares_var(n, src) && !anon() {
                    push(ElementKind::Parameter, None, n.start, n);
                }
            }
            K::CatchParameter => {
                if !anon() {
                    push(ElementKind::Parameter, None, n.start, n);
                }
            }
            K::RecordComponent => push(ElementKind::RecordComponent, None, n.start, n),
            K::LocalVarDecl => {
                if !declares_var(n, src) && !anon() {
                    push(ElementKind::LocalVariable, None, n.start, n);
                }
            }
            K::EnhancedForStmt => {
                if !declares_var(n, src) && !anon() {
                    push(ElementKind::LocalVariable, None, n.children[0].start, n);
                }
            }
            K::Resource => {
                if n.child(K::VariableDeclarator).is_some() && !declares_var(n, src) && !anon() {
                    push(ElementKind::LocalVariable, None, n.start, n);
                }
            }
            K::PackageDecl => {
                if is_package_info(&unit.path) {
                    push(ElementKind::Package, None, n.start, n);
                }
            }
            K::ModuleDecl => push(ElementKind::Module, None, n.start, n),
            K::TypeParameter => push(ElementKind::TypeParameter, None, n.start, n),
            K::TypeArguments => {
                for c in &n.children {
                    push(ElementKind::TypeUse, Some(TypeUseKind::GenericArgument), c.start, c);
                }
            }
            K::Cast => {
                for c in &n.children[..n.children.len() - 1] {
                    push(ElementKind::TypeUse, Some(TypeUseKind::Cast), c.start, c);
                }
            }
            K::Throws => {
                for c in &n.children {
                    push(ElementKind::TypeUse, Some(TypeUseKind::Throws), c.start, c);
                }
            }
            K::MethodRef => {
                let q = &n.children[0];
                if matches!(q.kind, K::ClassType | K::ArrayType | K::PrimitiveType) {
                    push(ElementKind::TypeUse, Some(TypeUseKind::MethodReferenceQualifier), q.start, q);
                }
            }
            K::ClassType => {
                for seg in &n.children[1..] {
                    push(ElementKind::TypeUse, Some(TypeUseKind::QualifiedNameSegment), seg.start, seg);
                }
            }
            K::Dim | K::DimExpr => push(ElementKind::TypeUse, Some(TypeUseKind::ArrayDimension), n.start, n),
            K::Ellipsis => push(ElementKind::TypeUse, Some(TypeUseKind::Vararg), n.start, n),
            _ => {}
        }
    });
    let mut sites: Vec<InjectionSite> = raw
        .into_iter()
        .map(|(kind, subkind, anchor, node_path)| InjectionSite {
            seed_id: unit.seed_id.clone(),
            path: unit.path.clone(),
            kind,
            subkind,
            anchor,
            node_path,
        })
        .collect();
    sites.sort_by(|a, b| {
        (a.anchor, a.kind.name(), a.subkind_name()).cmp(&(b.anchor, b.kind.name(), b.subkind_name()))
    });
    sites.dedup_by(|a, b| a.anchor == b.anchor && a.kind == b.kind && a.subkind == b.subkind);
    sites
}

pub fn all_kinds() -> BTreeSet<ElementKind> {
    ElementKind::ALL.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_unit;

    fn sites(src: &str, kinds: &[ElementKind]) -> Vec<InjectionSite> {
        let u = parse_unit("t", "A.java", src);
        assert!(u.parse_ok(), "{:?}", u.diagnostic);
        enumerate_sites(&u, &kinds.iter().copied().collect())
    }

    #[test]
    fn single_method() {
        let src = "class A { void m() {} }";
        let s = sites(src, &[ElementKind::Method]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].anchor, src.find("void").unwrap());
    }

    #[test]
    fn method_anchor_precedes_modifiers() {
        let src = "class A { @Deprecated public static void m() {} }";
        let s = sites(src, &[ElementKind::Method]);
        assert_eq!(s[0].anchor, src.find('@').unwrap());
    }

    #[test]
    fn annotated_dimensions() {
        let src = "class Main { public <T> T[][] check(T @Anno[] @Anno [] arr) { return null; } }";
        let s = sites(src, &[ElementKind::TypeUse]);
        let dims: Vec<usize> = s
            .iter()
            .filter(|s| s.subkind == Some(TypeUseKind::ArrayDimension))
            .map(|s| s.anchor)
            .collect();
        let first = src.find("@Anno[]").unwrap();
        let second = src.find("@Anno []").unwrap();
        assert!(dims.contains(&first) && dims.contains(&second));
        assert_eq!(dims.len(), 4);
    }

    #[test]
    fn type_use_subkinds() {
        let src = "class A { void f(String... xs) throws java.io.IOException { Object o = (Runnable) null; \
                   java.util.function.Supplier<java.util.List<?>> s = java.util.ArrayList::new; int[] a = new int[3]; } }";
        let s = sites(src, &[ElementKind::TypeUse]);
        let subs: BTreeSet<TypeUseKind> = s.iter().filter_map(|s| s.subkind).collect();
        assert_eq!(subs.len(), TypeUseKind::ALL.len());
    }

    #[test]
    fn exclusions() {
        let src = "class A { void f() { var x = 1; for (var y : ys) {} Object o = new Object() { void g(int p) { int q = 0; } }; \
                   java.util.function.Function<String, String> h = z -> z; } }";
        let s = sites(src, &[ElementKind::LocalVariable, ElementKind::Parameter]);
        // Only `o` and `h` themselves qualify.
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|s| s.kind == ElementKind::LocalVariable));
    }

    #[test]
    fn package_sites_only_in_package_info() {
        let u = parse_unit("t", "a/package-info.java", "package a;\n");
        assert_eq!(enumerate_sites(&u, &all_kinds()).len(), 1);
        let u = parse_unit("t", "a/A.java", "package a;\n");
        assert!(enumerate_sites(&u, &all_kinds()).is_empty());
    }

    #[test]
    fn annotation_type_has_two_kinds() {
        let s = sites("@interface T { int v() default 1; }", &[ElementKind::Type, ElementKind::AnnotationType, ElementKind::Method]);
        let kinds: Vec<ElementKind> = s.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, [ElementKind::AnnotationType, ElementKind::Type, ElementKind::Method]);
    }
}
