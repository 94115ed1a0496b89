//! Concrete syntax tree produced by the parser.

/// Node kinds. Declarations, types and the handful of expression forms the
/// analyzers and transforms care about get their own kind; everything else
/// collapses into a coarse expression or statement kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    CompilationUnit,
    PackageDecl,
    ImportDecl,
    ModuleDecl,
    ModuleDirective,

    ClassDecl,
    InterfaceDecl,
    EnumDecl,
    RecordDecl,
    AnnotationTypeDecl,

    Modifiers,
    Modifier,
    Annotation,
    AnnotationArgs,
    ElementValuePair,
    ElementValueArray,

    TypeParameters,
    TypeParameter,
    Superclass,
    SuperInterfaces,
    Permits,
    ClassBody,
    EnumBody,
    EnumConstant,
    FieldDecl,
    VariableDeclarator,
    MethodDecl,
    ConstructorDecl,
    CompactConstructorDecl,
    AnnotationElementDecl,
    Initializer,
    FormalParameters,
    FormalParameter,
    VarargParameter,
    /// Annotations + `...` of a variable-arity parameter.
    Ellipsis,
    ReceiverParameter,
    RecordHeader,
    RecordComponent,
    Throws,

    // Types
    PrimitiveType,
    VoidType,
    ClassType,
    /// One dotted segment of a class type: annotations, name, type arguments.
    TypeSegment,
    ArrayType,
    Dims,
    /// One `[]` pair (with its annotations) in a type or declarator.
    Dim,
    TypeArguments,
    Wildcard,
    WildcardBound,
    TypeBound,

    // Statements
    Block,
    LocalVarDecl,
    LocalTypeDecl,
    IfStmt,
    WhileStmt,
    DoStmt,
    ForStmt,
    ForInit,
    EnhancedForStmt,
    TryStmt,
    ResourceSpec,
    Resource,
    CatchClause,
    CatchParameter,
    CatchType,
    FinallyClause,
    SwitchStmt,
    SwitchBlock,
    SwitchRule,
    SwitchGroup,
    SwitchLabel,
    ReturnStmt,
    BreakStmt,
    ContinueStmt,
    ThrowStmt,
    SyncStmt,
    LabeledStmt,
    YieldStmt,
    AssertStmt,
    ExprStmt,
    EmptyStmt,
    ExplicitCtorCall,

    // Expressions
    Name,
    Identifier,
    Literal,
    This,
    Super,
    FieldAccess,
    MethodCall,
    Arguments,
    ObjectCreation,
    ArrayCreation,
    /// `[expr]` with its annotations inside an array creation expression.
    DimExpr,
    ArrayInit,
    ArrayAccess,
    Cast,
    Lambda,
    LambdaParams,
    MethodRef,
    ClassLiteral,
    InstanceOf,
    Binary,
    Unary,
    Postfix,
    Assign,
    Conditional,
    Paren,
    SwitchExpr,
}

impl NodeKind {
    pub fn is_type_decl(self) -> bool {
        matches!(
            self,
            NodeKind::ClassDecl
                | NodeKind::InterfaceDecl
                | NodeKind::EnumDecl
                | NodeKind::RecordDecl
                | NodeKind::AnnotationTypeDecl
        )
    }

    pub fn is_type(self) -> bool {
        matches!(
            self,
            NodeKind::PrimitiveType
                | NodeKind::VoidType
                | NodeKind::ClassType
                | NodeKind::ArrayType
                | NodeKind::Wildcard
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub start: usize,
    pub end: usize,
    pub children: Vec<Node>,
}

impl Node {
    pub fn new(kind: NodeKind, start: usize, end: usize, children: Vec<Node>) -> Self {
        Node {
            kind,
            start,
            end,
            children,
        }
    }

    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }

    pub fn child(&self, kind: NodeKind) -> Option<&Node> {
        self.children.iter().find(|c| c.kind == kind)
    }

    pub fn children_of(&self, kind: NodeKind) -> impl Iterator<Item = &Node> {
        self.children.iter().filter(move |c| c.kind == kind)
    }

    /// The declared or referenced identifier directly under this node.
    pub fn ident<'a>(&self, src: &'a str) -> Option<&'a str> {
        self.child(NodeKind::Identifier).map(|n| n.text(src))
    }

    /// Annotations held by this node's `Modifiers` child, if any.
    pub fn annotations(&self) -> impl Iterator<Item = &Node> {
        self.child(NodeKind::Modifiers)
            .into_iter()
            .flat_map(|m| m.children_of(NodeKind::Annotation))
    }

    pub fn has_modifier(&self, src: &str, keyword: &str) -> bool {
        self.child(NodeKind::Modifiers).is_some_and(|m| {
            m.children_of(NodeKind::Modifier)
                .any(|k| k.text(src) == keyword)
        })
    }

    /// Indented outline of the tree, one node per line.
    pub fn outline(&self, src: &str) -> String {
        fn go(n: &Node, src: &str, depth: usize, out: &mut String) {
            out.push_str(&"  ".repeat(depth));
            if n.children.is_empty() {
                out.push_str(&format!("{:?} {:?}\n", n.kind, n.text(src)));
            } else {
                out.push_str(&format!("{:?}\n", n.kind));
            }
            for c in &n.children {
                go(c, src, depth + 1, out);
            }
        }
        let mut out = String::new();
        go(self, src, 0, &mut out);
        out
    }

    /// Depth-first pre-order traversal.
    pub fn walk(&self) -> Walk<'_> {
        Walk { stack: vec![self] }
    }

    /// Pre-order traversal that also yields the chain of ancestors.
    pub fn walk_with_ancestors<'a>(&'a self, f: &mut impl FnMut(&'a Node, &[&'a Node])) {
        fn go<'a>(n: &'a Node, anc: &mut Vec<&'a Node>, f: &mut impl FnMut(&'a Node, &[&'a Node])) {
            f(n, anc);
            anc.push(n);
            for c in &n.children {
                go(c, anc, f);
            }
            anc.pop();
        }
        go(self, &mut Vec::new(), f);
    }
}

pub struct Walk<'a> {
    stack: Vec<&'a Node>,
}

impl<'a> Iterator for Walk<'a> {
    type Item = &'a Node;

    fn next(&mut self) -> Option<&'a Node> {
        let n = self.stack.pop()?;
        self.stack.extend(n.children.iter().rev());
        Some(n)
    }
}

/// Name of an annotation node (`@a.b.C(...)` gives `a.b.C`), whitespace removed.
pub fn annotation_name(annotation: &Node, src: &str) -> String {
    annotation
        .child(NodeKind::Name)
        .map(|n| n.text(src).chars().filter(|c| !c.is_whitespace()).collect())
        .unwrap_or_default()
}

/// Last dotted segment of a possibly qualified name.
pub fn simple_name(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}
