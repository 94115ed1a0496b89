//! Recursive-descent parser for Java 17 compilation units.
//!
//! The parser is exact rather than error-tolerant: any deviation from the
//! grammar fails the whole unit. Ambiguous constructs (casts, lambdas, local
//! variable declarations, method-reference qualifiers) are resolved by bounded
//! speculation with position rollback.

use std::fmt;

use super::lexer::{self, Token, TokenKind};
use super::syntax::{Node, NodeKind as K};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

impl From<lexer::LexError> for ParseError {
    fn from(e: lexer::LexError) -> Self {
        ParseError {
            offset: e.offset,
            message: e.message,
        }
    }
}

type PResult<T> = Result<T, ParseError>;

/// Parses a complete compilation unit.
pub fn parse_compilation_unit(src: &str) -> PResult<Node> {
    let toks = lexer::tokenize(src)?;
    let mut p = Parser {
        src,
        toks: &toks,
        pos: 0,
    };
    p.compilation_unit()
}

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "short", "int", "long", "char", "float", "double",
];

const MODIFIER_KEYWORDS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "abstract",
    "final",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
];

struct Parser<'a> {
    src: &'a str,
    toks: &'a [Token],
    pos: usize,
}

#[derive(Clone, Copy)]
struct BodyCtx<'n> {
    type_name: &'n str,
    annotation: bool,
    record: bool,
}

impl<'a> Parser<'a> {
    // ---- token helpers -------------------------------------------------

    fn tok(&self, n: usize) -> Token {
        let i = (self.pos + n).min(self.toks.len() - 1);
        self.toks[i]
    }

    fn text(&self, n: usize) -> &'a str {
        self.tok(n).text(self.src)
    }

    fn at(&self, s: &str) -> bool {
        let t = self.tok(0);
        t.kind != TokenKind::StringLiteral && t.text(self.src) == s
    }

    fn at_n(&self, n: usize, s: &str) -> bool {
        let t = self.tok(n);
        t.kind != TokenKind::StringLiteral && t.text(self.src) == s
    }

    fn at_ident(&self) -> bool {
        self.tok(0).kind == TokenKind::Ident
    }

    fn at_ident_n(&self, n: usize) -> bool {
        self.tok(n).kind == TokenKind::Ident
    }

    fn at_eof(&self) -> bool {
        self.tok(0).kind == TokenKind::Eof
    }

    /// Tokens `n` and `n + 1` touch with no whitespace between them.
    fn adjacent(&self, n: usize) -> bool {
        self.tok(n).end == self.tok(n + 1).start
    }

    fn start(&self) -> usize {
        self.tok(0).start
    }

    fn last_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].end
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.tok(0);
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<Token> {
        if self.at(s) {
            Ok(self.bump())
        } else {
            self.fail(&format!("expected `{s}`"))
        }
    }

    fn fail<T>(&self, what: &str) -> PResult<T> {
        let t = self.tok(0);
        let found = if t.kind == TokenKind::Eof {
            "end of file".to_string()
        } else {
            format!("`{}`", t.text(self.src))
        };
        Err(ParseError {
            offset: t.start,
            message: format!("{what}, found {found}"),
        })
    }

    fn node(&self, kind: K, start: usize, children: Vec<Node>) -> Node {
        Node::new(kind, start, self.last_end().max(start), children)
    }

    fn leaf(&mut self, kind: K) -> Node {
        let t = self.bump();
        Node::new(kind, t.start, t.end, Vec::new())
    }

    fn ident(&mut self) -> PResult<Node> {
        if self.at_ident() {
            Ok(self.leaf(K::Identifier))
        } else {
            self.fail("expected identifier")
        }
    }

    /// Runs `f` speculatively; on failure the position is restored.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let save = self.pos;
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    fn qualified_name(&mut self) -> PResult<Node> {
        let start = self.start();
        let mut parts = vec![self.ident()?];
        while self.at(".") && self.at_ident_n(1) {
            self.bump();
            parts.push(self.ident()?);
        }
        Ok(self.node(K::Name, start, parts))
    }

    // ---- compilation unit ---------------------------------------------

    fn compilation_unit(&mut self) -> PResult<Node> {
        let mut children = Vec::new();
        let save = self.pos;
        let start = self.start();
        let mods = self.modifiers(false)?;
        if self.at("package") {
            children.push(self.package_decl(start, mods)?);
        } else {
            self.pos = save;
        }
        while self.at("import") {
            children.push(self.import_decl()?);
        }
        let save = self.pos;
        let start = self.start();
        let mods = self.modifiers(false)?;
        let open_module = self.at("open") && self.at_n(1, "module");
        if open_module || (self.at("module") && self.at_ident_n(1)) {
            children.push(self.module_decl(start, mods)?);
        } else {
            self.pos = save;
            while !self.at_eof() {
                if self.eat(";") {
                    continue;
                }
                let start = self.start();
                let mods = self.modifiers(false)?;
                children.push(self.type_decl(start, mods)?);
            }
        }
        if !self.at_eof() {
            return self.fail("expected end of file");
        }
        Ok(Node::new(K::CompilationUnit, 0, self.src.len(), children))
    }

    fn package_decl(&mut self, start: usize, mods: Option<Node>) -> PResult<Node> {
        self.expect("package")?;
        let mut children: Vec<Node> = mods.into_iter().collect();
        children.push(self.qualified_name()?);
        self.expect(";")?;
        Ok(self.node(K::PackageDecl, start, children))
    }

    fn import_decl(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("import")?;
        let mut children = Vec::new();
        if self.at("static") {
            children.push(self.leaf(K::Modifier));
        }
        children.push(self.qualified_name()?);
        if self.eat(".") {
            self.expect("*")?;
        }
        self.expect(";")?;
        Ok(self.node(K::ImportDecl, start, children))
    }

    fn module_decl(&mut self, start: usize, mods: Option<Node>) -> PResult<Node> {
        let mut children: Vec<Node> = mods.into_iter().collect();
        if self.at("open") {
            children.push(self.leaf(K::Modifier));
        }
        self.expect("module")?;
        children.push(self.qualified_name()?);
        self.expect("{")?;
        while !self.at("}") {
            let dstart = self.start();
            if self.at_eof() {
                return self.fail("unterminated module declaration");
            }
            let kw = self.text(0);
            if !matches!(kw, "requires" | "exports" | "opens" | "uses" | "provides") {
                return self.fail("expected module directive");
            }
            while !self.at(";") {
                if self.at_eof() || self.at("}") {
                    return self.fail("expected `;`");
                }
                self.bump();
            }
            self.bump();
            children.push(self.node(K::ModuleDirective, dstart, Vec::new()));
        }
        self.expect("}")?;
        Ok(self.node(K::ModuleDecl, start, children))
    }

    // ---- modifiers and annotations ------------------------------------

    fn at_annotation(&self) -> bool {
        self.at("@") && !self.at_n(1, "interface")
    }

    #[allow(clippy::if_same_then_else)]
    fn modifiers(&mut self, allow_default: bool) -> PResult<Option<Node>> {
        let start = self.start();
        let mut children = Vec::new();
        loop {
            if self.at_annotation() {
                children.push(self.annotation()?);
            } else if MODIFIER_KEYWORDS.contains(&self.text(0)) && self.tok(0).kind == TokenKind::Keyword {
                children.push(self.leaf(K::Modifier));
            } else if allow_default && self.at("default") && !self.at_n(1, ":") && !self.at_n(1, "->") {
                children.push(self.leaf(K::Modifier));
            } else if self.at("sealed")
                && self.at_ident()
                && (self.tok(1).kind == TokenKind::Keyword || self.at_n(1, "@"))
            {
                children.push(self.leaf(K::Modifier));
            } else if self.at("non")
                && self.at_ident()
                && self.at_n(1, "-")
                && self.at_n(2, "sealed")
                && self.adjacent(0)
                && self.adjacent(1)
            {
                let s = self.start();
                self.bump();
                self.bump();
                self.bump();
                children.push(self.node(K::Modifier, s, Vec::new()));
            } else {
                break;
            }
        }
        if children.is_empty() {
            Ok(None)
        } else {
            Ok(Some(self.node(K::Modifiers, start, children)))
        }
    }

    fn annotations(&mut self) -> PResult<Vec<Node>> {
        let mut out = Vec::new();
        while self.at_annotation() {
            out.push(self.annotation()?);
        }
        Ok(out)
    }

    fn annotation(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("@")?;
        let mut children = vec![self.qualified_name()?];
        if self.at("(") {
            let astart = self.start();
            self.bump();
            let mut args = Vec::new();
            if !self.at(")") {
                if self.at_ident() && self.at_n(1, "=") {
                    loop {
                        let pstart = self.start();
                        let name = self.ident()?;
                        self.expect("=")?;
                        let value = self.element_value()?;
                        args.push(self.node(K::ElementValuePair, pstart, vec![name, value]));
                        if !self.eat(",") {
                            break;
                        }
                    }
                } else {
                    args.push(self.element_value()?);
                }
            }
            self.expect(")")?;
            children.push(self.node(K::AnnotationArgs, astart, args));
        }
        Ok(self.node(K::Annotation, start, children))
    }

    fn element_value(&mut self) -> PResult<Node> {
        if self.at_annotation() {
            return self.annotation();
        }
        if self.at("{") {
            let start = self.start();
            self.bump();
            let mut items = Vec::new();
            while !self.at("}") {
                items.push(self.element_value()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("}")?;
            return Ok(self.node(K::ElementValueArray, start, items));
        }
        self.conditional()
    }

    // ---- type declarations --------------------------------------------

    fn at_record_decl(&self) -> bool {
        self.at("record") && self.at_ident() && self.at_ident_n(1) && (self.at_n(2, "(") || self.at_n(2, "<"))
    }

    fn at_type_decl(&self) -> bool {
        self.at("class")
            || self.at("interface")
            || self.at("enum")
            || (self.at("@") && self.at_n(1, "interface"))
            || self.at_record_decl()
    }

    fn type_decl(&mut self, start: usize, mods: Option<Node>) -> PResult<Node> {
        let mut children: Vec<Node> = mods.into_iter().collect();
        if self.eat("class") {
            let name = self.ident()?;
            let name_text = name.text(self.src);
            children.push(name);
            if self.at("<") {
                children.push(self.type_parameters()?);
            }
            if self.at("extends") {
                let s = self.start();
                self.bump();
                let t = self.type_()?;
                children.push(self.node(K::Superclass, s, vec![t]));
            }
            if self.at("implements") {
                children.push(self.type_list_clause(K::SuperInterfaces)?);
            }
            if self.at("permits") {
                children.push(self.type_list_clause(K::Permits)?);
            }
            children.push(self.class_body(BodyCtx {
                type_name: name_text,
                annotation: false,
                record: false,
            })?);
            Ok(self.node(K::ClassDecl, start, children))
        } else if self.eat("interface") {
            let name = self.ident()?;
            let name_text = name.text(self.src);
            children.push(name);
            if self.at("<") {
                children.push(self.type_parameters()?);
            }
            if self.at("extends") {
                children.push(self.type_list_clause(K::SuperInterfaces)?);
            }
            if self.at("permits") {
                children.push(self.type_list_clause(K::Permits)?);
            }
            children.push(self.class_body(BodyCtx {
                type_name: name_text,
                annotation: false,
                record: false,
            })?);
            Ok(self.node(K::InterfaceDecl, start, children))
        } else if self.eat("enum") {
            let name = self.ident()?;
            let name_text = name.text(self.src);
            children.push(name);
            if self.at("implements") {
                children.push(self.type_list_clause(K::SuperInterfaces)?);
            }
            children.push(self.enum_body(name_text)?);
            Ok(self.node(K::EnumDecl, start, children))
        } else if self.at("@") && self.at_n(1, "interface") {
            self.bump();
            self.bump();
            let name = self.ident()?;
            let name_text = name.text(self.src);
            children.push(name);
            children.push(self.class_body(BodyCtx {
                type_name: name_text,
                annotation: true,
                record: false,
            })?);
            Ok(self.node(K::AnnotationTypeDecl, start, children))
        } else if self.at_record_decl() {
            self.bump();
            let name = self.ident()?;
            let name_text = name.text(self.src);
            children.push(name);
            if self.at("<") {
                children.push(self.type_parameters()?);
            }
            children.push(self.record_header()?);
            if self.at("implements") {
                children.push(self.type_list_clause(K::SuperInterfaces)?);
            }
            children.push(self.class_body(BodyCtx {
                type_name: name_text,
                annotation: false,
                record: true,
            })?);
            Ok(self.node(K::RecordDecl, start, children))
        } else {
            self.fail("expected type declaration")
        }
    }

    fn type_list_clause(&mut self, kind: K) -> PResult<Node> {
        let start = self.start();
        self.bump();
        let mut types = vec![self.type_()?];
        while self.eat(",") {
            types.push(self.type_()?);
        }
        Ok(self.node(kind, start, types))
    }

    fn record_header(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("(")?;
        let mut comps = Vec::new();
        if !self.at(")") {
            loop {
                let cstart = self.start();
                let mut c: Vec<Node> = self.modifiers(false)?.into_iter().collect();
                c.push(self.type_()?);
                if let Some(e) = self.attempt(|p| p.ellipsis()) {
                    c.push(e);
                }
                c.push(self.ident()?);
                comps.push(self.node(K::RecordComponent, cstart, c));
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(self.node(K::RecordHeader, start, comps))
    }

    fn enum_body(&mut self, name: &str) -> PResult<Node> {
        let start = self.start();
        self.expect("{")?;
        let mut children = Vec::new();
        while !self.at(";") && !self.at("}") {
            let cstart = self.start();
            let mut c: Vec<Node> = self.modifiers(false)?.into_iter().collect();
            c.push(self.ident()?);
            if self.at("(") {
                c.push(self.arguments()?);
            }
            if self.at("{") {
                c.push(self.class_body(BodyCtx {
                    type_name: "",
                    annotation: false,
                    record: false,
                })?);
            }
            children.push(self.node(K::EnumConstant, cstart, c));
            if !self.eat(",") {
                break;
            }
        }
        if self.eat(";") {
            let ctx = BodyCtx {
                type_name: name,
                annotation: false,
                record: false,
            };
            while !self.at("}") {
                if self.at_eof() {
                    return self.fail("unterminated enum body");
                }
                if let Some(m) = self.member(ctx)? {
                    children.push(m);
                }
            }
        }
        self.expect("}")?;
        Ok(self.node(K::EnumBody, start, children))
    }

    fn class_body(&mut self, ctx: BodyCtx<'_>) -> PResult<Node> {
        let start = self.start();
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.at("}") {
            if self.at_eof() {
                return self.fail("unterminated class body");
            }
            if let Some(m) = self.member(ctx)? {
                members.push(m);
            }
        }
        self.expect("}")?;
        Ok(self.node(K::ClassBody, start, members))
    }

    fn member(&mut self, ctx: BodyCtx<'_>) -> PResult<Option<Node>> {
        let start = self.start();
        if self.eat(";") {
            return Ok(None);
        }
        if self.at("{") || (self.at("static") && self.at_n(1, "{")) {
            let mut c = Vec::new();
            if self.at("static") {
                c.push(self.leaf(K::Modifier));
            }
            c.push(self.block()?);
            return Ok(Some(self.node(K::Initializer, start, c)));
        }
        let mods = self.modifiers(true)?;
        if self.at_type_decl() {
            return self.type_decl(start, mods).map(Some);
        }
        let mut children: Vec<Node> = mods.into_iter().collect();
        if self.at("<") {
            children.push(self.type_parameters()?);
        }
        if self.at_ident() && self.at_n(1, "(") {
            children.push(self.ident()?);
            children.push(self.formal_parameters()?);
            if self.at("throws") {
                children.push(self.type_list_clause(K::Throws)?);
            }
            children.push(self.block()?);
            return Ok(Some(self.node(K::ConstructorDecl, start, children)));
        }
        if ctx.record && self.at_ident() && self.text(0) == ctx.type_name && self.at_n(1, "{") {
            children.push(self.ident()?);
            children.push(self.block()?);
            return Ok(Some(self.node(K::CompactConstructorDecl, start, children)));
        }
        if self.at("void") {
            children.push(self.leaf(K::VoidType));
        } else {
            children.push(self.type_()?);
        }
        let name = self.ident()?;
        if self.at("(") {
            children.push(name);
            if ctx.annotation {
                self.expect("(")?;
                self.expect(")")?;
                if let Some(d) = self.dims_opt()? {
                    children.push(d);
                }
                if self.eat("default") {
                    children.push(self.element_value()?);
                }
                self.expect(";")?;
                return Ok(Some(self.node(K::AnnotationElementDecl, start, children)));
            }
            children.push(self.formal_parameters()?);
            if let Some(d) = self.dims_opt()? {
                children.push(d);
            }
            if self.at("throws") {
                children.push(self.type_list_clause(K::Throws)?);
            }
            if !self.eat(";") {
                children.push(self.block()?);
            }
            return Ok(Some(self.node(K::MethodDecl, start, children)));
        }
        children.push(self.variable_declarator_rest(name)?);
        while self.eat(",") {
            children.push(self.variable_declarator()?);
        }
        self.expect(";")?;
        Ok(Some(self.node(K::FieldDecl, start, children)))
    }

    fn variable_declarator(&mut self) -> PResult<Node> {
        let name = self.ident()?;
        self.variable_declarator_rest(name)
    }

    fn variable_declarator_rest(&mut self, name: Node) -> PResult<Node> {
        let start = name.start;
        let mut c = vec![name];
        if let Some(d) = self.dims_opt()? {
            c.push(d);
        }
        if self.eat("=") {
            c.push(self.variable_initializer()?);
        }
        Ok(self.node(K::VariableDeclarator, start, c))
    }

    fn variable_initializer(&mut self) -> PResult<Node> {
        if self.at("{") {
            self.array_init()
        } else {
            self.expression()
        }
    }

    fn array_init(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("{")?;
        let mut items = Vec::new();
        while !self.at("}") {
            items.push(self.variable_initializer()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(self.node(K::ArrayInit, start, items))
    }

    fn formal_parameters(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.at(")") {
            loop {
                params.push(self.formal_parameter()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(self.node(K::FormalParameters, start, params))
    }

    fn formal_parameter(&mut self) -> PResult<Node> {
        let start = self.start();
        let mut c: Vec<Node> = self.modifiers(false)?.into_iter().collect();
        c.push(self.type_()?);
        if let Some(e) = self.attempt(|p| p.ellipsis()) {
            c.push(e);
            c.push(self.ident()?);
            return Ok(self.node(K::VarargParameter, start, c));
        }
        if self.at("this") {
            c.push(self.leaf(K::This));
            return Ok(self.node(K::ReceiverParameter, start, c));
        }
        if self.at_ident() && self.at_n(1, ".") && self.at_n(2, "this") {
            c.push(self.ident()?);
            self.bump();
            c.push(self.leaf(K::This));
            return Ok(self.node(K::ReceiverParameter, start, c));
        }
        c.push(self.ident()?);
        if let Some(d) = self.dims_opt()? {
            c.push(d);
        }
        Ok(self.node(K::FormalParameter, start, c))
    }

    fn ellipsis(&mut self) -> PResult<Node> {
        let start = self.start();
        let annos = self.annotations()?;
        self.expect("...")?;
        Ok(self.node(K::Ellipsis, start, annos))
    }

    fn type_parameters(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("<")?;
        let mut params = Vec::new();
        loop {
            let pstart = self.start();
            let mut c = self.annotations()?;
            c.push(self.ident()?);
            if self.at("extends") {
                let bstart = self.start();
                self.bump();
                let mut bounds = vec![self.type_()?];
                while self.eat("&") {
                    bounds.push(self.type_()?);
                }
                c.push(self.node(K::TypeBound, bstart, bounds));
            }
            params.push(self.node(K::TypeParameter, pstart, c));
            if !self.eat(",") {
                break;
            }
        }
        self.expect(">")?;
        Ok(self.node(K::TypeParameters, start, params))
    }

    // ---- types ---------------------------------------------------------

    fn at_primitive(&self) -> bool {
        self.tok(0).kind == TokenKind::Keyword && PRIMITIVES.contains(&self.text(0))
    }

    /// A type with optional leading type annotations and trailing dims.
    fn type_(&mut self) -> PResult<Node> {
        let start = self.start();
        let element = self.type_without_dims()?;
        match self.dims_opt()? {
            Some(d) => Ok(self.node(K::ArrayType, start, vec![element, d])),
            None => Ok(element),
        }
    }

    fn type_without_dims(&mut self) -> PResult<Node> {
        let start = self.start();
        let annos = self.annotations()?;
        if self.at_primitive() {
            let mut c = annos;
            c.push(self.leaf(K::Identifier));
            return Ok(self.node(K::PrimitiveType, start, c));
        }
        if !self.at_ident() {
            return self.fail("expected type");
        }
        self.class_type(start, annos)
    }

    fn class_type(&mut self, start: usize, leading: Vec<Node>) -> PResult<Node> {
        let mut segments = vec![self.type_segment(start, leading)?];
        loop {
            if !self.at(".") {
                break;
            }
            let save = self.pos;
            self.bump();
            let sstart = self.start();
            if !(self.at_ident() || self.at_annotation()) {
                self.pos = save;
                break;
            }
            match self.attempt(|p| {
                let annos = p.annotations()?;
                p.type_segment(sstart, annos)
            }) {
                Some(seg) => segments.push(seg),
                None => {
                    self.pos = save;
                    break;
                }
            }
        }
        if segments.len() == 1 {
            let name = segments[0].ident(self.src).unwrap_or_default();
            if matches!(name, "yield" | "record" | "sealed" | "permits") {
                return Err(ParseError {
                    offset: segments[0].start,
                    message: format!("`{name}` cannot name a type"),
                });
            }
        }
        Ok(self.node(K::ClassType, start, segments))
    }

    fn type_segment(&mut self, start: usize, annos: Vec<Node>) -> PResult<Node> {
        let mut c = annos;
        c.push(self.ident()?);
        if self.at("<") {
            c.push(self.type_arguments()?);
        }
        Ok(self.node(K::TypeSegment, start, c))
    }

    fn type_arguments(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("<")?;
        let mut args = Vec::new();
        if !self.at(">") {
            loop {
                args.push(self.type_argument()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(">")?;
        Ok(self.node(K::TypeArguments, start, args))
    }

    fn type_argument(&mut self) -> PResult<Node> {
        let start = self.start();
        let save = self.pos;
        let annos = self.annotations()?;
        if self.eat("?") {
            let mut c = annos;
            if self.at("extends") || self.at("super") {
                let bstart = self.start();
                let kw = self.leaf(K::Modifier);
                let t = self.type_()?;
                c.push(self.node(K::WildcardBound, bstart, vec![kw, t]));
            }
            return Ok(self.node(K::Wildcard, start, c));
        }
        self.pos = save;
        self.type_()
    }

    fn dims_opt(&mut self) -> PResult<Option<Node>> {
        let start = self.start();
        let mut dims = Vec::new();
        loop {
            let save = self.pos;
            let dstart = self.start();
            let annos = self.annotations()?;
            if self.at("[") && self.at_n(1, "]") {
                self.bump();
                self.bump();
                dims.push(self.node(K::Dim, dstart, annos));
            } else {
                self.pos = save;
                break;
            }
        }
        if dims.is_empty() {
            Ok(None)
        } else {
            Ok(Some(self.node(K::Dims, start, dims)))
        }
    }

    // ---- statements ----------------------------------------------------

    fn block(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.at("}") {
            if self.at_eof() {
                return self.fail("unterminated block");
            }
            stmts.push(self.block_statement()?);
        }
        self.expect("}")?;
        Ok(self.node(K::Block, start, stmts))
    }

    fn block_statement(&mut self) -> PResult<Node> {
        if self.at_yield() {
            return self.statement();
        }
        let start = self.start();
        if let Some(decl) = self.attempt(|p| {
            let mods = p.modifiers(false)?;
            if p.at_type_decl() {
                p.type_decl(start, mods)
            } else {
                p.fail("not a local type declaration")
            }
        }) {
            return Ok(self.node(K::LocalTypeDecl, start, vec![decl]));
        }
        if let Some(decl) = self.attempt(|p| p.local_var_decl(true)) {
            return Ok(decl);
        }
        self.statement()
    }

    fn at_yield(&self) -> bool {
        self.at("yield")
            && self.at_ident()
            && !matches!(
                self.text(1),
                "=" | "." | "[" | "++" | "--" | ";" | "::" | "->" | ")" | "," | "+=" | "-=" | "*="
                    | "/=" | "%=" | "&=" | "|=" | "^=" | "<<="
            )
    }

    fn local_var_decl(&mut self, semicolon: bool) -> PResult<Node> {
        let start = self.start();
        let mut c: Vec<Node> = self.modifiers(false)?.into_iter().collect();
        c.push(self.type_()?);
        if !self.at_ident() || !matches!(self.text(1), "=" | ";" | "," | "[" | "@" | ":" | ")") {
            return self.fail("not a local variable declaration");
        }
        if self.at_n(1, ":") || (self.at_n(1, ")") && semicolon) {
            return self.fail("not a local variable declaration");
        }
        c.push(self.variable_declarator()?);
        while self.eat(",") {
            c.push(self.variable_declarator()?);
        }
        if semicolon {
            self.expect(";")?;
        }
        Ok(self.node(K::LocalVarDecl, start, c))
    }

    fn paren_expr(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("(")?;
        let e = self.expression()?;
        self.expect(")")?;
        Ok(self.node(K::Paren, start, vec![e]))
    }

    fn statement(&mut self) -> PResult<Node> {
        let start = self.start();
        let t = self.tok(0);
        let word = if matches!(t.kind, TokenKind::Keyword | TokenKind::Punct | TokenKind::Ident) {
            t.text(self.src)
        } else {
            ""
        };
        match word {
            "{" => self.block(),
            ";" => {
                self.bump();
                Ok(self.node(K::EmptyStmt, start, Vec::new()))
            }
            "if" => {
                self.bump();
                let mut c = vec![self.paren_expr()?, self.statement()?];
                if self.eat("else") {
                    c.push(self.statement()?);
                }
                Ok(self.node(K::IfStmt, start, c))
            }
            "while" => {
                self.bump();
                let c = vec![self.paren_expr()?, self.statement()?];
                Ok(self.node(K::WhileStmt, start, c))
            }
            "do" => {
                self.bump();
                let body = self.statement()?;
                self.expect("while")?;
                let cond = self.paren_expr()?;
                self.expect(";")?;
                Ok(self.node(K::DoStmt, start, vec![body, cond]))
            }
            "for" => self.for_statement(),
            "try" => self.try_statement(),
            "switch" if self.tok(0).kind == TokenKind::Keyword => {
                self.bump();
                let c = vec![self.paren_expr()?, self.switch_block()?];
                // A switch used as an expression statement (`switch (x) { ... }.foo();`)
                // is not legal Java, so the statement form is final here.
                Ok(self.node(K::SwitchStmt, start, c))
            }
            "return" => {
                self.bump();
                let mut c = Vec::new();
                if !self.at(";") {
                    c.push(self.expression()?);
                }
                self.expect(";")?;
                Ok(self.node(K::ReturnStmt, start, c))
            }
            "break" | "continue" => {
                self.bump();
                let mut c = Vec::new();
                if self.at_ident() {
                    c.push(self.ident()?);
                }
                self.expect(";")?;
                let kind = if word == "break" {
                    K::BreakStmt
                } else {
                    K::ContinueStmt
                };
                Ok(self.node(kind, start, c))
            }
            "throw" => {
                self.bump();
                let e = self.expression()?;
                self.expect(";")?;
                Ok(self.node(K::ThrowStmt, start, vec![e]))
            }
            "synchronized" => {
                self.bump();
                let c = vec![self.paren_expr()?, self.block()?];
                Ok(self.node(K::SyncStmt, start, c))
            }
            "assert" => {
                self.bump();
                let mut c = vec![self.expression()?];
                if self.eat(":") {
                    c.push(self.expression()?);
                }
                self.expect(";")?;
                Ok(self.node(K::AssertStmt, start, c))
            }
            _ if self.at_yield() => {
                self.bump();
                let e = self.expression()?;
                self.expect(";")?;
                Ok(self.node(K::YieldStmt, start, vec![e]))
            }
            _ if self.at_ident() && self.at_n(1, ":") => {
                let label = self.ident()?;
                self.bump();
                let s = self.statement()?;
                Ok(self.node(K::LabeledStmt, start, vec![label, s]))
            }
            _ => {
                let e = self.expression()?;
                self.expect(";")?;
                Ok(self.node(K::ExprStmt, start, vec![e]))
            }
        }
    }

    fn for_statement(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("for")?;
        self.expect("(")?;
        let enhanced = self.attempt(|p| {
            let mut c: Vec<Node> = p.modifiers(false)?.into_iter().collect();
            c.push(p.type_()?);
            c.push(p.ident()?);
            p.expect(":")?;
            Ok(c)
        });
        if let Some(mut c) = enhanced {
            c.push(self.expression()?);
            self.expect(")")?;
            c.push(self.statement()?);
            return Ok(self.node(K::EnhancedForStmt, start, c));
        }
        let mut c = Vec::new();
        let istart = self.start();
        if !self.at(";") {
            let init = match self.attempt(|p| p.local_var_decl(false)) {
                Some(d) => vec![d],
                None => self.expression_list()?,
            };
            c.push(self.node(K::ForInit, istart, init));
        }
        self.expect(";")?;
        if !self.at(";") {
            c.push(self.expression()?);
        }
        self.expect(";")?;
        if !self.at(")") {
            let ustart = self.start();
            let update = self.expression_list()?;
            c.push(self.node(K::ExprStmt, ustart, update));
        }
        self.expect(")")?;
        c.push(self.statement()?);
        Ok(self.node(K::ForStmt, start, c))
    }

    fn expression_list(&mut self) -> PResult<Vec<Node>> {
        let mut out = vec![self.expression()?];
        while self.eat(",") {
            out.push(self.expression()?);
        }
        Ok(out)
    }

    fn try_statement(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("try")?;
        let mut c = Vec::new();
        if self.at("(") {
            let rstart = self.start();
            self.bump();
            let mut resources = Vec::new();
            while !self.at(")") {
                let res_start = self.start();
                let res = match self.attempt(|p| {
                    let mut rc: Vec<Node> = p.modifiers(false)?.into_iter().collect();
                    rc.push(p.type_()?);
                    rc.push(p.variable_declarator()?);
                    if rc.last().is_some_and(|d| d.children.len() < 2) {
                        return p.fail("resource requires an initializer");
                    }
                    Ok(rc)
                }) {
                    Some(rc) => rc,
                    None => vec![self.expression()?],
                };
                resources.push(self.node(K::Resource, res_start, res));
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
            c.push(self.node(K::ResourceSpec, rstart, resources));
        }
        c.push(self.block()?);
        while self.at("catch") {
            let cstart = self.start();
            self.bump();
            self.expect("(")?;
            let pstart = self.start();
            let mut pc: Vec<Node> = self.modifiers(false)?.into_iter().collect();
            let tstart = self.start();
            let mut types = vec![self.type_()?];
            while self.eat("|") {
                types.push(self.type_()?);
            }
            pc.push(self.node(K::CatchType, tstart, types));
            pc.push(self.ident()?);
            let param = self.node(K::CatchParameter, pstart, pc);
            self.expect(")")?;
            let body = self.block()?;
            c.push(self.node(K::CatchClause, cstart, vec![param, body]));
        }
        if self.at("finally") {
            let fstart = self.start();
            self.bump();
            let b = self.block()?;
            c.push(self.node(K::FinallyClause, fstart, vec![b]));
        }
        if c.len() == 1 && !matches!(c[0].kind, K::ResourceSpec) {
            return self.fail("try without catch or finally");
        }
        Ok(self.node(K::TryStmt, start, c))
    }

    fn switch_label(&mut self) -> PResult<Node> {
        let start = self.start();
        let mut c = Vec::new();
        if self.eat("default") {
        } else {
            self.expect("case")?;
            loop {
                if self.at("default") {
                    self.bump();
                } else {
                    c.push(self.conditional()?);
                }
                if !self.eat(",") {
                    break;
                }
            }
        }
        Ok(self.node(K::SwitchLabel, start, c))
    }

    fn switch_block(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("{")?;
        let mut c = Vec::new();
        while !self.at("}") {
            if self.at_eof() {
                return self.fail("unterminated switch block");
            }
            let item_start = self.start();
            let label = self.switch_label()?;
            if self.eat("->") {
                let body = if self.at("{") {
                    self.block()?
                } else if self.at("throw") {
                    self.statement()?
                } else {
                    let estart = self.start();
                    let e = self.expression()?;
                    self.expect(";")?;
                    self.node(K::ExprStmt, estart, vec![e])
                };
                c.push(self.node(K::SwitchRule, item_start, vec![label, body]));
            } else {
                self.expect(":")?;
                let mut g = vec![label];
                while self.at("case") || (self.at("default") && (self.at_n(1, ":") || self.at_n(1, "->"))) {
                    if self.at_n(1, "->") {
                        break;
                    }
                    g.push(self.switch_label()?);
                    self.expect(":")?;
                }
                while !self.at("case") && !self.at("default") && !self.at("}") {
                    if self.at_eof() {
                        return self.fail("unterminated switch block");
                    }
                    g.push(self.block_statement()?);
                }
                // `default` inside a group could also start a statement in
                // theory, but never does in valid Java.
                c.push(self.node(K::SwitchGroup, item_start, g));
            }
        }
        self.expect("}")?;
        Ok(self.node(K::SwitchBlock, start, c))
    }

    // ---- expressions ---------------------------------------------------

    fn matching_paren(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        let mut i = open;
        while i < self.toks.len() {
            let t = self.toks[i];
            if t.kind == TokenKind::Punct {
                match t.text(self.src) {
                    "(" => depth += 1,
                    ")" => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(i);
                        }
                    }
                    _ => {}
                }
            } else if t.kind == TokenKind::Eof {
                return None;
            }
            i += 1;
        }
        None
    }

    fn at_lambda(&self) -> bool {
        if self.at_ident() && self.at_n(1, "->") {
            return true;
        }
        if self.at("(") {
            if let Some(close) = self.matching_paren(self.pos) {
                let next = self.toks.get(close + 1);
                return next.is_some_and(|t| t.text(self.src) == "->");
            }
        }
        false
    }

    fn expression(&mut self) -> PResult<Node> {
        if self.at_lambda() {
            return self.lambda();
        }
        self.assignment()
    }

    fn lambda(&mut self) -> PResult<Node> {
        let start = self.start();
        let params = if self.at_ident() {
            let id = self.ident()?;
            Node::new(K::LambdaParams, id.start, id.end, vec![id])
        } else {
            let inferred = self.at_n(1, ")")
                || (self.at_ident_n(1) && (self.at_n(2, ",") || self.at_n(2, ")")));
            if inferred {
                let pstart = self.start();
                self.expect("(")?;
                let mut ids = Vec::new();
                while !self.at(")") {
                    ids.push(self.ident()?);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(")")?;
                self.node(K::LambdaParams, pstart, ids)
            } else {
                self.formal_parameters()?
            }
        };
        self.expect("->")?;
        let body = if self.at("{") {
            self.block()?
        } else {
            self.expression()?
        };
        Ok(self.node(K::Lambda, start, vec![params, body]))
    }

    /// Length in tokens of an assignment operator at the cursor, if any.
    fn assignment_op(&self) -> Option<usize> {
        match self.text(0) {
            "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" => Some(1),
            ">" if self.at_n(1, ">") && self.adjacent(0) => {
                if self.at_n(2, ">=") || (self.at_n(2, ">") && self.adjacent(1) && self.at_n(3, "=") && self.adjacent(2)) {
                    Some(4)
                } else if self.at_n(2, "=") && self.adjacent(1) {
                    Some(3)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn assignment(&mut self) -> PResult<Node> {
        let start = self.start();
        let lhs = self.conditional()?;
        if let Some(n) = self.assignment_op() {
            for _ in 0..n {
                self.bump();
            }
            let rhs = self.expression()?;
            return Ok(self.node(K::Assign, start, vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn conditional(&mut self) -> PResult<Node> {
        let start = self.start();
        let cond = self.binary(1)?;
        if self.eat("?") {
            let t = self.expression()?;
            self.expect(":")?;
            let f = if self.at_lambda() {
                self.lambda()?
            } else {
                self.conditional()?
            };
            return Ok(self.node(K::Conditional, start, vec![cond, t, f]));
        }
        Ok(cond)
    }

    /// Precedence and token length of a binary operator at the cursor.
    fn binary_op(&self) -> Option<(u8, usize)> {
        let t = self.tok(0);
        if !matches!(t.kind, TokenKind::Punct | TokenKind::Keyword) {
            return None;
        }
        Some(match t.text(self.src) {
            "||" => (1, 1),
            "&&" => (2, 1),
            "|" => (3, 1),
            "^" => (4, 1),
            "&" => (5, 1),
            "==" | "!=" => (6, 1),
            "<" | "<=" | "instanceof" => (7, 1),
            ">" => {
                if self.at_n(1, ">") && self.adjacent(0) {
                    if self.at_n(2, ">") && self.adjacent(1) {
                        if self.at_n(3, "=") && self.adjacent(2) {
                            return None;
                        }
                        (8, 3)
                    } else if (self.at_n(2, "=") || self.at_n(2, ">=")) && self.adjacent(1) {
                        return None;
                    } else {
                        (8, 2)
                    }
                } else if self.at_n(1, "=") && self.adjacent(0) {
                    (7, 2)
                } else if self.at_n(1, "==") && self.adjacent(0) {
                    return None;
                } else {
                    (7, 1)
                }
            }
            "<<" => (8, 1),
            "+" | "-" => (9, 1),
            "*" | "/" | "%" => (10, 1),
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Node> {
        let start = self.start();
        let mut left = self.unary()?;
        while let Some((prec, len)) = self.binary_op() {
            if prec < min_prec {
                break;
            }
            if self.at("instanceof") {
                self.bump();
                let mut c = vec![left];
                if self.at("final") {
                    let mstart = self.start();
                    let m = self.leaf(K::Modifier);
                    c.push(Node::new(K::Modifiers, mstart, m.end, vec![m]));
                }
                c.push(self.type_()?);
                if self.at_ident() {
                    c.push(self.ident()?);
                }
                left = self.node(K::InstanceOf, start, c);
                continue;
            }
            for _ in 0..len {
                self.bump();
            }
            let right = self.binary(prec + 1)?;
            left = self.node(K::Binary, start, vec![left, right]);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Node> {
        let start = self.start();
        if self.tok(0).kind == TokenKind::Punct && matches!(self.text(0), "+" | "-" | "++" | "--" | "!" | "~") {
            self.bump();
            let e = self.unary()?;
            return Ok(self.node(K::Unary, start, vec![e]));
        }
        if self.at("(") {
            if let Some(cast) = self.attempt(|p| p.cast()) {
                return Ok(cast);
            }
        }
        self.postfix()
    }

    fn at_cast_operand(&self) -> bool {
        let t = self.tok(0);
        match t.kind {
            TokenKind::Ident
            | TokenKind::IntLiteral
            | TokenKind::FloatLiteral
            | TokenKind::CharLiteral
            | TokenKind::StringLiteral
            | TokenKind::TextBlock => true,
            TokenKind::Keyword => matches!(
                t.text(self.src),
                "this" | "super" | "new" | "true" | "false" | "null" | "switch" | "boolean" | "byte"
                    | "short" | "int" | "long" | "char" | "float" | "double" | "void"
            ),
            TokenKind::Punct => matches!(t.text(self.src), "(" | "!" | "~" | "@"),
            TokenKind::Eof => false,
        }
    }

    fn cast(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("(")?;
        let primitive = {
            let save = self.pos;
            let _ = self.annotations();
            let prim = self.at_primitive();
            self.pos = save;
            prim
        };
        let mut c = vec![self.type_()?];
        if primitive && c[0].kind == K::PrimitiveType {
            self.expect(")")?;
            c.push(self.unary()?);
            return Ok(self.node(K::Cast, start, c));
        }
        while self.eat("&") {
            c.push(self.type_()?);
        }
        self.expect(")")?;
        if self.at_lambda() {
            c.push(self.lambda()?);
        } else if self.at_cast_operand() {
            c.push(self.unary()?);
        } else {
            return self.fail("not a cast");
        }
        Ok(self.node(K::Cast, start, c))
    }

    fn postfix(&mut self) -> PResult<Node> {
        let start = self.start();
        let mut e = self.primary()?;
        loop {
            if self.at(".") {
                let save = self.pos;
                self.bump();
                if self.at("<") {
                    let targs = self.type_arguments()?;
                    let name = self.ident()?;
                    let args = self.arguments()?;
                    e = self.node(K::MethodCall, start, vec![e, targs, name, args]);
                } else if self.at_ident() {
                    let name = self.ident()?;
                    if self.at("(") {
                        let args = self.arguments()?;
                        e = self.node(K::MethodCall, start, vec![e, name, args]);
                    } else {
                        e = self.node(K::FieldAccess, start, vec![e, name]);
                    }
                } else if self.at("this") {
                    let t = self.leaf(K::This);
                    e = self.node(K::FieldAccess, start, vec![e, t]);
                } else if self.at("super") {
                    let s = self.leaf(K::Super);
                    if self.at("(") {
                        let args = self.arguments()?;
                        e = self.node(K::ExplicitCtorCall, start, vec![e, s, args]);
                    } else {
                        e = self.node(K::FieldAccess, start, vec![e, s]);
                    }
                } else if self.at("new") {
                    e = self.creation(start, Some(e))?;
                } else if self.at("class") {
                    self.bump();
                    e = self.node(K::ClassLiteral, start, vec![e]);
                } else {
                    self.pos = save;
                    return self.fail("expected member after `.`");
                }
            } else if self.at("[") {
                if self.at_n(1, "]") {
                    while self.at("[") && self.at_n(1, "]") {
                        self.bump();
                        self.bump();
                    }
                    self.expect(".")?;
                    self.expect("class")?;
                    e = self.node(K::ClassLiteral, start, vec![e]);
                } else {
                    self.bump();
                    let idx = self.expression()?;
                    self.expect("]")?;
                    e = self.node(K::ArrayAccess, start, vec![e, idx]);
                }
            } else if self.at("::") {
                e = self.method_ref_rest(start, e)?;
            } else {
                break;
            }
        }
        if self.tok(0).kind == TokenKind::Punct && matches!(self.text(0), "++" | "--") {
            self.bump();
            e = self.node(K::Postfix, start, vec![e]);
        }
        Ok(e)
    }

    fn method_ref_rest(&mut self, start: usize, qualifier: Node) -> PResult<Node> {
        self.expect("::")?;
        let mut c = vec![qualifier];
        if self.at("<") {
            c.push(self.type_arguments()?);
        }
        if self.at("new") {
            c.push(self.leaf(K::Identifier));
        } else {
            c.push(self.ident()?);
        }
        Ok(self.node(K::MethodRef, start, c))
    }

    fn arguments(&mut self) -> PResult<Node> {
        let start = self.start();
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.at(")") {
            args = self.expression_list()?;
        }
        self.expect(")")?;
        Ok(self.node(K::Arguments, start, args))
    }

    fn primary(&mut self) -> PResult<Node> {
        let start = self.start();
        let t = self.tok(0);
        match t.kind {
            TokenKind::IntLiteral
            | TokenKind::FloatLiteral
            | TokenKind::CharLiteral
            | TokenKind::StringLiteral
            | TokenKind::TextBlock => return Ok(self.leaf(K::Literal)),
            TokenKind::Eof => return self.fail("expected expression"),
            _ => {}
        }
        let word = t.text(self.src);
        match (t.kind, word) {
            (TokenKind::Keyword, "true" | "false" | "null") => Ok(self.leaf(K::Literal)),
            (TokenKind::Punct, "(") => self.paren_expr(),
            (TokenKind::Keyword, "this") => {
                let this = self.leaf(K::This);
                if self.at("(") {
                    let args = self.arguments()?;
                    return Ok(self.node(K::ExplicitCtorCall, start, vec![this, args]));
                }
                Ok(this)
            }
            (TokenKind::Keyword, "super") => {
                let sup = self.leaf(K::Super);
                if self.at("(") {
                    let args = self.arguments()?;
                    return Ok(self.node(K::ExplicitCtorCall, start, vec![sup, args]));
                }
                if self.at(".") || self.at("::") {
                    return Ok(sup);
                }
                self.fail("expected `.`, `::` or arguments after `super`")
            }
            (TokenKind::Keyword, "new") => self.creation(start, None),
            (TokenKind::Keyword, "switch") => {
                self.bump();
                let c = vec![self.paren_expr()?, self.switch_block()?];
                Ok(self.node(K::SwitchExpr, start, c))
            }
            (TokenKind::Keyword, "void") => {
                self.bump();
                self.expect(".")?;
                self.expect("class")?;
                Ok(self.node(K::ClassLiteral, start, Vec::new()))
            }
            (TokenKind::Keyword, _) if self.at_primitive() => {
                if let Some(t) = self.attempt(|p| {
                    let t = p.type_()?;
                    if p.at("::") {
                        Ok(t)
                    } else {
                        p.fail("not a method reference")
                    }
                }) {
                    return self.method_ref_rest(start, t);
                }
                self.bump();
                while self.at("[") && self.at_n(1, "]") {
                    self.bump();
                    self.bump();
                }
                self.expect(".")?;
                self.expect("class")?;
                Ok(self.node(K::ClassLiteral, start, Vec::new()))
            }
            (TokenKind::Punct, "@") => {
                let t = self.type_()?;
                if !self.at("::") {
                    return self.fail("expected `::` after annotated type");
                }
                self.method_ref_rest(start, t)
            }
            (TokenKind::Ident, _) => {
                if let Some(t) = self.attempt(|p| {
                    let t = p.type_()?;
                    if p.at("::") {
                        Ok(t)
                    } else {
                        p.fail("not a method reference")
                    }
                }) {
                    return self.method_ref_rest(start, t);
                }
                let id = self.ident()?;
                if self.at("(") {
                    let args = self.arguments()?;
                    return Ok(self.node(K::MethodCall, start, vec![id, args]));
                }
                Ok(Node::new(K::Name, id.start, id.end, vec![id]))
            }
            _ => self.fail("expected expression"),
        }
    }

    fn creation(&mut self, start: usize, outer: Option<Node>) -> PResult<Node> {
        self.expect("new")?;
        let mut c: Vec<Node> = outer.into_iter().collect();
        if self.at("<") {
            c.push(self.type_arguments()?);
        }
        let tstart = self.start();
        let annos = self.annotations()?;
        let ty = if self.at_primitive() {
            let mut pc = annos;
            pc.push(self.leaf(K::Identifier));
            self.node(K::PrimitiveType, tstart, pc)
        } else {
            self.class_type(tstart, annos)?
        };
        let primitive = ty.kind == K::PrimitiveType;
        c.push(ty);
        let mut dim_exprs = Vec::new();
        loop {
            let save = self.pos;
            let dstart = self.start();
            let annos = self.annotations()?;
            if self.at("[") && !self.at_n(1, "]") {
                self.bump();
                let mut dc = annos;
                dc.push(self.expression()?);
                self.expect("]")?;
                dim_exprs.push(self.node(K::DimExpr, dstart, dc));
            } else {
                self.pos = save;
                break;
            }
        }
        if !dim_exprs.is_empty() {
            c.extend(dim_exprs);
            if let Some(d) = self.dims_opt()? {
                c.push(d);
            }
            return Ok(self.node(K::ArrayCreation, start, c));
        }
        if let Some(d) = self.dims_opt()? {
            c.push(d);
            c.push(self.array_init()?);
            return Ok(self.node(K::ArrayCreation, start, c));
        }
        if primitive {
            return self.fail("expected array dimensions");
        }
        c.push(self.arguments()?);
        if self.at("{") {
            c.push(self.class_body(BodyCtx {
                type_name: "",
                annotation: false,
                record: false,
            })?);
        }
        Ok(self.node(K::ObjectCreation, start, c))
    }
}
