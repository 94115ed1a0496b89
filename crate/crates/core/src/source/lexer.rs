//! Java tokenizer.
//!
//! Comments and whitespace are skipped; every token records its byte span in
//! the original text so that edits can be spliced without re-printing. `>` is
//! always emitted as a single-character token; the parser glues adjacent `>`
//! tokens back into shift and compound-assignment operators.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Keyword,
    IntLiteral,
    FloatLiteral,
    CharLiteral,
    StringLiteral,
    TextBlock,
    Punct,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lex error at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for LexError {}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

// Longest first so that greedy matching works.
const PUNCT: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=", "*=", "/=",
    "&=", "|=", "^=", "%=", "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", ">", "<",
    "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_part(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphanumeric()
}

/// Tokenizes `src`. The returned vector always ends with an `Eof` token whose
/// span is empty and located at `src.len()`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    Lexer { src, pos: 0 }.run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, LexError> {
        Err(LexError {
            offset,
            message: message.into(),
        })
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let start = self.pos;
            let Some(c) = self.peek() else {
                out.push(Token {
                    kind: TokenKind::Eof,
                    start,
                    end: start,
                });
                return Ok(out);
            };
            let kind = if is_ident_start(c) {
                while self.peek().is_some_and(is_ident_part) {
                    self.bump();
                }
                if is_keyword(&self.src[start..self.pos]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Ident
                }
            } else if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
                self.number()?
            } else if c == '"' {
                if self.rest().starts_with("\"\"\"") {
                    self.text_block()?
                } else {
                    self.quoted('"')?;
                    TokenKind::StringLiteral
                }
            } else if c == '\'' {
                self.quoted('\'')?;
                TokenKind::CharLiteral
            } else if let Some(p) = PUNCT.iter().find(|p| self.rest().starts_with(**p)) {
                self.pos += p.len();
                TokenKind::Punct
            } else {
                return self.err(start, format!("unexpected character {c:?}"));
            };
            out.push(Token {
                kind,
                start,
                end: self.pos,
            });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            let rest = self.rest();
            if rest.starts_with("//") {
                match rest.find('\n') {
                    Some(i) => self.pos += i,
                    None => self.pos = self.src.len(),
                }
            } else if let Some(body) = rest.strip_prefix("/*") {
                match body.find("*/") {
                    Some(i) => self.pos += i + 4,
                    None => return self.err(self.pos, "unterminated block comment"),
                }
            } else if let Some(c) = self.peek().filter(|c| c.is_whitespace() || *c == '\u{feff}') {
                self.pos += c.len_utf8();
            } else {
                return Ok(());
            }
        }
    }

    fn number(&mut self) -> Result<TokenKind, LexError> {
        let start = self.pos;
        let mut float = false;
        if self.rest().starts_with("0x") || self.rest().starts_with("0X") {
            self.pos += 2;
            while self.peek().is_some_and(|c| c.is_ascii_hexdigit() || c == '_') {
                self.bump();
            }
            if self.peek() == Some('.') {
                float = true;
                self.bump();
                while self.peek().is_some_and(|c| c.is_ascii_hexdigit() || c == '_') {
                    self.bump();
                }
            }
            if matches!(self.peek(), Some('p' | 'P')) {
                float = true;
                self.bump();
                if matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
        } else if self.rest().starts_with("0b") || self.rest().starts_with("0B") {
            self.pos += 2;
            while self.peek().is_some_and(|c| c == '0' || c == '1' || c == '_') {
                self.bump();
            }
        } else {
            while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                self.bump();
            }
            if self.peek() == Some('.') && self.peek_at(1).is_none_or(|c| c.is_ascii_digit() || !is_ident_start(c) && c != '.') {
                float = true;
                self.bump();
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                    self.bump();
                }
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                float = true;
                self.bump();
                if matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
                if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    return self.err(start, "malformed exponent");
                }
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                    self.bump();
                }
            }
        }
        match self.peek() {
            Some('l' | 'L') => {
                self.bump();
            }
            Some('f' | 'F' | 'd' | 'D') => {
                float = true;
                self.bump();
            }
            _ => {}
        }
        if self.peek().is_some_and(is_ident_part) {
            return self.err(start, "malformed numeric literal");
        }
        Ok(if float {
            TokenKind::FloatLiteral
        } else {
            TokenKind::IntLiteral
        })
    }

    fn quoted(&mut self, quote: char) -> Result<(), LexError> {
        let start = self.pos;
        self.bump();
        loop {
            match self.bump() {
                None | Some('\n') => return self.err(start, "unterminated literal"),
                Some('\\') => {
                    if self.bump().is_none() {
                        return self.err(start, "unterminated literal");
                    }
                }
                Some(c) if c == quote => return Ok(()),
                Some(_) => {}
            }
        }
    }

    fn text_block(&mut self) -> Result<TokenKind, LexError> {
        let start = self.pos;
        self.pos += 3;
        // Opening delimiter must be followed by a line terminator.
        while matches!(self.peek(), Some(' ' | '\t' | '\x0c')) {
            self.bump();
        }
        match self.bump() {
            Some('\n') => {}
            Some('\r') => {
                if self.peek() == Some('\n') {
                    self.bump();
                }
            }
            _ => return self.err(start, "text block opening delimiter must end its line"),
        }
        loop {
            if self.rest().starts_with("\"\"\"") {
                self.pos += 3;
                return Ok(TokenKind::TextBlock);
            }
            match self.bump() {
                None => return self.err(start, "unterminated text block"),
                Some('\\') => {
                    self.bump();
                }
                Some(_) => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<&str> {
        tokenize(src)
            .unwrap()
            .iter()
            .filter(|t| t.kind != TokenKind::Eof)
            .map(|t| t.text(src))
            .collect()
    }

    #[test]
    fn splits_generic_closers() {
        assert_eq!(
            texts("Map<String,List<T>>> x"),
            ["Map", "<", "String", ",", "List", "<", "T", ">", ">", ">", "x"]
        );
    }

    #[test]
    fn skips_comments_and_keeps_offsets() {
        let src = "/* c */ int // tail\n x = 0x1F_FFL;";
        let toks = tokenize(src).unwrap();
        assert_eq!(toks[0].text(src), "int");
        assert_eq!(toks[0].start, 8);
        assert_eq!(toks[3].kind, TokenKind::IntLiteral);
        assert_eq!(toks[3].text(src), "0x1F_FFL");
    }

    #[test]
    fn literals() {
        assert_eq!(texts("1.5e-3f .5 'a' '\\'' \"s\\\"t\" 3."), [
            "1.5e-3f", ".5", "'a'", "'\\''", "\"s\\\"t\"", "3."
        ]);
        let toks = tokenize("a...b").unwrap();
        assert_eq!(toks.len(), 4);
    }

    #[test]
    fn text_blocks() {
        let src = "String s = \"\"\"\n  hi \"quoted\"\n  \"\"\";";
        let toks = tokenize(src).unwrap();
        assert_eq!(toks[3].kind, TokenKind::TextBlock);
        assert_eq!(toks[4].text(src), ";");
    }

    #[test]
    fn rejects_garbage() {
        assert!(tokenize("int #x").is_err());
        assert!(tokenize("\"open").is_err());
        assert!(tokenize("/* open").is_err());
    }
}
