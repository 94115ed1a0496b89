//! Line-oriented record format shared by registry, profile and campaign files.
//!
//! ```text
//! format <kind> version=1
//! # comment
//! keyword positional key=value key="quoted value"
//! ```
//!
//! An indented line holding only `key=value` pairs continues the record above.
//! Quoted strings accept `\"`, `\\`, `\n` and `\t` escapes. `#` starts a
//! comment when it begins a token.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FormatError {}

pub fn error(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub line: usize,
    pub keyword: String,
    pub positional: Vec<String>,
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn error(&self, message: impl Into<String>) -> FormatError {
        error(self.line, format!("{}: {}", self.keyword, message.into()))
    }

    pub fn take(&mut self, key: &str) -> Option<String> {
        let i = self.fields.iter().position(|(k, _)| k == key)?;
        Some(self.fields.remove(i).1)
    }

    pub fn require(&mut self, key: &str) -> Result<String, FormatError> {
        self.take(key)
            .ok_or_else(|| self.error(format!("missing `{key}=`")))
    }

    pub fn take_bool(&mut self, key: &str, default: bool) -> Result<bool, FormatError> {
        match self.take(key).as_deref() {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(self.error(format!("`{key}` must be true or false, got `{v}`"))),
        }
    }

    pub fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, FormatError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.error(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    /// Comma-separated list; empty string gives an empty list.
    pub fn take_list(&mut self, key: &str) -> Option<Vec<String>> {
        self.take(key).map(|v| split_list(&v))
    }

    pub fn single_positional(&self) -> Result<String, FormatError> {
        match self.positional.as_slice() {
            [one] => Ok(one.clone()),
            [] => Err(self.error("missing name")),
            _ => Err(self.error("too many positional values")),
        }
    }

    pub fn no_positional(&self) -> Result<(), FormatError> {
        if self.positional.is_empty() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected value `{}`", self.positional[0])))
        }
    }

    /// Fails if any key was not consumed.
    pub fn finish(&self) -> Result<(), FormatError> {
        match self.fields.first() {
            None => Ok(()),
            Some((k, _)) => Err(self.error(format!("unknown key `{k}`"))),
        }
    }
}

pub fn split_list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

struct Token {
    key: Option<String>,
    value: String,
}

fn tokenize_line(line: &str, lineno: usize) -> Result<Vec<Token>, FormatError> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            None | Some('#') => return Ok(out),
            _ => {}
        }
        let mut buf = String::new();
        let mut key = None;
        let mut quoted_any = false;
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            chars.next();
            match c {
                '"' => {
                    quoted_any = true;
                    loop {
                        match chars.next() {
                            None => return Err(error(lineno, "unterminated quoted string")),
                            Some('"') => break,
                            Some('\\') => match chars.next() {
                                Some('n') => buf.push('\n'),
                                Some('t') => buf.push('\t'),
                                Some('"') => buf.push('"'),
                                Some('\\') => buf.push('\\'),
                                Some(o) => return Err(error(lineno, format!("unknown escape `\\{o}`"))),
                                None => return Err(error(lineno, "unterminated quoted string")),
                            },
                            Some(o) => buf.push(o),
                        }
                    }
                }
                '=' if key.is_none() && !quoted_any => {
                    if buf.is_empty() {
                        return Err(error(lineno, "empty key"));
                    }
                    key = Some(std::mem::take(&mut buf));
                }
                _ => buf.push(c),
            }
        }
        out.push(Token { key, value: buf });
    }
}

/// Parses `text`, checking the `format <kind> version=1` header.
pub fn parse(text: &str, kind: &str) -> Result<Vec<Record>, FormatError> {
    let mut records: Vec<Record> = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = tokenize_line(line, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let continues = line.starts_with(char::is_whitespace) && toks.iter().all(|t| t.key.is_some());
        if continues {
            let Some(rec) = records.last_mut() else {
                return Err(error(lineno, "continuation line without a record"));
            };
            for t in toks {
                let k = t.key.expect("checked above");
                if rec.fields.iter().any(|(e, _)| *e == k) {
                    return Err(error(lineno, format!("duplicate key `{k}`")));
                }
                rec.fields.push((k, t.value));
            }
            continue;
        }
        let mut iter = toks.into_iter();
        let first = iter.next().expect("non-empty");
        if first.key.is_some() {
            return Err(error(lineno, "record must start with a keyword"));
        }
        let mut rec = Record {
            line: lineno,
            keyword: first.value,
            positional: Vec::new(),
            fields: Vec::new(),
        };
        for t in iter {
            match t.key {
                Some(k) => {
                    if rec.fields.iter().any(|(e, _)| *e == k) {
                        return Err(error(lineno, format!("duplicate key `{k}`")));
                    }
                    rec.fields.push((k, t.value));
                }
                None => {
                    if !rec.fields.is_empty() {
                        return Err(error(lineno, "positional value after key=value"));
                    }
                    rec.positional.push(t.value);
                }
            }
        }
        if !header_seen {
            if rec.keyword != "format" {
                return Err(error(lineno, format!("expected `format {kind} version=1` header")));
            }
            let got = rec.single_positional()?;
            if got != kind {
                return Err(error(lineno, format!("expected format `{kind}`, found `{got}`")));
            }
            match rec.require("version")?.as_str() {
                "1" => {}
                v => return Err(error(lineno, format!("unsupported version {v}"))),
            }
            rec.finish()?;
            header_seen = true;
            continue;
        }
        records.push(rec);
    }
    if !header_seen {
        return Err(error(1, format!("expected `format {kind} version=1` header")));
    }
    Ok(records)
}

/// Renders a value so that [`parse`] reads it back unchanged.
pub fn quote(v: &str) -> String {
    let bare = !v.is_empty()
        && !v.starts_with('#')
        && !v.chars().any(|c| c.is_whitespace() || c == '"' || c == '\\');
    if bare {
        return v.to_string();
    }
    let mut out = String::with_capacity(v.len() + 2);
    out.push('"');
    for c in v.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn header(kind: &str) -> String {
    format!("format {kind} version=1\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records() {
        let text = "# lead\nformat demo version=1\nthing a b key=v other=\"x y\\n\" # tail\n\n";
        let recs = parse(text, "demo").unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.line, 3);
        assert_eq!(r.positional, ["a", "b"]);
        assert_eq!(r.fields[1], ("other".into(), "x y\n".into()));
    }

    #[test]
    fn indented_lines_continue_a_record() {
        let text = "format demo version=1\nthing a\n  k=1\n  other=2 # note\nnext\n";
        let recs = parse(text, "demo").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].fields, [("k".into(), "1".into()), ("other".into(), "2".into())]);
        assert!(parse("format demo version=1\n  k=1\n", "demo").is_err());
        assert!(parse("format demo version=1\nthing k=1\n  k=2\n", "demo").is_err());
    }

    #[test]
    fn header_required() {
        assert_eq!(parse("thing a\n", "demo").unwrap_err().line, 1);
        assert!(parse("format other version=1\n", "demo").is_err());
        assert!(parse("format demo version=2\n", "demo").is_err());
        assert!(parse("", "demo").is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(parse("format demo version=1\nx k=\"open\n", "demo").unwrap_err().line, 2);
        assert!(parse("format demo version=1\nx k=1 k=2\n", "demo").is_err());
        assert!(parse("format demo version=1\nx =1\n", "demo").is_err());
    }

    #[test]
    fn quote_round_trips() {
        for v in ["plain", "", "with space", "q\"uote", "back\\slash", "#hash", "line\nbreak", "a=b"] {
            let text = format!("format t version=1\nr k={}\n", quote(v));
            let mut recs = parse(&text, "t").unwrap();
            assert_eq!(recs[0].take("k").unwrap(), v);
        }
    }
}
