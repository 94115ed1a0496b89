//! Java source model: compilation units, program sets, edits and injection sites.

pub mod lexer;
pub mod parser;
pub mod sites;
pub mod syntax;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use parser::ParseError;
pub use syntax::{Node, NodeKind};

/// One parsed `.java` file.
#[derive(Debug, Clone)]
pub struct CompilationUnit {
    pub seed_id: String,
    /// Path relative to the program set root, `/`-separated.
    pub path: String,
    pub text: String,
    pub tree: Option<Node>,
    pub diagnostic: Option<ParseError>,
}

impl CompilationUnit {
    pub fn parse_ok(&self) -> bool {
        self.tree.is_some()
    }

    /// Line (1-based) containing byte `offset`.
    pub fn line_of(&self, offset: usize) -> usize {
        line_of(&self.text, offset)
    }
}

pub fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|b| **b == b'\n')
        .count()
        + 1
}

pub fn parse_unit(seed_id: &str, path: &str, text: &str) -> CompilationUnit {
    let (tree, diagnostic) = match parser::parse_compilation_unit(text) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e)),
    };
    CompilationUnit {
        seed_id: seed_id.to_string(),
        path: path.to_string(),
        text: text.to_string(),
        tree,
        diagnostic,
    }
}

/// A non-Java file carried along with a program set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxFile {
    pub path: String,
    pub bytes: Vec<u8>,
}

/// The set of files one analyzer run consumes.
#[derive(Debug, Clone)]
pub struct ProgramSet {
    pub id: String,
    pub root: PathBuf,
    pub units: Vec<CompilationUnit>,
    pub aux_files: Vec<AuxFile>,
}

/// Equality ignores `root`: a materialized copy equals its original.
impl PartialEq for ProgramSet {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.aux_files == other.aux_files
            && self.units.len() == other.units.len()
            && self
                .units
                .iter()
                .zip(&other.units)
                .all(|(a, b)| a.path == b.path && a.text == b.text)
    }
}

fn rel_string(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

impl ProgramSet {
    pub fn new(id: &str, root: &Path) -> Self {
        ProgramSet {
            id: id.to_string(),
            root: root.to_path_buf(),
            units: Vec::new(),
            aux_files: Vec::new(),
        }
    }

    /// Loads every file below `root`. `.java` files become units, the rest aux files.
    pub fn load(id: &str, root: &Path) -> io::Result<Self> {
        let mut ps = ProgramSet::new(id, root);
        let mut files = Vec::new();
        for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(io::Error::other)?;
            if entry.file_type().is_file() {
                files.push(entry.into_path());
            }
        }
        for file in files {
            let rel = rel_string(file.strip_prefix(root).expect("walk stays under root"));
            ps.add_file(&rel, fs::read(&file)?)?;
        }
        Ok(ps)
    }

    /// A program set made of one Java file, keyed by its file name.
    pub fn load_file(id: &str, file: &Path) -> io::Result<Self> {
        let root = file.parent().unwrap_or(Path::new("."));
        let name = file
            .file_name()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "not a file path"))?;
        let mut ps = ProgramSet::new(id, root);
        ps.add_file(&name.to_string_lossy(), fs::read(file)?)?;
        Ok(ps)
    }

    fn add_file(&mut self, rel: &str, bytes: Vec<u8>) -> io::Result<()> {
        if rel.ends_with(".java") {
            let text = String::from_utf8(bytes).map_err(|_| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{rel}: not UTF-8"))
            })?;
            self.units.push(parse_unit(&self.id, rel, &text));
        } else {
            self.aux_files.push(AuxFile {
                path: rel.to_string(),
                bytes,
            });
        }
        Ok(())
    }

    pub fn unit(&self, path: &str) -> Option<&CompilationUnit> {
        self.units.iter().find(|u| u.path == path)
    }

    /// Adds or replaces a unit, keeping units sorted by path.
    pub fn put_unit(&mut self, unit: CompilationUnit) {
        match self.units.binary_search_by(|u| u.path.as_str().cmp(&unit.path)) {
            Ok(i) => self.units[i] = unit,
            Err(i) => self.units.insert(i, unit),
        }
    }

    /// Writes all files below `dest`, which becomes the new root.
    pub fn materialize(&mut self, dest: &Path) -> io::Result<()> {
        for u in &self.units {
            write_file(&dest.join(&u.path), u.text.as_bytes())?;
        }
        for a in &self.aux_files {
            write_file(&dest.join(&a.path), &a.bytes)?;
        }
        self.root = dest.to_path_buf();
        Ok(())
    }

    pub fn all_parse(&self) -> bool {
        self.units.iter().all(|u| u.parse_ok())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)
}

/// A text edit: replace `start..end` with `text` (`start == end` inserts).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl Edit {
    pub fn insert(anchor: usize, text: impl Into<String>) -> Self {
        Edit {
            start: anchor,
            end: anchor,
            text: text.into(),
        }
    }

    pub fn replace(start: usize, end: usize, text: impl Into<String>) -> Self {
        Edit {
            start,
            end,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("edits overlap at byte {0}")]
    Overlap(usize),
    #[error("edit at byte {0} is outside the text or not on a character boundary")]
    OutOfBounds(usize),
    #[error("inserted text not found at byte {0}")]
    Mismatch(usize),
}

fn sorted_checked<'e>(text: &str, edits: &'e [Edit]) -> Result<Vec<&'e Edit>, RenderError> {
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start, e.end));
    for e in &sorted {
        if e.start > e.end || e.end > text.len() || !text.is_char_boundary(e.start) || !text.is_char_boundary(e.end) {
            return Err(RenderError::OutOfBounds(e.start));
        }
    }
    for w in sorted.windows(2) {
        if w[1].start < w[0].end || w[1].start == w[0].start {
            return Err(RenderError::Overlap(w[1].start));
        }
    }
    Ok(sorted)
}

/// Applies non-overlapping edits, addressed in original-text offsets.
pub fn render(text: &str, edits: &[Edit]) -> Result<String, RenderError> {
    let sorted = sorted_checked(text, edits)?;
    let mut out = String::with_capacity(text.len() + edits.iter().map(|e| e.text.len()).sum::<usize>());
    let mut pos = 0;
    for e in sorted {
        out.push_str(&text[pos..e.start]);
        out.push_str(&e.text);
        pos = e.end;
    }
    out.push_str(&text[pos..]);
    Ok(out)
}

/// Removes insertions previously applied by [`render`], recovering the original text.
pub fn strip(rendered: &str, insertions: &[Edit]) -> Result<String, RenderError> {
    let mut sorted: Vec<&Edit> = insertions.iter().collect();
    sorted.sort_by_key(|e| e.start);
    let mut out = String::with_capacity(rendered.len());
    let mut pos = 0;
    let mut shift = 0;
    for e in sorted {
        if e.start != e.end {
            return Err(RenderError::OutOfBounds(e.start));
        }
        let at = e.start + shift;
        if at < pos || rendered.get(at..at + e.text.len()) != Some(e.text.as_str()) {
            return Err(RenderError::Mismatch(e.start));
        }
        out.push_str(&rendered[pos..at]);
        pos = at + e.text.len();
        shift += e.text.len();
    }
    out.push_str(&rendered[pos..]);
    Ok(out)
}

/// Applies per-unit edits and returns the edited copy with re-parsed units.
pub fn render_program(ps: &ProgramSet, edits: &[(String, Vec<Edit>)]) -> Result<ProgramSet, RenderError> {
    let mut out = ps.clone();
    for (path, unit_edits) in edits {
        if let Some(u) = out.units.iter_mut().find(|u| &u.path == path) {
            let text = render(&u.text, unit_edits)?;
            *u = parse_unit(&u.seed_id, &u.path, &text);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_edit_render_is_identity() {
        let src = "class A { void m(){} }\n";
        assert_eq!(render(src, &[]).unwrap(), src);
    }

    #[test]
    fn single_insertion() {
        let src = "class A { void m(){} }";
        let out = render(src, &[Edit::insert(10, "@X ")]).unwrap();
        assert_eq!(out, "class A { @X void m(){} }");
        assert_eq!(strip(&out, &[Edit::insert(10, "@X ")]).unwrap(), src);
    }

    #[test]
    fn overlapping_edits_rejected() {
        let src = "abcdef";
        assert_eq!(
            render(src, &[Edit::insert(2, "x"), Edit::insert(2, "y")]),
            Err(RenderError::Overlap(2))
        );
        assert!(render(src, &[Edit::replace(1, 4, ""), Edit::insert(3, "y")]).is_err());
        assert!(render(src, &[Edit::insert(9, "y")]).is_err());
    }

    #[test]
    fn multiple_edits_use_original_offsets() {
        let src = "a b c";
        let edits = [Edit::insert(4, "3"), Edit::insert(0, "1"), Edit::replace(2, 3, "B")];
        assert_eq!(render(src, &edits).unwrap(), "1a B 3c");
    }

    #[test]
    fn parse_unit_preserves_text() {
        let u = parse_unit("s", "A.java", "class {");
        assert!(!u.parse_ok());
        assert_eq!(u.text, "class {");
        assert!(u.diagnostic.is_some());
    }
}
