#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use std::path::{Path, PathBuf};

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_dir() -> PathBuf {
    crate_dir().join("testdata/corpus")
}

/// Corpus `.java` files as (relative path, text), sorted.
pub fn corpus_files() -> Vec<(String, String)> {
    let root = corpus_dir();
    let mut out = Vec::new();
    for e in walkdir::WalkDir::new(&root).sort_by_file_name() {
        let e = e.unwrap();
        if e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "java") {
            let rel = e.path().strip_prefix(&root).unwrap().to_string_lossy().replace('\\', "/");
            out.push((rel, std::fs::read_to_string(e.path()).unwrap()));
        }
    }
    out
}

pub fn golden_path(rel: &str) -> PathBuf {
    crate_dir()
        .join("tests/golden/sites")
        .join(format!("{}.tsv", rel.replace('/', "__")))
}

pub fn blessing() -> bool {
    std::env::var_os("ANNAFORGE_BLESS").is_some()
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub mod gen;

use annaforge::campaign::{load_config, CampaignConfig};

pub fn campaign_file(name: &str) -> PathBuf {
    crate_dir().join("data/campaigns").join(name)
}

/// A bundled campaign redirected to `work`, optionally restricted to some analyzers.
pub fn campaign(name: &str, work: &Path, only: &[&str]) -> CampaignConfig {
    let mut cfg = load_config(&campaign_file(name)).unwrap();
    cfg.work_dir = work.to_path_buf();
    if !only.is_empty() {
        cfg.analyzers.retain(|a| only.contains(&a.profile.name.as_str()));
        assert_eq!(cfg.analyzers.len(), only.len(), "unknown analyzer in {only:?}");
    }
    cfg
}

/// Copies the named corpus files into `dest` and returns it.
pub fn sub_corpus(dest: &Path, files: &[&str]) -> PathBuf {
    for f in files {
        let to = dest.join(f);
        std::fs::create_dir_all(to.parent().unwrap()).unwrap();
        std::fs::copy(corpus_dir().join(f), to).unwrap();
    }
    dest.to_path_buf()
}

use annaforge::source::syntax::NodeKind;
use annaforge::source::{parse_unit, render, Edit};

/// The file with every annotation usage deleted.
pub fn strip_annotations(path: &str, text: &str) -> String {
    let unit = parse_unit("strip", path, text);
    let tree = unit.tree.as_ref().unwrap_or_else(|| panic!("{path} does not parse"));
    let mut edits = Vec::new();
    tree.walk_with_ancestors(&mut |n, anc| {
        if n.kind == NodeKind::Annotation && !anc.iter().any(|a| a.kind == NodeKind::Annotation) {
            edits.push(Edit::replace(n.start, n.end, ""));
        }
    });
    render(text, &edits).unwrap()
}
