mod support;

use annaforge::source::parse_unit;
use support::checks;

#[test]
fn registry_file_round_trips() {
    checks::registry_round_trips().unwrap();
}

#[test]
fn program_set_materialization_round_trips() {
    checks::materialization_round_trips().unwrap();
}

#[test]
fn zero_edit_render_is_byte_identical() {
    checks::zero_edit_render_is_identity().unwrap();
}

#[test]
fn stripped_corpus_still_parses() {
    for (rel, text) in support::corpus_files() {
        let stripped = support::strip_annotations(&rel, &text);
        assert!(!stripped.contains("@Override"), "{rel}");
        assert!(parse_unit("s", &rel, &stripped).parse_ok(), "{rel}:\n{stripped}");
    }
}
