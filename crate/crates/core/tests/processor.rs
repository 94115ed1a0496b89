mod support;

use support::checks;

#[test]
fn annotation_free_programs_are_untouched() {
    checks::annotation_free_identity().unwrap();
}

#[test]
fn processing_is_idempotent_and_removes_covered_annotations() {
    checks::processing_is_idempotent().unwrap();
}
