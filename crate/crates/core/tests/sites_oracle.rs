mod support;

use annaforge::registry::Registry;
use annaforge::source::sites::{all_kinds, enumerate_sites};
use annaforge::source::{parse_unit, render, Edit};

use support::checks;

#[test]
fn corpus_has_twelve_parseable_files() {
    let files = support::corpus_files();
    assert_eq!(files.len(), 12);
    for (rel, text) in &files {
        let u = parse_unit("corpus", rel, text);
        assert!(u.parse_ok(), "{rel}: {:?}", u.diagnostic);
    }
}

#[test]
fn oracle_matches_golden_files() {
    checks::oracle_matches_golden().unwrap();
}

#[test]
fn enumerated_sites_equal_golden_files() {
    checks::sites_match_golden().unwrap();
}

#[test]
fn dummy_injection_reparses_at_every_site() {
    let reg = Registry::curated();
    let dummy = reg.get("annaforge.MockAnnotation").unwrap();
    let text_ins = format!("@{} ", dummy.fq_name);
    for (rel, text) in support::corpus_files() {
        let unit = parse_unit("corpus", &rel, &text);
        for site in enumerate_sites(&unit, &all_kinds()) {
            let out = render(&text, &[Edit::insert(site.anchor, text_ins.clone())]).unwrap();
            let again = parse_unit("corpus", &rel, &out);
            assert!(again.parse_ok(), "{rel} {}: {:?}", site.dump_line(), again.diagnostic);
        }
    }
}

#[test]
fn site_order_is_deterministic() {
    for (rel, text) in support::corpus_files() {
        let unit = parse_unit("corpus", &rel, &text);
        let a = enumerate_sites(&unit, &all_kinds());
        let b = enumerate_sites(&parse_unit("corpus", &rel, &text), &all_kinds());
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| (w[0].anchor, w[0].kind.name()) <= (w[1].anchor, w[1].kind.name())));
    }
}
