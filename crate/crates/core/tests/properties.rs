mod support;

use proptest::prelude::*;
use support::gen;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn equivalence_is_reflexive(o in gen::outcome(), allow in gen::allowlist()) {
        gen::reflexive(&o, &allow)?;
    }

    #[test]
    fn equivalence_is_symmetric((l, r) in gen::pair(), allow in gen::allowlist()) {
        gen::symmetric(&l, &r, &allow)?;
    }

    #[test]
    fn allowlist_is_monotone((l, r) in gen::pair(), small in gen::allowlist(), extra in gen::allowlist()) {
        gen::monotone(&l, &r, &small, &extra)?;
    }

    #[test]
    fn diff_counts_balance((l, r) in gen::pair()) {
        let v = annaforge::metamorph::analysis_equivalent(&l, &r, &Default::default());
        let diff = l.findings.len() as isize - r.findings.len() as isize;
        prop_assert_eq!(v.only_in_left.len() as isize - v.only_in_right.len() as isize, diff);
    }
}
