mod common;

use std::collections::BTreeMap;

use gramconv::anf::{is_anf, normalize};
use gramconv::bgf::canonical_eq;
use gramconv::converge::trigger_mutations;
use gramconv::xbgf::{apply_script, invert_script, StepKind};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn antlr_trace_composition() {
    let (mutated, _) = trigger_mutations(&common::load("antlr")).unwrap();
    let a = normalize(&mutated).unwrap();
    assert_eq!(a.trace.len(), 24);
    let mut counts: BTreeMap<StepKind, usize> = BTreeMap::new();
    for s in &a.trace {
        *counts.entry(s.kind()).or_default() += 1;
    }
    let expected: BTreeMap<StepKind, usize> = [
        (StepKind::Reroot, 1),
        (StepKind::Anonymize, 7),
        (StepKind::Abstractize, 4),
        (StepKind::Vertical, 1),
        (StepKind::Undefine, 1),
        (StepKind::Unchain, 3),
        (StepKind::Abridge, 1),
        (StepKind::Unlabel, 3),
        (StepKind::Extract, 3),
    ]
    .into();
    assert_eq!(counts, expected);
    assert_eq!(a.trace[0].kind(), StepKind::Reroot);
}

#[test]
fn traces_replay_to_the_result() {
    for name in common::SERVANTS {
        let g = common::load(name);
        let a = normalize(&g).unwrap();
        assert!(is_anf(&a.grammar), "{name}");
        let (replayed, _) = apply_script(&g, &a.trace).unwrap();
        assert!(canonical_eq(&replayed, &a.grammar), "{name}");
    }
}

#[test]
fn master_is_a_fixed_point() {
    let m = common::master();
    let a = normalize(&m).unwrap();
    assert!(a.trace.is_empty());
    assert!(canonical_eq(&a.grammar, &m));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_grammars_reach_anf(seed in any::<u64>()) {
        let g = common::random_bgf(&mut StdRng::seed_from_u64(seed), 8);
        let a = normalize(&g).unwrap();
        prop_assert!(is_anf(&a.grammar));
        let (replayed, _) = apply_script(&g, &a.trace).unwrap();
        prop_assert!(canonical_eq(&replayed, &a.grammar));
        prop_assert!(normalize(&a.grammar).unwrap().trace.is_empty());
        let (_, done) = apply_script(&g, &a.trace).unwrap();
        let (back, _) = apply_script(&a.grammar, &invert_script(&done).unwrap()).unwrap();
        prop_assert!(canonical_eq(&back, &g));
    }
}
