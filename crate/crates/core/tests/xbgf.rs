mod common;

use gramconv::bgf::canonical_eq;
use gramconv::cli::full_script;
use gramconv::converge::converge;
use gramconv::xbgf::{apply_script, invert_script, parse_script, serialize_script, Step};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn convergence_scripts_survive_text_and_invert() {
    let m = common::master();
    for name in common::SERVANTS {
        let source = common::load(name);
        let r = converge(&source, &m).unwrap();
        let script = full_script(&r);
        let parsed = parse_script(&serialize_script(&script)).unwrap();
        assert_eq!(parsed, script, "{name}");
        let (out, done) = apply_script(&source, &parsed).unwrap();
        assert!(canonical_eq(&out, &m), "{name}");
        let (back, _) = apply_script(&out, &invert_script(&done).unwrap()).unwrap();
        assert!(canonical_eq(&back, &source), "{name}");
    }
}

#[test]
fn hand_written_script_without_payloads() {
    let g = common::load("dcg");
    let script = parse_script(
        "unite(atom, expr)\n\
         renameN(name, str)\n\
         reroot([], [program])\n",
    )
    .unwrap();
    let (out, done) = apply_script(&g, &script).unwrap();
    assert!(out.mentions("str") && !out.mentions("atom"));
    assert!(matches!(&done[0], Step::Unite { rewrites: Some(rw), .. } if !rw.is_empty()));
    let (back, _) = apply_script(&out, &invert_script(&done).unwrap()).unwrap();
    assert!(canonical_eq(&back, &g));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn renames_invert(seed in any::<u64>()) {
        let g = common::random_anf(&mut StdRng::seed_from_u64(seed), 8);
        let names = g.nonterminals();
        let script: Vec<Step> = names
            .iter()
            .map(|n| Step::RenameN { from: n.clone(), to: format!("{n}_r") })
            .collect();
        let (out, done) = apply_script(&g, &script).unwrap();
        prop_assert!(names.iter().all(|n| !out.mentions(n)));
        let (back, _) = apply_script(&out, &invert_script(&done).unwrap()).unwrap();
        prop_assert!(canonical_eq(&back, &g));
    }
}
