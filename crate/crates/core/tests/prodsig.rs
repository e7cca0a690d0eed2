mod common;

use gramconv::bgf::parse_bgf;
use gramconv::prodsig::{match_grammars, production_signature, MatchError};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn master_signatures() {
    let m = common::master();
    let sigs: Vec<String> = m
        .productions
        .iter()
        .map(|p| production_signature(p).unwrap().to_string())
        .collect();
    assert_eq!(sigs[0], "{⟨function, +⟩}");
    assert_eq!(sigs[1], "{⟨expression, 1⟩, ⟨str, 1+⟩}");
    assert_eq!(sigs[7], "{⟨expression, 11⟩, ⟨operator, 1⟩}");
    assert_eq!(sigs[9], "{⟨expression, 111⟩}");
}

#[test]
fn non_anf_input_is_rejected() {
    let g = parse_bgf("a : \"x\" b ;").unwrap();
    let m = common::master();
    assert!(matches!(match_grammars(&g, &m), Err(MatchError::NotAnf(_))));
}

#[test]
fn extra_servant_productions_stay_unmatched() {
    let m = common::master();
    let mut s = m.clone();
    s.productions.push(parse_bgf("helper : str ;").unwrap().productions.remove(0));
    let r = match_grammars(&s, &m).unwrap();
    assert!(r.matches.last().unwrap().master.is_none());
    assert!(r.mapping.get("helper").is_none());
    assert!(r.mapping.is_identity());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimal_against_exhaustive_search(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let master = common::random_anf(&mut rng, 6);
        let servant = common::perturbed_servant(&mut rng, &master, 8);
        let best = common::oracle::best_strong_count(&servant, &master);
        match match_grammars(&servant, &master) {
            Ok(r) => {
                let strong = common::oracle::check_assignment(&servant, &master, &r).unwrap();
                prop_assert_eq!(Some(strong), best);
            }
            Err(_) => prop_assert_eq!(best, None),
        }
    }
}
