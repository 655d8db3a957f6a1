mod common;

use proptest::prelude::*;
use rand::Rng;

use embq::catalog::complete;
use embq::logic::{
    apply_interpretation, evaluate_idx, parse_formula, quantifier_member, quantifier_rank,
    substitute_interpretation, Formula, Interpretation, QuantifierDef, Registry,
};
use embq::structure::all_structures;
use embq::Vocabulary;

use common::{brute_embeds, rng, test_registry, tuples, FormulaGen};

fn scope_xy() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

proptest! {
    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>(), depth in 0usize..=4) {
        let reg = test_registry();
        let vocab = Vocabulary::new([("E", 2), ("U", 1)]).unwrap();
        let gen = FormulaGen::new(&vocab, &reg);
        let phi = gen.formula(&mut rng(seed), depth, &scope_xy());
        let text = phi.to_string();
        let back = parse_formula(&text, &vocab, &reg).unwrap();
        prop_assert_eq!(&back, &phi, "printed as {}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn rank_ignores_negation_and_regrouping(seed in any::<u64>()) {
        let reg = test_registry();
        let vocab = Vocabulary::graph();
        let gen = FormulaGen::new(&vocab, &reg);
        let mut r = rng(seed);
        let (a, b, c) = (
            gen.formula(&mut r, 3, &scope_xy()),
            gen.formula(&mut r, 3, &scope_xy()),
            gen.formula(&mut r, 3, &scope_xy()),
        );
        let expected = quantifier_rank(&a).max(quantifier_rank(&b)).max(quantifier_rank(&c));
        prop_assert_eq!(quantifier_rank(&Formula::not(a.clone())), quantifier_rank(&a));
        let left = Formula::and(vec![Formula::and(vec![a.clone(), b.clone()]), c.clone()]);
        let right = Formula::and(vec![a.clone(), Formula::and(vec![b.clone(), c.clone()])]);
        let flat = Formula::or(vec![a, b, c]);
        prop_assert_eq!(quantifier_rank(&left), expected);
        prop_assert_eq!(quantifier_rank(&right), expected);
        prop_assert_eq!(quantifier_rank(&flat), expected);
    }
}

#[test]
fn complement_membership_is_failure_to_contain_a_generator() {
    let vocab = Vocabulary::graph();
    let mut path2 = embq::Structure::numbered(vocab.clone(), 3).unwrap();
    path2.add_idx("E", &[0, 1]).unwrap();
    path2.add_idx("E", &[1, 2]).unwrap();
    let generator_sets = [
        vec![complete(2)],
        vec![complete(3)],
        vec![path2.clone(), complete(3)],
    ];
    for gens in generator_sets {
        let inner = QuantifierDef::embedding_closure("inner", gens.clone()).unwrap();
        let q = QuantifierDef::complement("outer", inner).unwrap();
        for n in 0..=3 {
            for s in all_structures(&vocab, n, 1 << 12).unwrap() {
                let expected = !gens.iter().any(|g| brute_embeds(g, &s));
                assert_eq!(quantifier_member(&q, &s).unwrap(), expected, "{s}");
            }
        }
    }
}

#[test]
fn interpretations_commute_with_evaluation() {
    let tau = Vocabulary::new([("E", 2), ("U", 1)]).unwrap();
    let sigma = Vocabulary::new([("R", 2), ("P", 1)]).unwrap();
    let reg = test_registry();
    let body_gen = FormulaGen::new(&tau, &reg);
    let phi_gen = FormulaGen::new(&sigma, &Registry::new());
    let mut r = rng(404);
    for _ in 0..100 {
        let n = r.gen_range(0..=3);
        let a = common::random_structure(&mut r, &tau, n, 0.5);
        let r_body = body_gen.formula(&mut r, 2, &scope_xy());
        let p_body = body_gen.formula(&mut r, 2, &["x".to_string()]);
        let mut defs = indexmap::IndexMap::new();
        defs.insert(
            "R".to_string(),
            embq::logic::RelationDef {
                params: scope_xy(),
                body: r_body,
            },
        );
        defs.insert(
            "P".to_string(),
            embq::logic::RelationDef {
                params: vec!["x".into()],
                body: p_body,
            },
        );
        let interp = Interpretation::new(sigma.clone(), defs).unwrap();
        let phi = phi_gen.formula(&mut r, 3, &scope_xy());
        let star = substitute_interpretation(&phi, &interp).unwrap();
        let image = apply_interpretation(&interp, &a).unwrap();
        for t in tuples(n, 2) {
            let env: Vec<(String, usize)> = scope_xy().into_iter().zip(t.iter().copied()).collect();
            assert_eq!(
                evaluate_idx(&a, &star, &env).unwrap(),
                evaluate_idx(&image, &phi, &env).unwrap(),
                "{phi} vs {star} at {t:?}"
            );
        }
    }
}
