mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use embq::logic::{evaluate_idx, Registry};
use embq::morphism::check_idx;
use embq::morphism::MorphismKind;
use embq::structure::{all_structures, canonical_form, disjoint_union};
use embq::types::{atomic_type_idx, enumerate_atomic_types, qf_to_type_disjunction};
use embq::Vocabulary;

use common::{arb_graph, rng, tuples, FormulaGen};

fn arb_graph_with_tuple(
    max_n: usize,
    len: usize,
) -> impl Strategy<Value = (embq::Structure, Vec<usize>)> {
    arb_graph(max_n)
        .prop_filter("nonempty", |s| !s.is_empty())
        .prop_flat_map(move |s| {
            let n = s.len();
            (Just(s), proptest::collection::vec(0..n, len))
        })
}

proptest! {
    #[test]
    fn canonical_model_embeds_via_tuple((a, t) in (0usize..=3).prop_flat_map(|k| arb_graph_with_tuple(4, k))) {
        let ty = atomic_type_idx(&a, &t);
        let model = ty.canonical_model(a.vocab()).unwrap();
        // block b is realized by the first tuple position in that block
        let map: Vec<usize> = (0..ty.blocks())
            .map(|b| t[ty.eq_pattern.iter().position(|&x| x == b).unwrap()])
            .collect();
        prop_assert!(check_idx(MorphismKind::Embedding, &model, &a, &map));
        prop_assert_eq!(atomic_type_idx(&model, &ty.canonical_tuple()), ty);
    }

    #[test]
    fn disjoint_union_commutes(a in arb_graph(3), b in arb_graph(3)) {
        let ab = disjoint_union(&a, &b).unwrap();
        let ba = disjoint_union(&b, &a).unwrap();
        prop_assert_eq!(canonical_form(&ab).unwrap(), canonical_form(&ba).unwrap());
    }

    #[test]
    fn disjoint_union_associates(a in arb_graph(2), b in arb_graph(2), c in arb_graph(2)) {
        let left = disjoint_union(&disjoint_union(&a, &b).unwrap(), &c).unwrap();
        let right = disjoint_union(&a, &disjoint_union(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(canonical_form(&left).unwrap(), canonical_form(&right).unwrap());
    }
}

#[test]
fn qf_disjunction_matches_evaluation_on_small_graphs() {
    let vocab = Vocabulary::graph();
    let reg = Registry::new();
    let gen = FormulaGen::new(&vocab, &reg).without_quantifiers();
    let mut r = rng(5);
    let vars: Vec<String> = vec!["x".into(), "y".into()];
    let structures: Vec<_> = (1..=4).flat_map(|n| (0..8).map(move |k| (n, k))).collect();
    for _ in 0..40 {
        let phi = loop {
            let f = gen.formula(&mut r, 3, &vars);
            if f.is_quantifier_free() {
                break f;
            }
        };
        let theta = qf_to_type_disjunction(&phi, &vocab, &vars).unwrap();
        for &(n, _) in &structures {
            let a = common::random_structure(&mut r, &vocab, n, 0.5);
            for t in tuples(n, 2) {
                let env: Vec<(String, usize)> =
                    vars.iter().cloned().zip(t.iter().copied()).collect();
                let holds = evaluate_idx(&a, &phi, &env).unwrap();
                assert_eq!(
                    holds,
                    theta.types.contains(&atomic_type_idx(&a, &t)),
                    "{phi} at {t:?} in {a}"
                );
            }
        }
    }
}

#[test]
fn enumeration_is_sorted_and_complete() {
    for (vocab, n) in [
        (Vocabulary::graph(), 0),
        (Vocabulary::graph(), 1),
        (Vocabulary::graph(), 2),
        (Vocabulary::new([("U", 1)]).unwrap(), 2),
        (Vocabulary::new([("U", 1)]).unwrap(), 3),
        (Vocabulary::new([("E", 2), ("U", 1)]).unwrap(), 2),
    ] {
        let types = enumerate_atomic_types(&vocab, n).unwrap();
        assert!(
            types.windows(2).all(|w| w[0] < w[1]),
            "not strictly increasing"
        );
        let patterns: Vec<Vec<usize>> = types.iter().map(|t| t.eq_pattern.clone()).collect();
        let mut rgs_order = patterns.clone();
        rgs_order.dedup();
        assert!(rgs_order.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rgs_order.len(), [1, 1, 2, 5, 15][n]);
        for p in &rgs_order {
            let mut next = 0;
            for &b in p {
                assert!(b <= next, "{p:?} is not a restricted growth string");
                next = next.max(b + 1);
            }
        }

        // every type is realized by some tuple in a structure with at most n elements
        let mut realized = BTreeSet::new();
        for size in 0..=n {
            for a in all_structures(&vocab, size, 1 << 16).unwrap() {
                for t in tuples(size, n) {
                    realized.insert(atomic_type_idx(&a, &t));
                }
            }
        }
        let listed: BTreeSet<_> = types.iter().cloned().collect();
        assert_eq!(listed.len(), types.len());
        assert_eq!(listed, realized, "{n}-types over {vocab:?}");
    }
}
