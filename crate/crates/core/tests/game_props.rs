mod common;

use proptest::prelude::*;
use rand::Rng;

use embq::game::{
    duplicator_survives, min_distinguishing_round, sym_embedding_exists, sym_game, verify_outcome,
    verify_sym_outcome, ClassGroup, Position, SymCard, SymEqStructure, SymPin,
};
use embq::morphism::{bi_embeddable, isomorphic, Matcher, MorphismKind};
use embq::structure::{all_structures, structures_up_to_iso};
use embq::{Error, Structure, Vocabulary};

use common::{
    arb_graph, backtrack_embeds, brute_embeddings, brute_isomorphic, random_structure, rng,
    shuffled,
};

/// A random position on graphs with at most `max_n` elements and up to two pins.
fn arb_position(max_n: usize) -> impl Strategy<Value = Position> {
    (arb_graph(max_n), arb_graph(max_n), 0usize..=2, any::<u64>()).prop_map(|(a, b, k, seed)| {
        let mut r = rng(seed);
        let k = if a.is_empty() || b.is_empty() { 0 } else { k };
        let abar: Vec<usize> = (0..k).map(|_| r.gen_range(0..a.len())).collect();
        let bbar: Vec<usize> = (0..k).map(|_| r.gen_range(0..b.len())).collect();
        Position::new(a.clone(), a.tuple_ids(&abar), b.clone(), b.tuple_ids(&bbar)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survival_is_monotone_in_rounds(p in arb_position(3)) {
        let mut previous = true;
        for n in 0..=3 {
            let now = duplicator_survives(&p, n).unwrap().survives;
            prop_assert!(previous || !now, "survives {n} rounds but not {}", n - 1);
            previous = now;
        }
    }

    #[test]
    fn witnesses_replay(p in arb_position(3), n in 0usize..=2) {
        let out = duplicator_survives(&p, n).unwrap();
        prop_assert!(verify_outcome(&p, &out).unwrap());
        let mut forged = out.clone();
        forged.survives = !forged.survives;
        prop_assert!(!verify_outcome(&p, &forged).unwrap());
    }
}

#[test]
fn one_round_is_isomorphism() {
    let vocab = Vocabulary::graph();
    let labeled: Vec<Structure> = (0..=3)
        .flat_map(|n| all_structures(&vocab, n, 1 << 10).unwrap())
        .collect();
    let classes: Vec<Structure> = (0..=3)
        .flat_map(|n| structures_up_to_iso(&vocab, n, 1 << 10).unwrap())
        .collect();
    assert_eq!(labeled.len(), 1 + 2 + 16 + 512);
    for a in &labeled {
        for b in &classes {
            let p = Position::unpinned(a.clone(), b.clone()).unwrap();
            let survives = duplicator_survives(&p, 1).unwrap().survives;
            assert_eq!(survives, bi_embeddable(a, b).unwrap(), "{a} vs {b}");
            assert_eq!(survives, isomorphic(a, b).unwrap(), "{a} vs {b}");
            if a.len() == b.len() {
                assert_eq!(survives, brute_isomorphic(a, b), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn non_isomorphic_pairs_are_split_in_round_one() {
    let mut r = rng(50);
    let vocab = Vocabulary::graph();
    let mut found = 0;
    while found < 50 {
        let n = r.gen_range(1..=4);
        let a = random_structure(&mut r, &vocab, n, 0.5);
        let m = r.gen_range(1..=4);
        let b = random_structure(&mut r, &vocab, m, 0.5);
        if isomorphic(&a, &b).unwrap() {
            continue;
        }
        let d = min_distinguishing_round(&a, &b, 3).unwrap();
        assert_eq!(d.round, Some(1), "{a} vs {b}");
        found += 1;
        let copy = shuffled(&mut r, &a);
        let d = min_distinguishing_round(&a, &copy, 3).unwrap();
        assert!(d.cap_reached && d.round.is_none());
    }
}

fn random_profile(r: &mut impl Rng, max_classes: u64, max_size: u64) -> SymEqStructure {
    let mut profile = Vec::new();
    let mut remaining = r.gen_range(0..=max_classes);
    while remaining > 0 {
        let count = r.gen_range(1..=remaining);
        profile.push(ClassGroup {
            size: SymCard::Finite(r.gen_range(1..=max_size)),
            count: SymCard::Finite(count),
        });
        remaining -= count;
    }
    SymEqStructure::new(profile, Vec::new()).unwrap()
}

fn random_pins(r: &mut impl Rng, s: &SymEqStructure, ids: &[&str]) -> Vec<SymPin> {
    if s.profile.is_empty() {
        return Vec::new();
    }
    ids.iter()
        .map(|id| {
            let group = r.gen_range(0..s.profile.len());
            let g = s.profile[group];
            let (SymCard::Finite(size), SymCard::Finite(count)) = (g.size, g.count) else {
                unreachable!()
            };
            SymPin {
                id: id.to_string(),
                group,
                class: r.gen_range(0..count),
                element: r.gen_range(0..size),
            }
        })
        .collect()
}

#[test]
fn symbolic_embedding_test_matches_matcher() {
    let mut r = rng(17);
    let mut checked = 0;
    for _ in 0..400 {
        let left = random_profile(&mut r, 4, 3);
        let right = random_profile(&mut r, 4, 3);
        let k = if left.profile.is_empty() || right.profile.is_empty() {
            0
        } else {
            r.gen_range(0..=2)
        };
        let ids = &["p", "q"][..k];
        let left =
            SymEqStructure::new(left.profile.clone(), random_pins(&mut r, &left, ids)).unwrap();
        let right =
            SymEqStructure::new(right.profile.clone(), random_pins(&mut r, &right, ids)).unwrap();
        let (a, apins) = left.materialize().unwrap();
        let (b, bpins) = right.materialize().unwrap();
        let pins: Vec<(usize, usize)> = ids
            .iter()
            .map(|id| {
                (
                    a.element(&apins[*id]).unwrap(),
                    b.element(&bpins[*id]).unwrap(),
                )
            })
            .collect();
        let pin_map: Vec<(String, String)> = ids
            .iter()
            .map(|id| (id.to_string(), id.to_string()))
            .collect();
        let brute = backtrack_embeds(&a, &b, &pins);
        if a.len() <= 6 && b.len() <= 6 {
            assert_eq!(brute, !brute_embeddings(&a, &b, &pins).is_empty());
        }
        match sym_embedding_exists(&left, &right, &pin_map) {
            Ok(exists) => {
                assert_eq!(exists, brute, "{left} -> {right} with {pins:?}");
                let m = Matcher::new(MorphismKind::Embedding, &a, &b).unwrap();
                assert_eq!(exists, m.find(&pins).unwrap().is_some());
            }
            Err(Error::InconsistentPins(_)) => assert!(!brute, "{left} -> {right} with {pins:?}"),
            Err(e) => panic!("{e}"),
        }
        checked += 1;
    }
    assert_eq!(checked, 400);
}

#[test]
fn symbolic_game_matches_finite_game_on_materializations() {
    let mut r = rng(23);
    for _ in 0..120 {
        let left = random_profile(&mut r, 3, 2);
        let right = random_profile(&mut r, 3, 2);
        let k = if left.profile.is_empty() || right.profile.is_empty() {
            0
        } else {
            r.gen_range(0..=1)
        };
        let ids = &["p"][..k];
        let left =
            SymEqStructure::new(left.profile.clone(), random_pins(&mut r, &left, ids)).unwrap();
        let right =
            SymEqStructure::new(right.profile.clone(), random_pins(&mut r, &right, ids)).unwrap();
        let (a, apins) = left.materialize().unwrap();
        let (b, bpins) = right.materialize().unwrap();
        let p = Position::new(
            a,
            ids.iter().map(|id| apins[*id].clone()).collect(),
            b,
            ids.iter().map(|id| bpins[*id].clone()).collect(),
        )
        .unwrap();
        for n in 0..=2 {
            let finite = duplicator_survives(&p, n).unwrap().survives;
            match sym_game(&left, &right, n) {
                Ok(sym) => {
                    assert_eq!(
                        sym.survives, finite,
                        "{left} vs {right}, pins {ids:?}, n = {n}"
                    );
                    assert!(verify_sym_outcome(&sym));
                }
                Err(Error::InconsistentPins(_)) => assert_eq!(n, 0),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn symbolic_survival_is_monotone() {
    let profiles = [
        "(aleph1 x aleph0)",
        "(aleph1 x aleph0),(aleph0 x 1)",
        "(aleph0 x aleph0)",
        "(aleph0 x 2),(1 x aleph0)",
        "(2 x 3)",
        "(2 x 2),(1 x 1)",
    ];
    for l in profiles {
        for rp in profiles {
            let left = SymEqStructure::parse_profile(l).unwrap();
            let right = SymEqStructure::parse_profile(rp).unwrap();
            let mut previous = true;
            for n in 0..=3 {
                let out = sym_game(&left, &right, n).unwrap();
                assert!(verify_sym_outcome(&out));
                assert!(previous || !out.survives, "{l} vs {rp} at {n}");
                previous = out.survives;
            }
        }
    }
}
