mod oracle;

use std::collections::BTreeSet;

use dadw_core::corpus;
use dadw_core::group::{Element, QuotientElement};
use dadw_core::space::{ClopenSet, CosetSet, Decision, Emptiness, PatternSet, Space};
use proptest::prelude::*;

fn system(name: &str) -> Space {
    corpus::build_system(name, &Default::default()).unwrap()
}

fn coset_set(dihedral: bool) -> impl Strategy<Value = ClopenSet> {
    (0usize..5).prop_flat_map(move |level| {
        let size = (1usize << level) * if dihedral { 2 } else { 1 };
        proptest::collection::btree_set(0..size, 0..=size).prop_map(move |cosets| {
            ClopenSet::Cosets(CosetSet {
                level,
                cosets: cosets.into_iter().collect(),
            })
        })
    })
}

fn dinf_element() -> impl Strategy<Value = Element> {
    (any::<bool>(), -20i64..20).prop_map(|(r, k)| {
        Element::new(
            0,
            if r {
                QuotientElement::reflection(k)
            } else {
                QuotientElement::translation(k)
            },
        )
    })
}

fn fibonacci_set() -> impl Strategy<Value = ClopenSet> {
    let words = oracle::factors(&oracle::iterate(&[('a', "ab"), ('b', "a")], "a", 12), 4);
    let words: Vec<String> = words.into_iter().collect();
    (-6i64..6, proptest::sample::subsequence(words, 0..=5)).prop_map(|(start, words)| {
        ClopenSet::Patterns(PatternSet { start, len: 4, words })
    })
}

fn same(space: &Space, a: &ClopenSet, b: &ClopenSet) -> bool {
    space.same_set(a, b) == Decision::Yes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_distributes_on_the_dihedral_odometer(
        a in coset_set(true), b in coset_set(true), g in dinf_element(),
    ) {
        let x = system("dihedral_odometer");
        let ga = x.translate(&g, &a).unwrap();
        let gb = x.translate(&g, &b).unwrap();
        let u = x.union(&a, &b).unwrap();
        let i = x.intersect(&a, &b).unwrap();
        prop_assert!(same(&x, &x.translate(&g, &u).unwrap(), &x.union(&ga, &gb).unwrap()));
        prop_assert!(same(&x, &x.translate(&g, &i).unwrap(), &x.intersect(&ga, &gb).unwrap()));
        let c = x.complement(&a).unwrap();
        prop_assert!(same(&x, &x.translate(&g, &c).unwrap(), &x.complement(&ga).unwrap()));
        let back = x.translate(&x.group().inverse(&g).unwrap(), &ga).unwrap();
        prop_assert_eq!(x.canonicalize(&a).unwrap(), back);
    }

    #[test]
    fn canonical_form_is_idempotent_and_unique(a in coset_set(false), b in coset_set(false)) {
        let x = system("binary_odometer");
        let ca = x.canonicalize(&a).unwrap();
        prop_assert_eq!(x.canonicalize(&ca).unwrap(), ca.clone());
        let cb = x.canonicalize(&b).unwrap();
        prop_assert_eq!(ca == cb, same(&x, &a, &b));
        prop_assert_eq!(x.is_subset(&a, &x.union(&a, &b).unwrap()), Decision::Yes);
        let cc = x.complement(&x.complement(&a).unwrap()).unwrap();
        prop_assert_eq!(cc, ca);
        let meet = x.intersect(&a, &x.complement(&a).unwrap()).unwrap();
        prop_assert_eq!(x.is_empty(&meet), Emptiness::Empty);
    }

    #[test]
    fn subshift_algebra(a in fibonacci_set(), b in fibonacci_set(), k in -8i64..8) {
        let x = system("fibonacci");
        let g = Element::new(0, QuotientElement::translation(k));
        let ga = x.translate(&g, &a).unwrap();
        let gb = x.translate(&g, &b).unwrap();
        let u = x.union(&a, &b).unwrap();
        prop_assert!(same(&x, &x.translate(&g, &u).unwrap(), &x.union(&ga, &gb).unwrap()));
        let i = x.intersect(&a, &b).unwrap();
        prop_assert!(same(&x, &x.translate(&g, &i).unwrap(), &x.intersect(&ga, &gb).unwrap()));
        let ca = x.canonicalize(&a).unwrap();
        prop_assert_eq!(x.canonicalize(&ca).unwrap(), ca.clone());
        let cc = x.complement(&x.complement(&a).unwrap()).unwrap();
        prop_assert!(same(&x, &cc, &a));
    }
}

#[test]
fn fibonacci_language_matches_a_long_prefix() {
    let x = system("fibonacci");
    let sub = x.subshift().unwrap();
    let word = oracle::iterate(&[('a', "ab"), ('b', "a")], "a", 10);
    for n in 1..=10 {
        let oracle_words = oracle::factors(&word, n);
        assert_eq!(oracle_words.len(), n + 1);
        let engine: BTreeSet<String> = sub.language(n).unwrap().iter().cloned().collect();
        assert_eq!(engine, oracle_words, "length {n}");
    }
}

#[test]
fn thue_morse_language_is_reversal_closed() {
    let x = system("thue_morse");
    let sub = x.subshift().unwrap();
    let word = oracle::iterate(&[('a', "ab"), ('b', "ba")], "a", 12);
    for n in 1..=12 {
        let engine: BTreeSet<String> = sub.language(n).unwrap().iter().cloned().collect();
        assert_eq!(engine, oracle::factors(&word, n), "length {n}");
        for w in &engine {
            assert!(engine.contains(&w.chars().rev().collect::<String>()));
        }
    }
}

#[test]
fn fibonacci_has_no_short_period_on_long_factors() {
    let x = system("fibonacci");
    let sub = x.subshift().unwrap();
    for w in sub.language(12).unwrap().iter() {
        assert!(dadw_core::space::least_period(w.as_bytes()) > 3, "{w}");
    }
}

#[test]
fn dihedral_level_sizes_by_coset_enumeration() {
    let x = system("dihedral_odometer");
    let o = x.odometer().unwrap();
    for n in 0..6 {
        let model = oracle::LevelModel {
            modulus: 1 << n,
            h_order: 1,
        };
        // Orbit of the identity coset under s and t.
        let mut seen = BTreeSet::from([0usize]);
        let mut stack = vec![0usize];
        while let Some(c) = stack.pop() {
            for g in [oracle::S, oracle::T] {
                let d = model.act(&Element::new(0, g.to_q()), c);
                if seen.insert(d) {
                    stack.push(d);
                }
            }
        }
        assert_eq!(seen.len(), 2 << n);
        assert_eq!(o.level_size(n), seen.len());
    }
}

#[test]
fn engine_action_matches_the_coset_model() {
    for (name, dihedral) in [("binary_odometer", false), ("dihedral_odometer", true)] {
        let x = system(name);
        let o = x.odometer().unwrap();
        let model = oracle::LevelModel { modulus: 8, h_order: 1 };
        for g in x.group().preimage_ball(6).elements {
            for c in 0..model.size(dihedral) {
                assert_eq!(o.mul(3, o.image(x.group(), &g, 3), c), model.act(&g, c), "{name} {g} {c}");
            }
        }
    }
}
