use std::collections::BTreeSet;

use cfd_core::{fid, mset, parse_mset, FeatureId, HMultiset};
use proptest::prelude::*;

fn name() -> impl Strategy<Value = FeatureId> {
    prop::sample::select(vec!["a", "b", "c", "d", "e"]).prop_map(fid)
}

fn build(atoms: Vec<(FeatureId, u64)>, nested: Vec<(HMultiset, u64)>) -> HMultiset {
    let mut m = HMultiset::new();
    for (f, c) in atoms {
        m.insert_atom(f, c).unwrap();
    }
    for (k, c) in nested {
        m.insert_nested(k, c).unwrap();
    }
    m
}

fn multiset() -> impl Strategy<Value = HMultiset> {
    let leaf = prop::collection::vec((name(), 1u64..4), 0..4).prop_map(|a| build(a, Vec::new()));
    leaf.prop_recursive(3, 24, 3, |inner| {
        (prop::collection::vec((name(), 1u64..4), 0..3), prop::collection::vec((inner, 1u64..4), 0..3))
            .prop_map(|(a, n)| build(a, n))
    })
}

/// Structural walk: every (key, count) pair, recursively, as text.
fn walk(m: &HMultiset, out: &mut Vec<String>) {
    for (f, c) in m.atoms() {
        out.push(format!("{f}^{c}"));
    }
    for (k, c) in m.nested() {
        out.push(format!("{k}^{c}"));
        walk(k, out);
    }
}

proptest! {
    #[test]
    fn union_is_commutative_and_associative(a in multiset(), b in multiset(), c in multiset()) {
        prop_assert_eq!(a.union(&b).unwrap(), b.union(&a).unwrap());
        prop_assert_eq!(a.union(&b).unwrap().union(&c).unwrap(), a.union(&b.union(&c).unwrap()).unwrap());
        prop_assert_eq!(a.union(&HMultiset::new()).unwrap(), a);
    }

    #[test]
    fn scale_is_repeated_union(a in multiset(), k in 1u64..4) {
        let mut acc = HMultiset::new();
        for _ in 0..k {
            acc = acc.union(&a).unwrap();
        }
        prop_assert_eq!(a.scale(k).unwrap(), acc);
    }

    #[test]
    fn literal_round_trip(a in multiset()) {
        prop_assert_eq!(parse_mset(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn equality_is_textual_equality(a in multiset(), b in multiset()) {
        prop_assert_eq!(a == b, a.to_string() == b.to_string());
    }

    #[test]
    fn relax_is_idempotent_and_keeps_the_flat_domain(a in multiset()) {
        let r = a.relax();
        prop_assert_eq!(r.relax(), r.clone());
        prop_assert_eq!(r.flatten().unwrap().flat_domain(), a.flatten().unwrap().flat_domain());
        let mut counts = Vec::new();
        walk(&r, &mut counts);
        prop_assert!(counts.iter().all(|s| s.ends_with("^1")));
    }

    #[test]
    fn flatten_is_additive(a in multiset(), b in multiset(), k in 1u64..4) {
        let fa = a.flatten().unwrap();
        let fb = b.flatten().unwrap();
        prop_assert_eq!(a.union(&b).unwrap().flatten().unwrap(), fa.union(&fb).unwrap());
        prop_assert_eq!(a.scale(k).unwrap().flatten().unwrap(), fa.scale(k).unwrap());
        prop_assert!(fa.is_flat());
        for f in fa.flat_domain() {
            prop_assert_eq!(a.flat_multiplicity(&f).unwrap(), fa.atom_count(&f));
        }
    }

    #[test]
    fn rank_of_union_is_the_larger_rank(a in multiset(), b in multiset()) {
        prop_assert_eq!(a.union(&b).unwrap().rank(), a.rank().max(b.rank()));
    }

    #[test]
    fn ingredients_are_the_nested_keys_at_any_depth(a in multiset()) {
        let mut keys = BTreeSet::new();
        let mut stack = vec![a.clone()];
        while let Some(m) = stack.pop() {
            for (k, _) in m.nested() {
                keys.insert(k.clone());
                stack.push(k.clone());
            }
        }
        prop_assert_eq!(a.ingredients(), keys);
    }
}

#[test]
fn duplicate_keys_collapse_before_counting() {
    let m = mset("[[a],[a]^2]");
    let mut walked = Vec::new();
    walk(&m, &mut walked);
    assert_eq!(walked, ["[a]^3", "a^1"]);
    assert_eq!(m.nested_len(), 1);
}
