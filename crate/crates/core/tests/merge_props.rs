mod common;

use std::collections::BTreeSet;

use cfd_core::flat::count_products;
use cfd_core::hier::{enumerate_hier, is_hier_product};
use cfd_core::merge::{
    are_mergeable, completeness_report, mergeable_via_relaxed, relax_set, representative_cfd, reverse_engineer,
};
use cfd_core::random::{mutate, random_cfd, random_tree_like_set, CfdShape};
use cfd_core::{Cfd, HMultiset, MergeInput, DEFAULT_LIMIT};
use proptest::prelude::*;
use rand::Rng;

const SHAPE: CfdShape = CfdShape { max_features: 8, max_depth: 4, max_mult: 3, grouped_zero: false };
const CAP: u128 = 2_000;

fn theory(d: &Cfd, bound: u64) -> BTreeSet<HMultiset> {
    enumerate_hier(d, bound, DEFAULT_LIMIT).unwrap().products
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn relaxed_decision_agrees(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let u = MergeInput::new(random_tree_like_set(&mut rng)).unwrap();
        prop_assert_eq!(are_mergeable(&u), mergeable_via_relaxed(&u), "{:?}", u.to_set());
    }

    #[test]
    fn representatives_hold_every_input(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let u = MergeInput::new(random_tree_like_set(&mut rng)).unwrap();
        prop_assume!(are_mergeable(&u));
        let d = representative_cfd(&u).unwrap();
        prop_assert!(d.groups().all(|(g, _)| g.len() > 1));
        prop_assert!(d.is_finite());
        for t in u.multisets() {
            prop_assert!(is_hier_product(&d, t).unwrap(), "{} not in {:?}", t, d);
        }
        let bound = d.max_multiplicity().unwrap().max(1);
        if count_products(&d, bound) <= CAP {
            let all = theory(&d, bound);
            prop_assert!(u.multisets().all(|t| all.contains(t)));
        }
        let r = relax_set(&u);
        let rd = representative_cfd(&r).unwrap();
        prop_assert!(r.len() as u128 <= count_products(&rd, 1));
    }

    #[test]
    fn theories_reverse_engineer_to_their_diagram(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = random_cfd(&mut rng, &SHAPE);
        prop_assume!(count_products(&d, 3) <= CAP);
        let u = MergeInput::new(theory(&d, 3)).unwrap();
        let back = reverse_engineer(&u).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(theory(&back, u.max_multiplicity()), u.to_set());
    }

    #[test]
    fn mutations_change_the_theory(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = random_cfd(&mut rng, &SHAPE);
        let m = (0..20).find_map(|_| mutate(&mut rng, &d, 3));
        prop_assume!(m.is_some());
        let m = m.unwrap();
        prop_assume!(count_products(&d, 3) <= CAP && count_products(&m, 3) <= CAP);
        prop_assert_ne!(theory(&d, 3), theory(&m, 3), "{:?} vs {:?}", d, m);
    }

    #[test]
    fn complete_verdicts_are_certified(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = random_cfd(&mut rng, &SHAPE);
        prop_assume!(count_products(&d, 3) <= 200);
        let full: Vec<HMultiset> = theory(&d, 3).into_iter().collect();
        let subset: Vec<HMultiset> = full.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
        prop_assume!(!subset.is_empty());
        let u = MergeInput::new(subset).unwrap();
        let r = completeness_report(&u);
        if let Some(c) = &r.certificate {
            prop_assert!(r.mergeable && r.relaxed_complete && r.combinations_complete);
            prop_assert_eq!(theory(c, u.max_multiplicity()), u.to_set());
        }
        if !r.relaxed_complete || !r.combinations_complete {
            prop_assert!(r.certificate.is_none());
        }
    }
}
