use cfd_core::{DomainError, MultiplicityDomain, Term};
use proptest::prelude::*;

const SCAN: u64 = 400;

fn term() -> impl Strategy<Value = Term> {
    (0u64..40, 1u64..6, prop::option::of(0u64..60)).prop_map(|(start, step, len)| Term {
        start,
        step,
        end: len.map(|l| start + l),
    })
}

fn scan(terms: &[Term], c: u64) -> bool {
    terms.iter().any(|t| t.contains(c))
}

proptest! {
    #[test]
    fn membership_matches_the_terms(terms in prop::collection::vec(term(), 1..4)) {
        let listed: Vec<u64> = (0..SCAN).filter(|&c| scan(&terms, c)).collect();
        match MultiplicityDomain::new(&terms) {
            Ok(d) => {
                for c in 0..SCAN {
                    prop_assert_eq!(d.contains(c), scan(&terms, c), "{} at {}", d, c);
                }
                prop_assert_eq!(d.min(), listed[0]);
                prop_assert_eq!(d.contains_zero(), listed[0] == 0);
                let finite = terms.iter().all(|t| t.end.is_some());
                prop_assert_eq!(d.is_finite(), finite);
                if finite {
                    prop_assert_eq!(d.max(), listed.last().copied());
                }
                prop_assert_eq!(d.members_up_to(SCAN - 1), listed.clone());
                prop_assert_eq!(d.count_between(3, 200), (3..=200).filter(|&c| scan(&terms, c)).count() as u64);
            }
            Err(DomainError::OnlyZero) => prop_assert_eq!(listed, vec![0]),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn text_round_trip(terms in prop::collection::vec(term(), 1..4)) {
        if let Ok(d) = MultiplicityDomain::new(&terms) {
            let back: MultiplicityDomain = d.to_string().parse().unwrap();
            prop_assert_eq!(back, d);
        }
    }

    #[test]
    fn union_is_pointwise(a in prop::collection::vec(term(), 1..3), b in prop::collection::vec(term(), 1..3)) {
        if let (Ok(da), Ok(db)) = (MultiplicityDomain::new(&a), MultiplicityDomain::new(&b)) {
            let u = da.union(&db).unwrap();
            for c in 0..SCAN {
                prop_assert_eq!(u.contains(c), da.contains(c) || db.contains(c));
            }
        }
    }

    #[test]
    fn equal_sets_are_equal_domains(values in prop::collection::btree_set(1u64..30, 1..10)) {
        let from_values = MultiplicityDomain::from_values(values.iter().copied()).unwrap();
        let as_terms: Vec<Term> = values.iter().rev().map(|&v| Term::range(v, v)).collect();
        prop_assert_eq!(MultiplicityDomain::new(&as_terms).unwrap(), from_values);
    }
}

#[test]
fn construction_errors() {
    assert_eq!(MultiplicityDomain::new(&[]), Err(DomainError::Empty));
    assert_eq!(MultiplicityDomain::singleton(0), Err(DomainError::OnlyZero));
    assert_eq!(MultiplicityDomain::new(&[Term { start: 1, step: 0, end: None }]), Err(DomainError::ZeroStep));
    assert_eq!(MultiplicityDomain::range(4, 2), Err(DomainError::EmptyRange { start: 4, end: 2 }));
}
