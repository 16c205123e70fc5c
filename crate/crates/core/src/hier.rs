//! Hierarchical products: nested multisets that mirror the diagram's tree.
//!
//! A product of the diagram induced by `f` holds `f` once, one nested key per
//! present solitary child (counted by the child's multiplicity) and one key
//! per group with selected members (counted once, holding the members'
//! products). Groups with no selected member leave no key.

use std::collections::BTreeSet;
use std::fmt;

use crate::cfd::{fmt_group, Cfd, Group};
use crate::enumerate::{self, Mode};
use crate::error::SemanticsError;
use crate::feature::FeatureId;
use crate::flat::enumerate_flat;
use crate::multiset::HMultiset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HierViolation {
    /// The local root is missing or repeated.
    RootCount { feature: FeatureId, found: u64 },
    /// An urelement other than the local root at the top of a product.
    UnexpectedUrelement { under: FeatureId, found: FeatureId },
    /// A nested key that is neither a child product nor a group key.
    MalformedKey { under: FeatureId, key: HMultiset },
    /// A key rooted at a feature that is not a child of the right kind.
    UnexpectedChild { under: FeatureId, child: FeatureId },
    DuplicateChild { under: FeatureId, child: FeatureId },
    ChildMultiplicity { child: FeatureId, count: u64 },
    MissingChild { under: FeatureId, child: FeatureId },
    EmptyGroupKey { under: FeatureId },
    GroupKeyCount { group: Group, count: u64 },
    MixedGroupKey { under: FeatureId },
    DuplicateGroup { group: Group },
    GroupCardinality { group: Group, selected: usize },
    MissingGroup { group: Group },
}

impl fmt::Display for HierViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use HierViolation::*;
        match self {
            RootCount { feature, found } => write!(f, "{feature} occurs {found} times at its own level, expected 1"),
            UnexpectedUrelement { under, found } => write!(f, "unexpected urelement {found} next to {under}"),
            MalformedKey { under, key } => write!(f, "nested key {key} under {under} has no single root"),
            UnexpectedChild { under, child } => write!(f, "{child} is not a child of {under} in this position"),
            DuplicateChild { under, child } => write!(f, "{child} occurs in two keys under {under}"),
            ChildMultiplicity { child, count } => write!(f, "{child} is chosen {count} times, which its domain does not allow"),
            MissingChild { under, child } => write!(f, "mandatory child {child} of {under} is missing"),
            EmptyGroupKey { under } => write!(f, "empty group key under {under}"),
            GroupKeyCount { group, count } => write!(f, "group key of {} has count {count}, expected 1", fmt_group(group)),
            MixedGroupKey { under } => write!(f, "group key under {under} mixes members of different groups"),
            DuplicateGroup { group } => write!(f, "group {} has two keys", fmt_group(group)),
            GroupCardinality { group, selected } => write!(
                f,
                "group {} has {selected} members selected, which its domain does not allow",
                fmt_group(group)
            ),
            MissingGroup { group } => write!(f, "group {} must select at least one member", fmt_group(group)),
        }
    }
}

type Check = Result<(), HierViolation>;

/// Checks a child key `k`, chosen `n` times, rooted at `a`.
fn check_member(cfd: &Cfd, a: &FeatureId, k: &HMultiset, n: u64) -> Check {
    if !cfd.card(a).expect("non-root").contains(n) {
        return Err(HierViolation::ChildMultiplicity { child: a.clone(), count: n });
    }
    check_at(cfd, a, k)
}

/// Root urelement of a key that should be a child product.
fn key_root(under: &FeatureId, k: &HMultiset) -> Result<FeatureId, HierViolation> {
    let mut atoms = k.atoms();
    match (atoms.next(), atoms.next()) {
        (Some((a, _)), None) => Ok(a.clone()),
        _ => Err(HierViolation::MalformedKey { under: under.clone(), key: k.clone() }),
    }
}

fn check_at(cfd: &Cfd, f: &FeatureId, x: &HMultiset) -> Check {
    let found = x.atom_count(f);
    if found != 1 {
        return Err(HierViolation::RootCount { feature: f.clone(), found });
    }
    if let Some((a, _)) = x.atoms().find(|(a, _)| *a != f) {
        return Err(HierViolation::UnexpectedUrelement { under: f.clone(), found: a.clone() });
    }
    let children = cfd.children(f).expect("known feature");
    let mut seen_children: BTreeSet<FeatureId> = BTreeSet::new();
    let mut seen_groups: BTreeSet<&Group> = BTreeSet::new();
    for (k, n) in x.nested() {
        if k.atom_len() > 0 {
            let a = key_root(f, k)?;
            if !children.contains(&a) || cfd.is_grouped(&a) {
                return Err(HierViolation::UnexpectedChild { under: f.clone(), child: a });
            }
            if !seen_children.insert(a.clone()) {
                return Err(HierViolation::DuplicateChild { under: f.clone(), child: a });
            }
            check_member(cfd, &a, k, n)?;
            continue;
        }
        if k.is_empty() {
            return Err(HierViolation::EmptyGroupKey { under: f.clone() });
        }
        let mut group: Option<&Group> = None;
        let mut roots = BTreeSet::new();
        for (mk, _) in k.nested() {
            let a = key_root(f, mk)?;
            let g = match cfd.group_of(&a).ok().flatten() {
                Some(g) if children.contains(&a) => g,
                _ => return Err(HierViolation::UnexpectedChild { under: f.clone(), child: a }),
            };
            if group.is_some_and(|prev| prev != g) {
                return Err(HierViolation::MixedGroupKey { under: f.clone() });
            }
            group = Some(g);
            if !roots.insert(a.clone()) {
                return Err(HierViolation::DuplicateChild { under: f.clone(), child: a });
            }
        }
        let g = group.expect("non-empty key with nested members");
        if n != 1 {
            return Err(HierViolation::GroupKeyCount { group: g.clone(), count: n });
        }
        if !seen_groups.insert(g) {
            return Err(HierViolation::DuplicateGroup { group: g.clone() });
        }
        if !cfd.group_card(g).expect("known").contains(roots.len() as u64) {
            return Err(HierViolation::GroupCardinality { group: g.clone(), selected: roots.len() });
        }
        for (mk, c) in k.nested() {
            let a = key_root(f, mk)?;
            check_member(cfd, &a, mk, c)?;
        }
    }
    for s in cfd.solitary_children(f).expect("known") {
        if !seen_children.contains(s) && !cfd.card(s).expect("non-root").contains_zero() {
            return Err(HierViolation::MissingChild { under: f.clone(), child: s.clone() });
        }
    }
    for g in cfd.child_groups(f).expect("known") {
        if !seen_groups.contains(g) && !cfd.group_card(g).expect("known").contains_zero() {
            return Err(HierViolation::MissingGroup { group: g.clone() });
        }
    }
    Ok(())
}

fn check_known(cfd: &Cfd, h: &HMultiset) -> Result<(), SemanticsError> {
    let unknown: Vec<FeatureId> = h.flat_domain().into_iter().filter(|f| !cfd.contains(f)).collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(SemanticsError::UnknownFeatures(unknown))
    }
}

/// The first reason `h` is not a hierarchical product, or `None` if it is.
pub fn hier_product_report(cfd: &Cfd, h: &HMultiset) -> Result<Option<HierViolation>, SemanticsError> {
    check_known(cfd, h)?;
    Ok(check_at(cfd, cfd.root(), h).err())
}

pub fn is_hier_product(cfd: &Cfd, h: &HMultiset) -> Result<bool, SemanticsError> {
    Ok(hier_product_report(cfd, h)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierTheorySlice {
    pub cfd: Cfd,
    pub bound: u64,
    pub products: BTreeSet<HMultiset>,
}

/// Hierarchical products associated with group `g`: one nested key per
/// selected member. Includes `∅` when the group may select nothing.
pub fn group_hier_products(cfd: &Cfd, g: &Group, bound: u64, limit: u64) -> Result<BTreeSet<HMultiset>, SemanticsError> {
    if cfd.group_card(g).is_none() {
        return Err(SemanticsError::UnknownGroup(g.clone()));
    }
    enumerate::guard(enumerate::count_group(cfd, g, bound), limit)?;
    Ok(enumerate::group_products(cfd, g, bound, Mode::Hier)?.into_iter().collect())
}

pub fn enumerate_hier(cfd: &Cfd, bound: u64, limit: u64) -> Result<HierTheorySlice, SemanticsError> {
    enumerate::guard(enumerate::count_at(cfd, cfd.root(), bound), limit)?;
    let products = enumerate::products_at(cfd, cfd.root(), bound, Mode::Hier)?.into_iter().collect();
    Ok(HierTheorySlice { cfd: cfd.clone(), bound, products })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BijectionFailure {
    /// Two hierarchical products flatten to the same multiset.
    NotInjective { first: HMultiset, second: HMultiset, flat: HMultiset },
    /// A hierarchical product flattens outside the flat slice.
    OutsideImage { hier: HMultiset, flat: HMultiset },
    /// A flat product with no hierarchical preimage.
    Uncovered { flat: HMultiset },
}

impl fmt::Display for BijectionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BijectionFailure::NotInjective { first, second, flat } => {
                write!(f, "{first} and {second} both flatten to {flat}")
            }
            BijectionFailure::OutsideImage { hier, flat } => {
                write!(f, "{hier} flattens to {flat}, which is not a flat product")
            }
            BijectionFailure::Uncovered { flat } => write!(f, "flat product {flat} has no hierarchical preimage"),
        }
    }
}

/// Pairs of (hierarchical product, its flattening), sorted by the
/// hierarchical side.
pub type FlattenPairs = Vec<(HMultiset, HMultiset)>;

/// Checks that flattening maps the hierarchical slice one-to-one onto the
/// flat slice at the same bound. On success returns the mapping.
pub fn check_flatten_bijection(
    cfd: &Cfd,
    bound: u64,
    limit: u64,
) -> Result<Result<FlattenPairs, BijectionFailure>, SemanticsError> {
    let hier = enumerate_hier(cfd, bound, limit)?;
    let flat = enumerate_flat(cfd, bound, limit)?;
    let mut pairs = Vec::with_capacity(hier.products.len());
    let mut preimage: std::collections::BTreeMap<HMultiset, HMultiset> = Default::default();
    for h in &hier.products {
        let m = h.flatten()?;
        if let Some(prev) = preimage.get(&m) {
            return Ok(Err(BijectionFailure::NotInjective { first: prev.clone(), second: h.clone(), flat: m }));
        }
        if !flat.products.contains(&m) {
            return Ok(Err(BijectionFailure::OutsideImage { hier: h.clone(), flat: m }));
        }
        preimage.insert(m.clone(), h.clone());
        pairs.push((h.clone(), m));
    }
    if let Some(m) = flat.products.iter().find(|m| !preimage.contains_key(*m)) {
        return Ok(Err(BijectionFailure::Uncovered { flat: m.clone() }));
    }
    Ok(Ok(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_LIMIT;
    use crate::feature::fid;
    use crate::syntax::{cfd, mset};

    fn vehicle() -> Cfd {
        cfd(include_str!("../../../fixtures/vehicle.cfd"))
    }

    fn axle3() -> Cfd {
        cfd(include_str!("../../../fixtures/vehicle_axle3.cfd"))
    }

    const H1: &str = "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual]]]]";

    #[test]
    fn h1_is_a_product() {
        assert_eq!(hier_product_report(&vehicle(), &mset(H1)).unwrap(), None);
        assert!(is_hier_product(&axle3(), &mset(H1)).unwrap());
    }

    #[test]
    fn bare_root_misses_engine() {
        let r = hier_product_report(&vehicle(), &mset("[Vehicle]")).unwrap().unwrap();
        assert!(matches!(r, HierViolation::MissingChild { ref child, .. } if *child == fid("Axle") || *child == fid("Brake") || *child == fid("Engine") || *child == fid("Gear")));
        let c = cfd("feature Vehicle { Engine }");
        assert_eq!(
            hier_product_report(&c, &mset("[Vehicle]")).unwrap(),
            Some(HierViolation::MissingChild { under: fid("Vehicle"), child: fid("Engine") })
        );
    }

    #[test]
    fn fig3_discriminates() {
        let d1 = cfd(include_str!("../../../fixtures/fig3_d1.cfd"));
        let d2 = cfd(include_str!("../../../fixtures/fig3_d2.cfd"));
        let h = mset("[f1,[f2,[f3]]]");
        assert!(is_hier_product(&d1, &h).unwrap());
        assert!(!is_hier_product(&d2, &h).unwrap());
        assert!(is_hier_product(&d2, &mset("[f1,[f3,[f2]]]")).unwrap());
        let want: BTreeSet<_> = [mset("[f1,[f2,[f3]]]"), mset("[f1,[f2,[f3]]^2]")].into_iter().collect();
        assert_eq!(enumerate_hier(&d1, 2, DEFAULT_LIMIT).unwrap().products, want);
    }

    #[test]
    fn malformed_products() {
        let v = vehicle();
        let base = "[Engine,[[Gas]]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual]]]";
        let cases = [
            format!("[Vehicle^2,{base}]"),
            format!("[Vehicle,Gas,{base}]"),
            format!("[Vehicle,{base},[Gas]]"),
            format!("[Vehicle,{base},[[Engine]]]"),
            "[Vehicle,[Engine,[[Gas]]^2],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual]]]]".to_string(),
            "[Vehicle,[Engine,[[Gas],[Electric]^3]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual]]]]".to_string(),
            "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^6,[Brake],[Gear,[[Manual]]]]".to_string(),
            "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual],[Automatic]]]]".to_string(),
            "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[]]]".to_string(),
            "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^3,[Brake],[Gear]]".to_string(),
            "[Vehicle,[Engine,[[Gas]],[[Electric]]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual]]]]".to_string(),
            "[Vehicle,[Engine,[[Gas,Electric]]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual]]]]".to_string(),
            "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^3,[Axle,[Wheel]^3],[Brake],[Gear,[[Manual]]]]".to_string(),
        ];
        for c in &cases {
            assert!(!is_hier_product(&v, &mset(c)).unwrap(), "{c}");
        }
        assert!(matches!(
            is_hier_product(&v, &mset("[Vehicle,[Boat]]")),
            Err(SemanticsError::UnknownFeatures(_))
        ));
    }

    #[test]
    fn gas_electric_group_hier_products() {
        let v = vehicle();
        let g: Group = [fid("Gas"), fid("Electric")].into_iter().collect();
        let got = group_hier_products(&v, &g, 2, DEFAULT_LIMIT).unwrap();
        let want: BTreeSet<_> = ["[[Gas]]", "[[Electric]]", "[[Electric]^2]", "[[Gas],[Electric]]", "[[Gas],[Electric]^2]"]
            .into_iter()
            .map(mset)
            .collect();
        assert_eq!(got, want);
        let g: Group = [fid("Manual"), fid("Automatic")].into_iter().collect();
        assert_eq!(
            group_hier_products(&v, &g, 5, DEFAULT_LIMIT).unwrap(),
            [mset("[[Manual]]"), mset("[[Automatic]]")].into_iter().collect()
        );
    }

    #[test]
    fn optional_group_key_is_omitted() {
        let c = cfd("feature r { group <0..1> { a b } }");
        let g: Group = [fid("a"), fid("b")].into_iter().collect();
        assert!(group_hier_products(&c, &g, 1, DEFAULT_LIMIT).unwrap().contains(&HMultiset::new()));
        let s = enumerate_hier(&c, 1, DEFAULT_LIMIT).unwrap();
        let want: BTreeSet<_> = ["[r]", "[r,[[a]]]", "[r,[[b]]]"].into_iter().map(mset).collect();
        assert_eq!(s.products, want);
        for p in &s.products {
            assert!(is_hier_product(&c, p).unwrap());
        }
        assert!(!is_hier_product(&c, &mset("[r,[]]")).unwrap());
    }

    #[test]
    fn vehicle_bijection() {
        let pairs = check_flatten_bijection(&axle3(), 9, DEFAULT_LIMIT).unwrap().unwrap();
        assert_eq!(pairs.len(), 20);
        assert!(pairs.iter().any(|(h, _)| *h == mset(H1)));
        let singleton = Cfd::singleton(fid("r"));
        assert_eq!(check_flatten_bijection(&singleton, 1, DEFAULT_LIMIT).unwrap().unwrap().len(), 1);
    }

    #[test]
    fn singleton_theory() {
        let s = enumerate_hier(&Cfd::singleton(fid("r")), 3, DEFAULT_LIMIT).unwrap();
        assert_eq!(s.products, [mset("[r]")].into_iter().collect());
    }
}
