//! Flat products: rank-1 multisets of features.
//!
//! [`flat_product_report`] checks the four direct conditions on a multiset;
//! [`is_flat_product_recursive`] decides the same question independently by
//! recursion over induced diagrams. [`enumerate_flat`] builds the theory
//! bottom-up, one induced diagram at a time.

use std::collections::BTreeSet;
use std::fmt;

use crate::cfd::{fmt_group, Cfd, Group};
use crate::enumerate::{self, Mode};
use crate::error::SemanticsError;
use crate::feature::FeatureId;
use crate::multiset::HMultiset;

/// The condition a non-product breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlatCondition {
    /// The root occurs exactly once.
    Root,
    /// A present feature's count is its parent's count times a domain value.
    Multiplicity,
    /// A mandatory solitary feature is present whenever its parent is.
    Mandatory,
    /// The number of present members of a group is allowed by its domain.
    Group,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatViolation {
    Root { found: u64 },
    Multiplicity { feature: FeatureId, count: u64, parent: FeatureId, parent_count: u64 },
    Mandatory { feature: FeatureId },
    Group { group: Group, present: usize },
}

impl FlatViolation {
    pub fn condition(&self) -> FlatCondition {
        match self {
            FlatViolation::Root { .. } => FlatCondition::Root,
            FlatViolation::Multiplicity { .. } => FlatCondition::Multiplicity,
            FlatViolation::Mandatory { .. } => FlatCondition::Mandatory,
            FlatViolation::Group { .. } => FlatCondition::Group,
        }
    }
}

impl fmt::Display for FlatViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlatViolation::Root { found } => write!(f, "root occurs {found} times, expected 1"),
            FlatViolation::Multiplicity { feature, count, parent, parent_count } => write!(
                f,
                "{feature} occurs {count} times, not a multiple of {parent}'s {parent_count} by an allowed multiplicity"
            ),
            FlatViolation::Mandatory { feature } => {
                write!(f, "mandatory feature {feature} is missing under its parent")
            }
            FlatViolation::Group { group, present } => write!(
                f,
                "group {} has {present} members present, which its domain does not allow",
                fmt_group(group)
            ),
        }
    }
}

fn check_input(cfd: &Cfd, m: &HMultiset) -> Result<(), SemanticsError> {
    if !m.is_flat() {
        return Err(SemanticsError::NotFlat { rank: m.rank() });
    }
    let unknown: Vec<FeatureId> = m.atoms().map(|(f, _)| f).filter(|f| !cfd.contains(f)).cloned().collect();
    if !unknown.is_empty() {
        return Err(SemanticsError::UnknownFeatures(unknown));
    }
    Ok(())
}

/// Checks the four conditions in order and returns the first violation, or
/// `None` for a flat product.
pub fn flat_product_report(cfd: &Cfd, m: &HMultiset) -> Result<Option<FlatViolation>, SemanticsError> {
    check_input(cfd, m)?;
    let root_count = m.atom_count(cfd.root());
    if root_count != 1 {
        return Ok(Some(FlatViolation::Root { found: root_count }));
    }
    for (f, count) in m.atoms() {
        let Some(parent) = cfd.parent(f) else { continue };
        let parent_count = m.atom_count(parent);
        let ok = parent_count > 0
            && count % parent_count == 0
            && cfd.card(f).expect("non-root").contains(count / parent_count);
        if !ok {
            return Ok(Some(FlatViolation::Multiplicity {
                feature: f.clone(),
                count,
                parent: parent.clone(),
                parent_count,
            }));
        }
    }
    for f in cfd.solitary() {
        let parent = cfd.parent(&f).expect("non-root");
        let card = cfd.card(&f).expect("non-root");
        if !card.contains_zero() && m.atom_count(parent) > 0 && m.atom_count(&f) == 0 {
            return Ok(Some(FlatViolation::Mandatory { feature: f }));
        }
    }
    for (g, card) in cfd.groups() {
        let parent = cfd.parent(g.first().expect("groups are non-empty")).expect("non-root");
        if m.atom_count(parent) > 0 {
            let present = g.iter().filter(|x| m.atom_count(x) > 0).count();
            if !card.contains(present as u64) {
                return Ok(Some(FlatViolation::Group { group: g.clone(), present }));
            }
        }
    }
    Ok(None)
}

pub fn is_flat_product(cfd: &Cfd, m: &HMultiset) -> Result<bool, SemanticsError> {
    Ok(flat_product_report(cfd, m)?.is_none())
}

/// Restriction of a flat multiset to `keep`.
fn restrict(m: &HMultiset, keep: &BTreeSet<FeatureId>) -> HMultiset {
    let mut out = HMultiset::new();
    for (f, n) in m.atoms() {
        if keep.contains(f) {
            out.insert_atom(f.clone(), n).expect("counts copied unchanged");
        }
    }
    out
}

/// `m / c` when every count is divisible by `c`.
fn divide(m: &HMultiset, c: u64) -> Option<HMultiset> {
    let mut out = HMultiset::new();
    for (f, n) in m.atoms() {
        if n % c != 0 {
            return None;
        }
        out.insert_atom(f.clone(), n / c).expect("quotient is smaller");
    }
    Some(out)
}

/// Whether `sub`, the part of a multiset inside the subtree of a child `f`,
/// is `c` copies of a product of the diagram induced by `f`, for some
/// `c >= 1` in `f`'s domain.
fn scaled_subproduct(cfd: &Cfd, f: &FeatureId, sub: &HMultiset) -> bool {
    let c = sub.atom_count(f);
    if c == 0 || !cfd.card(f).expect("non-root").contains(c) {
        return false;
    }
    match divide(sub, c) {
        Some(n) => {
            let induced = cfd.induced_by_node(f).expect("known feature");
            recursive(&induced, &n)
        }
        None => false,
    }
}

fn recursive(cfd: &Cfd, m: &HMultiset) -> bool {
    let root = cfd.root();
    if m.atom_count(root) != 1 {
        return false;
    }
    for s in cfd.solitary_children(root).expect("root is known") {
        let sub = restrict(m, &cfd.subtree(s).expect("known"));
        let ok = if sub.is_empty() {
            cfd.card(s).expect("non-root").contains_zero()
        } else {
            scaled_subproduct(cfd, s, &sub)
        };
        if !ok {
            return false;
        }
    }
    for g in cfd.child_groups(root).expect("root is known") {
        let mut selected = 0u64;
        for member in g {
            let sub = restrict(m, &cfd.subtree(member).expect("known"));
            if sub.is_empty() {
                continue;
            }
            if !scaled_subproduct(cfd, member, &sub) {
                return false;
            }
            selected += 1;
        }
        if !cfd.group_card(g).expect("known").contains(selected) {
            return false;
        }
    }
    true
}

/// Decides flat-product membership by recursion on the diagrams induced by
/// the root's children: each solitary child's subtree carries `c` copies of
/// one of its own products (nothing, for `c = 0`), and each group's subtrees
/// together form one of the group's products.
pub fn is_flat_product_recursive(cfd: &Cfd, m: &HMultiset) -> Result<bool, SemanticsError> {
    check_input(cfd, m)?;
    Ok(recursive(cfd, m))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatTheorySlice {
    pub cfd: Cfd,
    /// Largest multiplicity drawn from any feature domain.
    pub bound: u64,
    pub products: BTreeSet<HMultiset>,
}

fn group_or_err<'a>(cfd: &'a Cfd, g: &Group) -> Result<&'a Group, SemanticsError> {
    cfd.groups()
        .map(|(k, _)| k)
        .find(|k| *k == g)
        .ok_or_else(|| SemanticsError::UnknownGroup(g.clone()))
}

/// Flat products associated with group `g`, with member multiplicities
/// drawn from `1..=bound`.
pub fn group_flat_products(cfd: &Cfd, g: &Group, bound: u64, limit: u64) -> Result<BTreeSet<HMultiset>, SemanticsError> {
    let g = group_or_err(cfd, g)?;
    enumerate::guard(enumerate::count_group(cfd, g, bound), limit)?;
    Ok(enumerate::group_products(cfd, g, bound, Mode::Flat)?.into_iter().collect())
}

/// Number of flat (equivalently, hierarchical) products at this bound,
/// saturating at `u128::MAX`.
pub fn count_products(cfd: &Cfd, bound: u64) -> u128 {
    enumerate::count_at(cfd, cfd.root(), bound)
}

/// All flat products whose multiplicity choices are `<= bound`. Fails
/// before doing any work if there would be more than `limit` of them.
pub fn enumerate_flat(cfd: &Cfd, bound: u64, limit: u64) -> Result<FlatTheorySlice, SemanticsError> {
    enumerate::guard(count_products(cfd, bound), limit)?;
    let products = enumerate::products_at(cfd, cfd.root(), bound, Mode::Flat)?.into_iter().collect();
    Ok(FlatTheorySlice { cfd: cfd.clone(), bound, products })
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

    const M: &str = "Vehicle,Gear,Brake,Engine";

    fn with_m(extra: &str) -> HMultiset {
        mset(&format!("[{M},{extra}]"))
    }

    #[test]
    fn listed_products_are_accepted() {
        let v = vehicle();
        for extra in ["Gas,Axle^3,Wheel^6,Manual", "Gas,Electric^2,Axle^3,Wheel^6,Automatic,ABS"] {
            let m = with_m(extra);
            assert_eq!(flat_product_report(&v, &m).unwrap(), None, "{m}");
            assert!(is_flat_product_recursive(&v, &m).unwrap());
        }
    }

    #[test]
    fn listed_non_products_name_their_condition() {
        let v = vehicle();
        let r = flat_product_report(&v, &with_m("Gas,Manual,Axle^3,Wheel^4")).unwrap().unwrap();
        assert_eq!(r.condition(), FlatCondition::Multiplicity);
        assert!(matches!(r, FlatViolation::Multiplicity { ref feature, .. } if *feature == fid("Wheel")));
        let r = flat_product_report(&v, &with_m("Gas,Manual,Axle^3")).unwrap().unwrap();
        assert_eq!(r, FlatViolation::Mandatory { feature: fid("Wheel") });
        let r = flat_product_report(&v, &with_m("Gas,Axle^3,Wheel^6")).unwrap().unwrap();
        assert_eq!(r.condition(), FlatCondition::Group);
        assert!(matches!(r, FlatViolation::Group { ref group, present: 0 } if group.contains(&fid("Manual"))));
        for m in ["Gas,Manual,Axle^3,Wheel^4", "Gas,Manual,Axle^3", "Gas,Axle^3,Wheel^6"] {
            assert!(!is_flat_product_recursive(&v, &with_m(m)).unwrap());
        }
    }

    #[test]
    fn root_must_occur_once() {
        let v = vehicle();
        assert_eq!(
            flat_product_report(&v, &mset("[Vehicle^2]")).unwrap(),
            Some(FlatViolation::Root { found: 2 })
        );
        assert!(!is_flat_product_recursive(&v, &mset("[Vehicle^2]")).unwrap());
    }

    #[test]
    fn bad_inputs_are_errors() {
        let v = vehicle();
        assert_eq!(
            is_flat_product(&v, &mset("[Vehicle,[Engine]]")),
            Err(SemanticsError::NotFlat { rank: 2 })
        );
        assert_eq!(
            is_flat_product_recursive(&v, &mset("[Vehicle,Boat]")),
            Err(SemanticsError::UnknownFeatures(vec![fid("Boat")]))
        );
    }

    #[test]
    fn subtree_must_scale_as_a_whole() {
        // r -> f{1} -> g{0..1}: five g under one f is not a product
        let c = cfd("feature r { f { g [0..1] } }");
        let m = mset("[r,f,g^5]");
        assert!(!is_flat_product(&c, &m).unwrap());
        assert!(!is_flat_product_recursive(&c, &m).unwrap());
    }

    #[test]
    fn gas_electric_group_products() {
        let v = vehicle();
        let g: Group = [fid("Gas"), fid("Electric")].into_iter().collect();
        let got = group_flat_products(&v, &g, 2, DEFAULT_LIMIT).unwrap();
        let want: BTreeSet<_> = ["[Gas]", "[Electric]", "[Electric^2]", "[Gas,Electric]", "[Gas,Electric^2]"]
            .into_iter()
            .map(mset)
            .collect();
        assert_eq!(got, want);
        let g: Group = [fid("Manual"), fid("Automatic")].into_iter().collect();
        let got = group_flat_products(&v, &g, 1, DEFAULT_LIMIT).unwrap();
        assert_eq!(got, [mset("[Manual]"), mset("[Automatic]")].into_iter().collect());
        let bad: Group = [fid("Gas"), fid("Axle")].into_iter().collect();
        assert!(matches!(group_flat_products(&v, &bad, 1, DEFAULT_LIMIT), Err(SemanticsError::UnknownGroup(_))));
    }

    #[test]
    fn optional_group_includes_empty() {
        let c = cfd("feature r { group <0..1> { a b } }");
        let g: Group = [fid("a"), fid("b")].into_iter().collect();
        let got = group_flat_products(&c, &g, 3, DEFAULT_LIMIT).unwrap();
        assert!(got.contains(&HMultiset::new()));
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn vehicle_axle3_has_twenty_products() {
        let v = cfd(include_str!("../../../fixtures/vehicle_axle3.cfd"));
        let s = enumerate_flat(&v, 9, DEFAULT_LIMIT).unwrap();
        assert_eq!(s.products.len(), 20);
        assert_eq!(count_products(&v, 9), 20);
        for p in &s.products {
            assert!(is_flat_product(&v, p).unwrap());
            assert!(is_flat_product_recursive(&v, p).unwrap());
        }
    }

    #[test]
    fn fig3_flat_theories_coincide() {
        let d1 = cfd(include_str!("../../../fixtures/fig3_d1.cfd"));
        let d2 = cfd(include_str!("../../../fixtures/fig3_d2.cfd"));
        let want: BTreeSet<_> = [mset("[f1,f2,f3]"), mset("[f1,f2^2,f3^2]")].into_iter().collect();
        assert_eq!(enumerate_flat(&d1, 5, DEFAULT_LIMIT).unwrap().products, want);
        assert_eq!(enumerate_flat(&d2, 5, DEFAULT_LIMIT).unwrap().products, want);
    }

    #[test]
    fn singleton_theory() {
        let c = Cfd::singleton(fid("r"));
        let s = enumerate_flat(&c, 0, DEFAULT_LIMIT).unwrap();
        assert_eq!(s.products, [mset("[r]")].into_iter().collect());
    }

    #[test]
    fn explosion_guard_fires_before_work() {
        let v = vehicle();
        let err = enumerate_flat(&v, u64::MAX, DEFAULT_LIMIT).unwrap_err();
        assert!(matches!(err, SemanticsError::Explosion { limit: DEFAULT_LIMIT, .. }));
        assert!(matches!(enumerate_flat(&v, 9, 10), Err(SemanticsError::Explosion { estimate: 140, limit: 10 })));
    }
}
