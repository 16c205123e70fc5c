//! Hierarchical multisets over features.
//!
//! An [`HMultiset`] holds urelement counts and counts of nested multisets.
//! Both maps are ordered, and nested keys are themselves canonical values, so
//! structural equality is multiset equality at every depth. Zero counts are
//! never stored: absence is the only representation of multiplicity 0.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::MultisetError;
use crate::feature::FeatureId;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HMultiset {
    atoms: BTreeMap<FeatureId, u64>,
    nested: BTreeMap<HMultiset, u64>,
}

type Result<T> = std::result::Result<T, MultisetError>;

impl HMultiset {
    /// The empty multiset.
    pub fn new() -> Self {
        Self::default()
    }

    /// The singleton `[f]`.
    pub fn atom(f: FeatureId) -> Self {
        let mut m = Self::new();
        m.atoms.insert(f, 1);
        m
    }

    pub fn insert_atom(&mut self, f: FeatureId, count: u64) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let slot = self.atoms.entry(f).or_insert(0);
        *slot = slot.checked_add(count).ok_or(MultisetError::Overflow)?;
        Ok(())
    }

    pub fn insert_nested(&mut self, m: HMultiset, count: u64) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let slot = self.nested.entry(m).or_insert(0);
        *slot = slot.checked_add(count).ok_or(MultisetError::Overflow)?;
        Ok(())
    }

    /// Builder-style [`insert_atom`](Self::insert_atom).
    pub fn with_atom(mut self, f: FeatureId, count: u64) -> Result<Self> {
        self.insert_atom(f, count)?;
        Ok(self)
    }

    /// Builder-style [`insert_nested`](Self::insert_nested).
    pub fn with_nested(mut self, m: HMultiset, count: u64) -> Result<Self> {
        self.insert_nested(m, count)?;
        Ok(self)
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.nested.is_empty()
    }

    /// True when there are no nested keys (rank 1).
    pub fn is_flat(&self) -> bool {
        self.nested.is_empty()
    }

    pub fn atom_count(&self, f: &FeatureId) -> u64 {
        self.atoms.get(f).copied().unwrap_or(0)
    }

    /// `#_m(n)`: the count of `n` as a direct nested key of `self`.
    pub fn ingredient_count(&self, n: &HMultiset) -> u64 {
        self.nested.get(n).copied().unwrap_or(0)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&FeatureId, u64)> + '_ {
        self.atoms.iter().map(|(f, n)| (f, *n))
    }

    pub fn nested(&self) -> impl Iterator<Item = (&HMultiset, u64)> + '_ {
        self.nested.iter().map(|(m, n)| (m, *n))
    }

    pub fn atom_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn nested_len(&self) -> usize {
        self.nested.len()
    }

    /// Least `n` with `self` in `M_n`. The empty multiset has rank 1.
    pub fn rank(&self) -> usize {
        1 + self.nested.keys().map(HMultiset::rank).max().unwrap_or(0)
    }

    /// Additive union: counts of equal keys add.
    pub fn union(&self, other: &HMultiset) -> Result<HMultiset> {
        let mut out = self.clone();
        for (f, n) in &other.atoms {
            out.insert_atom(f.clone(), *n)?;
        }
        for (m, n) in &other.nested {
            out.insert_nested(m.clone(), *n)?;
        }
        Ok(out)
    }

    /// Multiplies every top-level count by `k`; `k = 0` yields the empty multiset.
    pub fn scale(&self, k: u64) -> Result<HMultiset> {
        if k == 0 {
            return Ok(HMultiset::new());
        }
        let mut out = HMultiset::new();
        for (f, n) in &self.atoms {
            out.atoms
                .insert(f.clone(), n.checked_mul(k).ok_or(MultisetError::Overflow)?);
        }
        for (m, n) in &self.nested {
            out.nested
                .insert(m.clone(), n.checked_mul(k).ok_or(MultisetError::Overflow)?);
        }
        Ok(out)
    }

    /// All multisets reachable through nested keys, at any depth.
    pub fn ingredients(&self) -> BTreeSet<HMultiset> {
        let mut out = BTreeSet::new();
        self.collect_ingredients(&mut out);
        out
    }

    fn collect_ingredients(&self, out: &mut BTreeSet<HMultiset>) {
        for m in self.nested.keys() {
            if out.insert(m.clone()) {
                m.collect_ingredients(out);
            }
        }
    }

    /// Count of `a` after collapsing the hierarchy, multiplying counts along
    /// every nesting path.
    pub fn flat_multiplicity(&self, a: &FeatureId) -> Result<u64> {
        let mut total = self.atom_count(a);
        for (m, n) in &self.nested {
            let inner = m.flat_multiplicity(a)?;
            let weighted = inner.checked_mul(*n).ok_or(MultisetError::Overflow)?;
            total = total.checked_add(weighted).ok_or(MultisetError::Overflow)?;
        }
        Ok(total)
    }

    /// The rank-1 multiset of flat multiplicities.
    pub fn flatten(&self) -> Result<HMultiset> {
        let mut out = HMultiset::new();
        self.flatten_into(1, &mut out)?;
        Ok(out)
    }

    fn flatten_into(&self, factor: u64, out: &mut HMultiset) -> Result<()> {
        for (f, n) in &self.atoms {
            out.insert_atom(f.clone(), n.checked_mul(factor).ok_or(MultisetError::Overflow)?)?;
        }
        for (m, n) in &self.nested {
            m.flatten_into(n.checked_mul(factor).ok_or(MultisetError::Overflow)?, out)?;
        }
        Ok(())
    }

    /// Every urelement occurring at any depth, i.e. `dom(flatten(self))`.
    /// Unlike [`flatten`](Self::flatten) this cannot overflow.
    pub fn flat_domain(&self) -> BTreeSet<FeatureId> {
        let mut out = BTreeSet::new();
        self.collect_domain(&mut out);
        out
    }

    fn collect_domain(&self, out: &mut BTreeSet<FeatureId>) {
        out.extend(self.atoms.keys().cloned());
        for m in self.nested.keys() {
            m.collect_domain(out);
        }
    }

    /// Same nesting structure with every count, at every depth, set to 1.
    pub fn relax(&self) -> HMultiset {
        HMultiset {
            atoms: self.atoms.keys().map(|f| (f.clone(), 1)).collect(),
            nested: self.nested.keys().map(|m| (m.relax(), 1)).collect(),
        }
    }

    /// Canonical literal form as bytes; see the `Display` impl.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.to_string().into_bytes()
    }

    fn write_canonical(&self, out: &mut String) {
        out.push('[');
        let mut first = true;
        let mut sep = |out: &mut String| {
            if !first {
                out.push(',');
            }
            first = false;
        };
        for (f, n) in &self.atoms {
            sep(out);
            out.push_str(f.as_str());
            push_exp(out, *n);
        }
        let mut keys: Vec<(String, u64)> = self
            .nested
            .iter()
            .map(|(m, n)| (m.to_string(), *n))
            .collect();
        keys.sort();
        for (s, n) in keys {
            sep(out);
            out.push_str(&s);
            push_exp(out, n);
        }
        out.push(']');
    }
}

fn push_exp(out: &mut String, n: u64) {
    if n != 1 {
        out.push('^');
        out.push_str(&n.to_string());
    }
}

/// Renders the canonical literal: urelements in lexicographic order, then
/// nested keys ordered by their own canonical text, `^1` omitted.
impl fmt::Display for HMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_canonical(&mut s);
        f.write_str(&s)
    }
}

impl fmt::Debug for HMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::fid;
    use crate::syntax::mset;

    #[test]
    fn ranks_of_worked_examples() {
        assert_eq!(mset("[a^3,b^3]").rank(), 1);
        assert_eq!(mset("[a^2,[a^2,b^3],[b]^4]").rank(), 2);
        assert_eq!(mset("[a^10,[a^2,b^3]^3,[b]^4,[[a]]]").rank(), 3);
        assert_eq!(HMultiset::new().rank(), 1);
    }

    #[test]
    fn additive_union() {
        assert_eq!(mset("[a]").union(&mset("[b^2]")).unwrap(), mset("[a,b^2]"));
        assert_eq!(mset("[a]").union(&HMultiset::new()).unwrap(), mset("[a]"));
        assert_eq!(mset("[[b]^2]").union(&mset("[[b]]")).unwrap(), mset("[[b]^3]"));
    }

    #[test]
    fn union_overflow_is_reported() {
        let big = HMultiset::new().with_atom(fid("a"), u64::MAX).unwrap();
        assert_eq!(big.union(&mset("[a]")), Err(MultisetError::Overflow));
    }

    #[test]
    fn ingredients_examples() {
        let got = mset("[a,b,[c,[d,e]]]").ingredients();
        let want: BTreeSet<_> = [mset("[c,[d,e]]"), mset("[d,e]")].into_iter().collect();
        assert_eq!(got, want);
        assert!(mset("[a,b]").ingredients().is_empty());
        // duplicates collapse into one key with summed count
        let m = mset("[[a],[a]^2]");
        assert_eq!(m.ingredients(), [mset("[a]")].into_iter().collect());
        assert_eq!(m.ingredient_count(&mset("[a]")), 3);
    }

    #[test]
    fn ingredient_count_examples() {
        assert_eq!(mset("[a,[b]^5]").ingredient_count(&mset("[b]")), 5);
        assert_eq!(mset("[a]").ingredient_count(&mset("[b]")), 0);
        let t = mset("[a,[c,[d]^3,[[e],[f]]]^2]");
        assert_eq!(t.ingredient_count(&mset("[c,[d]^3,[[e],[f]]]")), 2);
    }

    #[test]
    fn flattening_worked_example() {
        let m = mset("[a^2,b^2,[a^8,[a^5,b^3]^3]]");
        assert_eq!(m.flat_multiplicity(&fid("a")).unwrap(), 25);
        assert_eq!(m.flat_multiplicity(&fid("b")).unwrap(), 11);
        assert_eq!(m.flatten().unwrap(), mset("[a^25,b^11]"));
        assert_eq!(mset("[a]").flat_multiplicity(&fid("b")).unwrap(), 0);
    }

    #[test]
    fn flatten_fixes_flat_multisets() {
        let m = mset("[a^3,b]");
        assert_eq!(m.flatten().unwrap(), m);
    }

    #[test]
    fn flatten_vehicle_h1() {
        let h1 = mset(
            "[Vehicle,[Engine,[[Gas]]],[Axle,[Wheel]^2]^3,[Brake],[Gear,[[Manual]]]]",
        );
        assert_eq!(
            h1.flatten().unwrap(),
            mset("[Vehicle,Gear,Brake,Engine,Gas,Axle^3,Wheel^6,Manual]")
        );
    }

    #[test]
    fn flatten_overflow_is_reported() {
        let inner = HMultiset::new().with_atom(fid("a"), u64::MAX / 2 + 1).unwrap();
        let m = HMultiset::new().with_nested(inner, 2).unwrap();
        assert_eq!(m.flatten(), Err(MultisetError::Overflow));
        assert_eq!(m.flat_multiplicity(&fid("a")), Err(MultisetError::Overflow));
    }

    #[test]
    fn relax_examples() {
        let m = mset("[a,[b]^5,[c,[d]^3,[[e],[f]]]^2]");
        assert_eq!(m.relax(), mset("[a,[b],[c,[d],[[e],[f]]]]"));
        assert_eq!(m.relax().relax(), m.relax());
        assert_eq!(mset("[a^3]").relax(), mset("[a]"));
    }

    #[test]
    fn canonical_text() {
        assert_eq!(mset("[b, a]").to_string(), mset("[a,b]").to_string());
        assert_eq!(mset("[a,[b]^2]").to_string(), "[a,[b]^2]");
        assert_eq!(mset("[[b],[a]]").to_string(), "[[a],[b]]");
        assert_eq!(HMultiset::new().to_string(), "[]");
        assert_eq!(
            mset("[[[e],[f]],c,[d]^3]").to_string(),
            "[c,[[e],[f]],[d]^3]"
        );
    }

    #[test]
    fn zero_counts_are_absent() {
        assert_eq!(mset("[a,[b]^0]"), mset("[a]"));
        assert_eq!(mset("[a^0]"), HMultiset::new());
    }
}
