//! Bottom-up product construction shared by the flat and hierarchical
//! theories. Both follow the same recursion over induced diagrams; they only
//! differ in how a child's product is embedded into its parent's.

use crate::cfd::{Cfd, Group};
use crate::error::SemanticsError;
use crate::feature::FeatureId;
use crate::multiset::HMultiset;

/// Products are capped at this many unless the caller says otherwise.
pub const DEFAULT_LIMIT: u64 = 100_000;

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Flat,
    Hier,
}

impl Mode {
    /// Contribution of a child product `p` chosen `c >= 1` times.
    fn member(self, p: &HMultiset, c: u64) -> Result<HMultiset, SemanticsError> {
        Ok(match self {
            Mode::Flat => p.scale(c)?,
            Mode::Hier => HMultiset::new().with_nested(p.clone(), c)?,
        })
    }

    /// Contribution of a group product `u` to the parent.
    fn group(self, u: HMultiset) -> Result<HMultiset, SemanticsError> {
        Ok(match self {
            Mode::Flat => u,
            Mode::Hier if u.is_empty() => u,
            Mode::Hier => HMultiset::new().with_nested(u, 1)?,
        })
    }
}

/// Multiplicities `c >= 1` of `f` usable at this bound.
fn positive_choices(cfd: &Cfd, f: &FeatureId, bound: u64) -> u64 {
    cfd.card(f).expect("non-root feature").count_between(1, bound)
}

/// Exact size of the product set of the diagram induced by `f`, saturating.
pub(crate) fn count_at(cfd: &Cfd, f: &FeatureId, bound: u64) -> u128 {
    let mut total: u128 = 1;
    for s in cfd.solitary_children(f).expect("known feature") {
        let zero = cfd.card(s).expect("non-root").contains_zero() as u128;
        let k = positive_choices(cfd, s, bound) as u128;
        let here = zero.saturating_add(k.saturating_mul(count_at(cfd, s, bound)));
        total = total.saturating_mul(here);
    }
    for g in cfd.child_groups(f).expect("known feature") {
        total = total.saturating_mul(count_group(cfd, g, bound));
    }
    total
}

/// Exact size of the group product set: elementary symmetric sums of the
/// member weights over the allowed selection sizes.
pub(crate) fn count_group(cfd: &Cfd, g: &Group, bound: u64) -> u128 {
    let mut e = vec![0u128; g.len() + 1];
    e[0] = 1;
    for m in g {
        let w = (positive_choices(cfd, m, bound) as u128).saturating_mul(count_at(cfd, m, bound));
        for j in (1..e.len()).rev() {
            e[j] = e[j].saturating_add(e[j - 1].saturating_mul(w));
        }
    }
    let card = cfd.group_card(g).expect("known group");
    (0..e.len())
        .filter(|&j| card.contains(j as u64))
        .fold(0u128, |acc, j| acc.saturating_add(e[j]))
}

pub(crate) fn guard(estimate: u128, limit: u64) -> Result<(), SemanticsError> {
    if estimate > limit as u128 {
        Err(SemanticsError::Explosion { estimate, limit })
    } else {
        Ok(())
    }
}

fn cartesian(acc: Vec<HMultiset>, options: &[HMultiset]) -> Result<Vec<HMultiset>, SemanticsError> {
    let mut out = Vec::with_capacity(acc.len() * options.len());
    for a in &acc {
        for o in options {
            out.push(a.union(o)?);
        }
    }
    Ok(out)
}

/// Ways to embed the products of solitary child `s` into its parent.
fn child_options(cfd: &Cfd, s: &FeatureId, bound: u64, mode: Mode) -> Result<Vec<HMultiset>, SemanticsError> {
    let card = cfd.card(s).expect("non-root feature");
    let mut out = Vec::new();
    if card.contains_zero() {
        out.push(HMultiset::new());
    }
    let sub = products_at(cfd, s, bound, mode)?;
    for c in card.members_up_to(bound).into_iter().filter(|&c| c >= 1) {
        for p in &sub {
            out.push(mode.member(p, c)?);
        }
    }
    Ok(out)
}

/// Group products of `g`: unions of member contributions over every
/// selection whose size is allowed. The empty selection gives `∅`.
pub(crate) fn group_products(cfd: &Cfd, g: &Group, bound: u64, mode: Mode) -> Result<Vec<HMultiset>, SemanticsError> {
    let card = cfd.group_card(g).expect("known group");
    let max = card.max().expect("group domains are finite") as usize;
    // (selection size, partial union)
    let mut states: Vec<(usize, HMultiset)> = vec![(0, HMultiset::new())];
    for m in g {
        let mcard = cfd.card(m).expect("non-root feature");
        let sub = products_at(cfd, m, bound, mode)?;
        let mut opts = Vec::new();
        for c in mcard.members_up_to(bound).into_iter().filter(|&c| c >= 1) {
            for p in &sub {
                opts.push(mode.member(p, c)?);
            }
        }
        let mut next = Vec::with_capacity(states.len() * (opts.len() + 1));
        for (k, u) in states {
            if k < max {
                for o in &opts {
                    next.push((k + 1, u.union(o)?));
                }
            }
            next.push((k, u));
        }
        states = next;
    }
    Ok(states
        .into_iter()
        .filter(|(k, _)| card.contains(*k as u64))
        .map(|(_, u)| u)
        .collect())
}

/// Products of the diagram induced by `f`.
pub(crate) fn products_at(cfd: &Cfd, f: &FeatureId, bound: u64, mode: Mode) -> Result<Vec<HMultiset>, SemanticsError> {
    let mut acc = vec![HMultiset::atom(f.clone())];
    for s in cfd.solitary_children(f).expect("known feature") {
        let opts = child_options(cfd, s, bound, mode)?;
        acc = cartesian(acc, &opts)?;
    }
    for g in cfd.child_groups(f).expect("known feature") {
        let opts = group_products(cfd, g, bound, mode)?
            .into_iter()
            .map(|u| mode.group(u))
            .collect::<Result<Vec<_>, _>>()?;
        acc = cartesian(acc, &opts)?;
    }
    Ok(acc)
}
