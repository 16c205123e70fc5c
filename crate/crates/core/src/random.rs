//! Random diagrams and multisets for property campaigns.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cfd::{Cfd, CfdParts, Group};
use crate::domain::MultiplicityDomain;
use crate::feature::FeatureId;
use crate::multiset::HMultiset;

/// Shape limits for [`random_cfd`].
#[derive(Clone, Debug)]
pub struct CfdShape {
    pub max_features: usize,
    pub max_depth: usize,
    /// Domains are drawn from `0..=max_mult`.
    pub max_mult: u64,
    /// Let grouped features have 0 in their domain.
    pub grouped_zero: bool,
}

impl Default for CfdShape {
    fn default() -> Self {
        CfdShape { max_features: 10, max_depth: 4, max_mult: 3, grouped_zero: true }
    }
}

fn name(i: usize) -> FeatureId {
    FeatureId::new(&format!("f{i}")).expect("valid name")
}

/// A non-empty random subset of `lo..=hi` other than `{0}`.
fn random_domain<R: Rng + ?Sized>(rng: &mut R, lo: u64, hi: u64) -> MultiplicityDomain {
    loop {
        let values: Vec<u64> = (lo..=hi).filter(|_| rng.gen_bool(0.5)).collect();
        if let Ok(d) = MultiplicityDomain::from_values(values) {
            return d;
        }
    }
}

pub fn random_cfd<R: Rng + ?Sized>(rng: &mut R, shape: &CfdShape) -> Cfd {
    let n = rng.gen_range(1..=shape.max_features.max(1));
    let mut parts = CfdParts::new(name(0));
    let mut depth = vec![1usize];
    let mut parent_of = vec![None];
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&j| depth[j] < shape.max_depth).collect();
        let Some(&p) = open.choose(rng) else { break };
        depth.push(depth[p] + 1);
        parent_of.push(Some(p));
    }
    let mut grouped = BTreeSet::new();
    let mut groups: Vec<Group> = Vec::new();
    let n = depth.len();
    for p in 0..n {
        let mut kids: Vec<usize> = (0..n).filter(|&c| parent_of[c] == Some(p)).collect();
        kids.shuffle(rng);
        let mut chosen: Vec<usize> = kids.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        while chosen.len() >= 2 {
            let size = rng.gen_range(2..=chosen.len());
            let g: Vec<usize> = chosen.drain(..size).collect();
            grouped.extend(g.iter().copied());
            groups.push(g.into_iter().map(name).collect());
        }
    }
    for (i, p) in parent_of.iter().enumerate().skip(1) {
        let lo = if grouped.contains(&i) && !shape.grouped_zero { 1 } else { 0 };
        let d = random_domain(rng, lo, shape.max_mult);
        parts.add_feature(name(i), name(p.expect("non-root")), d);
    }
    for g in groups {
        let hi = (g.len() as u64).min(shape.max_mult.max(1));
        let d = random_domain(rng, 0, hi);
        parts.groups.insert(g, d);
    }
    Cfd::new(parts).expect("generator yields valid diagrams")
}

/// Picks one multiplicity `>= 1` of `f` up to `bound`, or `None`.
fn positive_choice<R: Rng + ?Sized>(rng: &mut R, cfd: &Cfd, f: &FeatureId, bound: u64) -> Option<u64> {
    let choices: Vec<u64> = cfd.card(f)?.members_up_to(bound).into_iter().filter(|&c| c >= 1).collect();
    choices.choose(rng).copied()
}

/// A random hierarchical product with choices `<= bound`,
/// or `None` if some required choice is out of reach at this bound.
pub fn sample_hier_product<R: Rng + ?Sized>(rng: &mut R, cfd: &Cfd, bound: u64) -> Option<HMultiset> {
    sample_at(rng, cfd, cfd.root(), bound)
}

fn sample_at<R: Rng + ?Sized>(rng: &mut R, cfd: &Cfd, f: &FeatureId, bound: u64) -> Option<HMultiset> {
    let mut m = HMultiset::atom(f.clone());
    for s in cfd.solitary_children(f).ok()? {
        let card = cfd.card(s)?;
        let choices = card.members_up_to(bound);
        let c = *choices.choose(rng)?;
        if c > 0 {
            let sub = sample_at(rng, cfd, s, bound)?;
            m.insert_nested(sub, c).ok()?;
        }
    }
    for g in cfd.child_groups(f).ok()? {
        let card = cfd.group_card(g)?;
        let sizes = card.members_up_to(g.len() as u64);
        let k = *sizes.choose(rng)? as usize;
        let mut members: Vec<&FeatureId> = g.iter().collect();
        members.shuffle(rng);
        let mut key = HMultiset::new();
        for mbr in members.into_iter().take(k) {
            let c = positive_choice(rng, cfd, mbr, bound)?;
            key.insert_nested(sample_at(rng, cfd, mbr, bound)?, c).ok()?;
        }
        if k > 0 {
            m.insert_nested(key, 1).ok()?;
        }
    }
    Some(m)
}

/// A flat multiset near the theory of `cfd`: a flattened product, possibly
/// with one count nudged, one atom added or dropped, or scaled.
pub fn near_flat_multiset<R: Rng + ?Sized>(rng: &mut R, cfd: &Cfd, bound: u64) -> HMultiset {
    let base = sample_hier_product(rng, cfd, bound)
        .and_then(|h| h.flatten().ok())
        .unwrap_or_else(|| HMultiset::atom(cfd.root().clone()));
    let names: Vec<FeatureId> = cfd.features().cloned().collect();
    let mut atoms: Vec<(FeatureId, u64)> = base.atoms().map(|(f, c)| (f.clone(), c)).collect();
    match rng.gen_range(0..5) {
        0 => {}
        1 => {
            if let Some(a) = atoms.choose_mut(rng) {
                a.1 = if rng.gen_bool(0.5) { a.1 + 1 } else { a.1.saturating_sub(1) };
            }
        }
        2 => {
            let f = names.choose(rng).expect("non-empty").clone();
            atoms.push((f, rng.gen_range(1..=3)));
        }
        3 => {
            if !atoms.is_empty() {
                let i = rng.gen_range(0..atoms.len());
                atoms.remove(i);
            }
        }
        _ => {
            let k = rng.gen_range(2..=3);
            for a in &mut atoms {
                a.1 *= k;
            }
        }
    }
    let mut m = HMultiset::new();
    for (f, c) in atoms {
        if c > 0 {
            m.insert_atom(f, c).expect("small counts");
        }
    }
    m
}

/// A random tree-like multiset with rank `<= max_rank` over at most
/// `names.len()` distinct urelements, rooted at `names[0]`.
pub fn random_tree_like<R: Rng + ?Sized>(rng: &mut R, names: &[FeatureId], max_rank: usize, max_mult: u64) -> HMultiset {
    let mut pool: Vec<FeatureId> = names[1..].to_vec();
    pool.shuffle(rng);
    tree_node(rng, names[0].clone(), &mut pool, max_rank.max(1), max_mult.max(1))
}

fn tree_node<R: Rng + ?Sized>(rng: &mut R, f: FeatureId, pool: &mut Vec<FeatureId>, budget: usize, max_mult: u64) -> HMultiset {
    let mut m = HMultiset::atom(f);
    if budget < 2 {
        return m;
    }
    let kids = rng.gen_range(0..=3usize);
    for _ in 0..kids {
        if pool.is_empty() {
            break;
        }
        if budget >= 3 && rng.gen_bool(0.35) {
            let size = rng.gen_range(1..=pool.len().min(3));
            let mut key = HMultiset::new();
            for _ in 0..size {
                let Some(c) = pool.pop() else { break };
                let sub = tree_node(rng, c, pool, budget - 2, max_mult);
                key.insert_nested(sub, rng.gen_range(1..=max_mult)).expect("small counts");
            }
            m.insert_nested(key, 1).expect("small counts");
        } else {
            let c = pool.pop().expect("checked");
            let sub = tree_node(rng, c, pool, budget - 1, max_mult);
            m.insert_nested(sub, rng.gen_range(1..=max_mult)).expect("small counts");
        }
    }
    m
}

/// A random hierarchical multiset over `names`, tree-like or not.
pub fn random_multiset<R: Rng + ?Sized>(rng: &mut R, names: &[FeatureId], depth: usize) -> HMultiset {
    let mut m = HMultiset::new();
    for _ in 0..rng.gen_range(0..=2usize) {
        m.insert_atom(names.choose(rng).expect("non-empty").clone(), rng.gen_range(1..=2)).expect("small");
    }
    if depth > 0 {
        for _ in 0..rng.gen_range(0..=2usize) {
            let sub = random_multiset(rng, names, depth - 1);
            m.insert_nested(sub, rng.gen_range(1..=2)).expect("small");
        }
    }
    m
}

/// One random structural change: a domain gains or loses a value, a
/// solitary feature moves under another parent, or a group is created or
/// dissolved. Returns `None` if the drawn change is not possible here.
/// Grouped features never gain 0, so every change alters the theory.
pub fn mutate<R: Rng + ?Sized>(rng: &mut R, cfd: &Cfd, max_mult: u64) -> Option<Cfd> {
    let mut parts = cfd.parts().clone();
    let non_root: Vec<FeatureId> = parts.card.keys().cloned().collect();
    match rng.gen_range(0..4) {
        0 => {
            let f = non_root.choose(rng)?.clone();
            let lo = if cfd.is_grouped(&f) { 1 } else { 0 };
            let d = &parts.card[&f];
            let v = rng.gen_range(lo..=max_mult);
            let mut values: BTreeSet<u64> = d.members_up_to(max_mult).into_iter().collect();
            if !values.remove(&v) {
                values.insert(v);
            }
            parts.card.insert(f, MultiplicityDomain::from_values(values).ok()?);
        }
        1 => {
            let (g, d) = parts.groups.iter().collect::<Vec<_>>().choose(rng).map(|(g, d)| ((*g).clone(), (*d).clone()))?;
            let v = rng.gen_range(0..=g.len() as u64);
            let mut values: BTreeSet<u64> = d.members_up_to(g.len() as u64).into_iter().collect();
            if !values.remove(&v) {
                values.insert(v);
            }
            parts.groups.insert(g, MultiplicityDomain::from_values(values).ok()?);
        }
        2 => {
            let solitary: Vec<FeatureId> = cfd.solitary().into_iter().collect();
            let f = solitary.choose(rng)?.clone();
            let below = cfd.subtree(&f).ok()?;
            let targets: Vec<&FeatureId> =
                cfd.features().filter(|t| !below.contains(*t) && Some(*t) != cfd.parent(&f)).collect();
            let t = (*targets.choose(rng)?).clone();
            parts.parent.insert(f, t);
        }
        _ => {
            if rng.gen_bool(0.5) && !parts.groups.is_empty() {
                let gs: Vec<Group> = parts.groups.keys().cloned().collect();
                let g = gs.choose(rng)?.clone();
                parts.groups.remove(&g);
                for m in &g {
                    let d = parts.card[m].members_up_to(max_mult).into_iter().filter(|&c| c >= 1);
                    parts.card.insert(m.clone(), MultiplicityDomain::from_values(d).ok()?);
                }
            } else {
                let p = cfd.features().collect::<Vec<_>>().choose(rng).copied()?.clone();
                let sol: Vec<FeatureId> = cfd.solitary_children(&p).ok()?.into_iter().cloned().collect();
                if sol.len() < 2 {
                    return None;
                }
                let pair: Vec<FeatureId> = sol.choose_multiple(rng, 2).cloned().collect();
                for m in &pair {
                    let d = parts.card[m].members_up_to(max_mult).into_iter().filter(|&c| c >= 1);
                    parts.card.insert(m.clone(), MultiplicityDomain::from_values(d).ok()?);
                }
                parts.groups.insert(pair.into_iter().collect(), MultiplicityDomain::one());
            }
        }
    }
    let out = Cfd::new(parts).ok()?;
    (out != *cfd).then_some(out)
}

/// A small random set of tree-like multisets for mergeability campaigns:
/// samples of one random diagram, tree-like multisets over a shared
/// five-letter alphabet, or a mix of both.
pub fn random_tree_like_set<R: Rng + ?Sized>(rng: &mut R) -> Vec<HMultiset> {
    let size = rng.gen_range(1..=4usize);
    let d = random_cfd(rng, &CfdShape { max_features: 6, max_depth: 3, max_mult: 3, grouped_zero: false });
    let names: Vec<FeatureId> = (0..5).map(name).collect();
    let mode = rng.gen_range(0..3);
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        let from_cfd = match mode {
            0 => true,
            1 => false,
            _ => rng.gen_bool(0.5),
        };
        let t = if from_cfd { sample_hier_product(rng, &d, 3) } else { None };
        out.push(t.unwrap_or_else(|| {
            let mut ns = names.clone();
            if rng.gen_bool(0.9) {
                ns[1..].shuffle(rng);
            } else {
                ns.shuffle(rng);
            }
            random_tree_like(rng, &ns, 4, 3)
        }));
    }
    out
}
