//! Tree-like multisets: the shapes hierarchical products can take.
//!
//! A tree-like multiset has exactly one urelement at its top level, with
//! count 1 (its root). Every nested key is either a tree-like multiset (a
//! child) or a non-empty group of tree-like multisets with count 1, and the
//! features below distinct components never overlap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cfd::{fmt_group, Cfd, CfdParts, Group};
use crate::domain::MultiplicityDomain;
use crate::feature::FeatureId;
use crate::multiset::HMultiset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeViolation {
    /// The top level holds no urelement or more than one.
    TopLevelUrelements { found: Vec<FeatureId> },
    RootMultiplicity { root: FeatureId, count: u64 },
    EmptyGroup,
    GroupCount { count: u64 },
    InvalidChild { child: HMultiset, cause: Box<TreeViolation> },
    InvalidGroupMember { member: HMultiset, cause: Box<TreeViolation> },
    /// A feature occurs below two different components.
    Overlap { feature: FeatureId },
}

fn count_word(n: usize) -> String {
    const WORDS: [&str; 10] = ["no", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];
    WORDS.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::TopLevelUrelements { found } => {
                let names: Vec<&str> = found.iter().map(FeatureId::as_str).collect();
                let noun = if found.len() == 1 { "urelement" } else { "urelements" };
                write!(f, "{} top-level {noun}", count_word(found.len()))?;
                if !found.is_empty() {
                    write!(f, " ({})", names.join(", "))?;
                }
                Ok(())
            }
            TreeViolation::RootMultiplicity { root, count } => {
                write!(f, "root {root} has multiplicity {count}, expected 1")
            }
            TreeViolation::EmptyGroup => write!(f, "empty group key"),
            TreeViolation::GroupCount { count } => write!(f, "group key has multiplicity {count}, expected 1"),
            TreeViolation::InvalidChild { child, cause } => write!(f, "child {child} is not tree-like: {cause}"),
            TreeViolation::InvalidGroupMember { member, cause } => {
                write!(f, "group member {member} is not tree-like: {cause}")
            }
            TreeViolation::Overlap { feature } => write!(f, "feature {feature} occurs in two components"),
        }
    }
}

impl std::error::Error for TreeViolation {}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TreeLikeError {
    #[error("not tree-like: {0}")]
    NotTreeLike(TreeViolation),
    #[error("feature {0} does not occur")]
    FeatureAbsent(FeatureId),
    #[error("{0} is the root")]
    IsRoot(FeatureId),
    #[error("fresh feature name {0} is already taken")]
    FreshNameCollision(FeatureId),
}

/// Checks `t` and returns its flattened domain.
fn check(t: &HMultiset) -> Result<BTreeSet<FeatureId>, TreeViolation> {
    let mut atoms = t.atoms();
    let root = match (atoms.next(), atoms.next()) {
        (Some((r, n)), None) => {
            if n != 1 {
                return Err(TreeViolation::RootMultiplicity { root: r.clone(), count: n });
            }
            r.clone()
        }
        _ => return Err(TreeViolation::TopLevelUrelements { found: t.atoms().map(|(f, _)| f.clone()).collect() }),
    };
    let mut dom = BTreeSet::from([root]);
    let absorb = |part: BTreeSet<FeatureId>, dom: &mut BTreeSet<FeatureId>| -> Result<(), TreeViolation> {
        for f in part {
            if !dom.insert(f.clone()) {
                return Err(TreeViolation::Overlap { feature: f });
            }
        }
        Ok(())
    };
    for (k, n) in t.nested() {
        if k.atom_len() > 0 {
            let sub = check(k).map_err(|e| TreeViolation::InvalidChild { child: k.clone(), cause: Box::new(e) })?;
            absorb(sub, &mut dom)?;
            continue;
        }
        if k.is_empty() {
            return Err(TreeViolation::EmptyGroup);
        }
        if n != 1 {
            return Err(TreeViolation::GroupCount { count: n });
        }
        for (member, _) in k.nested() {
            let sub = check(member)
                .map_err(|e| TreeViolation::InvalidGroupMember { member: member.clone(), cause: Box::new(e) })?;
            absorb(sub, &mut dom)?;
        }
    }
    Ok(dom)
}

/// `Ok(())` if `m` is tree-like, otherwise the first reason it is not.
pub fn tree_like_report(m: &HMultiset) -> Result<(), TreeViolation> {
    check(m).map(|_| ())
}

pub fn is_tree_like(m: &HMultiset) -> bool {
    check(m).is_ok()
}

fn ensure(t: &HMultiset) -> Result<(), TreeLikeError> {
    tree_like_report(t).map_err(TreeLikeError::NotTreeLike)
}

/// Top-level urelement of a tree-like multiset (no check).
fn root_unchecked(t: &HMultiset) -> &FeatureId {
    t.atoms().next().expect("tree-like multisets have a root").0
}

pub fn root(t: &HMultiset) -> Result<FeatureId, TreeLikeError> {
    ensure(t)?;
    Ok(root_unchecked(t).clone())
}

/// Tree-like multisets directly below `t`: children and group members,
/// with their counts.
fn components(t: &HMultiset) -> Vec<(&HMultiset, u64)> {
    let mut out = Vec::new();
    for (k, n) in t.nested() {
        if k.atom_len() > 0 {
            out.push((k, n));
        } else {
            out.extend(k.nested());
        }
    }
    out
}

fn find_induced<'a>(t: &'a HMultiset, f: &FeatureId) -> Option<&'a HMultiset> {
    if root_unchecked(t) == f {
        return Some(t);
    }
    components(t).into_iter().find_map(|(c, _)| find_induced(c, f))
}

/// The ingredient of `t` (or `t` itself) whose root is `f`.
pub fn induced_by_element(t: &HMultiset, f: &FeatureId) -> Result<HMultiset, TreeLikeError> {
    ensure(t)?;
    find_induced(t, f).cloned().ok_or_else(|| TreeLikeError::FeatureAbsent(f.clone()))
}

/// Root of the tree-like multiset that holds `t|f` directly or through a
/// group key.
pub fn parent_of(t: &HMultiset, f: &FeatureId) -> Result<FeatureId, TreeLikeError> {
    let w = decompose(t)?;
    if &w.root == f {
        return Err(TreeLikeError::IsRoot(f.clone()));
    }
    w.parent.get(f).cloned().ok_or_else(|| TreeLikeError::FeatureAbsent(f.clone()))
}

/// Associated tree, groups and multiplicities of a tree-like multiset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeLikeWitness {
    pub subject: HMultiset,
    pub root: FeatureId,
    pub parent: BTreeMap<FeatureId, FeatureId>,
    pub groups: BTreeSet<Group>,
    /// Count of each non-root node in the multiset that directly holds it.
    pub node_mults: BTreeMap<FeatureId, u64>,
    /// Number of members of each group.
    pub group_mults: BTreeMap<Group, u64>,
}

impl TreeLikeWitness {
    pub fn nodes(&self) -> BTreeSet<FeatureId> {
        let mut out: BTreeSet<FeatureId> = self.parent.keys().cloned().collect();
        out.insert(self.root.clone());
        out
    }

    pub fn group_of(&self, f: &FeatureId) -> Option<&Group> {
        self.groups.iter().find(|g| g.contains(f))
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct J<'a> {
            edges: Vec<[&'a str; 2]>,
            groups: Vec<Vec<&'a str>>,
            mults: BTreeMap<String, u64>,
            root: &'a str,
        }
        let mut mults: BTreeMap<String, u64> =
            self.node_mults.iter().map(|(f, n)| (f.as_str().to_string(), *n)).collect();
        for (g, n) in &self.group_mults {
            mults.insert(fmt_group(g), *n);
        }
        let j = J {
            edges: self.parent.iter().map(|(c, p)| [c.as_str(), p.as_str()]).collect(),
            groups: self.groups.iter().map(|g| g.iter().map(FeatureId::as_str).collect()).collect(),
            mults,
            root: self.root.as_str(),
        };
        serde_json::to_value(j).expect("plain data serializes")
    }
}

fn walk(t: &HMultiset, w: &mut TreeLikeWitness) {
    let r = root_unchecked(t).clone();
    for (k, n) in t.nested() {
        if k.atom_len() > 0 {
            let c = root_unchecked(k).clone();
            w.parent.insert(c.clone(), r.clone());
            w.node_mults.insert(c, n);
            walk(k, w);
        } else {
            let g: Group = k.nested().map(|(m, _)| root_unchecked(m).clone()).collect();
            w.group_mults.insert(g.clone(), g.len() as u64);
            w.groups.insert(g);
            for (m, c) in k.nested() {
                let f = root_unchecked(m).clone();
                w.parent.insert(f.clone(), r.clone());
                w.node_mults.insert(f, c);
                walk(m, w);
            }
        }
    }
}

pub fn decompose(t: &HMultiset) -> Result<TreeLikeWitness, TreeLikeError> {
    ensure(t)?;
    let mut w = TreeLikeWitness {
        subject: t.clone(),
        root: root_unchecked(t).clone(),
        parent: BTreeMap::new(),
        groups: BTreeSet::new(),
        node_mults: BTreeMap::new(),
        group_mults: BTreeMap::new(),
    };
    walk(t, &mut w);
    Ok(w)
}

/// Source of names for padding features.
pub trait FreshNamer {
    /// A name not in `taken`. Returning a taken name is reported as a
    /// collision by the caller.
    fn fresh(&mut self, taken: &BTreeSet<FeatureId>) -> FeatureId;
}

/// Yields `_pad0`, `_pad1`, ... skipping names already in use.
#[derive(Clone, Debug, Default)]
pub struct PadNamer {
    next: usize,
}

impl FreshNamer for PadNamer {
    fn fresh(&mut self, taken: &BTreeSet<FeatureId>) -> FeatureId {
        loop {
            let name = FeatureId::new(&format!("_pad{}", self.next)).expect("valid name");
            self.next += 1;
            if !taken.contains(&name) {
                return name;
            }
        }
    }
}

/// Adds one fresh member with domain `{1}` to every singleton group in
/// `parts`, so that every group has at least two members.
pub(crate) fn pad_singleton_groups(parts: &mut CfdParts, namer: &mut dyn FreshNamer) -> Result<(), TreeLikeError> {
    let singles: Vec<Group> = parts.groups.keys().filter(|g| g.len() == 1).cloned().collect();
    for g in singles {
        let card = parts.groups.remove(&g).expect("present");
        let member = g.first().expect("singleton").clone();
        let parent = parts.parent[&member].clone();
        let taken = parts.features();
        let pad = namer.fresh(&taken);
        if taken.contains(&pad) {
            return Err(TreeLikeError::FreshNameCollision(pad));
        }
        parts.add_feature(pad.clone(), parent, MultiplicityDomain::one());
        let mut padded = g;
        padded.insert(pad);
        parts.groups.insert(padded, card);
    }
    Ok(())
}

/// A diagram whose hierarchical theory contains `t`: the associated tree and
/// groups with singleton domains, singleton groups padded with fresh members.
pub fn cfd_from_tree_like(t: &HMultiset, namer: &mut dyn FreshNamer) -> Result<Cfd, TreeLikeError> {
    let w = decompose(t)?;
    let mut parts = CfdParts::new(w.root.clone());
    for (f, p) in &w.parent {
        let d = MultiplicityDomain::singleton(w.node_mults[f]).expect("counts are positive");
        parts.add_feature(f.clone(), p.clone(), d);
    }
    for (g, n) in &w.group_mults {
        parts.groups.insert(g.clone(), MultiplicityDomain::singleton(*n).expect("groups are non-empty"));
    }
    pad_singleton_groups(&mut parts, namer)?;
    Ok(Cfd::new(parts).expect("construction yields a valid diagram"))
}
