//! Mergeability of finite sets of tree-like multisets, representative
//! diagrams, and reverse engineering a diagram from its hierarchical theory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cfd::{fmt_group, Cfd, CfdError, CfdParts, Group};
use crate::domain::MultiplicityDomain;
use crate::enumerate::{self, Mode};
use crate::feature::FeatureId;
use crate::hier::is_hier_product;
use crate::multiset::HMultiset;
use crate::treelike::{decompose, tree_like_report, pad_singleton_groups, PadNamer, TreeLikeWitness, TreeViolation};

/// A non-empty finite set of tree-like multisets with their decompositions,
/// kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeInput {
    witnesses: Vec<TreeLikeWitness>,
}

impl MergeInput {
    pub fn new<I: IntoIterator<Item = HMultiset>>(items: I) -> Result<Self, MergeError> {
        let set: BTreeSet<HMultiset> = items.into_iter().collect();
        if set.is_empty() {
            return Err(MergeError::Empty);
        }
        let mut witnesses = Vec::with_capacity(set.len());
        for m in set {
            if let Err(violation) = tree_like_report(&m) {
                return Err(MergeError::NotTreeLike { item: m, violation });
            }
            witnesses.push(decompose(&m).expect("checked tree-like"));
        }
        Ok(MergeInput { witnesses })
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn multisets(&self) -> impl Iterator<Item = &HMultiset> + '_ {
        self.witnesses.iter().map(|w| &w.subject)
    }

    pub fn witnesses(&self) -> &[TreeLikeWitness] {
        &self.witnesses
    }

    pub fn to_set(&self) -> BTreeSet<HMultiset> {
        self.multisets().cloned().collect()
    }

    /// Largest node multiplicity over all elements, at least 1.
    pub fn max_multiplicity(&self) -> u64 {
        self.witnesses
            .iter()
            .flat_map(|w| w.node_mults.values().copied())
            .max()
            .unwrap_or(1)
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("no multisets given")]
    Empty,
    #[error("{item} is not tree-like: {violation}")]
    NotTreeLike { item: HMultiset, violation: TreeViolation },
    #[error("not mergeable: {}", join(.0))]
    NotMergeable(Vec<Conflict>),
    #[error("not completely mergeable: {}", join(&.0.failures))]
    NotCompletelyMergeable(Box<CompletenessReport>),
    #[error("feature {0} occurs in none of the multisets")]
    FeatureNeverOccurs(FeatureId),
    #[error("{0} is not a hierarchical product of the diagram")]
    NotRepresented(HMultiset),
    #[error("minimality is only checked for at most {limit} multisets, got {got}")]
    TooManyProducts { got: usize, limit: usize },
    #[error("the diagram has an unbounded domain")]
    Unbounded,
    #[error(transparent)]
    Cfd(#[from] CfdError),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; ")
}

/// A rooted tree given by its root and parent map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub root: FeatureId,
    pub parent: BTreeMap<FeatureId, FeatureId>,
}

impl Tree {
    pub fn of(w: &TreeLikeWitness) -> Tree {
        Tree { root: w.root.clone(), parent: w.parent.clone() }
    }

    pub fn nodes(&self) -> BTreeSet<FeatureId> {
        let mut out: BTreeSet<FeatureId> = self.parent.keys().cloned().collect();
        out.insert(self.root.clone());
        out
    }
}

/// Why a set of tree-like multisets has no representative diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conflict {
    RootMismatch { first: FeatureId, second: FeatureId },
    ParentConflict { node: FeatureId, first: FeatureId, second: FeatureId },
    /// The node is a group member in one multiset and solitary in another.
    GroupingConflict { node: FeatureId },
    /// Overlapping groups merge into `group`, which holds two distinct
    /// groups of `item`.
    GroupClash { group: Group, item: HMultiset },
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conflict::RootMismatch { first, second } => write!(f, "root mismatch ({first} vs {second})"),
            Conflict::ParentConflict { node, first, second } => {
                write!(f, "parent conflict at {node} ({first} vs {second})")
            }
            Conflict::GroupingConflict { node } => {
                write!(f, "{node} is grouped in one multiset and solitary in another")
            }
            Conflict::GroupClash { group, item } => {
                write!(f, "merged group {} holds two groups of {item}", fmt_group(group))
            }
        }
    }
}

fn tree_conflicts(trees: &[Tree]) -> (Option<Tree>, Vec<Conflict>) {
    let Some(first) = trees.first() else {
        return (None, Vec::new());
    };
    let mut conflicts = Vec::new();
    let mut seen_roots = BTreeSet::new();
    for t in trees {
        if t.root != first.root && seen_roots.insert(t.root.clone()) {
            conflicts.push(Conflict::RootMismatch { first: first.root.clone(), second: t.root.clone() });
        }
    }
    let mut parent: BTreeMap<FeatureId, FeatureId> = BTreeMap::new();
    let mut clashing = BTreeSet::new();
    for t in trees {
        for (n, p) in &t.parent {
            match parent.get(n) {
                None => {
                    parent.insert(n.clone(), p.clone());
                }
                Some(q) if q != p && clashing.insert(n.clone()) => conflicts.push(Conflict::ParentConflict {
                    node: n.clone(),
                    first: q.clone(),
                    second: p.clone(),
                }),
                Some(_) => {}
            }
        }
    }
    if conflicts.is_empty() {
        (Some(Tree { root: first.root.clone(), parent }), conflicts)
    } else {
        (None, conflicts)
    }
}

/// Merges trees with equal roots whose shared nodes agree on parents.
/// Panics on an empty slice.
pub fn trees_mergeable(trees: &[Tree]) -> Result<Tree, Conflict> {
    match tree_conflicts(trees) {
        (Some(t), _) => Ok(t),
        (None, mut c) if !c.is_empty() => Err(c.swap_remove(0)),
        (None, _) => panic!("no trees given"),
    }
}

/// Union-find over feature names.
#[derive(Default)]
struct Dsu {
    up: BTreeMap<FeatureId, FeatureId>,
}

impl Dsu {
    fn find(&mut self, f: &FeatureId) -> FeatureId {
        let mut cur = f.clone();
        while let Some(next) = self.up.get(&cur) {
            if *next == cur {
                break;
            }
            cur = next.clone();
        }
        self.up.insert(f.clone(), cur.clone());
        cur
    }

    fn union(&mut self, a: &FeatureId, b: &FeatureId) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.up.insert(ra, rb);
        }
    }

    fn classes(&mut self) -> BTreeSet<Group> {
        let keys: Vec<FeatureId> = self.up.keys().cloned().collect();
        let mut by_root: BTreeMap<FeatureId, Group> = BTreeMap::new();
        for k in keys {
            let r = self.find(&k);
            by_root.entry(r).or_default().insert(k);
        }
        by_root.into_values().collect()
    }
}

/// Transitive unions of overlapping groups across all witnesses.
fn overlap_classes(ws: &[&TreeLikeWitness]) -> BTreeSet<Group> {
    let mut dsu = Dsu::default();
    for w in ws {
        for g in &w.groups {
            let mut it = g.iter();
            let first = it.next().expect("groups are non-empty");
            dsu.find(first);
            for m in it {
                dsu.union(first, m);
            }
        }
    }
    dsu.classes()
}

/// Every reason the multisets have no common representative diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeReport {
    pub conflicts: Vec<Conflict>,
}

impl MergeReport {
    pub fn is_mergeable(&self) -> bool {
        self.conflicts.is_empty()
    }
}

fn merge_report_of(ws: &[&TreeLikeWitness]) -> MergeReport {
    let trees: Vec<Tree> = ws.iter().map(|w| Tree::of(w)).collect();
    let (_, mut conflicts) = tree_conflicts(&trees);

    let mut grouped = BTreeSet::new();
    let mut solitary = BTreeSet::new();
    for w in ws {
        for n in w.parent.keys() {
            if w.group_of(n).is_some() {
                grouped.insert(n.clone());
            } else {
                solitary.insert(n.clone());
            }
        }
    }
    for node in grouped.intersection(&solitary) {
        conflicts.push(Conflict::GroupingConflict { node: node.clone() });
    }

    for class in overlap_classes(ws) {
        for w in ws {
            if w.groups.iter().filter(|g| g.is_subset(&class)).count() > 1 {
                conflicts.push(Conflict::GroupClash { group: class.clone(), item: w.subject.clone() });
            }
        }
    }
    MergeReport { conflicts }
}

/// Checks that the associated trees merge, that no shared node is grouped
/// in one multiset and solitary in another, and that no merged group
/// absorbs two groups of the same multiset.
pub fn merge_report(u: &MergeInput) -> MergeReport {
    merge_report_of(&u.witnesses.iter().collect::<Vec<_>>())
}

pub fn are_mergeable(u: &MergeInput) -> bool {
    merge_report(u).is_mergeable()
}

/// Builds the candidate representative without checking the conditions.
fn build_representative(ws: &[&TreeLikeWitness]) -> Result<Cfd, MergeError> {
    let trees: Vec<Tree> = ws.iter().map(|w| Tree::of(w)).collect();
    let tree = trees_mergeable(&trees).map_err(|c| MergeError::NotMergeable(vec![c]))?;
    let mut parts = CfdParts::new(tree.root.clone());
    for (f, p) in &tree.parent {
        let mut values = BTreeSet::new();
        for w in ws {
            match w.node_mults.get(f) {
                Some(&c) => values.insert(c),
                None => values.insert(0),
            };
        }
        let d = MultiplicityDomain::from_values(values).expect("some multiset holds the node");
        parts.add_feature(f.clone(), p.clone(), d);
    }
    for class in overlap_classes(ws) {
        let values = ws.iter().map(|w| class.iter().filter(|m| w.node_mults.contains_key(*m)).count() as u64);
        let d = MultiplicityDomain::from_values(values).expect("some multiset selects from the group");
        parts.groups.insert(class, d);
    }
    pad_singleton_groups(&mut parts, &mut PadNamer::default()).expect("pad names skip taken ones");
    Ok(Cfd::new(parts)?)
}

/// A diagram whose hierarchical theory contains every element of `u`.
pub fn representative_cfd(u: &MergeInput) -> Result<Cfd, MergeError> {
    let report = merge_report(u);
    if !report.is_mergeable() {
        return Err(MergeError::NotMergeable(report.conflicts));
    }
    build_representative(&u.witnesses.iter().collect::<Vec<_>>())
}

pub fn relax_set(u: &MergeInput) -> MergeInput {
    MergeInput::new(u.multisets().map(HMultiset::relax)).expect("relaxing keeps tree-likeness")
}

/// Decides mergeability by building the representative of the relaxed set
/// and checking that it holds every relaxed multiset.
pub fn mergeable_via_relaxed(u: &MergeInput) -> bool {
    let r = relax_set(u);
    let Ok(cfd) = build_representative(&r.witnesses.iter().collect::<Vec<_>>()) else {
        return false;
    };
    let holds = r.multisets().all(|t| is_hier_product(&cfd, t).unwrap_or(false));
    holds
}

/// Multiplicities of `f` over the elements holding it. Empty for a root.
pub fn overall_multiplicities(u: &MergeInput, f: &FeatureId) -> Result<BTreeSet<u64>, MergeError> {
    let mut out = BTreeSet::new();
    let mut seen = false;
    for w in &u.witnesses {
        if w.root == *f {
            seen = true;
        } else if let Some(&c) = w.node_mults.get(f) {
            seen = true;
            out.insert(c);
        }
    }
    if seen {
        Ok(out)
    } else {
        Err(MergeError::FeatureNeverOccurs(f.clone()))
    }
}

/// Why a set of tree-like multisets is not exactly some diagram's theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Incompleteness {
    NotMergeable(Vec<Conflict>),
    /// A grouped feature that could never share a group with a sibling.
    LoneGroupMember { member: FeatureId },
    /// Features that are never split across group keys yet appear in two
    /// group keys of `item`.
    SplitGroup { group: Group, item: HMultiset },
    /// The candidate built from the relaxed set has a different theory.
    RelaxedTheoryMismatch { candidate: u128, relaxed: usize },
    /// No element with relaxed shape `shape` has `feature` with `multiplicity`.
    MissingCombination { shape: HMultiset, feature: FeatureId, multiplicity: u64 },
    /// The reverse-engineered candidate has a different theory.
    TheoryMismatch { candidate: u128, given: usize },
}

impl fmt::Display for Incompleteness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Incompleteness::NotMergeable(c) => write!(f, "not mergeable: {}", join(c)),
            Incompleteness::LoneGroupMember { member } => {
                write!(f, "grouped feature {member} never shares a group key with a sibling")
            }
            Incompleteness::SplitGroup { group, item } => {
                write!(f, "group {} is split across group keys in {item}", fmt_group(group))
            }
            Incompleteness::RelaxedTheoryMismatch { candidate, relaxed } => write!(
                f,
                "relaxed set is not completely mergeable: candidate has {candidate} products, relaxed set has {relaxed}"
            ),
            Incompleteness::MissingCombination { shape, feature, multiplicity } => {
                write!(f, "no multiset of shape {shape} has {feature} with multiplicity {multiplicity}")
            }
            Incompleteness::TheoryMismatch { candidate, given } => {
                write!(f, "candidate diagram has {candidate} products, the set has {given}")
            }
        }
    }
}

/// Outcome of the complete-mergeability check. The verdict is carried by
/// `certificate`: a diagram whose full theory was re-enumerated and found
/// equal to the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessReport {
    pub mergeable: bool,
    pub relaxed_complete: bool,
    pub combinations_complete: bool,
    pub failures: Vec<Incompleteness>,
    pub certificate: Option<Cfd>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.certificate.is_some()
    }
}

/// Groups of grouped siblings: two siblings share a group unless some
/// element holds them in two distinct group keys.
fn sibling_groups(tree: &Tree, ws: &[&TreeLikeWitness]) -> Result<Vec<Group>, Incompleteness> {
    let grouped: BTreeSet<&FeatureId> =
        ws.iter().flat_map(|w| w.groups.iter().flatten()).collect();
    let mut by_parent: BTreeMap<&FeatureId, Vec<&FeatureId>> = BTreeMap::new();
    for f in grouped {
        by_parent.entry(&tree.parent[f]).or_default().push(f);
    }
    let separated = |a: &FeatureId, b: &FeatureId| {
        ws.iter().any(|w| match (w.group_of(a), w.group_of(b)) {
            (Some(x), Some(y)) => x != y,
            _ => false,
        })
    };
    let mut dsu = Dsu::default();
    for members in by_parent.values() {
        for (i, a) in members.iter().enumerate() {
            dsu.find(a);
            for b in &members[i + 1..] {
                if !separated(a, b) {
                    dsu.union(a, b);
                }
            }
        }
    }
    let classes: Vec<Group> = dsu.classes().into_iter().collect();
    for class in &classes {
        if class.len() == 1 {
            let member = class.first().expect("non-empty").clone();
            return Err(Incompleteness::LoneGroupMember { member });
        }
        for w in ws {
            if w.groups.iter().filter(|g| !g.is_disjoint(class)).count() > 1 {
                return Err(Incompleteness::SplitGroup { group: class.clone(), item: w.subject.clone() });
            }
        }
    }
    Ok(classes)
}

/// Candidate diagram for `ws`. Solitary features get `{1}` when present
/// whenever their parent is and `{0,1}` otherwise; with `with_mults` the 1
/// is replaced by the observed multiplicities. Group domains are the
/// observed selection sizes.
fn candidate(ws: &[&TreeLikeWitness], with_mults: bool) -> Result<Cfd, Incompleteness> {
    let report = merge_report_of(ws);
    if !report.is_mergeable() {
        return Err(Incompleteness::NotMergeable(report.conflicts));
    }
    let trees: Vec<Tree> = ws.iter().map(|w| Tree::of(w)).collect();
    let tree = trees_mergeable(&trees).expect("checked above");
    let classes = sibling_groups(&tree, ws)?;
    let grouped: BTreeSet<&FeatureId> = classes.iter().flatten().collect();

    let mut parts = CfdParts::new(tree.root.clone());
    for (f, p) in &tree.parent {
        let mut values: BTreeSet<u64> = if with_mults {
            ws.iter().filter_map(|w| w.node_mults.get(f).copied()).collect()
        } else {
            BTreeSet::from([1])
        };
        let optional = ws.iter().any(|w| w.nodes().contains(p) && !w.node_mults.contains_key(f));
        if optional && !grouped.contains(f) {
            values.insert(0);
        }
        let d = MultiplicityDomain::from_values(values).expect("non-empty positive set");
        parts.add_feature(f.clone(), p.clone(), d);
    }
    for class in classes {
        let p = &tree.parent[class.first().expect("non-empty")];
        let values = ws
            .iter()
            .filter(|w| w.nodes().contains(p))
            .map(|w| class.iter().filter(|m| w.node_mults.contains_key(*m)).count() as u64);
        let d = MultiplicityDomain::from_values(values).expect("some element selects from the group");
        parts.groups.insert(class, d);
    }
    Ok(Cfd::new(parts).expect("candidate construction yields a valid diagram"))
}

/// Whether the theory of `cfd` at `bound` is exactly `set`. Counts first,
/// so a larger theory is rejected without enumerating it.
fn theory_equals(cfd: &Cfd, bound: u64, set: &BTreeSet<HMultiset>) -> Result<(), u128> {
    let count = enumerate::count_at(cfd, cfd.root(), bound);
    if count != set.len() as u128 {
        return Err(count);
    }
    let products: BTreeSet<HMultiset> = enumerate::products_at(cfd, cfd.root(), bound, Mode::Hier)
        .map_err(|_| count)?
        .into_iter()
        .collect();
    if products == *set {
        Ok(())
    } else {
        Err(count)
    }
}

/// Every (shape, feature, multiplicity) combination missing from `u`.
fn missing_combinations(u: &MergeInput) -> Vec<Incompleteness> {
    let mut acrd: BTreeMap<&FeatureId, BTreeSet<u64>> = BTreeMap::new();
    let mut shapes: BTreeMap<HMultiset, Vec<&TreeLikeWitness>> = BTreeMap::new();
    for w in &u.witnesses {
        for (f, &c) in &w.node_mults {
            acrd.entry(f).or_default().insert(c);
        }
        shapes.entry(w.subject.relax()).or_default().push(w);
    }
    let mut out = Vec::new();
    for (shape, members) in shapes {
        for f in members[0].node_mults.keys() {
            for &c in &acrd[f] {
                if !members.iter().any(|w| w.node_mults[f] == c) {
                    out.push(Incompleteness::MissingCombination {
                        shape: shape.clone(),
                        feature: f.clone(),
                        multiplicity: c,
                    });
                }
            }
        }
    }
    out
}

/// Decides whether `u` is exactly the hierarchical theory of some diagram.
/// Reports whether the relaxed set is complete and whether every relaxed
/// shape occurs with every observed multiplicity; the verdict itself rests
/// on re-enumerating the reverse-engineered candidate.
pub fn completeness_report(u: &MergeInput) -> CompletenessReport {
    let mut report = CompletenessReport {
        mergeable: true,
        relaxed_complete: false,
        combinations_complete: false,
        failures: Vec::new(),
        certificate: None,
    };
    let merge = merge_report(u);
    if !merge.is_mergeable() {
        report.mergeable = false;
        report.failures.push(Incompleteness::NotMergeable(merge.conflicts));
        return report;
    }

    let relaxed = relax_set(u);
    let rws: Vec<&TreeLikeWitness> = relaxed.witnesses.iter().collect();
    match candidate(&rws, false) {
        Ok(rc) => match theory_equals(&rc, 1, &relaxed.to_set()) {
            Ok(()) => report.relaxed_complete = true,
            Err(n) => report
                .failures
                .push(Incompleteness::RelaxedTheoryMismatch { candidate: n, relaxed: relaxed.len() }),
        },
        Err(e) => report.failures.push(e),
    }

    let missing = missing_combinations(u);
    report.combinations_complete = missing.is_empty();
    report.failures.extend(missing);

    if report.relaxed_complete {
        let ws: Vec<&TreeLikeWitness> = u.witnesses.iter().collect();
        match candidate(&ws, true) {
            Ok(cfd) => match theory_equals(&cfd, u.max_multiplicity(), &u.to_set()) {
                Ok(()) => report.certificate = Some(cfd),
                Err(n) => report.failures.push(Incompleteness::TheoryMismatch { candidate: n, given: u.len() }),
            },
            Err(e) => report.failures.push(e),
        }
    }
    report
}

pub fn is_completely_mergeable(u: &MergeInput) -> bool {
    completeness_report(u).is_complete()
}

/// The unique diagram whose hierarchical theory is exactly `u`.
pub fn reverse_engineer(u: &MergeInput) -> Result<Cfd, MergeError> {
    let mut report = completeness_report(u);
    match report.certificate.take() {
        Some(cfd) => Ok(cfd),
        None => Err(MergeError::NotCompletelyMergeable(Box::new(report))),
    }
}

/// A single-value tightening of a diagram that still holds every element
/// but has fewer products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tightening {
    /// Feature name or group in `{a, b}` form.
    pub element: String,
    pub removed: u64,
    pub products: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityReport {
    pub products: u128,
    /// `None` when no tightening works, i.e. the diagram is minimal among
    /// its tightenings.
    pub tighter: Option<Tightening>,
}

impl MinimalityReport {
    pub fn is_minimal(&self) -> bool {
        self.tighter.is_none()
    }
}

/// Most elements `verify_minimal` accepts.
pub const MINIMALITY_LIMIT: usize = 12;

/// Tries every way of dropping one value from one finite domain of `cfd`
/// and reports the first diagram that still holds all of `u` with fewer
/// products. Dropping several values at once cannot do better than
/// dropping one of them, since every value of a valid domain is used by
/// some product.
pub fn verify_minimal(cfd: &Cfd, u: &MergeInput) -> Result<MinimalityReport, MergeError> {
    if u.len() > MINIMALITY_LIMIT {
        return Err(MergeError::TooManyProducts { got: u.len(), limit: MINIMALITY_LIMIT });
    }
    let bound = cfd.max_multiplicity().ok_or(MergeError::Unbounded)?.max(1);
    for t in u.multisets() {
        if !is_hier_product(cfd, t).unwrap_or(false) {
            return Err(MergeError::NotRepresented(t.clone()));
        }
    }
    let products = enumerate::count_at(cfd, cfd.root(), bound);
    let holds_all = |c: &Cfd| u.multisets().all(|t| is_hier_product(c, t).unwrap_or(false));

    let parts = cfd.parts();
    let mut trials: Vec<(String, u64, CfdParts)> = Vec::new();
    for (f, d) in &parts.card {
        for v in d.members_up_to(bound) {
            if let Ok(nd) = MultiplicityDomain::from_values(d.members_up_to(bound).into_iter().filter(|&x| x != v)) {
                let mut p = parts.clone();
                p.card.insert(f.clone(), nd);
                trials.push((f.to_string(), v, p));
            }
        }
    }
    for (g, d) in &parts.groups {
        for v in d.members_up_to(bound) {
            if let Ok(nd) = MultiplicityDomain::from_values(d.members_up_to(bound).into_iter().filter(|&x| x != v)) {
                let mut p = parts.clone();
                p.groups.insert(g.clone(), nd);
                trials.push((fmt_group(g), v, p));
            }
        }
    }
    for (element, removed, p) in trials {
        let Ok(c) = Cfd::new(p) else { continue };
        let n = enumerate::count_at(&c, c.root(), bound);
        if n < products && holds_all(&c) {
            return Ok(MinimalityReport { products, tighter: Some(Tightening { element, removed, products: n }) });
        }
    }
    Ok(MinimalityReport { products, tighter: None })
}
