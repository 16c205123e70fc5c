//! Cardinality-based feature diagrams.
//!
//! [`CfdParts`] is the unchecked 5-tuple as it comes out of a parser or a
//! construction; [`validate`] lists everything wrong with it. [`Cfd`] can only
//! be obtained from parts without violations, so every `Cfd` is a tree with
//! disjoint sibling groups and a total multiplicity function.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::MultiplicityDomain;
use crate::feature::FeatureId;

/// A group is identified by its member set.
pub type Group = BTreeSet<FeatureId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfdParts {
    pub root: FeatureId,
    /// Parent of every non-root feature.
    pub parent: BTreeMap<FeatureId, FeatureId>,
    /// Multiplicity domain of every non-root feature.
    pub card: BTreeMap<FeatureId, MultiplicityDomain>,
    pub groups: BTreeMap<Group, MultiplicityDomain>,
}

impl CfdParts {
    pub fn new(root: FeatureId) -> Self {
        CfdParts {
            root,
            parent: BTreeMap::new(),
            card: BTreeMap::new(),
            groups: BTreeMap::new(),
        }
    }

    pub fn add_feature(&mut self, f: FeatureId, parent: FeatureId, card: MultiplicityDomain) -> &mut Self {
        self.parent.insert(f.clone(), parent);
        self.card.insert(f, card);
        self
    }

    pub fn add_group<I: IntoIterator<Item = FeatureId>>(&mut self, members: I, card: MultiplicityDomain) -> &mut Self {
        self.groups.insert(members.into_iter().collect(), card);
        self
    }

    pub fn features(&self) -> BTreeSet<FeatureId> {
        let mut out: BTreeSet<FeatureId> = self.parent.keys().cloned().collect();
        out.insert(self.root.clone());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("root {0} has a parent")]
    RootHasParent(FeatureId),
    #[error("root {0} has a multiplicity domain")]
    RootHasCard(FeatureId),
    #[error("parent {parent} of {feature} is not a feature")]
    UnknownParent { feature: FeatureId, parent: FeatureId },
    #[error("{0} does not reach the root (cycle)")]
    Cycle(FeatureId),
    #[error("feature {0} has no multiplicity domain")]
    MissingCard(FeatureId),
    #[error("multiplicity domain given for unknown feature {0}")]
    CardForUnknown(FeatureId),
    #[error("group too small: {} has fewer than 2 members", fmt_group(.0))]
    GroupTooSmall(Group),
    #[error("group {} contains unknown feature {member}", fmt_group(.group))]
    GroupUnknownMember { group: Group, member: FeatureId },
    #[error("group {} contains the root", fmt_group(.0))]
    GroupContainsRoot(Group),
    #[error("group {} has members with different parents", fmt_group(.0))]
    GroupNotSiblings(Group),
    #[error("groups {} and {} share {shared}", fmt_group(.first), fmt_group(.second))]
    GroupsOverlap { first: Group, second: Group, shared: FeatureId },
    #[error("group {} has an unbounded multiplicity domain", fmt_group(.0))]
    GroupCardUnbounded(Group),
    #[error("group bound exceeds size: {} allows {max} of {size} members", fmt_group(.group))]
    GroupCardExceedsSize { group: Group, max: u64, size: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Warning {
    #[error("grouped feature {0} allows multiplicity 0; selecting it with 0 copies is never produced")]
    GroupedFeatureAllowsZero(FeatureId),
}

pub fn fmt_group(g: &Group) -> String {
    let names: Vec<&str> = g.iter().map(FeatureId::as_str).collect();
    format!("{{{}}}", names.join(","))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every well-formedness rule and reports all violations found.
pub fn validate(parts: &CfdParts) -> Validation {
    let mut v = Vec::new();
    let features = parts.features();
    let root = &parts.root;
    if parts.parent.contains_key(root) {
        v.push(Violation::RootHasParent(root.clone()));
    }
    if parts.card.contains_key(root) {
        v.push(Violation::RootHasCard(root.clone()));
    }
    for (f, p) in &parts.parent {
        if f != root && !features.contains(p) {
            v.push(Violation::UnknownParent { feature: f.clone(), parent: p.clone() });
        }
    }
    for f in parts.parent.keys().filter(|f| *f != root) {
        let mut seen = BTreeSet::new();
        let mut cur = f;
        let mut reaches = false;
        while seen.insert(cur) {
            if cur == root {
                reaches = true;
                break;
            }
            match parts.parent.get(cur) {
                Some(p) => cur = p,
                None => {
                    // an unknown parent was already reported
                    reaches = true;
                    break;
                }
            }
        }
        if !reaches {
            v.push(Violation::Cycle(f.clone()));
        }
    }
    for f in parts.parent.keys().filter(|f| *f != root) {
        if !parts.card.contains_key(f) {
            v.push(Violation::MissingCard(f.clone()));
        }
    }
    for f in parts.card.keys() {
        if !features.contains(f) {
            v.push(Violation::CardForUnknown(f.clone()));
        }
    }
    for (g, card) in &parts.groups {
        if g.len() < 2 {
            v.push(Violation::GroupTooSmall(g.clone()));
        }
        for m in g {
            if !features.contains(m) {
                v.push(Violation::GroupUnknownMember { group: g.clone(), member: m.clone() });
            }
        }
        if g.contains(root) {
            v.push(Violation::GroupContainsRoot(g.clone()));
        }
        let parents: BTreeSet<Option<&FeatureId>> = g.iter().map(|m| parts.parent.get(m)).collect();
        if parents.len() > 1 {
            v.push(Violation::GroupNotSiblings(g.clone()));
        }
        match card.max() {
            None => v.push(Violation::GroupCardUnbounded(g.clone())),
            Some(max) if max > g.len() as u64 => v.push(Violation::GroupCardExceedsSize {
                group: g.clone(),
                max,
                size: g.len(),
            }),
            Some(_) => {}
        }
    }
    let gs: Vec<&Group> = parts.groups.keys().collect();
    for (i, a) in gs.iter().enumerate() {
        for b in &gs[i + 1..] {
            if let Some(shared) = a.intersection(b).next() {
                v.push(Violation::GroupsOverlap {
                    first: (*a).clone(),
                    second: (*b).clone(),
                    shared: shared.clone(),
                });
            }
        }
    }
    let mut warnings = Vec::new();
    for g in parts.groups.keys() {
        for m in g {
            if parts.card.get(m).is_some_and(MultiplicityDomain::contains_zero) {
                warnings.push(Warning::GroupedFeatureAllowsZero(m.clone()));
            }
        }
    }
    Validation { violations: v, warnings }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CfdError {
    #[error("invalid diagram: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown feature {0}")]
    UnknownFeature(FeatureId),
    #[error("unknown group {}", fmt_group(.0))]
    UnknownGroup(Group),
    #[error("depth {k} is out of range 1..={depth}")]
    DepthOutOfRange { k: usize, depth: usize },
    #[error("duplicate feature name {0}")]
    DuplicateFeature(FeatureId),
    #[error("malformed JSON diagram: {0}")]
    Json(String),
}

/// A well-formed CFD.
#[derive(Clone)]
pub struct Cfd {
    parts: CfdParts,
    children: BTreeMap<FeatureId, BTreeSet<FeatureId>>,
    group_of: BTreeMap<FeatureId, Group>,
}

impl PartialEq for Cfd {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Eq for Cfd {}

impl fmt::Debug for Cfd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::emit_cfd(self))
    }
}

impl fmt::Display for Cfd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::emit_cfd(self))
    }
}

impl Cfd {
    pub fn new(parts: CfdParts) -> Result<Cfd, CfdError> {
        let report = validate(&parts);
        if !report.is_ok() {
            return Err(CfdError::Invalid(report.violations));
        }
        let mut children: BTreeMap<FeatureId, BTreeSet<FeatureId>> = BTreeMap::new();
        children.insert(parts.root.clone(), BTreeSet::new());
        for f in parts.parent.keys() {
            children.insert(f.clone(), BTreeSet::new());
        }
        for (f, p) in &parts.parent {
            children.get_mut(p).expect("validated parent").insert(f.clone());
        }
        let mut group_of = BTreeMap::new();
        for g in parts.groups.keys() {
            for m in g {
                group_of.insert(m.clone(), g.clone());
            }
        }
        Ok(Cfd { parts, children, group_of })
    }

    /// The one-feature diagram.
    pub fn singleton(root: FeatureId) -> Cfd {
        Cfd::new(CfdParts::new(root)).expect("a lone root is well formed")
    }

    pub fn parts(&self) -> &CfdParts {
        &self.parts
    }

    pub fn into_parts(self) -> CfdParts {
        self.parts
    }

    pub fn root(&self) -> &FeatureId {
        &self.parts.root
    }

    /// All features, in name order.
    pub fn features(&self) -> impl Iterator<Item = &FeatureId> + '_ {
        self.children.keys()
    }

    pub fn feature_count(&self) -> usize {
        self.children.len()
    }

    pub fn contains(&self, f: &FeatureId) -> bool {
        self.children.contains_key(f)
    }

    fn known(&self, f: &FeatureId) -> Result<(), CfdError> {
        if self.contains(f) {
            Ok(())
        } else {
            Err(CfdError::UnknownFeature(f.clone()))
        }
    }

    pub fn parent(&self, f: &FeatureId) -> Option<&FeatureId> {
        self.parts.parent.get(f)
    }

    pub fn children(&self, f: &FeatureId) -> Result<&BTreeSet<FeatureId>, CfdError> {
        self.children.get(f).ok_or_else(|| CfdError::UnknownFeature(f.clone()))
    }

    /// Domain of a non-root feature; `None` for the root or unknown names.
    pub fn card(&self, f: &FeatureId) -> Option<&MultiplicityDomain> {
        self.parts.card.get(f)
    }

    pub fn group_card(&self, g: &Group) -> Option<&MultiplicityDomain> {
        self.parts.groups.get(g)
    }

    pub fn groups(&self) -> impl Iterator<Item = (&Group, &MultiplicityDomain)> + '_ {
        self.parts.groups.iter()
    }

    pub fn group_of(&self, f: &FeatureId) -> Result<Option<&Group>, CfdError> {
        self.known(f)?;
        Ok(self.group_of.get(f))
    }

    pub fn is_grouped(&self, f: &FeatureId) -> bool {
        self.group_of.contains_key(f)
    }

    /// Non-root features in no group.
    pub fn solitary(&self) -> BTreeSet<FeatureId> {
        self.parts
            .parent
            .keys()
            .filter(|f| !self.group_of.contains_key(*f))
            .cloned()
            .collect()
    }

    pub fn solitary_children(&self, f: &FeatureId) -> Result<Vec<&FeatureId>, CfdError> {
        Ok(self
            .children(f)?
            .iter()
            .filter(|c| !self.group_of.contains_key(*c))
            .collect())
    }

    /// Groups whose members are children of `f`, ordered by member set.
    pub fn child_groups(&self, f: &FeatureId) -> Result<Vec<&Group>, CfdError> {
        let kids = self.children(f)?;
        let set: BTreeSet<&Group> = kids.iter().filter_map(|c| self.group_of.get(c)).collect();
        Ok(set.into_iter().collect())
    }

    /// Depth of `f`, with the root at depth 1.
    pub fn depth_of(&self, f: &FeatureId) -> Result<usize, CfdError> {
        self.known(f)?;
        let mut d = 1;
        let mut cur = f;
        while let Some(p) = self.parent(cur) {
            d += 1;
            cur = p;
        }
        Ok(d)
    }

    pub fn depth(&self) -> usize {
        fn go(c: &Cfd, f: &FeatureId) -> usize {
            1 + c.children[f].iter().map(|k| go(c, k)).max().unwrap_or(0)
        }
        go(self, self.root())
    }

    /// `f` and all its descendants.
    pub fn subtree(&self, f: &FeatureId) -> Result<BTreeSet<FeatureId>, CfdError> {
        self.known(f)?;
        let mut out = BTreeSet::new();
        let mut stack = vec![f.clone()];
        while let Some(x) = stack.pop() {
            stack.extend(self.children[&x].iter().cloned());
            out.insert(x);
        }
        Ok(out)
    }

    fn restrict(&self, root: &FeatureId, keep: &BTreeSet<FeatureId>) -> Cfd {
        let mut parts = CfdParts::new(root.clone());
        for f in keep.iter().filter(|f| *f != root) {
            parts.add_feature(f.clone(), self.parts.parent[f].clone(), self.parts.card[f].clone());
        }
        for (g, card) in &self.parts.groups {
            if g.is_subset(keep) && !g.contains(root) {
                parts.groups.insert(g.clone(), card.clone());
            }
        }
        Cfd::new(parts).expect("restrictions of a valid diagram are valid")
    }

    /// The diagram made of `f`'s subtree, with groups inside it.
    pub fn induced_by_node(&self, f: &FeatureId) -> Result<Cfd, CfdError> {
        let keep = self.subtree(f)?;
        Ok(self.restrict(f, &keep))
    }

    /// The diagram made of all features at depth `<= k`.
    pub fn upper_induced_by_depth(&self, k: usize) -> Result<Cfd, CfdError> {
        let depth = self.depth();
        if k == 0 || k > depth {
            return Err(CfdError::DepthOutOfRange { k, depth });
        }
        let keep: BTreeSet<FeatureId> = self
            .features()
            .filter(|f| self.depth_of(f).expect("known") <= k)
            .cloned()
            .collect();
        Ok(self.restrict(self.root(), &keep))
    }

    pub fn warnings(&self) -> Vec<Warning> {
        validate(&self.parts).warnings
    }

    /// True when every feature and group domain is finite.
    pub fn is_finite(&self) -> bool {
        self.parts.card.values().all(MultiplicityDomain::is_finite)
    }

    /// Largest finite member over all feature domains (0 for a lone root);
    /// `None` if some feature domain is infinite.
    pub fn max_multiplicity(&self) -> Option<u64> {
        let mut m = 0;
        for d in self.parts.card.values() {
            m = m.max(d.max()?);
        }
        Some(m)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.json_node(self.root(), true)).expect("plain data serializes")
    }

    fn json_node(&self, f: &FeatureId, is_root: bool) -> JsonNode {
        let children = self
            .solitary_children(f)
            .expect("known")
            .into_iter()
            .map(|c| self.json_node(c, false))
            .collect();
        let groups = self
            .child_groups(f)
            .expect("known")
            .into_iter()
            .map(|g| JsonGroup {
                card: self.parts.groups[g].clone(),
                members: g.iter().map(|m| self.json_node(m, false)).collect(),
            })
            .collect();
        JsonNode {
            card: if is_root { None } else { Some(self.parts.card[f].clone()) },
            children,
            groups,
            name: f.clone(),
        }
    }

    /// Reads the nested JSON form. Non-root nodes without `card` get `{1}`.
    pub fn parts_from_json(value: &serde_json::Value) -> Result<CfdParts, CfdError> {
        let node: JsonNode =
            serde_json::from_value(value.clone()).map_err(|e| CfdError::Json(e.to_string()))?;
        let mut parts = CfdParts::new(node.name.clone());
        if let Some(c) = &node.card {
            parts.card.insert(node.name.clone(), c.clone());
        }
        let mut seen = BTreeSet::from([node.name.clone()]);
        fill_from_json(&node, &mut parts, &mut seen)?;
        Ok(parts)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Cfd, CfdError> {
        Cfd::new(Cfd::parts_from_json(value)?)
    }
}

fn fill_from_json(
    node: &JsonNode,
    parts: &mut CfdParts,
    seen: &mut BTreeSet<FeatureId>,
) -> Result<(), CfdError> {
    let mut add = |child: &JsonNode, parts: &mut CfdParts| -> Result<(), CfdError> {
        if !seen.insert(child.name.clone()) {
            return Err(CfdError::DuplicateFeature(child.name.clone()));
        }
        let card = child.card.clone().unwrap_or_else(MultiplicityDomain::one);
        parts.add_feature(child.name.clone(), node.name.clone(), card);
        fill_from_json(child, parts, seen)
    };
    for c in &node.children {
        add(c, parts)?;
    }
    for g in &node.groups {
        for m in &g.members {
            add(m, parts)?;
        }
        parts.groups.insert(g.members.iter().map(|m| m.name.clone()).collect(), g.card.clone());
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    card: Option<MultiplicityDomain>,
    #[serde(default)]
    children: Vec<JsonNode>,
    #[serde(default)]
    groups: Vec<JsonGroup>,
    name: FeatureId,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGroup {
    card: MultiplicityDomain,
    members: Vec<JsonNode>,
}
