//! Fusing two grounded graphs under an entity alignment.
//!
//! Matched continuants collapse onto the A-side id and their events
//! coalesce. Attribute slots declared FUNCTIONAL keep one current value:
//! differing values are an *update* resolved by graph revision (ties are
//! flagged as conflicts and both values kept), whereas MULTI slots are
//! simply unioned. Everything else from B is added under fresh ids when
//! its id is already taken in A.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::format::GkgDocument;
use crate::hierarchy::HierarchyError;
use crate::model::{Edge, GroundedGraph, Node, NodeId, NodeKind, PrimitiveRelation, RoleRelation, ValidationReport};
use crate::schema::{AttrArity, Cardinality, Schema};

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("alignment references `{0}`, which is not a continuant of its graph")]
    AlignmentGraphMismatch(NodeId),
    #[error("alignment maps `{0}` more than once")]
    DuplicateAlignment(NodeId),
    #[error("cannot combine type hierarchies: {0}")]
    Hierarchy(#[from] HierarchyError),
    #[error("merged graph failed validation: {0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergePolicy {
    pub attr_decls: BTreeMap<(NodeId, NodeId), AttrArity>,
    pub cardinality: BTreeMap<NodeId, Cardinality>,
    /// Higher revision wins FUNCTIONAL updates when true, lower when false.
    pub prefer_newer: bool,
}

impl Default for MergePolicy {
    fn default() -> Self {
        MergePolicy { attr_decls: BTreeMap::new(), cardinality: BTreeMap::new(), prefer_newer: true }
    }
}

impl MergePolicy {
    pub fn from_schema(schema: &Schema) -> Self {
        MergePolicy {
            attr_decls: schema.attr_decls.clone(),
            cardinality: schema.cardinality.clone(),
            prefer_newer: true,
        }
    }

    fn arity(&self, bearer_type: Option<&NodeId>, attr_type: &NodeId) -> AttrArity {
        bearer_type.and_then(|t| self.attr_decls.get(&(t.clone(), attr_type.clone()))).copied().unwrap_or_default()
    }

    fn cardinality(&self, event_type: &NodeId) -> Cardinality {
        self.cardinality.get(event_type).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateEntry {
    pub bearer: NodeId,
    pub attr_type: NodeId,
    pub old_values: Vec<String>,
    pub new_values: Vec<String>,
    pub winner_revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictEntry {
    pub bearer: NodeId,
    pub attr_type: NodeId,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeReport {
    /// Fused continuant pairs.
    pub merged: usize,
    /// `eq(idA, idB)` provenance for every fused continuant.
    pub identities: Vec<(NodeId, NodeId)>,
    pub events_coalesced: usize,
    pub updated: Vec<UpdateEntry>,
    pub conflicts: Vec<ConflictEntry>,
    pub added_nodes: usize,
    pub added_edges: usize,
    /// B-side ids that had to be renamed, with their new id.
    pub renamed: Vec<(NodeId, NodeId)>,
    /// Where every surviving B node ended up in the output.
    pub node_map: BTreeMap<NodeId, NodeId>,
}

impl MergeReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("[summary]\n");
        out.push_str(&format!("merged\t{}\n", self.merged));
        out.push_str(&format!("events_coalesced\t{}\n", self.events_coalesced));
        out.push_str(&format!("added_nodes\t{}\n", self.added_nodes));
        out.push_str(&format!("added_edges\t{}\n", self.added_edges));
        out.push_str("[eq]\n");
        for (a, b) in &self.identities {
            out.push_str(&format!("{a}\t{b}\n"));
        }
        out.push_str("[updated]\n");
        for u in &self.updated {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                u.bearer,
                u.attr_type,
                u.old_values.join("|"),
                u.new_values.join("|"),
                u.winner_revision
            ));
        }
        out.push_str("[conflicts]\n");
        for c in &self.conflicts {
            out.push_str(&format!("{}\t{}\t{}\n", c.bearer, c.attr_type, c.values.join("|")));
        }
        out.push_str("[renamed]\n");
        for (from, to) in &self.renamed {
            out.push_str(&format!("{from}\t{to}\n"));
        }
        out
    }
}

/// Participation links and attribute content of an occurrent, with
/// participants expressed in output ids where known.
#[derive(PartialEq, Eq)]
struct EventContent {
    participants: BTreeSet<(RoleRelation, NodeId)>,
    attributes: BTreeSet<(NodeId, Vec<String>)>,
}

fn event_content(g: &GroundedGraph, o: &NodeId, map: &BTreeMap<NodeId, NodeId>) -> EventContent {
    let participants = g.participants(o).map(|(r, p)| (r, map.get(p).cloned().unwrap_or_else(|| p.clone()))).collect();
    let attributes = g
        .attributes_of(o)
        .filter_map(|a| {
            let ty = g.node(a)?.inst_of.clone()?;
            Some((ty, g.values_of(a).into_iter().map(String::from).collect()))
        })
        .collect();
    EventContent { participants, attributes }
}

struct Merger<'a> {
    a: &'a GkgDocument,
    b: &'a GkgDocument,
    policy: &'a MergePolicy,
    out: GroundedGraph,
    /// B id -> output id
    map: BTreeMap<NodeId, NodeId>,
    /// B nodes whose content is discarded
    dropped: BTreeSet<NodeId>,
    report: MergeReport,
}

pub fn merge(
    a: &GkgDocument,
    b: &GkgDocument,
    alignment: &[(NodeId, NodeId)],
    policy: &MergePolicy,
) -> Result<(GkgDocument, MergeReport), MergeError> {
    let hierarchy = a.hierarchy.union(&b.hierarchy)?;
    let mut m = Merger {
        a,
        b,
        policy,
        out: a.graph.clone(),
        map: BTreeMap::new(),
        dropped: BTreeSet::new(),
        report: MergeReport::default(),
    };
    m.out.revision = a.graph.revision.max(b.graph.revision);
    m.out.source_id = a.graph.source_id.clone().or_else(|| b.graph.source_id.clone());

    m.map_continuants(alignment)?;
    m.coalesce_events();
    m.resolve_slots();
    m.add_remaining_nodes();
    m.add_edges();

    let mut labels = a.labels.clone();
    let map = &m.map;
    let b_graph = &b.graph;
    labels.absorb(&b.labels, |id| match map.get(id) {
        Some(t) => Some(t.clone()),
        None if b_graph.contains(id) => None,
        None => Some(id.clone()),
    });

    m.report.node_map = m.map.clone();
    let doc = GkgDocument { hierarchy, graph: m.out, labels, schema: a.schema.union(&b.schema) };
    let report = doc.validate();
    if !report.is_empty() {
        return Err(MergeError::Invalid(report));
    }
    Ok((doc, m.report))
}

impl Merger<'_> {
    fn map_continuants(&mut self, alignment: &[(NodeId, NodeId)]) -> Result<(), MergeError> {
        let is_continuant = |g: &GroundedGraph, id: &NodeId| g.node(id).is_some_and(|n| n.kind == NodeKind::Continuant);
        let mut seen_a = BTreeSet::new();
        let mut pairs: Vec<&(NodeId, NodeId)> = alignment.iter().collect();
        pairs.sort();
        for (ida, idb) in pairs {
            if !is_continuant(&self.a.graph, ida) {
                return Err(MergeError::AlignmentGraphMismatch(ida.clone()));
            }
            if !is_continuant(&self.b.graph, idb) {
                return Err(MergeError::AlignmentGraphMismatch(idb.clone()));
            }
            if !seen_a.insert(ida.clone()) {
                return Err(MergeError::DuplicateAlignment(ida.clone()));
            }
            if self.map.insert(idb.clone(), ida.clone()).is_some() {
                return Err(MergeError::DuplicateAlignment(idb.clone()));
            }
            self.report.identities.push((ida.clone(), idb.clone()));
        }
        self.report.merged = self.report.identities.len();
        Ok(())
    }

    fn coalesce_events(&mut self) {
        let ga = &self.a.graph;
        let gb = &self.b.graph;
        for ob in gb.nodes_of_kind(NodeKind::Occurrent) {
            let Some(ty) = &ob.inst_of else { continue };
            let anchors: BTreeSet<NodeId> =
                gb.participants(&ob.id).filter_map(|(_, p)| self.map.get(p).cloned()).collect();
            if anchors.is_empty() {
                continue;
            }
            let candidates: BTreeSet<&NodeId> = anchors
                .iter()
                .flat_map(|x| ga.events_of(x))
                .filter(|oa| ga.node(oa).and_then(|n| n.inst_of.as_ref()) == Some(ty))
                .collect();
            let content_b = event_content(gb, &ob.id, &self.map);
            let same_content = candidates.iter().find(|oa| event_content(ga, oa, &BTreeMap::new()) == content_b);
            let target = match (same_content, self.policy.cardinality(ty)) {
                (Some(oa), _) => Some(*oa),
                (None, Cardinality::One) => candidates.iter().next().copied(),
                (None, Cardinality::Many) => None,
            };
            if let Some(oa) = target {
                self.map.insert(ob.id.clone(), oa.clone());
                self.report.events_coalesced += 1;
            }
        }
    }

    /// Reconciles attribute slots of every bearer that exists on both sides.
    fn resolve_slots(&mut self) {
        let bearers: Vec<(NodeId, NodeId)> = self.map.iter().map(|(b, a)| (b.clone(), a.clone())).collect();
        for (xb, xa) in bearers {
            let slots_b = self.slots(&self.b.graph, &xb);
            let slots_a = self.slots(&self.out, &xa);
            let bearer_type = self.out.node(&xa).and_then(|n| n.inst_of.clone());
            for (attr_type, attrs_b) in slots_b {
                let Some(attrs_a) = slots_a.get(&attr_type) else {
                    continue;
                };
                match self.policy.arity(bearer_type.as_ref(), &attr_type) {
                    AttrArity::Functional => self.resolve_functional(&xa, &attr_type, attrs_a, &attrs_b),
                    AttrArity::Multi => self.resolve_multi(attrs_a, &attrs_b),
                }
            }
        }
    }

    /// Attribute instances of `bearer` grouped by attribute type.
    fn slots(&self, g: &GroundedGraph, bearer: &NodeId) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for attr in g.attributes_of(bearer) {
            if let Some(ty) = g.node(attr).and_then(|n| n.inst_of.clone()) {
                out.entry(ty).or_default().push(attr.clone());
            }
        }
        out
    }

    fn values(g: &GroundedGraph, attrs: &[NodeId]) -> Vec<String> {
        let set: BTreeSet<String> = attrs.iter().flat_map(|a| g.values_of(a)).map(String::from).collect();
        set.into_iter().collect()
    }

    /// Maps the value nodes of `ab` onto value nodes of `aa` with the same
    /// literal and type. Returns the B value nodes left unmapped.
    fn map_values(&mut self, aa: &NodeId, ab: &NodeId) -> Vec<NodeId> {
        let mut unmapped = Vec::new();
        let a_values: Vec<(Node, NodeId)> = self
            .out
            .out_edges(aa, PrimitiveRelation::HasValue)
            .filter_map(|e| self.out.node(&e.object).map(|n| (n.clone(), e.object.clone())))
            .collect();
        for e in self.b.graph.out_edges(ab, PrimitiveRelation::HasValue) {
            let Some(vb) = self.b.graph.node(&e.object) else { continue };
            match a_values.iter().find(|(va, _)| va.literal == vb.literal && va.inst_of == vb.inst_of) {
                Some((_, va_id)) => {
                    self.map.insert(vb.id.clone(), va_id.clone());
                }
                None => unmapped.push(vb.id.clone()),
            }
        }
        unmapped
    }

    fn resolve_functional(&mut self, xa: &NodeId, attr_type: &NodeId, attrs_a: &[NodeId], attrs_b: &[NodeId]) {
        let keep = attrs_a[0].clone();
        let old_a = Self::values(&self.out, attrs_a);
        let vals_b = Self::values(&self.b.graph, attrs_b);
        for ab in attrs_b {
            self.map.insert(ab.clone(), keep.clone());
        }
        if old_a == vals_b {
            for ab in attrs_b {
                for aa in attrs_a {
                    self.map_values(aa, ab);
                }
            }
            return;
        }

        let (rev_a, rev_b) = (self.a.graph.revision, self.b.graph.revision);
        let b_wins = if self.policy.prefer_newer { rev_b > rev_a } else { rev_b < rev_a };
        let a_wins = if self.policy.prefer_newer { rev_a > rev_b } else { rev_a < rev_b };

        if b_wins {
            // drop every current A value; extra A attributes of the slot go too
            for aa in attrs_a {
                let value_edges: Vec<Edge> = self.out.out_edges(aa, PrimitiveRelation::HasValue).cloned().collect();
                for e in value_edges {
                    self.out.remove_edge(&e);
                    self.remove_if_orphan(&e.object);
                }
                if aa != &keep {
                    let prop_edges: Vec<Edge> =
                        self.out.edges().filter(|e| &e.subject == aa || &e.object == aa).cloned().collect();
                    for e in prop_edges {
                        self.out.remove_edge(&e);
                    }
                    self.remove_if_orphan(aa);
                }
            }
            self.report.updated.push(UpdateEntry {
                bearer: xa.clone(),
                attr_type: attr_type.clone(),
                old_values: old_a,
                new_values: vals_b,
                winner_revision: rev_b,
            });
        } else if a_wins {
            for ab in attrs_b {
                for e in self.b.graph.out_edges(ab, PrimitiveRelation::HasValue) {
                    self.dropped.insert(e.object.clone());
                }
            }
            self.report.updated.push(UpdateEntry {
                bearer: xa.clone(),
                attr_type: attr_type.clone(),
                old_values: vals_b,
                new_values: old_a,
                winner_revision: rev_a,
            });
        } else {
            for ab in attrs_b {
                for aa in attrs_a {
                    self.map_values(aa, ab);
                }
            }
            let all: BTreeSet<String> = old_a.into_iter().chain(vals_b).collect();
            self.report.conflicts.push(ConflictEntry {
                bearer: xa.clone(),
                attr_type: attr_type.clone(),
                values: all.into_iter().collect(),
            });
        }
    }

    fn resolve_multi(&mut self, attrs_a: &[NodeId], attrs_b: &[NodeId]) {
        for ab in attrs_b {
            let vb = Self::values(&self.b.graph, std::slice::from_ref(ab));
            let same = attrs_a.iter().find(|aa| Self::values(&self.out, std::slice::from_ref(*aa)) == vb).cloned();
            if let Some(aa) = same {
                self.map.insert(ab.clone(), aa.clone());
                self.map_values(&aa, ab);
            }
        }
    }

    fn remove_if_orphan(&mut self, id: &NodeId) {
        let referenced = self.out.edges().any(|e| &e.subject == id || &e.object == id);
        if !referenced {
            self.out.remove_node(id);
        }
    }

    fn add_remaining_nodes(&mut self) {
        for node in self.b.graph.nodes() {
            if self.map.contains_key(&node.id) || self.dropped.contains(&node.id) {
                continue;
            }
            if node.kind == NodeKind::TypeNode {
                if !self.out.contains(&node.id) {
                    self.out.insert_node_unchecked(node.clone());
                }
                self.map.insert(node.id.clone(), node.id.clone());
                continue;
            }
            let target = if self.out.contains(&node.id) {
                let fresh = self.fresh_id(&node.id);
                self.report.renamed.push((node.id.clone(), fresh.clone()));
                fresh
            } else {
                node.id.clone()
            };
            let mut copy = node.clone();
            copy.id = target.clone();
            self.out.insert_node_unchecked(copy);
            self.map.insert(node.id.clone(), target);
            self.report.added_nodes += 1;
        }
    }

    fn fresh_id(&self, id: &NodeId) -> NodeId {
        (1..)
            .map(|n| {
                let suffix = if n == 1 { "~b".to_string() } else { format!("~b{n}") };
                NodeId::new(format!("{id}{suffix}")).expect("suffix keeps the id valid")
            })
            .find(|candidate| !self.out.contains(candidate))
            .expect("unbounded search")
    }

    fn add_edges(&mut self) {
        for e in self.b.graph.edges() {
            let (Some(s), Some(o)) = (self.map.get(&e.subject), self.map.get(&e.object)) else {
                continue;
            };
            let mapped = Edge::new(s.clone(), e.relation, o.clone());
            if !self.out.has_edge(&mapped) {
                self.out.insert_edge_unchecked(mapped);
                self.report.added_edges += 1;
            }
        }
    }
}
