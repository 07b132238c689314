//! Grounded graph data model.
//!
//! Nodes are typed (continuants, occurrents, attribute instances, value
//! literals, types) and the only edge labels are the thirteen primitive
//! relations in [`PrimitiveRelation`]. Every abstraction (an event, a property
//! instance) is a node of its own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hierarchy::TypeHierarchy;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid node id `{0}`: expected `namespace:local` (ASCII, no whitespace)")]
    InvalidNodeId(String),
    #[error("unknown primitive relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown node kind `{0}`")]
    UnknownKind(String),
    #[error("invalid text {0:?}: must be non-empty, without control characters or surrounding whitespace")]
    InvalidText(String),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("duplicate node `{0}`")]
    DuplicateNode(NodeId),
    #[error("malformed node `{id}`: {reason}")]
    MalformedNode { id: NodeId, reason: &'static str },
    #[error("signature violation: {relation}({subject_kind}, {object_kind}) is not permitted")]
    SignatureViolation { relation: PrimitiveRelation, subject_kind: NodeKind, object_kind: NodeKind },
    #[error("isA({subject}, {object}) would close a subtype cycle")]
    IsACycle { subject: NodeId, object: NodeId },
}

/// Opaque canonical node key of the form `namespace:local`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(s: impl Into<String>) -> Result<Self, ModelError> {
        let s = s.into();
        let valid = match s.split_once(':') {
            Some((ns, local)) => !ns.is_empty() && !local.is_empty() && s.bytes().all(|b| b.is_ascii_graphic()),
            None => false,
        };
        if valid {
            Ok(NodeId(s))
        } else {
            Err(ModelError::InvalidNodeId(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn namespace(&self) -> &str {
        self.0.split_once(':').map(|(ns, _)| ns).unwrap_or_default()
    }

    pub fn local(&self) -> &str {
        self.0.split_once(':').map(|(_, l)| l).unwrap_or_default()
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for NodeId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

/// Builds a [`NodeId`] from a literal that is known to be well formed.
///
/// Panics on malformed input; intended for constants and tests.
pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap_or_else(|e| panic!("{e}"))
}

/// Checks the text rules shared by labels and value literals.
pub fn check_text(s: &str) -> Result<(), ModelError> {
    let ok = !s.is_empty()
        && !s.chars().any(char::is_control)
        && !s.starts_with(char::is_whitespace)
        && !s.ends_with(char::is_whitespace);
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidText(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    TypeNode,
    Continuant,
    Occurrent,
    AttributeInstance,
    ValueLiteral,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] = [
        NodeKind::TypeNode,
        NodeKind::Continuant,
        NodeKind::Occurrent,
        NodeKind::AttributeInstance,
        NodeKind::ValueLiteral,
    ];

    /// Single-letter tag used by the GKG `N` record. Type nodes have none.
    pub fn letter(self) -> Option<char> {
        match self {
            NodeKind::TypeNode => None,
            NodeKind::Continuant => Some('C'),
            NodeKind::Occurrent => Some('O'),
            NodeKind::AttributeInstance => Some('A'),
            NodeKind::ValueLiteral => Some('V'),
        }
    }

    pub fn from_letter(s: &str) -> Result<Self, ModelError> {
        match s {
            "C" => Ok(NodeKind::Continuant),
            "O" => Ok(NodeKind::Occurrent),
            "A" => Ok(NodeKind::AttributeInstance),
            "V" => Ok(NodeKind::ValueLiteral),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::TypeNode => "TypeNode",
            NodeKind::Continuant => "Continuant",
            NodeKind::Occurrent => "Occurrent",
            NodeKind::AttributeInstance => "AttributeInstance",
            NodeKind::ValueLiteral => "ValueLiteral",
        };
        f.write_str(s)
    }
}

/// The closed vocabulary of edge labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimitiveRelation {
    Eq,
    IsPartOf,
    Inst,
    HasProp,
    Exemp,
    Dep,
    IsA,
    Precedes,
    ParticipantIn,
    HasAgent,
    HasObject,
    HasValue,
    Realizes,
}

impl PrimitiveRelation {
    pub const ALL: [PrimitiveRelation; 13] = [
        PrimitiveRelation::Eq,
        PrimitiveRelation::IsPartOf,
        PrimitiveRelation::Inst,
        PrimitiveRelation::HasProp,
        PrimitiveRelation::Exemp,
        PrimitiveRelation::Dep,
        PrimitiveRelation::IsA,
        PrimitiveRelation::Precedes,
        PrimitiveRelation::ParticipantIn,
        PrimitiveRelation::HasAgent,
        PrimitiveRelation::HasObject,
        PrimitiveRelation::HasValue,
        PrimitiveRelation::Realizes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveRelation::Eq => "eq",
            PrimitiveRelation::IsPartOf => "isPartOf",
            PrimitiveRelation::Inst => "inst",
            PrimitiveRelation::HasProp => "hasProp",
            PrimitiveRelation::Exemp => "exemp",
            PrimitiveRelation::Dep => "dep",
            PrimitiveRelation::IsA => "isA",
            PrimitiveRelation::Precedes => "precedes",
            PrimitiveRelation::ParticipantIn => "participantIn",
            PrimitiveRelation::HasAgent => "hasAgent",
            PrimitiveRelation::HasObject => "hasObject",
            PrimitiveRelation::HasValue => "hasValue",
            PrimitiveRelation::Realizes => "realizes",
        }
    }

    /// Whether `relation(subject, object)` is legal for the given node kinds.
    pub fn permits(self, subject: NodeKind, object: NodeKind) -> bool {
        use NodeKind::*;
        use PrimitiveRelation::*;
        match self {
            Eq => subject == object,
            Dep => true,
            IsPartOf => {
                (subject == Continuant && object == Continuant) || (subject == Occurrent && object == Occurrent)
            }
            Inst => subject != TypeNode && object == TypeNode,
            HasProp => subject == AttributeInstance && matches!(object, Continuant | Occurrent),
            Exemp => matches!(subject, Continuant | Occurrent) && object == TypeNode,
            IsA => subject == TypeNode && object == TypeNode,
            Precedes => subject == Occurrent && object == Occurrent,
            ParticipantIn | HasAgent | HasObject => subject == Occurrent && object == Continuant,
            HasValue => subject == AttributeInstance && object == ValueLiteral,
            Realizes => subject == Occurrent && matches!(object, Continuant | AttributeInstance),
        }
    }
}

impl fmt::Display for PrimitiveRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrimitiveRelation {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PrimitiveRelation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| ModelError::UnknownRelation(s.to_string()))
    }
}

/// The participation relations linking an occurrent to a continuant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleRelation {
    ParticipantIn,
    HasAgent,
    HasObject,
}

impl RoleRelation {
    pub const ALL: [RoleRelation; 3] = [RoleRelation::ParticipantIn, RoleRelation::HasAgent, RoleRelation::HasObject];

    pub fn relation(self) -> PrimitiveRelation {
        match self {
            RoleRelation::ParticipantIn => PrimitiveRelation::ParticipantIn,
            RoleRelation::HasAgent => PrimitiveRelation::HasAgent,
            RoleRelation::HasObject => PrimitiveRelation::HasObject,
        }
    }

    pub fn from_relation(rel: PrimitiveRelation) -> Option<Self> {
        RoleRelation::ALL.into_iter().find(|r| r.relation() == rel)
    }

    pub fn name(self) -> &'static str {
        self.relation().name()
    }
}

impl fmt::Display for RoleRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoleRelation {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rel: PrimitiveRelation = s.parse()?;
        RoleRelation::from_relation(rel).ok_or_else(|| ModelError::UnknownRelation(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub inst_of: Option<NodeId>,
    pub literal: Option<String>,
}

impl Node {
    pub fn type_node(id: NodeId) -> Self {
        Node { id, kind: NodeKind::TypeNode, inst_of: None, literal: None }
    }

    /// A continuant, occurrent or attribute instance of type `ty`.
    pub fn instance(id: NodeId, kind: NodeKind, ty: NodeId) -> Self {
        Node { id, kind, inst_of: Some(ty), literal: None }
    }

    pub fn value(id: NodeId, ty: NodeId, literal: impl Into<String>) -> Self {
        Node { id, kind: NodeKind::ValueLiteral, inst_of: Some(ty), literal: Some(literal.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub subject: NodeId,
    pub relation: PrimitiveRelation,
    pub object: NodeId,
}

impl Edge {
    pub fn new(subject: NodeId, relation: PrimitiveRelation, object: NodeId) -> Self {
        Edge { subject, relation, object }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.relation, self.subject, self.object)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundedGraph {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeSet<Edge>,
    pub source_id: Option<String>,
    pub revision: u64,
}

impl GroundedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(move |n| n.kind == kind)
    }

    /// Edges whose subject is `id` and relation is `rel`.
    pub fn out_edges<'a>(&'a self, id: &'a NodeId, rel: PrimitiveRelation) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.relation == rel && &e.subject == id)
    }

    /// Edges whose object is `id` and relation is `rel`.
    pub fn in_edges<'a>(&'a self, id: &'a NodeId, rel: PrimitiveRelation) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.relation == rel && &e.object == id)
    }

    /// Adds a node after checking its local shape (instOf and literal presence).
    pub fn add_node(&mut self, node: Node) -> Result<(), ModelError> {
        check_node_shape(&node)?;
        if self.nodes.contains_key(&node.id) {
            return Err(ModelError::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Adds `rel(subj, obj)`, enforcing the relation signature table.
    /// Re-adding an existing edge is a no-op.
    pub fn add_edge(&mut self, subj: &NodeId, rel: PrimitiveRelation, obj: &NodeId) -> Result<(), ModelError> {
        let sk = self.kind_of(subj)?;
        let ok = self.kind_of(obj)?;
        if !rel.permits(sk, ok) {
            return Err(ModelError::SignatureViolation { relation: rel, subject_kind: sk, object_kind: ok });
        }
        if rel == PrimitiveRelation::IsA && self.is_a_reaches(obj, subj) {
            return Err(ModelError::IsACycle { subject: subj.clone(), object: obj.clone() });
        }
        self.edges.insert(Edge::new(subj.clone(), rel, obj.clone()));
        Ok(())
    }

    /// Whether `to` is reachable from `from` over zero or more isA edges.
    fn is_a_reaches(&self, from: &NodeId, to: &NodeId) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.out_edges(n, PrimitiveRelation::IsA).map(|e| &e.object));
            }
        }
        false
    }

    fn kind_of(&self, id: &NodeId) -> Result<NodeKind, ModelError> {
        self.nodes.get(id).map(|n| n.kind).ok_or_else(|| ModelError::UnknownNode(id.clone()))
    }

    /// Inserts a node without any checks. Used by parsers that validate the
    /// whole graph afterwards.
    pub(crate) fn insert_node_unchecked(&mut self, node: Node) {
        self.nodes.insert(node.id.clone(), node);
    }

    pub(crate) fn insert_edge_unchecked(&mut self, edge: Edge) {
        self.edges.insert(edge);
    }

    pub(crate) fn remove_edge(&mut self, edge: &Edge) -> bool {
        self.edges.remove(edge)
    }

    pub(crate) fn remove_node(&mut self, id: &NodeId) -> Option<Node> {
        self.nodes.remove(id)
    }

    /// Continuants linked to occurrent `o` by a participation relation.
    pub fn participants<'a>(&'a self, o: &'a NodeId) -> impl Iterator<Item = (RoleRelation, &'a NodeId)> + 'a {
        self.edges.iter().filter_map(move |e| {
            if &e.subject != o {
                return None;
            }
            RoleRelation::from_relation(e.relation).map(|r| (r, &e.object))
        })
    }

    /// Occurrents in which continuant `c` participates (any role).
    pub fn events_of<'a>(&'a self, c: &'a NodeId) -> BTreeSet<&'a NodeId> {
        self.edges
            .iter()
            .filter(|e| &e.object == c && RoleRelation::from_relation(e.relation).is_some())
            .map(|e| &e.subject)
            .collect()
    }

    /// Attribute instances inhering in `bearer`.
    pub fn attributes_of<'a>(&'a self, bearer: &'a NodeId) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.in_edges(bearer, PrimitiveRelation::HasProp).map(|e| &e.subject)
    }

    /// Literal values bound to attribute `attr`, sorted.
    pub fn values_of(&self, attr: &NodeId) -> Vec<&str> {
        let mut vals: Vec<&str> = self
            .out_edges(attr, PrimitiveRelation::HasValue)
            .filter_map(|e| self.nodes.get(&e.object))
            .filter_map(|n| n.literal.as_deref())
            .collect();
        vals.sort_unstable();
        vals
    }
}

fn check_node_shape(node: &Node) -> Result<(), ModelError> {
    let malformed = |reason| ModelError::MalformedNode { id: node.id.clone(), reason };
    match node.kind {
        NodeKind::TypeNode => {
            if node.inst_of.is_some() {
                return Err(malformed("type nodes carry no instOf"));
            }
        }
        _ => {
            if node.inst_of.is_none() {
                return Err(malformed("non-type nodes need an instOf type"));
            }
        }
    }
    match (&node.literal, node.kind) {
        (Some(lit), NodeKind::ValueLiteral) => check_text(lit),
        (None, NodeKind::ValueLiteral) => Err(malformed("value literal without literal text")),
        (Some(_), _) => Err(malformed("literal on a non-value node")),
        (None, _) => Ok(()),
    }
}

/// One problem found by [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    DanglingEdge {
        edge: Edge,
        missing: NodeId,
    },
    SignatureViolation {
        edge: Edge,
        subject_kind: NodeKind,
        object_kind: NodeKind,
    },
    UntypedNode(NodeId),
    TypedTypeNode(NodeId),
    TypeNodeNotInHierarchy(NodeId),
    LiteralOnNonValue(NodeId),
    MissingLiteral(NodeId),
    InvalidLiteral(NodeId),
    UnknownTypeTarget {
        node: NodeId,
        target: NodeId,
    },
    ConflictingInst {
        node: NodeId,
        declared: NodeId,
        edge_target: NodeId,
    },
    UnknownDeclaredType {
        declaration: String,
        target: NodeId,
    },
    /// An isA edge the declared hierarchy does not entail (including
    /// reflexive ones, so isA edges can never form a cycle).
    IsANotEntailed(Edge),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEdge { edge, missing } => {
                write!(f, "DanglingEdge\t{edge}\tmissing {missing}")
            }
            Violation::SignatureViolation { edge, subject_kind, object_kind } => {
                write!(f, "SignatureViolation\t{edge}\t{subject_kind} x {object_kind}")
            }
            Violation::UntypedNode(n) => write!(f, "UntypedNode\t{n}"),
            Violation::TypedTypeNode(n) => write!(f, "TypedTypeNode\t{n}"),
            Violation::TypeNodeNotInHierarchy(n) => write!(f, "TypeNodeNotInHierarchy\t{n}"),
            Violation::LiteralOnNonValue(n) => write!(f, "LiteralOnNonValue\t{n}"),
            Violation::MissingLiteral(n) => write!(f, "MissingLiteral\t{n}"),
            Violation::InvalidLiteral(n) => write!(f, "InvalidLiteral\t{n}"),
            Violation::UnknownTypeTarget { node, target } => {
                write!(f, "UnknownTypeTarget\t{node}\t{target}")
            }
            Violation::ConflictingInst { node, declared, edge_target } => {
                write!(f, "ConflictingInst\t{node}\t{declared}\t{edge_target}")
            }
            Violation::UnknownDeclaredType { declaration, target } => {
                write!(f, "UnknownDeclaredType\t{declaration}\t{target}")
            }
            Violation::IsANotEntailed(edge) => write!(f, "IsANotEntailed\t{edge}"),
        }
    }
}

/// Sorted, deduplicated list of violations. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub(crate) fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub(crate) fn finish(mut self) -> Self {
        self.violations.sort();
        self.violations.dedup();
        self
    }

    pub fn to_tsv(&self) -> String {
        self.violations.iter().map(|v| format!("{v}\n")).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks referential integrity, typing discipline and relation signatures.
pub fn validate_graph(g: &GroundedGraph, h: &TypeHierarchy) -> ValidationReport {
    let mut report = ValidationReport::default();

    for node in g.nodes() {
        match node.kind {
            NodeKind::TypeNode => {
                if node.inst_of.is_some() {
                    report.push(Violation::TypedTypeNode(node.id.clone()));
                }
                if !h.contains(&node.id) {
                    report.push(Violation::TypeNodeNotInHierarchy(node.id.clone()));
                }
            }
            _ => match &node.inst_of {
                None => report.push(Violation::UntypedNode(node.id.clone())),
                Some(t) if !h.contains(t) => {
                    report.push(Violation::UnknownTypeTarget { node: node.id.clone(), target: t.clone() })
                }
                Some(_) => {}
            },
        }
        match (&node.literal, node.kind) {
            (Some(_), k) if k != NodeKind::ValueLiteral => report.push(Violation::LiteralOnNonValue(node.id.clone())),
            (None, NodeKind::ValueLiteral) => report.push(Violation::MissingLiteral(node.id.clone())),
            (Some(lit), NodeKind::ValueLiteral) if check_text(lit).is_err() => {
                report.push(Violation::InvalidLiteral(node.id.clone()))
            }
            _ => {}
        }
    }

    for edge in g.edges() {
        let subj = g.node(&edge.subject);
        let obj = g.node(&edge.object);
        if subj.is_none() {
            report.push(Violation::DanglingEdge { edge: edge.clone(), missing: edge.subject.clone() });
        }
        if obj.is_none() {
            report.push(Violation::DanglingEdge { edge: edge.clone(), missing: edge.object.clone() });
        }
        let (Some(subj), Some(obj)) = (subj, obj) else { continue };
        if !edge.relation.permits(subj.kind, obj.kind) {
            report.push(Violation::SignatureViolation {
                edge: edge.clone(),
                subject_kind: subj.kind,
                object_kind: obj.kind,
            });
            continue;
        }
        if edge.relation == PrimitiveRelation::IsA {
            let entailed = edge.subject != edge.object && h.is_subtype(&edge.subject, &edge.object).unwrap_or(true);
            if !entailed {
                report.push(Violation::IsANotEntailed(edge.clone()));
            }
        }
        if edge.relation == PrimitiveRelation::Inst {
            if let Some(declared) = &subj.inst_of {
                if declared != &edge.object {
                    report.push(Violation::ConflictingInst {
                        node: subj.id.clone(),
                        declared: declared.clone(),
                        edge_target: edge.object.clone(),
                    });
                }
            }
        }
    }

    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::ROOT_TYPE;

    fn hierarchy() -> TypeHierarchy {
        let mut h = TypeHierarchy::with_root();
        for t in ["core:Human", "ont:Birth", "ont:Time", "ont:Location", "ont:Date", "ont:Village"] {
            h.add_type(id(t), None).unwrap();
        }
        h
    }

    fn birth_graph() -> GroundedGraph {
        let mut g = GroundedGraph::new();
        g.add_node(Node::instance(id("ex:rw"), NodeKind::Continuant, id("core:Human"))).unwrap();
        g.add_node(Node::instance(id("ex:birth1"), NodeKind::Occurrent, id("ont:Birth"))).unwrap();
        g.add_node(Node::instance(id("ex:t1"), NodeKind::AttributeInstance, id("ont:Time"))).unwrap();
        g.add_node(Node::value(id("ex:v1"), id("ont:Date"), "01/08/1955")).unwrap();
        g
    }

    #[test]
    fn node_id_shape() {
        assert!(NodeId::new("ex:rw").is_ok());
        assert!(NodeId::new("ev:Birth#00ff").is_ok());
        assert!(NodeId::new("rw").is_err());
        assert!(NodeId::new(":rw").is_err());
        assert!(NodeId::new("ex:").is_err());
        assert!(NodeId::new("ex:a b").is_err());
        assert!(NodeId::new("ex:é").is_err());
        assert_eq!(id("ex:a:b").local(), "a:b");
    }

    #[test]
    fn relation_names_round_trip() {
        for r in PrimitiveRelation::ALL {
            assert_eq!(r.name().parse::<PrimitiveRelation>().unwrap(), r);
        }
        assert!("livesIn".parse::<PrimitiveRelation>().is_err());
    }

    #[test]
    fn participant_edge_accepted() {
        let mut g = birth_graph();
        g.add_edge(&id("ex:birth1"), PrimitiveRelation::ParticipantIn, &id("ex:rw")).unwrap();
        assert_eq!(g.edge_count(), 1);
        // idempotent
        g.add_edge(&id("ex:birth1"), PrimitiveRelation::ParticipantIn, &id("ex:rw")).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn is_a_from_continuant_rejected() {
        let mut g = birth_graph();
        g.add_node(Node::type_node(id("core:Human"))).unwrap();
        let err = g.add_edge(&id("ex:rw"), PrimitiveRelation::IsA, &id("core:Human")).unwrap_err();
        assert_eq!(
            err,
            ModelError::SignatureViolation {
                relation: PrimitiveRelation::IsA,
                subject_kind: NodeKind::Continuant,
                object_kind: NodeKind::TypeNode,
            }
        );
    }

    #[test]
    fn has_value_accepted() {
        let mut g = birth_graph();
        g.add_edge(&id("ex:t1"), PrimitiveRelation::HasValue, &id("ex:v1")).unwrap();
        assert!(g.has_edge(&Edge::new(id("ex:t1"), PrimitiveRelation::HasValue, id("ex:v1"))));
    }

    #[test]
    fn unknown_node_rejected() {
        let mut g = birth_graph();
        let err = g.add_edge(&id("ex:nope"), PrimitiveRelation::Dep, &id("ex:rw")).unwrap_err();
        assert_eq!(err, ModelError::UnknownNode(id("ex:nope")));
    }

    #[test]
    fn node_shape_checked() {
        let mut g = GroundedGraph::new();
        let untyped = Node { id: id("ex:x"), kind: NodeKind::Continuant, inst_of: None, literal: None };
        assert!(g.add_node(untyped).is_err());
        let lit = Node {
            id: id("ex:x"),
            kind: NodeKind::Continuant,
            inst_of: Some(id("core:Human")),
            literal: Some("x".into()),
        };
        assert!(g.add_node(lit).is_err());
        assert!(g.add_node(Node::value(id("ex:v"), id("ont:Date"), " padded")).is_err());
    }

    #[test]
    fn empty_graph_validates() {
        let h = TypeHierarchy::with_root();
        assert!(validate_graph(&GroundedGraph::new(), &h).is_empty());
    }

    #[test]
    fn unknown_inst_target_reported_once() {
        let h = TypeHierarchy::with_root();
        let mut g = GroundedGraph::new();
        g.add_node(Node::instance(id("ex:x"), NodeKind::Continuant, id("ont:Missing"))).unwrap();
        let report = validate_graph(&g, &h);
        assert_eq!(
            report.violations,
            vec![Violation::UnknownTypeTarget { node: id("ex:x"), target: id("ont:Missing") }]
        );
    }

    #[test]
    fn unchecked_edges_are_caught() {
        let h = hierarchy();
        let mut g = birth_graph();
        g.insert_edge_unchecked(Edge::new(id("ex:rw"), PrimitiveRelation::HasValue, id("ex:v1")));
        g.insert_edge_unchecked(Edge::new(id("ex:rw"), PrimitiveRelation::Dep, id("ex:ghost")));
        let report = validate_graph(&g, &h);
        assert_eq!(report.len(), 2);
        assert!(matches!(report.violations[0], Violation::DanglingEdge { .. }));
        assert!(matches!(report.violations[1], Violation::SignatureViolation { .. }));
    }

    #[test]
    fn conflicting_inst_edge() {
        let h = hierarchy();
        let mut g = birth_graph();
        g.add_node(Node::type_node(id("ont:Birth"))).unwrap();
        g.add_edge(&id("ex:rw"), PrimitiveRelation::Inst, &id("ont:Birth")).unwrap();
        let report = validate_graph(&g, &h);
        assert_eq!(report.len(), 1);
        assert!(matches!(report.violations[0], Violation::ConflictingInst { .. }));
        assert!(h.contains(&id(ROOT_TYPE)));
    }

    #[test]
    fn signature_table_spot_checks() {
        use NodeKind::*;
        use PrimitiveRelation::*;
        assert!(Eq.permits(Continuant, Continuant));
        assert!(!Eq.permits(Continuant, Occurrent));
        assert!(HasProp.permits(AttributeInstance, Occurrent));
        assert!(!HasProp.permits(Occurrent, AttributeInstance));
        assert!(Realizes.permits(Occurrent, AttributeInstance));
        assert!(!Precedes.permits(Continuant, Continuant));
        assert!(!Inst.permits(TypeNode, TypeNode));
        assert!(Exemp.permits(Occurrent, TypeNode));
    }

    #[test]
    fn is_a_cycles_rejected_on_insertion() {
        let mut g = GroundedGraph::new();
        for t in ["ex:a", "ex:b", "ex:c"] {
            g.add_node(Node::type_node(id(t))).unwrap();
        }
        g.add_edge(&id("ex:a"), PrimitiveRelation::IsA, &id("ex:b")).unwrap();
        g.add_edge(&id("ex:b"), PrimitiveRelation::IsA, &id("ex:c")).unwrap();
        for (s, o) in [("ex:c", "ex:a"), ("ex:b", "ex:a"), ("ex:a", "ex:a")] {
            assert!(matches!(g.add_edge(&id(s), PrimitiveRelation::IsA, &id(o)), Err(ModelError::IsACycle { .. })));
        }
        g.add_edge(&id("ex:a"), PrimitiveRelation::IsA, &id("ex:c")).unwrap();
    }

    #[test]
    fn is_a_edges_must_be_entailed() {
        let mut h = TypeHierarchy::with_root();
        h.add_type(id("ex:a"), None).unwrap();
        h.add_type(id("ex:b"), Some(id("ex:a"))).unwrap();
        let mut g = GroundedGraph::new();
        g.insert_node_unchecked(Node::type_node(id("ex:a")));
        g.insert_node_unchecked(Node::type_node(id("ex:b")));
        g.insert_edge_unchecked(Edge::new(id("ex:b"), PrimitiveRelation::IsA, id("ex:a")));
        assert!(validate_graph(&g, &h).is_empty());
        g.insert_edge_unchecked(Edge::new(id("ex:a"), PrimitiveRelation::IsA, id("ex:b")));
        let r = validate_graph(&g, &h);
        assert_eq!(
            r.violations,
            vec![Violation::IsANotEntailed(Edge::new(id("ex:a"), PrimitiveRelation::IsA, id("ex:b")))]
        );
    }
}
