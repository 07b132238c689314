//! Rewrites ad-hoc flat triples into grounded, reified event subgraphs.
//!
//! Each mapped triple `(s, r, o)` becomes an occurrent of the rule's event
//! type with `s` attached by the rule's subject role. The object either
//! becomes an attribute instance (with a typed value literal) inhering in
//! the event, or a second participant. Triples about the same subject and
//! event type coalesce into one event unless the type is declared `MANY`.
//!
//! Node ids are derived from content (FNV-1a), so the output does not depend
//! on input order.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::embedding::tokenize;
use crate::format::{FlatTriple, GkgDocument, RuleSet};
use crate::hash::fnv1a64_parts;
use crate::hierarchy::{root_type, TypeHierarchy};
use crate::model::{check_text, GroundedGraph, Node, NodeId, NodeKind, PrimitiveRelation, RoleRelation};
use crate::multilingual::LabelTable;
use crate::schema::{AttrArity, Cardinality, Schema};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectSlot {
    /// The object is a value of an attribute of the event.
    Attr { attr_type: NodeId, value_type: NodeId },
    /// The object is another participant of the event.
    Participant(RoleRelation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReificationRule {
    pub rel_name: String,
    pub event_type: NodeId,
    pub subject_role: RoleRelation,
    pub object_slot: ObjectSlot,
}

/// Token sequence used to compare relation names.
pub fn relation_key(label: &str) -> Vec<String> {
    tokenize(label)
}

/// First rule whose name tokenizes to the same sequence as `label`.
pub fn normalize_relation_name<'a>(label: &str, rules: &'a [ReificationRule]) -> Option<&'a ReificationRule> {
    let key = relation_key(label);
    if key.is_empty() {
        return None;
    }
    rules.iter().find(|r| relation_key(&r.rel_name) == key)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotConflict {
    pub event: NodeId,
    pub attr_type: NodeId,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CanonReport {
    pub events_created: usize,
    pub events_coalesced: usize,
    pub unmapped_relations: BTreeSet<String>,
    pub entity_nodes_created: usize,
    pub mapped_triples: usize,
    /// Object labels that cannot be stored as literals (skipped).
    pub invalid_literals: BTreeSet<String>,
    /// FUNCTIONAL slots that received more than one value.
    pub conflicts: Vec<SlotConflict>,
}

impl CanonReport {
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "events_created\t{}\nevents_coalesced\t{}\nentity_nodes_created\t{}\nmapped_triples\t{}\n",
            self.events_created, self.events_coalesced, self.entity_nodes_created, self.mapped_triples
        );
        for r in &self.unmapped_relations {
            out.push_str(&format!("unmapped\t{r}\n"));
        }
        for l in &self.invalid_literals {
            out.push_str(&format!("invalid_literal\t{l}\n"));
        }
        for c in &self.conflicts {
            out.push_str(&format!("conflict\t{}\t{}\t{}\n", c.event, c.attr_type, c.values.join("|")));
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CanonError {
    #[error("type `{0}` referenced by the rules is not in the hierarchy")]
    UnknownType(NodeId),
}

#[derive(Debug, Clone)]
pub struct Canonicalized {
    pub graph: GroundedGraph,
    pub labels: LabelTable,
    pub report: CanonReport,
}

pub struct Canonicalizer<'a> {
    pub rules: &'a [ReificationRule],
    pub schema: &'a Schema,
    pub hierarchy: &'a TypeHierarchy,
    pub entity_types: &'a BTreeMap<String, NodeId>,
    /// Language of the entity labels written to the label table.
    pub label_lang: &'a str,
}

impl<'a> Canonicalizer<'a> {
    pub fn run(&self, triples: &[FlatTriple]) -> Result<Canonicalized, CanonError> {
        self.check_types()?;
        let mut st = State::default();

        for t in triples {
            let Some(rule) = normalize_relation_name(&t.r, self.rules) else {
                st.report.unmapped_relations.insert(t.r.clone());
                continue;
            };
            if let ObjectSlot::Attr { .. } = rule.object_slot {
                if check_text(t.e2.trim()).is_err() {
                    st.report.invalid_literals.insert(t.e2.clone());
                    continue;
                }
            }
            st.report.mapped_triples += 1;
            let subj = self.entity(&mut st, &t.e1);

            let event_key: Vec<&str> = match self.schema.cardinality_of(&rule.event_type) {
                Cardinality::One => vec![rule.event_type.as_str(), &t.e1],
                Cardinality::Many => {
                    let slot = match &rule.object_slot {
                        ObjectSlot::Attr { attr_type, .. } => attr_type.as_str(),
                        ObjectSlot::Participant(r) => r.name(),
                    };
                    vec![rule.event_type.as_str(), &t.e1, slot, t.e2.trim()]
                }
            };
            let event = derived_id("ev", &rule.event_type, &event_key);
            if st.graph.contains(&event) {
                st.report.events_coalesced += 1;
            } else {
                st.insert(Node::instance(event.clone(), NodeKind::Occurrent, rule.event_type.clone()));
                st.report.events_created += 1;
            }
            st.link(&event, rule.subject_role.relation(), &subj);

            match &rule.object_slot {
                ObjectSlot::Attr { attr_type, value_type } => {
                    let literal = t.e2.trim();
                    let attr = match self.schema.arity_of(&rule.event_type, attr_type) {
                        AttrArity::Functional => derived_id("attr", attr_type, &[event.as_str(), attr_type.as_str()]),
                        AttrArity::Multi => derived_id(
                            "attr",
                            attr_type,
                            &[event.as_str(), attr_type.as_str(), value_type.as_str(), literal],
                        ),
                    };
                    if !st.graph.contains(&attr) {
                        st.insert(Node::instance(attr.clone(), NodeKind::AttributeInstance, attr_type.clone()));
                    }
                    st.link(&attr, PrimitiveRelation::HasProp, &event);
                    let value = derived_id("val", value_type, &[attr.as_str(), value_type.as_str(), literal]);
                    if !st.graph.contains(&value) {
                        st.insert(Node::value(value.clone(), value_type.clone(), literal));
                    }
                    st.link(&attr, PrimitiveRelation::HasValue, &value);
                }
                ObjectSlot::Participant(role) => {
                    let obj = self.entity(&mut st, &t.e2);
                    st.link(&event, role.relation(), &obj);
                }
            }
        }

        st.report.conflicts = self.functional_conflicts(&st.graph);
        Ok(Canonicalized { graph: st.graph, labels: st.labels, report: st.report })
    }

    fn check_types(&self) -> Result<(), CanonError> {
        let mut needed: Vec<&NodeId> = Vec::new();
        for r in self.rules {
            needed.push(&r.event_type);
            if let ObjectSlot::Attr { attr_type, value_type } = &r.object_slot {
                needed.push(attr_type);
                needed.push(value_type);
            }
        }
        needed.extend(self.entity_types.values());
        let root = root_type();
        needed.push(&root);
        match needed.into_iter().find(|t| !self.hierarchy.contains(t)) {
            Some(t) => Err(CanonError::UnknownType(t.clone())),
            None => Ok(()),
        }
    }

    fn entity(&self, st: &mut State, label: &str) -> NodeId {
        let id = entity_id(label);
        if !st.graph.contains(&id) {
            let ty = self.entity_types.get(label).cloned().unwrap_or_else(root_type);
            st.insert(Node::instance(id.clone(), NodeKind::Continuant, ty));
            // labels that fail the text rules keep only their id
            let _ = st.labels.set(id.clone(), self.label_lang, label.trim());
            st.report.entity_nodes_created += 1;
        }
        id
    }

    fn functional_conflicts(&self, g: &GroundedGraph) -> Vec<SlotConflict> {
        let mut out = Vec::new();
        for attr in g.nodes_of_kind(NodeKind::AttributeInstance) {
            let values = g.values_of(&attr.id);
            if values.len() < 2 {
                continue;
            }
            let attr_type = attr.inst_of.clone().expect("attributes are typed");
            for bearer in g.out_edges(&attr.id, PrimitiveRelation::HasProp) {
                let Some(event_type) = g.node(&bearer.object).and_then(|n| n.inst_of.as_ref()) else {
                    continue;
                };
                if self.schema.arity_of(event_type, &attr_type) == AttrArity::Functional {
                    out.push(SlotConflict {
                        event: bearer.object.clone(),
                        attr_type: attr_type.clone(),
                        values: values.iter().map(|v| v.to_string()).collect(),
                    });
                }
            }
        }
        out.sort_by(|a, b| (&a.event, &a.attr_type).cmp(&(&b.event, &b.attr_type)));
        out
    }
}

#[derive(Default)]
struct State {
    graph: GroundedGraph,
    labels: LabelTable,
    report: CanonReport,
}

impl State {
    fn insert(&mut self, node: Node) {
        self.graph.add_node(node).expect("fresh, well-formed node");
    }

    fn link(&mut self, s: &NodeId, rel: PrimitiveRelation, o: &NodeId) {
        self.graph.add_edge(s, rel, o).expect("rule edges satisfy the signature table");
    }
}

/// `<prefix>:<type local>#<fnv hex>` over the key parts.
fn derived_id(prefix: &str, ty: &NodeId, key: &[&str]) -> NodeId {
    let h = fnv1a64_parts(key);
    NodeId::new(format!("{prefix}:{}#{h:016x}", ty.local())).expect("ascii id")
}

/// Entity node id: `ent:` plus the label when it is a plain ASCII
/// identifier, otherwise a slug followed by a hash of the exact label.
pub fn entity_id(label: &str) -> NodeId {
    let slug: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') { c } else { '_' })
        .collect();
    let s = if slug == label && !slug.is_empty() {
        format!("ent:{slug}")
    } else {
        format!("ent:{slug}#{:016x}", fnv1a64_parts(&[label]))
    };
    NodeId::new(s).expect("ascii id")
}

impl RuleSet {
    /// Canonicalizes `triples` into a full document: the closed hierarchy,
    /// the grounded graph, entity labels and the rule file's schema.
    pub fn canonicalize(&self, triples: &[FlatTriple], label_lang: &str) -> (GkgDocument, CanonReport) {
        let hierarchy = self.closed_hierarchy();
        let out = Canonicalizer {
            rules: &self.rules,
            schema: &self.schema,
            hierarchy: &hierarchy,
            entity_types: &self.entity_types,
            label_lang,
        }
        .run(triples)
        .expect("closed hierarchy covers every rule type");
        let doc = GkgDocument { hierarchy, graph: out.graph, labels: out.labels, schema: self.schema.clone() };
        (doc, out.report)
    }
}
