//! Per-language labels and label-only rendering of grounded graphs.
//!
//! Node identity, edges and primitive relations are language agnostic, so a
//! render in any language has exactly the structure of the source graph.
//! Relation glosses live in the same [`LabelTable`] under the reserved
//! pseudo-node ids `rel:<name>`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{check_text, Edge, GroundedGraph, ModelError, NodeId, PrimitiveRelation};

/// Language used when a label is missing in the requested language.
pub const FALLBACK_LANG: &str = "en";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelTable {
    entries: BTreeMap<(NodeId, String), String>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the label of `node` in `lang`, replacing any previous one.
    pub fn set(&mut self, node: NodeId, lang: &str, label: &str) -> Result<(), ModelError> {
        check_text(label)?;
        check_lang(lang)?;
        self.entries.insert((node, lang.to_string()), label.to_string());
        Ok(())
    }

    pub fn get(&self, node: &NodeId, lang: &str) -> Option<&str> {
        self.entries.get(&(node.clone(), lang.to_string())).map(String::as_str)
    }

    pub fn contains(&self, node: &NodeId, lang: &str) -> bool {
        self.get(node, lang).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &str, &str)> {
        self.entries.iter().map(|((n, l), v)| (n, l.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn languages(&self) -> BTreeSet<&str> {
        self.entries.keys().map(|(_, l)| l.as_str()).collect()
    }

    /// Label in `lang`, then in the fallback language, then the id's local part.
    pub fn resolve<'a>(&'a self, node: &'a NodeId, lang: &str) -> &'a str {
        self.get(node, lang).or_else(|| self.get(node, FALLBACK_LANG)).unwrap_or_else(|| node.local())
    }

    /// Copies every entry of `other` whose key is not already present.
    pub fn absorb(&mut self, other: &LabelTable, rename: impl Fn(&NodeId) -> Option<NodeId>) {
        for ((node, lang), label) in &other.entries {
            if let Some(target) = rename(node) {
                self.entries.entry((target, lang.clone())).or_insert_with(|| label.clone());
            }
        }
    }
}

/// Language codes are opaque BCP-47 tags: one whitespace-free ASCII token.
pub fn check_lang(lang: &str) -> Result<(), ModelError> {
    if !lang.is_empty() && lang.bytes().all(|b| b.is_ascii_graphic()) {
        Ok(())
    } else {
        Err(ModelError::InvalidText(lang.to_string()))
    }
}

/// Pseudo-node id under which a relation's localized gloss is stored.
pub fn relation_gloss_id(rel: PrimitiveRelation) -> NodeId {
    NodeId::new(format!("rel:{}", rel.name())).expect("relation names are valid locals")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledView {
    pub lang: String,
    pub node_labels: BTreeMap<NodeId, String>,
    pub edges: BTreeSet<Edge>,
    pub relation_glosses: BTreeMap<PrimitiveRelation, String>,
}

impl LabeledView {
    /// `node TAB label` lines, then `subjLabel TAB relGloss TAB objLabel` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (node, label) in &self.node_labels {
            out.push_str(&format!("{node}\t{label}\n"));
        }
        let mut rows: Vec<String> = self
            .edges
            .iter()
            .map(|e| {
                let subj = self.node_labels.get(&e.subject).map(String::as_str).unwrap_or(e.subject.as_str());
                let obj = self.node_labels.get(&e.object).map(String::as_str).unwrap_or(e.object.as_str());
                let gloss = self.relation_glosses.get(&e.relation).map(String::as_str).unwrap_or(e.relation.name());
                format!("{subj}\t{gloss}\t{obj}\n")
            })
            .collect();
        rows.sort();
        out.extend(rows);
        out
    }
}

pub fn render(g: &GroundedGraph, labels: &LabelTable, lang: &str, glosses: &LabelTable) -> LabeledView {
    let node_labels = g.nodes().map(|n| (n.id.clone(), labels.resolve(&n.id, lang).to_string())).collect();
    let relation_glosses = PrimitiveRelation::ALL
        .into_iter()
        .map(|r| {
            let gid = relation_gloss_id(r);
            let gloss = glosses.get(&gid, lang).unwrap_or(r.name()).to_string();
            (r, gloss)
        })
        .collect();
    LabeledView { lang: lang.to_string(), node_labels, edges: g.edge_set().clone(), relation_glosses }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// First structural difference between two views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Difference {
    NodeOnlyIn(Side, NodeId),
    EdgeOnlyIn(Side, Edge),
}

impl fmt::Display for Difference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Side| match s {
            Side::First => "first",
            Side::Second => "second",
        };
        match self {
            Difference::NodeOnlyIn(s, n) => write!(f, "node\t{n}\tonly in {}", side(s)),
            Difference::EdgeOnlyIn(s, e) => {
                write!(f, "edge\t{} {} {}\tonly in {}", e.subject, e.relation, e.object, side(s))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoCheck {
    pub isomorphic: bool,
    pub witness: Option<Difference>,
}

/// Structural equality on shared canonical ids: same node ids, same edges.
pub fn check_isomorphic(v1: &LabeledView, v2: &LabeledView) -> IsoCheck {
    let witness = first_difference(v1.node_labels.keys(), v2.node_labels.keys(), Difference::NodeOnlyIn)
        .or_else(|| first_difference(v1.edges.iter(), v2.edges.iter(), Difference::EdgeOnlyIn));
    IsoCheck { isomorphic: witness.is_none(), witness }
}

fn first_difference<'a, T: Ord + Clone + 'a>(
    a: impl Iterator<Item = &'a T>,
    b: impl Iterator<Item = &'a T>,
    wrap: impl Fn(Side, T) -> Difference,
) -> Option<Difference> {
    let a: BTreeSet<&T> = a.collect();
    let b: BTreeSet<&T> = b.collect();
    let only_a = a.difference(&b).next().map(|x| (Side::First, (*x).clone()));
    let only_b = b.difference(&a).next().map(|x| (Side::Second, (*x).clone()));
    match (only_a, only_b) {
        (Some(x), Some(y)) => Some(if x.1 <= y.1 { wrap(x.0, x.1) } else { wrap(y.0, y.1) }),
        (Some(x), None) | (None, Some(x)) => Some(wrap(x.0, x.1)),
        (None, None) => None,
    }
}
