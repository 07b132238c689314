//! GKG v1: a line-oriented, canonically sortable grounded-graph format.
//!
//! ```text
//! T <typeId> <parentTypeId|->
//! N <nodeId> <C|O|A|V> <typeId> [literal…]
//! E <subjId> <rel> <objId>
//! L <nodeId> <lang> <label…>
//! ESSENTIAL <eventTypeId>
//! CARD <eventTypeId> <ONE|MANY>
//! ATTRDECL <eventTypeId> <attrTypeId> <FUNCTIONAL|MULTI>
//! ROLE <roleName> BASE <typeId> VIA <hasAgent|hasObject|participantIn> EVENT <typeId>
//! GRAPH <sourceId|-> <revision>
//! ```

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{content_lines, split_fields};
use crate::hierarchy::{TypeHierarchy, ROOT_TYPE};
use crate::model::{
    check_text, validate_graph, Edge, GroundedGraph, Node, NodeId, NodeKind, PrimitiveRelation, ValidationReport,
};
use crate::multilingual::{check_lang, LabelTable};
use crate::roles::RoleConceptDef;
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GkgError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("validation failed: {0}")]
    ValidationFailed(ValidationReport),
}

impl GkgError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        GkgError::Syntax { line, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GkgDocument {
    pub hierarchy: TypeHierarchy,
    pub graph: GroundedGraph,
    pub labels: LabelTable,
    pub schema: Schema,
}

impl Default for GkgDocument {
    fn default() -> Self {
        GkgDocument {
            hierarchy: TypeHierarchy::with_root(),
            graph: GroundedGraph::new(),
            labels: LabelTable::new(),
            schema: Schema::default(),
        }
    }
}

impl GkgDocument {
    /// Graph violations plus schema declarations naming unknown types.
    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_graph(&self.graph, &self.hierarchy);
        for v in self.schema.check_types(&self.hierarchy) {
            report.push(v);
        }
        report.finish()
    }
}

/// Accumulates schema declarations shared by GKG documents and rule files.
#[derive(Default)]
pub(crate) struct DeclCollector {
    pub types: Vec<(usize, NodeId, Option<NodeId>)>,
    pub schema: Schema,
}

impl DeclCollector {
    /// Handles `T`, `ESSENTIAL`, `CARD`, `ATTRDECL` and `ROLE`. Returns
    /// `Ok(false)` when the record tag is not a declaration.
    pub fn accept(&mut self, lineno: usize, line: &str) -> Result<bool, GkgError> {
        let (head, _) = split_fields(line, 1);
        let err = |m: String| GkgError::syntax(lineno, m);
        match head.first().copied() {
            Some("T") => {
                let f = exact_fields(lineno, line, 3)?;
                let t = node_id(lineno, f[1])?;
                let parent = if f[2] == "-" { None } else { Some(node_id(lineno, f[2])?) };
                self.types.push((lineno, t, parent));
            }
            Some("ESSENTIAL") => {
                let f = exact_fields(lineno, line, 2)?;
                let t = node_id(lineno, f[1])?;
                if !self.schema.essential.insert(t.clone()) {
                    return Err(err(format!("duplicate ESSENTIAL {t}")));
                }
            }
            Some("CARD") => {
                let f = exact_fields(lineno, line, 3)?;
                let t = node_id(lineno, f[1])?;
                let card = f[2].parse().map_err(err)?;
                if self.schema.cardinality.insert(t.clone(), card).is_some() {
                    return Err(err(format!("duplicate CARD for {t}")));
                }
            }
            Some("ATTRDECL") => {
                let f = exact_fields(lineno, line, 4)?;
                let e = node_id(lineno, f[1])?;
                let a = node_id(lineno, f[2])?;
                let arity = f[3].parse().map_err(err)?;
                if self.schema.attr_decls.insert((e.clone(), a.clone()), arity).is_some() {
                    return Err(err(format!("duplicate ATTRDECL for {e} {a}")));
                }
            }
            Some("ROLE") => {
                let f = exact_fields(lineno, line, 8)?;
                if f[2] != "BASE" || f[4] != "VIA" || f[6] != "EVENT" {
                    return Err(err("expected ROLE <name> BASE <type> VIA <rel> EVENT <type>".into()));
                }
                let role_name = f[1].to_string();
                let via = f[5].parse().map_err(|_| {
                    err(format!("ROLE relation must be hasAgent, hasObject or participantIn, got `{}`", f[5]))
                })?;
                let def = RoleConceptDef {
                    role_name: role_name.clone(),
                    base_type: node_id(lineno, f[3])?,
                    via,
                    occurrent_type: node_id(lineno, f[7])?,
                };
                if self.schema.roles.insert(role_name.clone(), def).is_some() {
                    return Err(err(format!("duplicate ROLE {role_name}")));
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn hierarchy(&self) -> Result<TypeHierarchy, GkgError> {
        let line_of = |t: &NodeId| self.types.iter().find(|(_, x, _)| x == t).map(|(l, _, _)| *l).unwrap_or(0);
        TypeHierarchy::from_declarations(self.types.iter().map(|(_, t, p)| (t.clone(), p.clone()))).map_err(|e| {
            use crate::hierarchy::HierarchyError::*;
            let line = match &e {
                DuplicateType(t) | UnknownType(t) => {
                    // report the last occurrence for duplicates
                    self.types.iter().rev().find(|(_, x, _)| x == t).map(|(l, _, _)| *l).unwrap_or(0)
                }
                UnknownParent { child, .. } | CycleWouldForm { child, .. } => line_of(child),
                RootHasParent(_) => line_of(&crate::hierarchy::root_type()),
            };
            GkgError::syntax(line, e.to_string())
        })
    }
}

pub(crate) fn node_id(lineno: usize, s: &str) -> Result<NodeId, GkgError> {
    NodeId::new(s).map_err(|e| GkgError::syntax(lineno, e.to_string()))
}

pub(crate) fn exact_fields(lineno: usize, line: &str, n: usize) -> Result<Vec<&str>, GkgError> {
    let (f, rest) = split_fields(line, n);
    if f.len() != n || rest.is_some() {
        return Err(GkgError::syntax(lineno, format!("`{}` expects {} fields", f.first().copied().unwrap_or(""), n)));
    }
    Ok(f)
}

/// Parses and validates a GKG v1 document.
pub fn parse_gkg(text: &str) -> Result<GkgDocument, GkgError> {
    let doc = parse_gkg_unchecked(text)?;
    let report = doc.validate();
    if report.is_empty() {
        Ok(doc)
    } else {
        Err(GkgError::ValidationFailed(report))
    }
}

/// Parses a GKG v1 document without running graph validation.
pub fn parse_gkg_unchecked(text: &str) -> Result<GkgDocument, GkgError> {
    let mut decls = DeclCollector::default();
    let mut nodes: BTreeMap<NodeId, Node> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut labels = LabelTable::new();
    let mut graph_meta: Option<(Option<String>, u64)> = None;

    for (lineno, line) in content_lines(text) {
        if decls.accept(lineno, line)? {
            continue;
        }
        let (head, _) = split_fields(line, 1);
        match head.first().copied() {
            Some("N") => {
                let (f, literal) = split_fields(line, 4);
                if f.len() != 4 {
                    return Err(GkgError::syntax(lineno, "`N` expects <id> <kind> <type> [literal]"));
                }
                let id = node_id(lineno, f[1])?;
                let kind = NodeKind::from_letter(f[2]).map_err(|e| GkgError::syntax(lineno, e.to_string()))?;
                let ty = node_id(lineno, f[3])?;
                let node = match (kind, literal) {
                    (NodeKind::ValueLiteral, Some(lit)) => {
                        check_text(lit).map_err(|e| GkgError::syntax(lineno, e.to_string()))?;
                        Node::value(id, ty, lit)
                    }
                    (NodeKind::ValueLiteral, None) => {
                        return Err(GkgError::syntax(lineno, "value node needs a literal"))
                    }
                    (_, Some(_)) => return Err(GkgError::syntax(lineno, "only value nodes carry a literal")),
                    (kind, None) => Node::instance(id, kind, ty),
                };
                if nodes.contains_key(&node.id) {
                    return Err(GkgError::syntax(lineno, format!("duplicate node {}", node.id)));
                }
                nodes.insert(node.id.clone(), node);
            }
            Some("E") => {
                let f = exact_fields(lineno, line, 4)?;
                let subj = node_id(lineno, f[1])?;
                let rel: PrimitiveRelation =
                    f[2].parse().map_err(|e: crate::model::ModelError| GkgError::syntax(lineno, e.to_string()))?;
                let obj = node_id(lineno, f[3])?;
                edges.push(Edge::new(subj, rel, obj));
            }
            Some("L") => {
                let (f, label) = split_fields(line, 3);
                let Some(label) = label.filter(|_| f.len() == 3) else {
                    return Err(GkgError::syntax(lineno, "`L` expects <id> <lang> <label>"));
                };
                let node = node_id(lineno, f[1])?;
                check_lang(f[2]).map_err(|e| GkgError::syntax(lineno, e.to_string()))?;
                if labels.contains(&node, f[2]) {
                    return Err(GkgError::syntax(lineno, format!("duplicate label for {} {}", node, f[2])));
                }
                labels.set(node, f[2], label).map_err(|e| GkgError::syntax(lineno, e.to_string()))?;
            }
            Some("GRAPH") => {
                let f = exact_fields(lineno, line, 3)?;
                if graph_meta.is_some() {
                    return Err(GkgError::syntax(lineno, "duplicate GRAPH record"));
                }
                let source = (f[1] != "-").then(|| f[1].to_string());
                let revision =
                    f[2].parse::<u64>().map_err(|_| GkgError::syntax(lineno, format!("bad revision `{}`", f[2])))?;
                graph_meta = Some((source, revision));
            }
            Some(other) => return Err(GkgError::syntax(lineno, format!("unknown record `{other}`"))),
            None => unreachable!("content lines are non-blank"),
        }
    }

    let hierarchy = decls.hierarchy()?;
    let mut graph = GroundedGraph::new();
    if let Some((source, revision)) = graph_meta {
        graph.source_id = source;
        graph.revision = revision;
    }
    // Edge endpoints that name declared types become type nodes.
    let type_refs: BTreeSet<NodeId> = edges
        .iter()
        .flat_map(|e| [&e.subject, &e.object])
        .filter(|n| !nodes.contains_key(*n) && hierarchy.contains(n))
        .cloned()
        .collect();
    for t in type_refs {
        graph.insert_node_unchecked(Node::type_node(t));
    }
    for node in nodes.into_values() {
        graph.insert_node_unchecked(node);
    }
    for e in edges {
        graph.insert_edge_unchecked(e);
    }

    Ok(GkgDocument { hierarchy, graph, labels, schema: decls.schema })
}

/// Canonical text: sections T, N, E, L, declarations, each sorted.
pub fn serialize_gkg(doc: &GkgDocument) -> String {
    let mut out = String::new();
    let mut push_section = |mut lines: Vec<String>| {
        lines.sort();
        lines.dedup();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
    };

    let mut types: Vec<String> = doc
        .hierarchy
        .edges()
        .map(|(t, p)| match p {
            Some(p) => format!("T {t} {p}"),
            None => format!("T {t} -"),
        })
        .collect();
    if !doc.hierarchy.types().any(|t| t.as_str() == ROOT_TYPE) {
        types.push(format!("T {ROOT_TYPE} -"));
    }
    push_section(types);

    push_section(
        doc.graph
            .nodes()
            .filter_map(|n| {
                let letter = n.kind.letter()?;
                let ty = n.inst_of.as_ref().map(NodeId::as_str).unwrap_or("-");
                Some(match &n.literal {
                    Some(lit) => format!("N {} {} {} {}", n.id, letter, ty, lit),
                    None => format!("N {} {} {}", n.id, letter, ty),
                })
            })
            .collect(),
    );

    push_section(doc.graph.edges().map(|e| format!("E {} {} {}", e.subject, e.relation, e.object)).collect());

    push_section(doc.labels.iter().map(|(n, lang, label)| format!("L {n} {lang} {label}")).collect());

    let s = &doc.schema;
    let mut decls: Vec<String> = Vec::new();
    decls.extend(s.essential.iter().map(|t| format!("ESSENTIAL {t}")));
    decls.extend(s.cardinality.iter().map(|(t, c)| format!("CARD {t} {c}")));
    decls.extend(s.attr_decls.iter().map(|((e, a), arity)| format!("ATTRDECL {e} {a} {arity}")));
    decls.extend(
        s.roles
            .values()
            .map(|d| format!("ROLE {} BASE {} VIA {} EVENT {}", d.role_name, d.base_type, d.via, d.occurrent_type)),
    );
    if doc.graph.source_id.is_some() || doc.graph.revision != 0 {
        decls.push(format!("GRAPH {} {}", doc.graph.source_id.as_deref().unwrap_or("-"), doc.graph.revision));
    }
    push_section(decls);

    out
}
