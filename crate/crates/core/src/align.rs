//! Cross-KG entity alignment.
//!
//! The grounded path compares per-slot signatures (name, type, essential
//! event facts, inferred roles) and averages the slot cosines, so a single
//! changed fact costs a fixed share of the score no matter how much other
//! context is shared. The flat path sums triple vectors and is kept as the
//! baseline it improves on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::embedding::{cosine, embed_flat_triple, embed_phrase, EmbedError, TokenEmbedder, Vector};
use crate::format::{FlatTriple, GkgDocument};
use crate::model::{NodeId, NodeKind};
use crate::roles::infer_role_labels;

pub const DEFAULT_THRESHOLD: f64 = 0.9;
pub const DEFAULT_AMBIGUITY_BAND: f64 = 0.02;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("`{0}` is not a continuant")]
    NotAContinuant(NodeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("invalid alignment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("alignment TSV line {line}: {message}")]
    BadTsv { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotKey {
    Name,
    Type,
    Fact { event_type: NodeId, attr_type: NodeId },
    Roles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotClass {
    Name,
    Type,
    Fact,
    Roles,
}

impl SlotKey {
    pub fn class(&self) -> SlotClass {
        match self {
            SlotKey::Name => SlotClass::Name,
            SlotKey::Type => SlotClass::Type,
            SlotKey::Fact { .. } => SlotClass::Fact,
            SlotKey::Roles => SlotClass::Roles,
        }
    }
}

impl fmt::Display for SlotKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotKey::Name => f.write_str("name"),
            SlotKey::Type => f.write_str("type"),
            SlotKey::Fact { event_type, attr_type } => write!(f, "{event_type}/{attr_type}"),
            SlotKey::Roles => f.write_str("roles"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntitySignature {
    pub slots: BTreeMap<SlotKey, Vector>,
}

impl EntitySignature {
    pub fn keys(&self) -> impl Iterator<Item = &SlotKey> {
        self.slots.keys()
    }
}

#[derive(Clone)]
pub struct AlignmentConfig {
    pub embedder: Arc<dyn TokenEmbedder + Send + Sync>,
    pub threshold: f64,
    pub ambiguity_band: f64,
    /// Per-class slot weights; missing classes weigh 1.
    pub weights: BTreeMap<SlotClass, f64>,
    pub pivot_lang: String,
}

impl fmt::Debug for AlignmentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlignmentConfig")
            .field("dim", &self.embedder.dim())
            .field("threshold", &self.threshold)
            .field("ambiguity_band", &self.ambiguity_band)
            .field("weights", &self.weights)
            .field("pivot_lang", &self.pivot_lang)
            .finish()
    }
}

impl AlignmentConfig {
    pub fn new(embedder: Arc<dyn TokenEmbedder + Send + Sync>) -> Self {
        AlignmentConfig {
            embedder,
            threshold: DEFAULT_THRESHOLD,
            ambiguity_band: DEFAULT_AMBIGUITY_BAND,
            weights: BTreeMap::new(),
            pivot_lang: crate::multilingual::FALLBACK_LANG.to_string(),
        }
    }

    pub fn check(&self) -> Result<(), AlignError> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(AlignError::InvalidConfig(format!("threshold {} not in (0, 1]", self.threshold)));
        }
        if self.ambiguity_band.is_nan() || self.ambiguity_band < 0.0 {
            return Err(AlignError::InvalidConfig("ambiguity band must be non-negative".into()));
        }
        if let Some((c, w)) = self.weights.iter().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(AlignError::InvalidConfig(format!("weight for {c:?} must be positive, got {w}")));
        }
        Ok(())
    }

    fn weight(&self, class: SlotClass) -> f64 {
        self.weights.get(&class).copied().unwrap_or(1.0)
    }

    fn phrase(&self, text: &str) -> Result<Vector, EmbedError> {
        embed_phrase(self.embedder.as_ref(), text)
    }
}

/// Role names per entity, computed once per document.
fn role_index(doc: &GkgDocument) -> BTreeMap<NodeId, Vec<String>> {
    let mut out: BTreeMap<NodeId, Vec<String>> = BTreeMap::new();
    let defs = doc.schema.role_defs();
    if defs.is_empty() {
        return out;
    }
    // definitions naming unknown types simply contribute nothing
    if let Ok(labels) = infer_role_labels(&doc.graph, &doc.hierarchy, &defs) {
        for (node, role) in labels {
            out.entry(node).or_default().push(role);
        }
    }
    out
}

pub fn entity_signature(doc: &GkgDocument, id: &NodeId, cfg: &AlignmentConfig) -> Result<EntitySignature, AlignError> {
    signature_with_roles(doc, id, cfg, &role_index(doc))
}

fn signature_with_roles(
    doc: &GkgDocument,
    id: &NodeId,
    cfg: &AlignmentConfig,
    roles: &BTreeMap<NodeId, Vec<String>>,
) -> Result<EntitySignature, AlignError> {
    let g = &doc.graph;
    let node = g.node(id).ok_or_else(|| AlignError::UnknownNode(id.clone()))?;
    if node.kind != NodeKind::Continuant {
        return Err(AlignError::NotAContinuant(id.clone()));
    }
    let mut slots = BTreeMap::new();
    let mut put = |key: SlotKey, v: Vector| {
        if !v.is_zero() {
            slots.insert(key, v);
        }
    };

    let name = doc.labels.get(id, &cfg.pivot_lang).unwrap_or_else(|| id.local());
    put(SlotKey::Name, cfg.phrase(name)?);

    if let Some(ty) = &node.inst_of {
        let mut acc = Vector::zeros(cfg.embedder.dim());
        if let Ok(ancestors) = doc.hierarchy.ancestors(ty) {
            for t in &ancestors {
                let text = doc.labels.get(t, &cfg.pivot_lang).unwrap_or_else(|| t.local());
                acc += &cfg.phrase(text)?;
            }
        }
        put(SlotKey::Type, acc.normalized());
    }

    let mut facts: BTreeMap<SlotKey, Vector> = BTreeMap::new();
    for event in g.events_of(id) {
        let Some(event_type) = g.node(event).and_then(|n| n.inst_of.as_ref()) else {
            continue;
        };
        for essential in &doc.schema.essential {
            if !doc.hierarchy.is_subtype(event_type, essential).unwrap_or(false) {
                continue;
            }
            for attr in g.attributes_of(event) {
                let Some(attr_type) = g.node(attr).and_then(|n| n.inst_of.clone()) else {
                    continue;
                };
                let key = SlotKey::Fact { event_type: essential.clone(), attr_type };
                let entry = facts.entry(key).or_insert_with(|| Vector::zeros(cfg.embedder.dim()));
                for value in g.values_of(attr) {
                    *entry += &cfg.phrase(value)?;
                }
            }
        }
    }
    for (k, v) in facts {
        put(k, v.normalized());
    }

    if let Some(names) = roles.get(id) {
        let mut acc = Vector::zeros(cfg.embedder.dim());
        for r in names {
            acc += &cfg.phrase(r)?;
        }
        put(SlotKey::Roles, acc.normalized());
    }

    Ok(EntitySignature { slots })
}

/// Weighted mean of per-slot cosines over the union of slot keys. A slot
/// present on one side only scores 0; negative cosines clamp to 0.
pub fn signature_similarity(s1: &EntitySignature, s2: &EntitySignature, cfg: &AlignmentConfig) -> f64 {
    let keys: BTreeSet<&SlotKey> = s1.slots.keys().chain(s2.slots.keys()).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for key in keys {
        let w = cfg.weight(key.class());
        let sim = match (s1.slots.get(key), s2.slots.get(key)) {
            (Some(a), Some(b)) => cosine(a, b).max(0.0),
            _ => 0.0,
        };
        num += w * sim;
        den += w;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub a: NodeId,
    pub b: NodeId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ambiguity {
    pub a: NodeId,
    pub candidates: Vec<(NodeId, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlignmentResult {
    pub matches: Vec<Match>,
    pub unmatched_a: BTreeSet<NodeId>,
    pub unmatched_b: BTreeSet<NodeId>,
    pub ambiguous: Vec<Ambiguity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignStatus {
    Match,
    Ambig,
}

impl fmt::Display for AlignStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlignStatus::Match => "MATCH",
            AlignStatus::Ambig => "AMBIG",
        })
    }
}

/// One row of the alignment TSV.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignRow {
    pub a: NodeId,
    pub b: NodeId,
    pub score: f64,
    pub status: AlignStatus,
}

impl AlignmentResult {
    pub fn rows(&self) -> Vec<AlignRow> {
        let mut rows: Vec<AlignRow> = self
            .matches
            .iter()
            .map(|m| AlignRow { a: m.a.clone(), b: m.b.clone(), score: m.score, status: AlignStatus::Match })
            .chain(self.ambiguous.iter().flat_map(|amb| {
                amb.candidates.iter().map(|(b, s)| AlignRow {
                    a: amb.a.clone(),
                    b: b.clone(),
                    score: *s,
                    status: AlignStatus::Ambig,
                })
            }))
            .collect();
        rows.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        rows
    }

    /// `idA TAB idB TAB score TAB MATCH|AMBIG`, sorted by (idA, idB).
    pub fn to_tsv(&self) -> String {
        self.rows().iter().map(|r| format!("{}\t{}\t{:.4}\t{}\n", r.a, r.b, r.score, r.status)).collect()
    }

    pub fn match_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.matches.iter().map(|m| (m.a.clone(), m.b.clone())).collect()
    }
}

pub fn parse_alignment_tsv(text: &str) -> Result<Vec<AlignRow>, AlignError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: String| AlignError::BadTsv { line: lineno, message: m };
        let f: Vec<&str> = line.split('\t').collect();
        let [a, b, score, status] = f.as_slice() else {
            return Err(bad(format!("expected 4 fields, found {}", f.len())));
        };
        let a = NodeId::new(*a).map_err(|e| bad(e.to_string()))?;
        let b = NodeId::new(*b).map_err(|e| bad(e.to_string()))?;
        let score: f64 = score.parse().map_err(|_| bad(format!("bad score `{score}`")))?;
        let status = match *status {
            "MATCH" => AlignStatus::Match,
            "AMBIG" => AlignStatus::Ambig,
            other => return Err(bad(format!("bad status `{other}`"))),
        };
        rows.push(AlignRow { a, b, score, status });
    }
    Ok(rows)
}

fn continuants(doc: &GkgDocument) -> Vec<&NodeId> {
    doc.graph.nodes_of_kind(NodeKind::Continuant).map(|n| &n.id).collect()
}

fn type_compatible(a: &GkgDocument, ida: &NodeId, b: &GkgDocument, idb: &NodeId) -> bool {
    let ta = a.graph.node(ida).and_then(|n| n.inst_of.as_ref());
    let tb = b.graph.node(idb).and_then(|n| n.inst_of.as_ref());
    match (ta, tb) {
        (Some(ta), Some(tb)) => ta == tb || a.hierarchy.comparable(ta, tb) || b.hierarchy.comparable(ta, tb),
        _ => false,
    }
}

/// Scores every type-compatible continuant pair and picks matches greedily
/// in descending score order.
pub fn align(a: &GkgDocument, b: &GkgDocument, cfg: &AlignmentConfig) -> Result<AlignmentResult, AlignError> {
    cfg.check()?;
    let roles_a = role_index(a);
    let roles_b = role_index(b);
    let ids_a = continuants(a);
    let ids_b = continuants(b);
    let sigs_a = ids_a.iter().map(|id| signature_with_roles(a, id, cfg, &roles_a)).collect::<Result<Vec<_>, _>>()?;
    let sigs_b = ids_b.iter().map(|id| signature_with_roles(b, id, cfg, &roles_b)).collect::<Result<Vec<_>, _>>()?;

    // (score, index into A, index into B)
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, ida) in ids_a.iter().enumerate() {
        for (j, idb) in ids_b.iter().enumerate() {
            if type_compatible(a, ida, b, idb) {
                pairs.push((signature_similarity(&sigs_a[i], &sigs_b[j], cfg), i, j));
            }
        }
    }
    // Descending score; ties broken on the unordered id pair so that
    // swapping the inputs visits pairs in the same order.
    let key = |&(_, i, j): &(f64, usize, usize)| {
        let (x, y) = (ids_a[i], ids_b[j]);
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    };
    pairs.sort_by(|p, q| q.0.total_cmp(&p.0).then_with(|| key(p).cmp(&key(q))));

    let mut by_a: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ids_a.len()];
    let mut by_b: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ids_b.len()];
    for &(s, i, j) in &pairs {
        by_a[i].push((j, s));
        by_b[j].push((i, s));
    }

    let mut done_a = vec![false; ids_a.len()];
    let mut done_b = vec![false; ids_b.len()];
    let mut result = AlignmentResult::default();

    for &(score, i, j) in &pairs {
        if score < cfg.threshold {
            break;
        }
        if done_a[i] || done_b[j] {
            continue;
        }
        let rival_b = by_a[i].iter().filter(|(jj, _)| *jj != j && !done_b[*jj]).map(|(_, s)| *s);
        let rival_a = by_b[j].iter().filter(|(ii, _)| *ii != i && !done_a[*ii]).map(|(_, s)| *s);
        let runner_up = rival_b.chain(rival_a).fold(f64::NEG_INFINITY, f64::max);
        done_a[i] = true;
        done_b[j] = true;
        if score - runner_up < cfg.ambiguity_band {
            let mut candidates: Vec<(NodeId, f64)> = by_a[i]
                .iter()
                .filter(|(jj, s)| (*jj == j || !done_b[*jj]) && score - s < cfg.ambiguity_band)
                .map(|(jj, s)| (ids_b[*jj].clone(), *s))
                .collect();
            candidates.sort_by(|x, y| x.0.cmp(&y.0));
            result.ambiguous.push(Ambiguity { a: ids_a[i].clone(), candidates });
        } else {
            result.matches.push(Match { a: ids_a[i].clone(), b: ids_b[j].clone(), score });
        }
    }

    result.matches.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    result.ambiguous.sort_by(|x, y| x.a.cmp(&y.a));
    result.unmatched_a = ids_a.iter().enumerate().filter(|(i, _)| !done_a[*i]).map(|(_, id)| (*id).clone()).collect();
    result.unmatched_b = ids_b.iter().enumerate().filter(|(j, _)| !done_b[*j]).map(|(_, id)| (*id).clone()).collect();
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatPair {
    pub a: FlatTriple,
    pub b: FlatTriple,
    pub cosine: f64,
}

/// Scores all cross pairs of flat triples by summed-vector cosine,
/// best first.
pub fn flat_align(
    triples_a: &[FlatTriple],
    triples_b: &[FlatTriple],
    embedder: &dyn TokenEmbedder,
) -> Result<Vec<FlatPair>, EmbedError> {
    let ea = triples_a.iter().map(|t| embed_flat_triple(embedder, t)).collect::<Result<Vec<_>, _>>()?;
    let eb = triples_b.iter().map(|t| embed_flat_triple(embedder, t)).collect::<Result<Vec<_>, _>>()?;
    let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(ea.len() * eb.len());
    for (i, u) in ea.iter().enumerate() {
        for (j, v) in eb.iter().enumerate() {
            scored.push((cosine(u, v), i, j));
        }
    }
    scored.sort_by(|p, q| q.0.total_cmp(&p.0).then((p.1, p.2).cmp(&(q.1, q.2))));
    Ok(scored
        .into_iter()
        .map(|(c, i, j)| FlatPair { a: triples_a[i].clone(), b: triples_b[j].clone(), cosine: c })
        .collect())
}
