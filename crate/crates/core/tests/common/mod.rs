#![allow(dead_code)]

use gkg::format::GkgDocument;
use gkg::hash::SplitMix64;
use gkg::model::{Node, NodeId, NodeKind, PrimitiveRelation, RoleRelation};
use gkg::roles::RoleConceptDef;
use gkg::schema::{AttrArity, Cardinality};
use gkg::{GroundedGraph, TypeHierarchy, ROOT_TYPE};

pub fn nid(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

const WORDS: &[&str] =
    &["Roger", "Waters", "London", "Chelsea", "Birth", "naissance", "ولادة", "生まれ", "x y", "a-b_c"];
const LANGS: &[&str] = &["en", "fr", "ar", "de", "zh-Hans"];

fn pick<'a, T>(rng: &mut SplitMix64, items: &'a [T]) -> &'a T {
    &items[rng.below(items.len() as u64) as usize]
}

fn text(rng: &mut SplitMix64) -> String {
    let n = 1 + rng.below(3) as usize;
    (0..n).map(|_| *pick(rng, WORDS)).collect::<Vec<_>>().join(" ")
}

/// Random type DAG with `n` types below the root; parents always come
/// from earlier types so the result is acyclic.
pub fn random_hierarchy(rng: &mut SplitMix64, n: usize) -> (TypeHierarchy, Vec<NodeId>) {
    let mut h = TypeHierarchy::with_root();
    let mut types = vec![nid(ROOT_TYPE)];
    for i in 0..n {
        let t = nid(&format!("ty:T{i}"));
        let parent = types[rng.below(types.len() as u64) as usize].clone();
        h.add_type(t.clone(), Some(parent)).unwrap();
        if i > 0 && rng.below(3) == 0 {
            let extra = types[rng.below(types.len() as u64) as usize].clone();
            let _ = h.add_parent(&t, &extra);
        }
        types.push(t);
    }
    (h, types)
}

/// A random valid document. Every type node in the graph is referenced by
/// some edge, as the text format requires.
pub fn random_document(seed: u64) -> GkgDocument {
    let mut rng = SplitMix64::new(seed);
    let n_types = 2 + rng.below(6) as usize;
    let (hierarchy, types) = random_hierarchy(&mut rng, n_types);
    let mut g = GroundedGraph::new();
    let kinds = [NodeKind::Continuant, NodeKind::Occurrent, NodeKind::AttributeInstance, NodeKind::ValueLiteral];
    let n_nodes = rng.below(12) as usize;
    let mut ids = Vec::new();
    for i in 0..n_nodes {
        let kind = *pick(&mut rng, &kinds);
        let id = nid(&format!("n:{i}"));
        let ty = pick(&mut rng, &types).clone();
        let node = if kind == NodeKind::ValueLiteral {
            Node::value(id.clone(), ty, text(&mut rng))
        } else {
            Node::instance(id.clone(), kind, ty)
        };
        g.add_node(node).unwrap();
        ids.push(id);
    }

    for _ in 0..rng.below(20) {
        let rel = *pick(&mut rng, &PrimitiveRelation::ALL);
        match rel {
            PrimitiveRelation::Inst if !ids.is_empty() => {
                let s = pick(&mut rng, &ids).clone();
                let t = g.node(&s).unwrap().inst_of.clone().unwrap();
                if !g.contains(&t) {
                    g.add_node(Node::type_node(t.clone())).unwrap();
                }
                g.add_edge(&s, rel, &t).unwrap();
            }
            PrimitiveRelation::IsA => {
                let (child, parent) = hierarchy
                    .edges()
                    .filter_map(|(c, p)| p.map(|p| (c, p)))
                    .nth(rng.below(types.len() as u64) as usize)
                    .unwrap_or_else(|| (types[1].clone(), types[0].clone()));
                for t in [&child, &parent] {
                    if !g.contains(t) {
                        g.add_node(Node::type_node(t.clone())).unwrap();
                    }
                }
                if hierarchy.is_subtype(&child, &parent).unwrap() && child != parent {
                    let _ = g.add_edge(&child, rel, &parent);
                }
            }
            _ if ids.len() >= 2 => {
                let s = pick(&mut rng, &ids).clone();
                let o = pick(&mut rng, &ids).clone();
                let _ = g.add_edge(&s, rel, &o);
            }
            _ => {}
        }
    }
    if rng.below(2) == 0 {
        g.source_id = Some(format!("src{}", rng.below(100)));
    }
    g.revision = rng.below(4);

    let mut doc = GkgDocument { hierarchy, graph: g, ..GkgDocument::default() };
    for id in &ids {
        for _ in 0..rng.below(3) {
            let lang = *pick(&mut rng, LANGS);
            let _ = doc.labels.set(id.clone(), lang, &text(&mut rng));
        }
    }
    if rng.below(2) == 0 {
        let t = pick(&mut rng, &types).clone();
        doc.labels.set(t, "fr", "type").unwrap();
    }
    for _ in 0..rng.below(3) {
        let t = pick(&mut rng, &types).clone();
        doc.schema.essential.insert(t.clone());
        doc.schema.cardinality.insert(t.clone(), if rng.below(2) == 0 { Cardinality::One } else { Cardinality::Many });
        let a = pick(&mut rng, &types).clone();
        doc.schema.attr_decls.insert((t, a), if rng.below(2) == 0 { AttrArity::Functional } else { AttrArity::Multi });
    }
    if rng.below(3) == 0 {
        let def = RoleConceptDef {
            role_name: format!("Role{}", rng.below(5)),
            base_type: pick(&mut rng, &types).clone(),
            via: *pick(&mut rng, &[RoleRelation::ParticipantIn, RoleRelation::HasAgent, RoleRelation::HasObject]),
            occurrent_type: pick(&mut rng, &types).clone(),
        };
        doc.schema.roles.insert(def.role_name.clone(), def);
    }
    doc
}
