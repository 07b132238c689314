mod common;

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use proptest::prelude::*;

use common::{nid, random_document};
use gkg::align::{align, entity_signature, parse_alignment_tsv, signature_similarity, AlignmentConfig};
use gkg::embedding::{cosine, embed_phrase, HashEmbedder, Vector};
use gkg::eval::worked_example_text;
use gkg::format::{parse_flat, parse_gkg, parse_rules, serialize_gkg, FlatTriple, GkgDocument, RuleSet};
use gkg::merge::{merge, MergePolicy};
use gkg::model::{Node, NodeKind, PrimitiveRelation, RoleRelation, Violation};
use gkg::multilingual::{check_isomorphic, render};
use gkg::roles::RoleConceptDef;
use gkg::{infer_role_labels, validate_graph, GroundedGraph, TypeHierarchy};

const RULES: &str = "\
T ont:Location -
T ont:City ont:Location
T ont:Time -
T ont:Date -
ESSENTIAL ont:Birth
CARD ont:Birth ONE
CARD ont:Visit MANY
ATTRDECL ont:Birth ont:Location FUNCTIONAL
ATTRDECL ont:Birth ont:Time FUNCTIONAL
ATTRDECL ont:Visit ont:Location MULTI
RULE bornIn EVENT ont:Birth SUBJ participantIn OBJ ATTR ont:Location ont:City
RULE placeOfBirth EVENT ont:Birth SUBJ participantIn OBJ ATTR ont:Location ont:City
RULE bornOn EVENT ont:Birth SUBJ participantIn OBJ ATTR ont:Time ont:Date
RULE visited EVENT ont:Visit SUBJ participantIn OBJ ATTR ont:Location ont:City
";

const PEOPLE: [&str; 5] = ["Roger Waters", "David Gilmour", "Nick Mason", "Rick Wright", "Syd Barrett"];
const CITIES: [&str; 5] = ["London", "Cambridge", "Birmingham", "Great Bookham", "Chelsea"];
const DATES: [&str; 4] = ["1943-09-06", "1946-03-06", "1944-01-27", "1945-07-28"];

fn rules() -> RuleSet {
    let mut rs = parse_rules(RULES).unwrap();
    for p in PEOPLE {
        rs.entity_types.insert(p.to_string(), nid("core:Human"));
    }
    rs
}

/// Per person: birth city, birth date, visited cities. At most one value
/// per FUNCTIONAL slot.
type Facts = Vec<(Option<usize>, Option<usize>, Vec<usize>)>;

fn facts() -> impl Strategy<Value = Facts> {
    prop::collection::vec(
        (
            prop::option::of(0..CITIES.len()),
            prop::option::of(0..DATES.len()),
            prop::collection::vec(0..CITIES.len(), 0..3),
        ),
        1..=PEOPLE.len(),
    )
}

fn triples(facts: &Facts, synonym: bool) -> Vec<FlatTriple> {
    let mut out = Vec::new();
    for (i, (city, date, visits)) in facts.iter().enumerate() {
        let p = PEOPLE[i];
        if let Some(c) = city {
            out.push(FlatTriple::new(p, if synonym { "placeOfBirth" } else { "bornIn" }, CITIES[*c]));
        }
        if let Some(d) = date {
            out.push(FlatTriple::new(p, "bornOn", DATES[*d]));
        }
        for v in visits {
            out.push(FlatTriple::new(p, "visited", CITIES[*v]));
        }
    }
    out
}

fn canonical(facts: &Facts) -> GkgDocument {
    rules().canonicalize(&triples(facts, false), "en").0
}

fn hash_cfg() -> AlignmentConfig {
    AlignmentConfig::new(Arc::new(HashEmbedder::new(42, 64)))
}

/// Reachability over `parents[i]`, the oracle for subtype queries.
fn reachable(parents: &[Vec<usize>], from: usize, to: usize) -> bool {
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::new();
    while let Some(n) = queue.pop_front() {
        if n == to {
            return true;
        }
        if seen.insert(n) {
            queue.extend(parents[n].iter().copied());
        }
    }
    false
}

fn dag() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..=20).prop_flat_map(|n| {
        (0..n)
            .map(|i| {
                if i == 0 {
                    Just(Vec::new()).boxed()
                } else {
                    prop::collection::btree_set(0..i, 1..=i.min(3)).prop_map(|s| s.into_iter().collect()).boxed()
                }
            })
            .collect::<Vec<_>>()
    })
}

fn kind_strategy() -> impl Strategy<Value = NodeKind> {
    prop::sample::select(NodeKind::ALL.to_vec())
}

fn relation_strategy() -> impl Strategy<Value = PrimitiveRelation> {
    prop::sample::select(PrimitiveRelation::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn insertions_keep_vocabulary_and_signatures(
        kinds in prop::collection::vec(kind_strategy(), 2..12),
        ops in prop::collection::vec((any::<prop::sample::Index>(), relation_strategy(), any::<prop::sample::Index>()), 1..60),
    ) {
        let mut g = GroundedGraph::new();
        let mut h = TypeHierarchy::with_root();
        let ids: Vec<_> = (0..kinds.len()).map(|i| nid(&format!("p:{i}"))).collect();
        for (id, kind) in ids.iter().zip(&kinds) {
            let node = match kind {
                NodeKind::TypeNode => {
                    h.add_type(id.clone(), None).unwrap();
                    Node::type_node(id.clone())
                }
                NodeKind::ValueLiteral => Node::value(id.clone(), nid("core:Entity"), "v"),
                k => Node::instance(id.clone(), *k, nid("core:Entity")),
            };
            g.add_node(node).unwrap();
        }
        for (s, rel, o) in ops {
            let (s, o) = (s.get(&ids), o.get(&ids));
            let permitted = rel.permits(g.node(s).unwrap().kind, g.node(o).unwrap().kind);
            let added = g.add_edge(s, rel, o).is_ok();
            prop_assert!(!added || permitted);
        }
        for e in g.edges() {
            prop_assert!(PrimitiveRelation::ALL.contains(&e.relation));
        }
        let report = validate_graph(&g, &h);
        let signature_errors = report.violations.iter().filter(|v| matches!(v, Violation::SignatureViolation { .. })).count();
        prop_assert_eq!(signature_errors, 0);
        // the graph's isA edges stay acyclic
        let is_a: Vec<(usize, usize)> = g
            .edges()
            .filter(|e| e.relation == PrimitiveRelation::IsA)
            .map(|e| (ids.iter().position(|i| *i == e.subject).unwrap(), ids.iter().position(|i| *i == e.object).unwrap()))
            .collect();
        let mut parents = vec![Vec::new(); ids.len()];
        for (c, p) in &is_a {
            parents[*c].push(*p);
        }
        for (c, p) in &is_a {
            prop_assert!(!reachable(&parents, *p, *c));
        }
    }

    #[test]
    fn subtype_is_reachability(parents in dag()) {
        let n = parents.len();
        // index 0 is the root
        let ids: Vec<_> = (0..n)
            .map(|i| if i == 0 { nid(gkg::ROOT_TYPE) } else { nid(&format!("t:{i}")) })
            .collect();
        let mut h = TypeHierarchy::new();
        for (i, ps) in parents.iter().enumerate() {
            h.add_type(ids[i].clone(), ps.first().map(|p| ids[*p].clone())).unwrap();
            for p in ps.iter().skip(1) {
                h.add_parent(&ids[i], &ids[*p]).unwrap();
            }
        }
        for a in 0..n {
            prop_assert!(h.is_subtype(&ids[a], &ids[a]).unwrap());
            for b in 0..n {
                let sub = h.is_subtype(&ids[a], &ids[b]).unwrap();
                prop_assert_eq!(sub, reachable(&parents, a, b));
                if a != b && sub {
                    prop_assert!(!h.is_subtype(&ids[b], &ids[a]).unwrap());
                    prop_assert!(h.add_parent(&ids[b], &ids[a]).is_err());
                }
                for c in 0..n {
                    if sub && h.is_subtype(&ids[b], &ids[c]).unwrap() {
                        prop_assert!(h.is_subtype(&ids[a], &ids[c]).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn role_inference_is_monotone(
        edges in prop::collection::vec((0usize..4, 0usize..3, 0usize..4), 0..12),
        extra in prop::collection::vec((0usize..4, 0usize..3, 0usize..4), 1..6),
    ) {
        let mut h = TypeHierarchy::with_root();
        h.add_type(nid("core:Human"), None).unwrap();
        h.add_type(nid("core:Adult"), Some(nid("core:Human"))).unwrap();
        h.add_type(nid("ont:Teaching"), None).unwrap();
        let mut g = GroundedGraph::new();
        for i in 0..4 {
            let ty = if i % 2 == 0 { "core:Adult" } else { "core:Human" };
            g.add_node(Node::instance(nid(&format!("c:{i}")), NodeKind::Continuant, nid(ty))).unwrap();
            g.add_node(Node::instance(nid(&format!("o:{i}")), NodeKind::Occurrent, nid("ont:Teaching"))).unwrap();
        }
        let defs: Vec<_> = RoleRelation::ALL
            .iter()
            .map(|r| RoleConceptDef {
                role_name: format!("R{}", r.name()),
                base_type: nid("core:Human"),
                via: *r,
                occurrent_type: nid("ont:Teaching"),
            })
            .collect();
        let add = |g: &mut GroundedGraph, (o, r, c): (usize, usize, usize)| {
            g.add_edge(&nid(&format!("o:{o}")), RoleRelation::ALL[r].relation(), &nid(&format!("c:{c}"))).unwrap();
        };
        for e in edges {
            add(&mut g, e);
        }
        let before = infer_role_labels(&g, &h, &defs).unwrap();
        for e in extra {
            add(&mut g, e);
        }
        let after = infer_role_labels(&g, &h, &defs).unwrap();
        prop_assert!(before.is_subset(&after));
    }

    #[test]
    fn generated_documents_round_trip(seed in any::<u64>()) {
        let doc = random_document(seed);
        prop_assert!(doc.validate().is_empty());
        let text = serialize_gkg(&doc);
        let back = parse_gkg(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize_gkg(&back), text);
    }

    #[test]
    fn parsers_are_total(text in "(?s).{0,200}", lines in prop::collection::vec("[A-Z]{1,8}( [a-z:#A-Z0-9\\-]{0,12}){0,6}", 0..8)) {
        let structured = lines.join("\n");
        for input in [text.as_str(), structured.as_str()] {
            let n_lines = input.lines().count().max(1);
            if let Err(gkg::format::GkgError::Syntax { line, .. }) = parse_gkg(input) {
                prop_assert!(line >= 1 && line <= n_lines);
            }
            if let Err(gkg::format::RuleError::Syntax { line, .. }) = parse_rules(input) {
                prop_assert!(line <= n_lines);
            }
            if let Err(gkg::format::FlatError::MalformedLine(line)) = parse_flat(input) {
                prop_assert!(line >= 1 && line <= n_lines);
            }
            let _ = parse_alignment_tsv(input);
        }
    }

    #[test]
    fn canonicalize_ignores_order(f in facts(), perm in any::<prop::sample::Index>()) {
        let rs = rules();
        let ts = triples(&f, false);
        let (doc, report) = rs.canonicalize(&ts, "en");
        let mut shuffled = ts.clone();
        if !shuffled.is_empty() {
            let k = perm.index(shuffled.len());
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        let (doc2, report2) = rs.canonicalize(&shuffled, "en");
        prop_assert_eq!(serialize_gkg(&doc), serialize_gkg(&doc2));
        prop_assert_eq!(report.to_tsv(), report2.to_tsv());
        prop_assert!(doc.validate().is_empty());
        prop_assert_eq!(report.events_created + report.events_coalesced, report.mapped_triples);
        // synonym relations land on the same events
        let (synonym, _) = rs.canonicalize(&triples(&f, true), "en");
        prop_assert_eq!(serialize_gkg(&synonym), serialize_gkg(&doc));
        // no second Birth per person
        for c in doc.graph.nodes_of_kind(NodeKind::Continuant) {
            let births = doc
                .graph
                .events_of(&c.id)
                .into_iter()
                .filter(|e| doc.graph.node(e).unwrap().inst_of == Some(nid("ont:Birth")))
                .count();
            prop_assert!(births <= 1);
        }
    }

    #[test]
    fn cosine_symmetric_and_scale_invariant(
        u in prop::collection::vec(-10.0f64..10.0, 8),
        v in prop::collection::vec(-10.0f64..10.0, 8),
        alpha in 0.001f64..1000.0,
    ) {
        let (u, v) = (Vector::from_components(u), Vector::from_components(v));
        let c = cosine(&u, &v);
        prop_assert!((-1.0..=1.0).contains(&c));
        prop_assert!((c - cosine(&v, &u)).abs() < 1e-12);
        prop_assert!((c - cosine(&u.scaled(alpha), &v)).abs() < 1e-9);
    }

    #[test]
    fn alignment_is_symmetric_and_threshold_monotone(fa in facts(), fb in facts(), t in 0.5f64..0.99) {
        let (a, b) = (canonical(&fa), canonical(&fb));
        let mut cfg = hash_cfg();
        cfg.threshold = t;
        let ab = align(&a, &b, &cfg).unwrap();
        let ba = align(&b, &a, &cfg).unwrap();
        let forward: BTreeSet<_> = ab.match_pairs().into_iter().collect();
        let backward: BTreeSet<_> = ba.match_pairs().into_iter().map(|(x, y)| (y, x)).collect();
        prop_assert_eq!(&forward, &backward);
        prop_assert_eq!(ab.to_tsv(), align(&a, &b, &cfg).unwrap().to_tsv());
        cfg.threshold = (t + 0.05).min(1.0);
        let stricter: BTreeSet<_> = align(&a, &b, &cfg).unwrap().match_pairs().into_iter().collect();
        prop_assert!(stricter.is_subset(&forward));
    }

    #[test]
    fn changed_essential_fact_stays_below_threshold(city in "[a-z]{6,12}") {
        prop_assume!(!["london", "roger", "waters"].contains(&city.as_str()));
        let cfg = hash_cfg();
        let base = parse_gkg(&worked_example_text("Roger Waters", "London")).unwrap();
        let moved = parse_gkg(&worked_example_text("Roger Waters", &city)).unwrap();
        let rw = nid("ex:rw");
        let s = signature_similarity(
            &entity_signature(&base, &rw, &cfg).unwrap(),
            &entity_signature(&moved, &rw, &cfg).unwrap(),
            &cfg,
        );
        let eps = cosine(
            &embed_phrase(cfg.embedder.as_ref(), "London").unwrap(),
            &embed_phrase(cfg.embedder.as_ref(), &city).unwrap(),
        )
        .max(0.0)
            / 4.0;
        prop_assert!((s - (0.75 + eps)).abs() < 1e-9);
        prop_assert!(s < 0.9);
    }

    #[test]
    fn merge_invariants(fa in facts(), fb in facts(), ra in 0u64..3, rb in 0u64..3) {
        let (mut a, mut b) = (canonical(&fa), canonical(&fb));
        a.graph.revision = ra;
        b.graph.revision = rb;
        // same entity label means same canonical id
        let pairs: Vec<_> = a
            .graph
            .nodes_of_kind(NodeKind::Continuant)
            .filter(|n| b.graph.contains(&n.id))
            .map(|n| (n.id.clone(), n.id.clone()))
            .collect();
        let policy = MergePolicy::from_schema(&a.schema.union(&b.schema));
        let (m, report) = merge(&a, &b, &pairs, &policy).unwrap();
        prop_assert!(m.validate().is_empty());
        prop_assert_eq!(report.merged, pairs.len());

        // union bound
        let b_edges: BTreeSet<_> = b
            .graph
            .edges()
            .filter_map(|e| {
                let s = report.node_map.get(&e.subject)?;
                let o = report.node_map.get(&e.object)?;
                Some(gkg::Edge::new(s.clone(), e.relation, o.clone()))
            })
            .collect();
        for e in m.graph.edges() {
            prop_assert!(a.graph.has_edge(e) || b_edges.contains(e), "invented edge {}", e);
        }
        let mapped: BTreeSet<_> = report.node_map.values().collect();
        for n in m.graph.nodes() {
            prop_assert!(a.graph.contains(&n.id) || mapped.contains(&n.id), "invented node {}", n.id);
        }

        // update soundness
        let conflicted: BTreeSet<_> = report.conflicts.iter().map(|c| (c.bearer.clone(), c.attr_type.clone())).collect();
        for ev in m.graph.nodes_of_kind(NodeKind::Occurrent) {
            let ty = ev.inst_of.clone().unwrap();
            for attr in m.graph.attributes_of(&ev.id) {
                let at = m.graph.node(attr).unwrap().inst_of.clone().unwrap();
                if policy.attr_decls.get(&(ty.clone(), at.clone())) == Some(&gkg::schema::AttrArity::Functional)
                    && !conflicted.contains(&(ev.id.clone(), at.clone()))
                {
                    prop_assert_eq!(m.graph.values_of(attr).len(), 1);
                }
            }
        }
        for u in &report.updated {
            prop_assert_eq!(u.winner_revision, ra.max(rb));
        }
        if ra == rb {
            prop_assert!(report.updated.is_empty());
        }
    }

    #[test]
    fn self_merge_is_identity(f in facts()) {
        let a = canonical(&f);
        let pairs: Vec<_> = a
            .graph
            .nodes_of_kind(NodeKind::Continuant)
            .map(|n| (n.id.clone(), n.id.clone()))
            .collect();
        let (m, report) = merge(&a, &a, &pairs, &MergePolicy::from_schema(&a.schema)).unwrap();
        prop_assert_eq!(serialize_gkg(&m), serialize_gkg(&a));
        prop_assert_eq!(report.added_nodes + report.added_edges, 0);
        prop_assert!(report.updated.is_empty() && report.conflicts.is_empty());
    }

    #[test]
    fn rendering_preserves_structure(seed in any::<u64>()) {
        let doc = random_document(seed);
        let langs = ["en", "fr", "ar", "de", "zh-Hans", "xx"];
        let views: Vec<_> = langs.iter().map(|l| render(&doc.graph, &doc.labels, l, &doc.labels)).collect();
        for v in &views[1..] {
            prop_assert!(check_isomorphic(&views[0], v).isomorphic);
        }
        // stripping labels changes neither validation nor structure
        let mut bare = doc.clone();
        bare.labels = Default::default();
        prop_assert_eq!(bare.validate(), doc.validate());
        prop_assert!(check_isomorphic(&views[0], &render(&bare.graph, &bare.labels, "en", &bare.labels)).isomorphic);
    }
}
