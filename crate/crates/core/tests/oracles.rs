//! Analytic similarity values under mutually orthonormal token vectors.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::nid;
use gkg::align::{align, entity_signature, signature_similarity, AlignmentConfig};
use gkg::embedding::{cosine, embed_flat_triple, tokenize, BasisEmbedder};
use gkg::eval::worked_example_text;
use gkg::format::{parse_gkg, FlatTriple};

const VOCAB: [&str; 9] = ["roger", "waters", "george", "human", "entity", "1943", "09", "06", "london"];

fn cfg() -> AlignmentConfig {
    AlignmentConfig::new(Arc::new(BasisEmbedder::new(VOCAB.iter().copied().chain(["chelsea"]))))
}

/// Cosine of two bag-of-distinct-tokens sums of orthonormal vectors.
fn overlap_cosine(a: &str, b: &str) -> f64 {
    let ta: BTreeSet<String> = tokenize(a).into_iter().collect();
    let tb: BTreeSet<String> = tokenize(b).into_iter().collect();
    ta.intersection(&tb).count() as f64 / ((ta.len() * tb.len()) as f64).sqrt()
}

fn score(name: &str, city: &str) -> (f64, bool) {
    let cfg = cfg();
    let base = parse_gkg(&worked_example_text("Roger Waters", "London")).unwrap();
    let other = parse_gkg(&worked_example_text(name, city)).unwrap();
    let rw = nid("ex:rw");
    let s = signature_similarity(
        &entity_signature(&base, &rw, &cfg).unwrap(),
        &entity_signature(&other, &rw, &cfg).unwrap(),
        &cfg,
    );
    let matched = align(&base, &other, &cfg).unwrap().match_pairs() == vec![(rw.clone(), rw)];
    (s, matched)
}

#[test]
fn renamed_entity_scores_analytic_value() {
    // four slots: name, type, Birth/Time, Birth/Location
    let name = overlap_cosine("Roger Waters", "George Roger Waters");
    assert!((name - 2.0 / 6f64.sqrt()).abs() < 1e-12);
    let expected = (name + 3.0) / 4.0;
    let (s, matched) = score("George Roger Waters", "London");
    assert!((s - expected).abs() < 1e-12, "{s} vs {expected}");
    assert!((s - 0.954).abs() < 5e-4);
    assert!(matched);
}

#[test]
fn changed_location_scores_three_quarters() {
    let (s, matched) = score("Roger Waters", "Chelsea");
    assert!((s - 0.75).abs() < 1e-12);
    assert!(!matched);
}

#[test]
fn flat_triples_sharing_two_phrases() {
    let p = BasisEmbedder::new(["roger", "waters", "lives", "in", "london", "chelsea", "place", "of", "residence"]);
    let t = |r: &str, l: &str| embed_flat_triple(&p, &FlatTriple::new("RogerWaters", r, l)).unwrap();
    let (e1, e2, e3, e4) = (
        t("LivesIn", "London"),
        t("PlaceOfResidence", "London"),
        t("LivesIn", "Chelsea"),
        t("PlaceOfResidence", "Chelsea"),
    );
    // normalized phrase vectors a (subject), b (relation), c (object) mutually
    // orthogonal: cos = shared / 3
    for (x, y, shared) in
        [(&e1, &e2, 2.0), (&e1, &e3, 2.0), (&e2, &e4, 2.0), (&e3, &e4, 2.0), (&e1, &e4, 1.0), (&e2, &e3, 1.0)]
    {
        assert!((cosine(x, y) - shared / 3.0).abs() < 1e-12);
    }
}
