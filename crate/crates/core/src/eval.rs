//! Flat-triple versus grounded-graph similarity experiments.
//!
//! The flat experiment draws random token suites shaped like
//!
//! ```text
//! t1 = <E, R1, L1>   t2 = <E, R2, L1>
//! t3 = <E, R1, L2>   t4 = <E, R2, L2>
//! ```
//!
//! and compares the *rename-relation* pairs (t1,t2), (t3,t4) with the
//! *change-fact* pairs (t1,t3), (t2,t4). Under summed embeddings both
//! share two of three phrases, so the bands coincide. The grounded
//! experiment scores the worked Roger Waters graph against mutants.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::align::{align, entity_signature, signature_similarity, AlignmentConfig};
use crate::embedding::{cosine, embed_flat_triple, HashEmbedder};
use crate::format::{parse_gkg, FlatTriple, GkgDocument};
use crate::hash::SplitMix64;
use crate::model::NodeId;

/// Index pairs (0-based) of the six cross comparisons, in report order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
const RENAME_PAIRS: [usize; 2] = [0, 5];
const CHANGE_PAIRS: [usize; 2] = [1, 4];

/// Values printed alongside the flat report; obtained with an unnamed
/// embedding model and not reproducible with the hash provider.
pub const REFERENCE_COSINES: [f64; 6] = [0.8853, 0.9298, 0.7989, 0.8219, 0.9204, 0.8849];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Stats {
    pub fn of(samples: &[f64]) -> Stats {
        let n = samples.len();
        if n == 0 {
            return Stats { mean: 0.0, sd: 0.0, n };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        Stats { mean, sd: var.sqrt(), n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatEval {
    pub seed: u64,
    pub dim: usize,
    pub trials: usize,
    /// Per-pair statistics, aligned with [`PAIRS`].
    pub pairs: [Stats; 6],
    pub rename_band: Stats,
    pub change_band: Stats,
}

impl FlatEval {
    pub fn delta(&self) -> f64 {
        (self.rename_band.mean - self.change_band.mean).abs()
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# flat seed={} dim={} trials={}", self.seed, self.dim, self.trials);
        out.push_str("pair\tmean\tsd\n");
        for ((i, j), s) in PAIRS.iter().zip(&self.pairs) {
            let _ = writeln!(out, "e{},e{}\t{:.4}\t{:.4}", i + 1, j + 1, s.mean, s.sd);
        }
        out.push_str("band\tpairs\tmean\tsd\n");
        let _ = writeln!(out, "rename-relation\te1,e2;e3,e4\t{:.4}\t{:.4}", self.rename_band.mean, self.rename_band.sd);
        let _ = writeln!(out, "change-fact\te1,e3;e2,e4\t{:.4}\t{:.4}", self.change_band.mean, self.change_band.sd);
        let _ = writeln!(out, "delta\t{:.4}", self.delta());
        out.push_str("# reference values from a different embedding model (not reproducible here):");
        for ((i, j), v) in PAIRS.iter().zip(REFERENCE_COSINES) {
            let _ = write!(out, " e{},e{}={v:.4}", i + 1, j + 1);
        }
        out.push('\n');
        out
    }
}

fn random_token(rng: &mut SplitMix64) -> String {
    (0..10).map(|_| char::from(b'a' + rng.below(26) as u8)).collect()
}

/// Draws one suite of four triples with five distinct single-token phrases.
pub fn random_suite(rng: &mut SplitMix64) -> [FlatTriple; 4] {
    let mut tokens: Vec<String> = Vec::with_capacity(5);
    while tokens.len() < 5 {
        let t = random_token(rng);
        if !tokens.contains(&t) {
            tokens.push(t);
        }
    }
    let [e, r1, r2, l1, l2] = [0, 1, 2, 3, 4].map(|i| tokens[i].as_str());
    [FlatTriple::new(e, r1, l1), FlatTriple::new(e, r2, l1), FlatTriple::new(e, r1, l2), FlatTriple::new(e, r2, l2)]
}

/// Panics if `trials` is zero.
pub fn run_eval_flat(seed: u64, dim: usize, trials: usize) -> FlatEval {
    assert!(trials >= 1, "at least one trial is required");
    let embedder = HashEmbedder::new(seed, dim);
    let mut rng = SplitMix64::new(seed);
    let mut samples: [Vec<f64>; 6] = Default::default();
    for _ in 0..trials {
        let suite = random_suite(&mut rng);
        let v = suite.each_ref().map(|t| embed_flat_triple(&embedder, t).expect("generated tokens are non-empty"));
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            samples[k].push(cosine(&v[i], &v[j]));
        }
    }
    let band = |idx: [usize; 2]| {
        let all: Vec<f64> = idx.iter().flat_map(|&k| samples[k].iter().copied()).collect();
        Stats::of(&all)
    };
    FlatEval {
        seed,
        dim,
        trials,
        pairs: samples.each_ref().map(|s| Stats::of(s)),
        rename_band: band(RENAME_PAIRS),
        change_band: band(CHANGE_PAIRS),
    }
}

const WORKED_TYPES: &str = "\
T core:Human -
T ont:Birth -
T ont:Time -
T ont:Location -
T ont:Date -
T ont:City -
ESSENTIAL ont:Birth
CARD ont:Birth ONE
ATTRDECL ont:Birth ont:Time FUNCTIONAL
ATTRDECL ont:Birth ont:Location FUNCTIONAL
";

/// The worked example: a Human participating in a Birth with a Time and a
/// Location, labelled in English, French and Arabic.
pub fn worked_example_text(name: &str, city: &str) -> String {
    format!(
        "{WORKED_TYPES}\
N ex:rw C core:Human
N ex:birth O ont:Birth
N ex:time A ont:Time
N ex:loc A ont:Location
N ex:date V ont:Date 1943-09-06
N ex:city V ont:City {city}
E ex:birth participantIn ex:rw
E ex:time hasProp ex:birth
E ex:loc hasProp ex:birth
E ex:time hasValue ex:date
E ex:loc hasValue ex:city
L ex:rw en {name}
L ex:rw fr {name}
L ex:rw ar روجر ووترز
L core:Human en Human
L core:Human fr Humain
L core:Human ar إنسان
L ont:Birth en Birth
L ont:Birth fr Naissance
L ont:Birth ar ولادة
L ont:City en City
L ont:City fr Ville
L ont:City ar مدينة
L ex:city fr Londres
L ex:city ar لندن
L rel:participantIn en participant in
L rel:participantIn fr participe à
L rel:participantIn ar يشارك في
"
    )
}

pub fn worked_example() -> GkgDocument {
    parse_gkg(&worked_example_text("Roger Waters", "London")).expect("worked example is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundedRow {
    pub mutant: &'static str,
    pub score: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundedEval {
    pub seed: u64,
    pub dim: usize,
    pub threshold: f64,
    pub rows: Vec<GroundedRow>,
}

impl GroundedEval {
    pub fn row(&self, mutant: &str) -> Option<&GroundedRow> {
        self.rows.iter().find(|r| r.mutant == mutant)
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# grounded seed={} dim={} threshold={}", self.seed, self.dim, self.threshold);
        out.push_str("mutant\tscore\tdecision\n");
        for r in &self.rows {
            let decision = if r.matched { "MATCH" } else { "NO MATCH" };
            let _ = writeln!(out, "{}\t{:.4}\t{decision}", r.mutant, r.score);
        }
        out
    }
}

/// Relabels every non-pivot language without touching structure or ids.
fn gloss_only_mutant() -> GkgDocument {
    let mut doc = worked_example();
    let mut labels = crate::multilingual::LabelTable::new();
    for (node, lang, label) in doc.labels.iter() {
        let text = if lang == "en" { label.to_string() } else { format!("{label} ({lang})") };
        labels.set(node.clone(), lang, &text).expect("suffixing keeps labels valid");
    }
    labels
        .set(crate::multilingual::relation_gloss_id(crate::model::PrimitiveRelation::HasProp), "fr", "a pour propriété")
        .expect("valid gloss");
    doc.labels = labels;
    doc
}

pub fn run_eval_grounded(seed: u64, dim: usize) -> GroundedEval {
    let cfg = AlignmentConfig::new(Arc::new(HashEmbedder::new(seed, dim)));
    let base = worked_example();
    let rw = NodeId::new("ex:rw").expect("valid id");
    let mutants: [(&'static str, GkgDocument); 3] = [
        ("renamed-entity", parse_gkg(&worked_example_text("George Roger Waters", "London")).expect("valid mutant")),
        ("changed-location", parse_gkg(&worked_example_text("Roger Waters", "Chelsea")).expect("valid mutant")),
        ("gloss-only", gloss_only_mutant()),
    ];
    let sig = entity_signature(&base, &rw, &cfg).expect("ex:rw is a continuant");
    let rows = mutants
        .iter()
        .map(|(name, doc)| {
            let other = entity_signature(doc, &rw, &cfg).expect("ex:rw is a continuant");
            let score = signature_similarity(&sig, &other, &cfg);
            let result = align(&base, doc, &cfg).expect("default configuration is valid");
            let matched = result.matches.iter().any(|m| m.a == rw && m.b == rw);
            GroundedRow { mutant: name, score, matched }
        })
        .collect();
    GroundedEval { seed, dim, threshold: cfg.threshold, rows }
}
