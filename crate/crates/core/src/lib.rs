//! Toolkit for ontologically grounded, language-agnostic knowledge graphs.
//!
//! Abstractions such as events and property instances are reified as typed
//! nodes; the only edge labels are the thirteen [`PrimitiveRelation`]s.
//! The crate builds and validates such graphs, canonicalizes ad-hoc flat
//! triples into them, aligns and merges graphs from different sources, and
//! renders them in any language without changing their structure.

pub mod align;
pub mod canon;
pub mod embedding;
pub mod eval;
pub mod format;
pub mod hash;
pub mod hierarchy;
pub mod merge;
pub mod model;
pub mod multilingual;
pub mod roles;
pub mod schema;

pub use align::{align, AlignmentConfig, AlignmentResult};
pub use canon::{normalize_relation_name, CanonReport, Canonicalizer, ObjectSlot, ReificationRule};
pub use embedding::{cosine, embed_flat_triple, embed_phrase, tokenize, TokenEmbedder, Vector};
pub use format::{parse_flat, parse_gkg, parse_rules, serialize_gkg, FlatTriple, GkgDocument, RuleSet};
pub use hierarchy::{TypeHierarchy, ROOT_TYPE};
pub use merge::{merge, MergePolicy, MergeReport};
pub use model::{validate_graph, Edge, GroundedGraph, Node, NodeId, NodeKind, PrimitiveRelation, ValidationReport};
pub use multilingual::{check_isomorphic, render, LabelTable, LabeledView};
pub use roles::{infer_role_labels, RoleConceptDef};
pub use schema::Schema;
