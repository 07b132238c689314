//! Reification-rule files.
//!
//! Besides `RULE` lines a rule file may carry the same `T`, `ESSENTIAL`,
//! `CARD`, `ATTRDECL` and `ROLE` declarations as a GKG document, and
//! `ENTITY <typeId> <label…>` lines assigning types to flat-triple entities.
//!
//! ```text
//! RULE bornIn EVENT ont:Birth SUBJ participantIn OBJ ATTR ont:Location ont:City
//! RULE memberOf EVENT ont:Membership SUBJ hasAgent OBJ PARTICIPANT hasObject
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use super::gkg::{node_id, DeclCollector};
use super::{content_lines, split_fields, GkgError};
use crate::canon::{relation_key, ObjectSlot, ReificationRule};
use crate::hierarchy::TypeHierarchy;
use crate::model::{NodeId, RoleRelation};
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate rule for relation `{rel}`")]
    DuplicateRule { line: usize, rel: String },
    #[error("line {line}: unknown role `{role}` (expected participantIn, hasAgent or hasObject)")]
    UnknownRole { line: usize, role: String },
}

impl From<GkgError> for RuleError {
    fn from(e: GkgError) -> Self {
        match e {
            GkgError::Syntax { line, message } => RuleError::Syntax { line, message },
            GkgError::ValidationFailed(r) => RuleError::Syntax { line: 0, message: r.to_string() },
        }
    }
}

/// Everything a rule file declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<ReificationRule>,
    pub hierarchy: TypeHierarchy,
    pub schema: Schema,
    pub entity_types: BTreeMap<String, NodeId>,
}

impl RuleSet {
    /// The declared hierarchy extended with every type the rules, entity
    /// assignments and schema mention but do not declare (placed under the
    /// root).
    pub fn closed_hierarchy(&self) -> TypeHierarchy {
        let mut h = self.hierarchy.clone();
        for r in &self.rules {
            h.ensure_type(&r.event_type);
            if let ObjectSlot::Attr { attr_type, value_type } = &r.object_slot {
                h.ensure_type(attr_type);
                h.ensure_type(value_type);
            }
        }
        for t in self.entity_types.values() {
            h.ensure_type(t);
        }
        for v in self.schema.check_types(&h) {
            if let crate::model::Violation::UnknownDeclaredType { target, .. } = v {
                h.ensure_type(&target);
            }
        }
        h
    }
}

pub fn parse_rules(text: &str) -> Result<RuleSet, RuleError> {
    let mut decls = DeclCollector::default();
    let mut rules: Vec<ReificationRule> = Vec::new();
    let mut keys: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    let mut entity_types = BTreeMap::new();

    for (lineno, line) in content_lines(text) {
        if decls.accept(lineno, line)? {
            continue;
        }
        let syntax = |m: &str| RuleError::Syntax { line: lineno, message: m.to_string() };
        let (head, _) = split_fields(line, 1);
        match head.first().copied() {
            Some("RULE") => {
                let rule = parse_rule_line(lineno, line)?;
                let key = relation_key(&rule.rel_name);
                if key.is_empty() {
                    return Err(syntax("relation name has no tokens"));
                }
                if keys.insert(key, lineno).is_some() {
                    return Err(RuleError::DuplicateRule { line: lineno, rel: rule.rel_name });
                }
                rules.push(rule);
            }
            Some("ENTITY") => {
                let (f, label) = split_fields(line, 2);
                let Some(label) = label.filter(|_| f.len() == 2) else {
                    return Err(syntax("expected ENTITY <typeId> <label>"));
                };
                let t = node_id(lineno, f[1])?;
                if entity_types.insert(label.to_string(), t).is_some() {
                    return Err(syntax("duplicate ENTITY label"));
                }
            }
            Some(other) => {
                return Err(RuleError::Syntax { line: lineno, message: format!("unknown record `{other}`") })
            }
            None => unreachable!("content lines are non-blank"),
        }
    }

    let hierarchy = decls.hierarchy()?;
    Ok(RuleSet { rules, hierarchy, schema: decls.schema, entity_types })
}

fn parse_rule_line(lineno: usize, line: &str) -> Result<ReificationRule, RuleError> {
    let (f, rest) = split_fields(line, 10);
    let syntax = |m: &str| RuleError::Syntax { line: lineno, message: m.to_string() };
    let usage = "expected RULE <rel> EVENT <type> SUBJ <role> OBJ (ATTR <attrType> <valueType> | PARTICIPANT <role>)";
    if rest.is_some() || f.len() < 9 || f[2] != "EVENT" || f[4] != "SUBJ" || f[6] != "OBJ" {
        return Err(syntax(usage));
    }
    let role =
        |s: &str| s.parse::<RoleRelation>().map_err(|_| RuleError::UnknownRole { line: lineno, role: s.to_string() });
    let event_type = node_id(lineno, f[3])?;
    let subject_role = role(f[5])?;
    let object_slot = match (f[7], f.len()) {
        ("ATTR", 10) => ObjectSlot::Attr { attr_type: node_id(lineno, f[8])?, value_type: node_id(lineno, f[9])? },
        ("PARTICIPANT", 9) => ObjectSlot::Participant(role(f[8])?),
        _ => return Err(syntax(usage)),
    };
    Ok(ReificationRule { rel_name: f[1].to_string(), event_type, subject_role, object_slot })
}
