//! Schema annotations carried alongside a graph: essential event types,
//! event cardinality, attribute arity and role-concept definitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::hierarchy::TypeHierarchy;
use crate::model::{NodeId, Violation};
use crate::roles::RoleConceptDef;

/// Whether flat triples about the same subject share one event node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Cardinality {
    #[default]
    One,
    Many,
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cardinality::One => "ONE",
            Cardinality::Many => "MANY",
        })
    }
}

impl FromStr for Cardinality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ONE" => Ok(Cardinality::One),
            "MANY" => Ok(Cardinality::Many),
            other => Err(format!("expected ONE or MANY, got `{other}`")),
        }
    }
}

/// Whether an attribute slot admits one current value or several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum AttrArity {
    Functional,
    #[default]
    Multi,
}

impl fmt::Display for AttrArity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrArity::Functional => "FUNCTIONAL",
            AttrArity::Multi => "MULTI",
        })
    }
}

impl FromStr for AttrArity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FUNCTIONAL" => Ok(AttrArity::Functional),
            "MULTI" => Ok(AttrArity::Multi),
            other => Err(format!("expected FUNCTIONAL or MULTI, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    pub essential: BTreeSet<NodeId>,
    pub cardinality: BTreeMap<NodeId, Cardinality>,
    pub attr_decls: BTreeMap<(NodeId, NodeId), AttrArity>,
    pub roles: BTreeMap<String, RoleConceptDef>,
}

impl Schema {
    pub fn cardinality_of(&self, event_type: &NodeId) -> Cardinality {
        self.cardinality.get(event_type).copied().unwrap_or_default()
    }

    pub fn arity_of(&self, bearer_type: &NodeId, attr_type: &NodeId) -> AttrArity {
        self.attr_decls.get(&(bearer_type.clone(), attr_type.clone())).copied().unwrap_or_default()
    }

    pub fn role_defs(&self) -> Vec<RoleConceptDef> {
        self.roles.values().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.essential.is_empty() && self.cardinality.is_empty() && self.attr_decls.is_empty() && self.roles.is_empty()
    }

    /// Declarations whose type references are missing from `h`.
    pub fn check_types(&self, h: &TypeHierarchy) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |decl: &str, t: &NodeId| {
            if !h.contains(t) {
                out.push(Violation::UnknownDeclaredType { declaration: decl.to_string(), target: t.clone() });
            }
        };
        for t in &self.essential {
            check("ESSENTIAL", t);
        }
        for t in self.cardinality.keys() {
            check("CARD", t);
        }
        for (e, a) in self.attr_decls.keys() {
            check("ATTRDECL", e);
            check("ATTRDECL", a);
        }
        for def in self.roles.values() {
            check("ROLE", &def.base_type);
            check("ROLE", &def.occurrent_type);
        }
        out
    }

    /// Union of two schemas; entries from `self` win on disagreement.
    pub fn union(&self, other: &Schema) -> Schema {
        let mut out = other.clone();
        out.essential.extend(self.essential.iter().cloned());
        out.cardinality.extend(self.cardinality.iter().map(|(k, v)| (k.clone(), *v)));
        out.attr_decls.extend(self.attr_decls.iter().map(|(k, v)| (k.clone(), *v)));
        out.roles.extend(self.roles.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }
}
