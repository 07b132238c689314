//! Role concepts: labels such as "Teacher" that an entity earns by
//! participating in an occurrent, as opposed to types it instantiates.

use std::collections::BTreeSet;

use crate::hierarchy::{HierarchyError, TypeHierarchy};
use crate::model::{GroundedGraph, NodeId, NodeKind, RoleRelation};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RoleConceptDef {
    pub role_name: String,
    pub base_type: NodeId,
    pub via: RoleRelation,
    pub occurrent_type: NodeId,
}

/// Emits `(x, role)` whenever `x` instantiates a subtype of the role's base
/// type and some occurrent of the role's event type links to `x` through
/// the role's relation. Sorted by entity, then role name.
pub fn infer_role_labels(
    g: &GroundedGraph,
    h: &TypeHierarchy,
    defs: &[RoleConceptDef],
) -> Result<BTreeSet<(NodeId, String)>, HierarchyError> {
    for def in defs {
        for t in [&def.base_type, &def.occurrent_type] {
            if !h.contains(t) {
                return Err(HierarchyError::UnknownType(t.clone()));
            }
        }
    }

    let mut out = BTreeSet::new();
    for edge in g.edges() {
        let Some(role_rel) = RoleRelation::from_relation(edge.relation) else {
            continue;
        };
        let (Some(occ), Some(ent)) = (g.node(&edge.subject), g.node(&edge.object)) else {
            continue;
        };
        if occ.kind != NodeKind::Occurrent {
            continue;
        }
        let (Some(occ_type), Some(ent_type)) = (&occ.inst_of, &ent.inst_of) else {
            continue;
        };
        for def in defs.iter().filter(|d| d.via == role_rel) {
            let fits = h.is_subtype(ent_type, &def.base_type).unwrap_or(false)
                && h.is_subtype(occ_type, &def.occurrent_type).unwrap_or(false);
            if fits {
                out.insert((ent.id.clone(), def.role_name.clone()));
            }
        }
    }
    Ok(out)
}
