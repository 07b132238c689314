//! Subtype DAG over type nodes with a single designated root.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::NodeId;

/// Identifier of the designated root type.
pub const ROOT_TYPE: &str = "core:Entity";

pub fn root_type() -> NodeId {
    NodeId::new(ROOT_TYPE).expect("root id is well formed")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("duplicate type `{0}`")]
    DuplicateType(NodeId),
    #[error("unknown parent type `{parent}` for `{child}`")]
    UnknownParent { child: NodeId, parent: NodeId },
    #[error("unknown type `{0}`")]
    UnknownType(NodeId),
    #[error("adding `{child}` isA `{parent}` would form a cycle")]
    CycleWouldForm { child: NodeId, parent: NodeId },
    #[error("the root type `{0}` cannot have a parent")]
    RootHasParent(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeHierarchy {
    parents: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl TypeHierarchy {
    /// An empty hierarchy, not even containing the root.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_root() -> Self {
        let mut h = Self::new();
        h.parents.insert(root_type(), BTreeSet::new());
        h
    }

    pub fn contains(&self, t: &NodeId) -> bool {
        self.parents.contains_key(t)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn types(&self) -> impl Iterator<Item = &NodeId> {
        self.parents.keys()
    }

    pub fn parents(&self, t: &NodeId) -> Option<&BTreeSet<NodeId>> {
        self.parents.get(t)
    }

    /// Adds `t` under `parent` (or under the root when `parent` is `None`).
    /// Adding the root itself takes no parent.
    pub fn add_type(&mut self, t: NodeId, parent: Option<NodeId>) -> Result<(), HierarchyError> {
        if self.contains(&t) {
            return Err(HierarchyError::DuplicateType(t));
        }
        let root = root_type();
        if t == root {
            if let Some(p) = parent {
                return Err(HierarchyError::RootHasParent(p));
            }
            self.parents.insert(t, BTreeSet::new());
            return Ok(());
        }
        let parent = parent.unwrap_or(root);
        if !self.contains(&parent) {
            return Err(HierarchyError::UnknownParent { child: t, parent });
        }
        self.parents.insert(t, BTreeSet::from([parent]));
        Ok(())
    }

    /// Adds an extra isA edge between two existing types.
    pub fn add_parent(&mut self, t: &NodeId, parent: &NodeId) -> Result<(), HierarchyError> {
        if !self.contains(t) {
            return Err(HierarchyError::UnknownType(t.clone()));
        }
        if !self.contains(parent) {
            return Err(HierarchyError::UnknownParent { child: t.clone(), parent: parent.clone() });
        }
        if t.as_str() == ROOT_TYPE {
            return Err(HierarchyError::RootHasParent(parent.clone()));
        }
        if self.reaches(parent, t) {
            return Err(HierarchyError::CycleWouldForm { child: t.clone(), parent: parent.clone() });
        }
        self.parents.get_mut(t).expect("checked").insert(parent.clone());
        Ok(())
    }

    /// Batch-loads `(type, parent)` declarations in any order. A `None`
    /// parent means "directly under the root"; the root is always present
    /// in the result.
    pub fn from_declarations<I>(decls: I) -> Result<Self, HierarchyError>
    where
        I: IntoIterator<Item = (NodeId, Option<NodeId>)>,
    {
        let root = root_type();
        let mut parents: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        parents.insert(root.clone(), BTreeSet::new());
        let mut seen: BTreeSet<(NodeId, Option<NodeId>)> = BTreeSet::new();
        let mut root_declared = false;

        for (t, p) in decls {
            if !seen.insert((t.clone(), p.clone())) {
                return Err(HierarchyError::DuplicateType(t));
            }
            if t == root {
                if let Some(p) = p {
                    return Err(HierarchyError::RootHasParent(p));
                }
                if root_declared {
                    return Err(HierarchyError::DuplicateType(t));
                }
                root_declared = true;
                continue;
            }
            parents.entry(t).or_default().insert(p.unwrap_or_else(|| root.clone()));
        }

        for (child, ps) in &parents {
            if let Some(missing) = ps.iter().find(|p| !parents.contains_key(*p)) {
                return Err(HierarchyError::UnknownParent { child: child.clone(), parent: missing.clone() });
            }
        }

        let h = TypeHierarchy { parents };
        if let Some((child, parent)) = h.find_cycle() {
            return Err(HierarchyError::CycleWouldForm { child, parent });
        }
        Ok(h)
    }

    /// Returns an isA edge lying on a cycle, if any.
    fn find_cycle(&self) -> Option<(NodeId, NodeId)> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        let mut marks: BTreeMap<&NodeId, Mark> = BTreeMap::new();
        for start in self.parents.keys() {
            if marks.contains_key(start) {
                continue;
            }
            // iterative DFS: (node, remaining parents)
            let mut stack: Vec<(&NodeId, Vec<&NodeId>)> = vec![(start, self.parents[start].iter().collect())];
            marks.insert(start, Mark::Active);
            while let Some((node, pending)) = stack.last_mut() {
                let node = *node;
                match pending.pop() {
                    Some(p) => match marks.get(p) {
                        Some(Mark::Active) => return Some((node.clone(), p.clone())),
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(p, Mark::Active);
                            let next = self.parents.get(p).map(|s| s.iter().collect()).unwrap_or_default();
                            stack.push((p, next));
                        }
                    },
                    None => {
                        marks.insert(node, Mark::Done);
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    fn reaches(&self, from: &NodeId, to: &NodeId) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(t) = stack.pop() {
            if t == to {
                return true;
            }
            if !seen.insert(t) {
                continue;
            }
            if let Some(ps) = self.parents.get(t) {
                stack.extend(ps.iter());
            }
        }
        false
    }

    /// Reflexive-transitive subtype test.
    pub fn is_subtype(&self, a: &NodeId, b: &NodeId) -> Result<bool, HierarchyError> {
        for t in [a, b] {
            if !self.contains(t) {
                return Err(HierarchyError::UnknownType(t.clone()));
            }
        }
        Ok(self.reaches(a, b))
    }

    /// `t` and all of its ancestors, sorted.
    pub fn ancestors(&self, t: &NodeId) -> Result<BTreeSet<NodeId>, HierarchyError> {
        if !self.contains(t) {
            return Err(HierarchyError::UnknownType(t.clone()));
        }
        let mut out = BTreeSet::new();
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            if out.insert(x.clone()) {
                stack.extend(self.parents[x].iter());
            }
        }
        Ok(out)
    }

    /// Whether either type subsumes the other.
    pub fn comparable(&self, a: &NodeId, b: &NodeId) -> bool {
        self.contains(a) && self.contains(b) && (self.reaches(a, b) || self.reaches(b, a))
    }

    /// Union of two hierarchies (types and isA edges).
    pub fn union(&self, other: &TypeHierarchy) -> Result<TypeHierarchy, HierarchyError> {
        let decls = self.edges().chain(other.edges()).collect::<BTreeSet<_>>();
        TypeHierarchy::from_declarations(decls)
    }

    /// All declarations as `(type, parent)`; the root yields `(root, None)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, Option<NodeId>)> + '_ {
        self.parents.iter().flat_map(|(t, ps)| {
            if ps.is_empty() {
                vec![(t.clone(), None)]
            } else {
                ps.iter().map(|p| (t.clone(), Some(p.clone()))).collect()
            }
        })
    }

    /// Adds `t` under the root if it is not already present.
    pub fn ensure_type(&mut self, t: &NodeId) {
        if !self.contains(t) {
            if self.is_empty() && t.as_str() != ROOT_TYPE {
                self.parents.insert(root_type(), BTreeSet::new());
            }
            let _ = self.add_type(t.clone(), None);
        }
    }
}
