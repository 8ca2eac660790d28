use serde::{Deserialize, Serialize};

use crate::components::ComponentSet;

/// A search-tree node kept as the ordered list of its edge labels together
/// with the conflict that labelled each ancestor (`cs[i]` is the label of
/// the node that `edges[i]` leaves from).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynNode {
    pub id: u64,
    pub edges: Vec<usize>,
    pub cs: Vec<ComponentSet>,
}

impl DynNode {
    pub fn root(id: u64) -> Self {
        DynNode {
            id,
            edges: Vec::new(),
            cs: Vec::new(),
        }
    }

    pub fn child(&self, id: u64, e: usize, label: ComponentSet) -> Self {
        let mut edges = self.edges.clone();
        edges.push(e);
        let mut cs = self.cs.clone();
        cs.push(label);
        DynNode { id, edges, cs }
    }

    /// The edge labels as a set.
    pub fn set(&self) -> ComponentSet {
        self.edges.iter().copied().collect()
    }

    /// First position at which `x` witnesses redundancy: `cs[j] ⊃ x` while
    /// `edges[j]` lies outside `x`.
    pub fn redundancy_position(&self, x: ComponentSet) -> Option<usize> {
        self.cs
            .iter()
            .zip(&self.edges)
            .position(|(c, &e)| c.is_proper_superset(x) && !x.contains(e))
    }

    /// Replaces every label that strictly contains `x` by `x`. Only valid
    /// when `x` does not witness redundancy of this node.
    pub fn relabel(&mut self, x: ComponentSet) -> bool {
        let mut changed = false;
        for c in &mut self.cs {
            if c.is_proper_superset(x) {
                *c = x;
                changed = true;
            }
        }
        changed
    }

    /// Structural invariants: parallel lists, each edge inside its label,
    /// each label disjoint from earlier edges.
    pub fn check(&self) -> Result<(), String> {
        if self.cs.len() != self.edges.len() {
            return Err(format!(
                "node {}: {} edges but {} labels",
                self.id,
                self.edges.len(),
                self.cs.len()
            ));
        }
        let mut before = ComponentSet::EMPTY;
        for (i, (&e, &c)) in self.edges.iter().zip(&self.cs).enumerate() {
            if !c.contains(e) {
                return Err(format!(
                    "node {}: edge {e} at position {i} not in its label {}",
                    self.id,
                    c.as_conflict()
                ));
            }
            if !c.is_disjoint(before) {
                return Err(format!(
                    "node {}: label {} at position {i} meets an earlier edge",
                    self.id,
                    c.as_conflict()
                ));
            }
            if before.contains(e) {
                return Err(format!("node {}: edge {e} repeated", self.id));
            }
            before.insert(e);
        }
        Ok(())
    }
}
