use serde::{Deserialize, Serialize};

use super::node::DynNode;
use crate::components::ComponentSet;
use crate::rank::{RankedQueue, Ranking};

/// Everything the stateful search keeps between invocations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchState {
    /// Open nodes, best first. Never holds two nodes with equal sets.
    pub queue: RankedQueue<DynNode>,
    /// Nodes generated while a set-equal node was open, by ascending size.
    pub duplicates: Vec<DynNode>,
    /// Nodes found to be non-minimal diagnoses.
    pub supersets: Vec<DynNode>,
    /// Conflicts available for reuse, in insertion order.
    pub conflicts: Vec<ComponentSet>,
    next_id: u64,
    next_seq: u64,
}

impl Default for SearchState {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchState {
    /// A tree consisting of the unlabelled root.
    pub fn new() -> Self {
        SearchState {
            queue: RankedQueue::new(),
            duplicates: Vec::new(),
            supersets: Vec::new(),
            conflicts: Vec::new(),
            next_id: 1,
            next_seq: 0,
        }
        .with_root()
    }

    fn with_root(mut self) -> Self {
        let root = DynNode::root(0);
        self.queue.insert(
            crate::rank::NodeKey {
                rank: 0.0,
                set: ComponentSet::EMPTY,
                seq: 0,
            },
            root,
        );
        self.next_seq = 1;
        self
    }

    pub(crate) fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Inserts into the open queue; a node whose set is already open goes
    /// to the duplicates instead.
    pub(crate) fn enqueue(&mut self, node: DynNode, ranking: &Ranking) {
        let set = node.set();
        if self.queue.contains_set(set) {
            self.add_duplicate(node);
        } else {
            let key = ranking.key(set, self.next_seq);
            self.next_seq += 1;
            self.queue.insert(key, node);
        }
    }

    pub(crate) fn add_duplicate(&mut self, node: DynNode) {
        let n = node.edges.len();
        let at = self.duplicates.partition_point(|d| d.edges.len() <= n);
        self.duplicates.insert(at, node);
    }

    /// Every node in the state's own collections.
    pub fn nodes(&self) -> impl Iterator<Item = &DynNode> {
        self.queue
            .items()
            .chain(&self.duplicates)
            .chain(&self.supersets)
    }

    pub fn node_count(&self) -> usize {
        self.queue.len() + self.duplicates.len() + self.supersets.len()
    }

    /// Applies a newly found minimal conflict `x` to the tree: relabels
    /// labels that strictly contain it, deletes nodes it shows redundant
    /// (substituting a non-redundant set-equal node built from the
    /// duplicates where possible) and records it for reuse. `extra` are the
    /// caller's node lists that take part, after the state's own
    /// collections.
    pub(crate) fn prune(
        &mut self,
        x: ComponentSet,
        ranking: &Ranking,
        extra: &mut [&mut Vec<DynNode>],
    ) -> PruneReport {
        let mut report = PruneReport::default();

        // Duplicates go first so that only non-redundant ones are left to
        // serve as replacements. A deleted duplicate is rebuilt on top of a
        // surviving one where possible; ascending size lets rebuilt ones
        // serve in turn.
        let mut dropped = Vec::new();
        for mut nd in std::mem::take(&mut self.duplicates) {
            if nd.redundancy_position(x).is_some() {
                report.deleted += 1;
                dropped.push(nd);
            } else {
                report.relabelled += usize::from(nd.relabel(x));
                self.duplicates.push(nd);
            }
        }
        for nd in dropped {
            let set = nd.set();
            if self.duplicates.iter().any(|d| d.set() == set) {
                continue;
            }
            if let Some((r, _)) = self.graft(&nd, x) {
                report.replaced += 1;
                self.add_duplicate(r);
            }
        }

        let mut deleted_open = Vec::new();
        self.queue.retain(|nd| {
            if nd.redundancy_position(x).is_some() {
                deleted_open.push(nd.clone());
                false
            } else {
                report.relabelled += usize::from(nd.relabel(x));
                true
            }
        });
        report.deleted += deleted_open.len();
        let mut donors = Vec::new();
        for nd in deleted_open {
            if let Some(r) = self.replacement(&nd, x, &mut donors) {
                report.replaced += 1;
                self.enqueue(r, ranking);
            }
        }

        let mut supersets = std::mem::take(&mut self.supersets);
        self.prune_list(&mut supersets, x, &mut report, &mut donors);
        self.supersets = supersets;
        for list in extra.iter_mut() {
            self.prune_list(list, x, &mut report, &mut donors);
        }
        // Duplicates that took over a deleted inner node are part of the
        // tree now.
        self.duplicates.retain(|d| !donors.contains(&d.id));

        self.conflicts.retain(|c| !c.is_proper_superset(x));
        if !self.conflicts.contains(&x) {
            self.conflicts.push(x);
        }
        report
    }

    fn prune_list(
        &mut self,
        list: &mut Vec<DynNode>,
        x: ComponentSet,
        report: &mut PruneReport,
        donors: &mut Vec<u64>,
    ) {
        let mut i = 0;
        while i < list.len() {
            if list[i].redundancy_position(x).is_some() {
                report.deleted += 1;
                let nd = list[i].clone();
                match self.replacement(&nd, x, donors) {
                    Some(r) => {
                        report.replaced += 1;
                        list[i] = r;
                        i += 1;
                    }
                    None => {
                        list.remove(i);
                    }
                }
            } else {
                report.relabelled += usize::from(list[i].relabel(x));
                i += 1;
            }
        }
    }

    // A set-equal duplicate if there is one (taken out of the duplicates),
    // otherwise a graft. Grafting donors are recorded so the caller can
    // retire them once the prune is done.
    fn replacement(
        &mut self,
        nd: &DynNode,
        x: ComponentSet,
        donors: &mut Vec<u64>,
    ) -> Option<DynNode> {
        let set = nd.set();
        if let Some(at) = self
            .duplicates
            .iter()
            .position(|d| d.set() == set && !donors.contains(&d.id))
        {
            return Some(self.duplicates.remove(at));
        }
        let (r, donor) = self.graft(nd, x)?;
        if !donors.contains(&donor) {
            donors.push(donor);
        }
        Some(r)
    }

    // `nd`'s branch below its last redundant position, hung under a
    // duplicate of the inner node there (shallowest first). Returns the new
    // node and the donor's id.
    fn graft(&mut self, nd: &DynNode, x: ComponentSet) -> Option<(DynNode, u64)> {
        let last = nd
            .cs
            .iter()
            .zip(&nd.edges)
            .rposition(|(c, &e)| c.is_proper_superset(x) && !x.contains(e))?;
        for k in last + 1..nd.edges.len() {
            let prefix: ComponentSet = nd.edges[..k].iter().copied().collect();
            let Some(d) = self.duplicates.iter().find(|d| d.set() == prefix) else {
                continue;
            };
            let mut edges = d.edges.clone();
            edges.extend_from_slice(&nd.edges[k..]);
            let mut cs = d.cs.clone();
            cs.extend_from_slice(&nd.cs[k..]);
            let donor = d.id;
            let mut r = DynNode {
                id: self.fresh_id(),
                edges,
                cs,
            };
            r.relabel(x);
            return Some((r, donor));
        }
        None
    }
}

/// What a prune changed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport {
    pub relabelled: usize,
    pub deleted: usize,
    pub replaced: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{FaultProbabilities, QueueOrder};

    fn s(ids: &[usize]) -> ComponentSet {
        ComponentSet::from_ids(ids.iter().copied())
    }

    fn node(id: u64, edges: &[usize], cs: &[&[usize]]) -> DynNode {
        DynNode {
            id,
            edges: edges.to_vec(),
            cs: cs.iter().map(|c| s(c)).collect(),
        }
    }

    fn bfs() -> Ranking {
        Ranking::new(
            QueueOrder::Bfs,
            FaultProbabilities::uniform(5, 0.1).unwrap(),
        )
    }

    #[test]
    fn enqueue_diverts_set_equal_nodes() {
        let mut st = SearchState::new();
        st.queue.pop_first();
        st.enqueue(node(1, &[1, 2], &[&[1, 2], &[2, 3, 4]]), &bfs());
        st.enqueue(node(2, &[2, 1], &[&[1, 2], &[1, 3, 5]]), &bfs());
        assert_eq!(st.queue.len(), 1);
        assert_eq!(st.duplicates.len(), 1);
        assert_eq!(st.duplicates[0].id, 2);
    }

    #[test]
    fn prune_relabels_deletes_and_replaces() {
        let r = bfs();
        let mut st = SearchState::new();
        st.queue.pop_first();
        // [1,3] is redundant under <2,4>; its duplicate [3,1] is not
        st.enqueue(node(1, &[1, 3], &[&[1, 2], &[2, 3, 4]]), &r);
        st.add_duplicate(node(2, &[3, 1], &[&[3, 4, 5], &[1, 2]]));
        st.enqueue(node(3, &[1, 4], &[&[1, 2], &[2, 3, 4]]), &r);
        st.conflicts = vec![s(&[1, 2]), s(&[2, 3, 4])];
        let mut dcalc = vec![node(4, &[1, 2], &[&[1, 2], &[2, 3, 4]])];
        let rep = st.prune(s(&[2, 4]), &r, &mut [&mut dcalc]);
        assert_eq!(rep.deleted, 1);
        assert_eq!(rep.replaced, 1);
        let open: Vec<u64> = st.queue.items().map(|n| n.id).collect();
        assert_eq!(open, vec![2, 3]);
        assert!(st.duplicates.is_empty());
        // [1,4] keeps edge 4 inside <2,4>, so it is relabelled
        let n3 = st.queue.items().find(|n| n.id == 3).unwrap();
        assert_eq!(n3.cs, vec![s(&[1, 2]), s(&[2, 4])]);
        assert_eq!(dcalc[0].cs, vec![s(&[1, 2]), s(&[2, 4])]);
        assert_eq!(st.conflicts, vec![s(&[1, 2]), s(&[2, 4])]);
    }

    #[test]
    fn prune_without_matches_only_records_conflict() {
        let mut st = SearchState::new();
        let rep = st.prune(s(&[5]), &bfs(), &mut []);
        assert_eq!(rep, PruneReport::default());
        assert_eq!(st.conflicts, vec![s(&[5])]);
        assert_eq!(st.queue.len(), 1);
    }

    #[test]
    fn state_round_trips_through_json() {
        let r = bfs();
        let mut st = SearchState::new();
        st.enqueue(node(1, &[1], &[&[1, 2]]), &r);
        st.add_duplicate(node(2, &[2, 1], &[&[1, 2], &[1, 3, 5]]));
        st.conflicts.push(s(&[1, 2]));
        let json = serde_json::to_string(&st).unwrap();
        let back: SearchState = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
