//! Stateful hitting-set search that survives measurements.
//!
//! The tree from the previous invocation is repaired instead of rebuilt.
//! At the start of each invocation the diagnoses that the latest
//! measurement invalidated are checked for redundancy: if one of the
//! conflicts along a node's branch has shrunk so that the node's edge falls
//! outside the smaller conflict, the branch would not exist in a fresh tree
//! and is pruned. Surviving invalidated diagnoses, non-minimal diagnoses that
//! no longer contain a known diagnosis, and the still-valid diagnoses go
//! back into the queue. Still-valid diagnoses are accepted again without
//! reasoning when they come up.
//!
//! Labelling a node first rules out strict supersets of diagnoses found in
//! this invocation, then tries to reuse a stored conflict (re-minimised
//! against the current problem, pruning the tree if it shrinks) and only
//! then asks the conflict finder.

mod node;
mod state;

pub use node::DynNode;
pub use state::{PruneReport, SearchState};

use serde::{Deserialize, Serialize};

use crate::components::ComponentSet;
use crate::counters::Reasoning;
use crate::dpi::Problem;
use crate::hstree::{NodeLabel, TraceEntry};
use crate::logic::Reasoner;
use crate::rank::Ranking;

/// A shrunken label found on a node's branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyWitness {
    pub position: usize,
    pub conflict: ComponentSet,
}

/// Checks each label on the branch, in order, for a smaller minimal
/// conflict that leaves the branch's edge out. Charged as one `rd`; the
/// conflict searches it runs are not counted separately.
pub fn redundant(
    node: &DynNode,
    problem: &Problem<'_>,
    reasoning: &mut Reasoning,
) -> Option<RedundancyWitness> {
    reasoning.counters.rd += 1;
    for (position, (&c, &e)) in node.cs.iter().zip(&node.edges).enumerate() {
        if let Some(x) = reasoning.uncounted_conflict(problem, c) {
            if x.is_proper_subset(c) && !x.contains(e) {
                return Some(RedundancyWitness {
                    position,
                    conflict: x,
                });
            }
        }
    }
    None
}

enum Label {
    Valid,
    Nonmin,
    Conflict(ComponentSet),
}

/// The stateful engine: its search state plus the nodes it returned last.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicHs {
    pub state: SearchState,
    /// Diagnoses returned by the last invocation.
    pub previous: Vec<DynNode>,
    /// When set, invariants are checked after every operation.
    #[serde(default)]
    pub audit: bool,
    #[serde(default)]
    violations: Vec<String>,
    #[serde(skip)]
    trace: Vec<TraceEntry>,
    #[serde(skip)]
    last_prunes: Vec<(ComponentSet, PruneReport)>,
}

impl Default for DynamicHs {
    fn default() -> Self {
        Self::new()
    }
}

impl DynamicHs {
    /// Fresh engine. Auditing follows `debug_assertions`.
    pub fn new() -> Self {
        DynamicHs {
            state: SearchState::new(),
            previous: Vec::new(),
            audit: cfg!(debug_assertions),
            violations: Vec::new(),
            trace: Vec::new(),
            last_prunes: Vec::new(),
        }
    }

    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    /// Invariant violations recorded so far (only when auditing).
    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    /// Nodes processed by the last invocation.
    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    /// Prunes performed by the last invocation.
    pub fn prunes(&self) -> &[(ComponentSet, PruneReport)] {
        &self.last_prunes
    }

    /// Computes the `ld` most preferred minimal diagnoses (all when `None`).
    /// `still_valid` lists which of the previously returned diagnoses are
    /// still diagnoses after the latest measurement.
    pub fn run(
        &mut self,
        problem: &Problem<'_>,
        ranking: &Ranking,
        ld: Option<usize>,
        still_valid: &[ComponentSet],
        reasoning: &mut Reasoning,
    ) -> Vec<ComponentSet> {
        let (check, times): (Vec<DynNode>, Vec<DynNode>) = std::mem::take(&mut self.previous)
            .into_iter()
            .partition(|nd| still_valid.contains(&nd.set()));
        let found = self.run_partitioned(problem, ranking, ld, check, times, reasoning);
        let sets = found.iter().map(DynNode::set).collect();
        self.previous = found;
        sets
    }

    /// The invocation proper, with the previous diagnoses already split
    /// into still-valid (`check`) and invalidated (`times`) nodes.
    pub fn run_partitioned(
        &mut self,
        problem: &Problem<'_>,
        ranking: &Ranking,
        ld: Option<usize>,
        mut check: Vec<DynNode>,
        times: Vec<DynNode>,
        reasoning: &mut Reasoning,
    ) -> Vec<DynNode> {
        self.trace.clear();
        self.last_prunes.clear();
        self.update_tree(problem, ranking, &mut check, times, reasoning);
        let check_sets: Vec<ComponentSet> = check.iter().map(DynNode::set).collect();

        let mut found: Vec<DynNode> = Vec::new();
        while ld.is_none_or(|ld| found.len() < ld) {
            let Some((_, node)) = self.state.queue.pop_first() else {
                break;
            };
            let set = node.set();
            let (label, fresh) = if check_sets.contains(&set) {
                (Label::Valid, false)
            } else {
                self.label(problem, ranking, &node, &mut found, reasoning)
            };
            let entry = TraceEntry {
                edges: node.edges.clone(),
                label: match label {
                    Label::Valid => NodeLabel::Valid { fresh },
                    Label::Nonmin => NodeLabel::Nonmin,
                    Label::Conflict(c) => NodeLabel::Conflict { conflict: c, fresh },
                },
            };
            match label {
                Label::Valid => found.push(node),
                Label::Nonmin => self.state.supersets.push(node),
                Label::Conflict(c) => {
                    for e in c.iter() {
                        let id = self.state.fresh_id();
                        let child = node.child(id, e, c);
                        self.state.enqueue(child, ranking);
                    }
                }
            }
            self.trace.push(entry);
            if self.audit {
                self.audit_structure(&[&found]);
            }
        }
        found
    }

    // Returns the label and whether reasoning produced it.
    fn label(
        &mut self,
        problem: &Problem<'_>,
        ranking: &Ranking,
        node: &DynNode,
        found: &mut Vec<DynNode>,
        reasoning: &mut Reasoning,
    ) -> (Label, bool) {
        let set = node.set();
        if found.iter().any(|d| d.set().is_proper_subset(set)) {
            return (Label::Nonmin, false);
        }
        if let Some(&c) = self.state.conflicts.iter().find(|c| c.is_disjoint(set)) {
            // c is a conflict for an earlier problem; make sure it is still
            // minimal before using it.
            match reasoning.tree_conflict(problem, c) {
                Some(x) => {
                    if x != c {
                        self.prune(problem, ranking, x, &mut [found]);
                    }
                    return (Label::Conflict(x), true);
                }
                None => {
                    // Only possible if measurements were retracted.
                    self.violations.push(format!(
                        "stored conflict {} no longer a conflict",
                        c.as_conflict()
                    ));
                    self.state.conflicts.retain(|k| *k != c);
                }
            }
        }
        let universe = problem.all_components().difference(set);
        match reasoning.tree_conflict(problem, universe) {
            None => (Label::Valid, true),
            Some(c) => {
                self.state.conflicts.push(c);
                (Label::Conflict(c), true)
            }
        }
    }

    fn update_tree(
        &mut self,
        problem: &Problem<'_>,
        ranking: &Ranking,
        check: &mut Vec<DynNode>,
        mut times: Vec<DynNode>,
        reasoning: &mut Reasoning,
    ) {
        let ids: Vec<u64> = times.iter().map(|n| n.id).collect();
        for id in ids {
            let Some(nd) = times.iter().find(|n| n.id == id) else {
                continue;
            };
            if let Some(w) = redundant(nd, problem, reasoning) {
                self.prune(problem, ranking, w.conflict, &mut [&mut times, check]);
            }
        }
        for nd in times {
            self.state.enqueue(nd, ranking);
        }
        let check_sets: Vec<ComponentSet> = check.iter().map(DynNode::set).collect();
        let (keep, reopen): (Vec<DynNode>, Vec<DynNode>) =
            std::mem::take(&mut self.state.supersets)
                .into_iter()
                .partition(|nd| {
                    let set = nd.set();
                    check_sets.iter().any(|d| d.is_proper_subset(set))
                });
        self.state.supersets = keep;
        for nd in reopen {
            self.state.enqueue(nd, ranking);
        }
        for nd in check.iter() {
            self.state.enqueue(nd.clone(), ranking);
        }
        if self.audit {
            self.audit_structure(&[check]);
        }
    }

    fn prune(
        &mut self,
        problem: &Problem<'_>,
        ranking: &Ranking,
        x: ComponentSet,
        extra: &mut [&mut Vec<DynNode>],
    ) {
        if self.audit && !problem.is_minimal_conflict(x, &mut Reasoner::new()) {
            self.violations.push(format!(
                "prune called with {} which is not a minimal conflict",
                x.as_conflict()
            ));
        }
        let report = self.state.prune(x, ranking, extra);
        self.last_prunes.push((x, report));
        if self.audit {
            let extra_nodes = extra.iter().flat_map(|l| l.iter());
            for nd in self.state.nodes().chain(extra_nodes) {
                if nd.redundancy_position(x).is_some() {
                    self.violations.push(format!(
                        "node {} still redundant under {} after pruning",
                        nd.id,
                        x.as_conflict()
                    ));
                } else if nd.cs.iter().any(|c| c.is_proper_superset(x)) {
                    self.violations.push(format!(
                        "node {} keeps a label above {} after pruning",
                        nd.id,
                        x.as_conflict()
                    ));
                }
            }
            if !self.state.conflicts.contains(&x) {
                self.violations
                    .push(format!("{} missing from stored conflicts", x.as_conflict()));
            }
            if self.state.conflicts.iter().any(|c| c.is_proper_superset(x)) {
                self.violations.push(format!(
                    "stored conflicts keep a superset of {}",
                    x.as_conflict()
                ));
            }
            let lists: Vec<&Vec<DynNode>> = extra.iter().map(|l| &**l).collect();
            self.audit_structure(&lists);
        }
    }

    fn audit_structure(&mut self, extra: &[&Vec<DynNode>]) {
        let mut problems = Vec::new();
        for nd in self
            .state
            .nodes()
            .chain(extra.iter().flat_map(|l| l.iter()))
        {
            if let Err(e) = nd.check() {
                problems.push(e);
            }
        }
        let mut open: Vec<ComponentSet> = self.state.queue.items().map(DynNode::set).collect();
        open.sort();
        if open.windows(2).any(|w| w[0] == w[1]) {
            problems.push("open queue holds two set-equal nodes".into());
        }
        self.violations.extend(problems);
    }
}

#[cfg(test)]
mod tests;
