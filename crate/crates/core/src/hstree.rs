//! Reiter's HS-Tree, rebuilt from scratch on every call.
//!
//! Nodes are processed best-first. A node is labelled by the first rule
//! that applies:
//!
//! 1. it strictly contains an already found diagnosis: closed;
//! 2. a node with the same set was processed before: closed;
//! 3. some previously computed conflict is disjoint from it: that conflict
//!    is reused without reasoning;
//! 4. otherwise the conflict finder runs on the remaining axioms; no
//!    conflict means the node is a minimal diagnosis.
//!
//! Each conflict label spawns one child per element in ascending id order.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::components::ComponentSet;
use crate::counters::Reasoning;
use crate::dpi::Problem;
use crate::rank::{RankedQueue, Ranking};

/// How a processed node was labelled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeLabel {
    /// A minimal diagnosis. `fresh` when a reasoner call proved it.
    Valid { fresh: bool },
    /// Strict superset of a found diagnosis.
    Nonmin,
    /// Same set as an earlier node.
    Duplicate,
    /// Labelled by a minimal conflict. `fresh` when the finder computed it.
    Conflict { conflict: ComponentSet, fresh: bool },
}

/// One processed node, in processing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub edges: Vec<usize>,
    pub label: NodeLabel,
}

#[derive(Debug, Clone)]
struct HsNode {
    edges: Vec<usize>,
    set: ComponentSet,
}

/// Result of one HS-Tree run.
#[derive(Debug, Clone, Default)]
pub struct HsOutcome {
    /// Minimal diagnoses in emission order.
    pub diagnoses: Vec<ComponentSet>,
    pub trace: Vec<TraceEntry>,
}

/// Computes the `ld` most preferred minimal diagnoses (all of them when
/// `ld` is `None`).
pub fn run_hs_tree(
    problem: &Problem<'_>,
    ranking: &Ranking,
    ld: Option<usize>,
    reasoning: &mut Reasoning,
) -> HsOutcome {
    let mut out = HsOutcome::default();
    let mut queue = RankedQueue::new();
    let mut seq = 0u64;
    queue.insert(
        ranking.key(ComponentSet::EMPTY, seq),
        HsNode {
            edges: Vec::new(),
            set: ComponentSet::EMPTY,
        },
    );
    let mut conflicts: Vec<ComponentSet> = Vec::new();
    let mut processed: HashSet<ComponentSet> = HashSet::new();

    while ld.is_none_or(|ld| out.diagnoses.len() < ld) {
        let Some((_, node)) = queue.pop_first() else {
            break;
        };
        let label = if out.diagnoses.iter().any(|d| d.is_proper_subset(node.set)) {
            NodeLabel::Nonmin
        } else if !processed.insert(node.set) {
            NodeLabel::Duplicate
        } else if let Some(&c) = conflicts.iter().find(|c| c.is_disjoint(node.set)) {
            NodeLabel::Conflict {
                conflict: c,
                fresh: false,
            }
        } else {
            let universe = problem.all_components().difference(node.set);
            match reasoning.tree_conflict(problem, universe) {
                Some(c) => {
                    conflicts.push(c);
                    NodeLabel::Conflict {
                        conflict: c,
                        fresh: true,
                    }
                }
                None => NodeLabel::Valid { fresh: true },
            }
        };
        match &label {
            NodeLabel::Valid { .. } => out.diagnoses.push(node.set),
            NodeLabel::Conflict { conflict, .. } => {
                for e in conflict.iter() {
                    seq += 1;
                    let mut edges = node.edges.clone();
                    edges.push(e);
                    let set = node.set.with(e);
                    queue.insert(ranking.key(set, seq), HsNode { edges, set });
                }
            }
            NodeLabel::Nonmin | NodeLabel::Duplicate => {}
        }
        out.trace.push(TraceEntry {
            edges: node.edges,
            label,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute;
    use crate::conflict::QuickXplainFinder;
    use crate::dpi::{Acquired, Dpi, Measurement};
    use crate::fixtures::example_dpi;
    use crate::logic::{Formula, Reasoner};
    use crate::rank::{FaultProbabilities, QueueOrder};

    fn s(ids: &[usize]) -> ComponentSet {
        ComponentSet::from_ids(ids.iter().copied())
    }

    fn bfs(n: usize) -> Ranking {
        Ranking::new(
            QueueOrder::Bfs,
            FaultProbabilities::uniform(n, 0.1).unwrap(),
        )
    }

    fn qx() -> Reasoning {
        Reasoning::new(Box::new(QuickXplainFinder))
    }

    #[test]
    fn example_first_iteration() {
        let dpi = example_dpi();
        let acq = Acquired::new();
        let p = Problem::new(&dpi, &acq);
        let mut r = qx();
        let out = run_hs_tree(&p, &bfs(5), Some(5), &mut r);
        assert_eq!(
            out.diagnoses,
            vec![s(&[1, 3]), s(&[1, 4]), s(&[2, 3]), s(&[2, 5])]
        );
        // root, {1}, {2} are labelled first
        assert_eq!(
            out.trace[0].label,
            NodeLabel::Conflict {
                conflict: s(&[1, 2]),
                fresh: true
            }
        );
        assert_eq!(out.trace[1].edges, vec![1]);
        assert_eq!(
            out.trace[1].label,
            NodeLabel::Conflict {
                conflict: s(&[2, 3, 4]),
                fresh: true
            }
        );
        // [2,1] is closed as a duplicate of [1,2]
        let dup = out.trace.iter().find(|t| t.edges == vec![2, 1]).unwrap();
        assert_eq!(dup.label, NodeLabel::Duplicate);
    }

    #[test]
    fn example_final_iteration() {
        let dpi = example_dpi();
        let f = |t: &str| t.parse::<Formula>().unwrap();
        let acq = Acquired::new()
            .with(Measurement::new(f("A -> C"), false))
            .unwrap()
            .with(Measurement::new(f("A -> !B"), false))
            .unwrap()
            .with(Measurement::new(f("A -> !C"), true))
            .unwrap();
        let p = Problem::new(&dpi, &acq);
        let out = run_hs_tree(&p, &bfs(5), Some(5), &mut qx());
        assert_eq!(out.diagnoses, vec![s(&[1, 4])]);
    }

    #[test]
    fn single_conflict_gives_singletons() {
        // the only minimal conflict is <a1,a2>
        let dpi = Dpi::parse("[O]\na1: A\na2: !A\na3: B\n").unwrap();
        let acq = Acquired::new();
        let p = Problem::new(&dpi, &acq);
        let mut r = Reasoner::new();
        assert_eq!(
            brute::minimal_conflicts(&p, &mut r, 12).unwrap(),
            vec![s(&[1, 2])]
        );
        let out = run_hs_tree(&p, &bfs(3), None, &mut qx());
        assert_eq!(out.diagnoses, vec![s(&[1]), s(&[2])]);
    }

    #[test]
    fn ld_limits_output() {
        let dpi = example_dpi();
        let acq = Acquired::new();
        let p = Problem::new(&dpi, &acq);
        let out = run_hs_tree(&p, &bfs(5), Some(2), &mut qx());
        assert_eq!(out.diagnoses, vec![s(&[1, 3]), s(&[1, 4])]);
    }
}
