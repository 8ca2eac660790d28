use super::*;
use crate::conflict::{QuickXplainFinder, ScriptedFinder};
use crate::counters::Counters;
use crate::dpi::{Acquired, Measurement};
use crate::fixtures::{example_dpi, example_script, EXAMPLE_CONFLICTS};
use crate::rank::{FaultProbabilities, QueueOrder};

fn s(ids: &[usize]) -> ComponentSet {
    ComponentSet::from_ids(ids.iter().copied())
}

fn bfs() -> Ranking {
    Ranking::new(
        QueueOrder::Bfs,
        FaultProbabilities::uniform(5, 0.1).unwrap(),
    )
}

#[test]
fn example_session_counts_and_diagnoses() {
    let dpi = example_dpi();
    let mut reasoner = Reasoner::new();
    let finder = ScriptedFinder::from_json(&dpi, EXAMPLE_CONFLICTS, &mut reasoner).unwrap();
    let mut reasoning = Reasoning::new(Box::new(finder));
    let mut engine = DynamicHs::new().with_audit(true);
    let ranking = bfs();

    let expected_diags = [
        vec![s(&[1, 3]), s(&[1, 4]), s(&[2, 3]), s(&[2, 5])],
        vec![s(&[1, 4]), s(&[2, 5])],
        vec![s(&[1, 4]), s(&[1, 2, 3, 5])],
        vec![s(&[1, 4])],
    ];
    // (fc, rd, cc_tree) per invocation
    let expected_counts = [(4, 0, 4), (1, 2, 0), (1, 1, 1), (0, 1, 0)];

    let mut acquired = Acquired::new();
    let mut still_valid = Vec::new();
    let script = example_script();
    for (i, (diags, counts)) in expected_diags.iter().zip(expected_counts).enumerate() {
        let before = reasoning.counters;
        let problem = Problem::new(&dpi, &acquired);
        let got = engine.run(&problem, &ranking, Some(5), &still_valid, &mut reasoning);
        let delta = reasoning.counters - before;
        assert_eq!(&got, diags, "diagnoses of invocation {}", i + 1);
        assert_eq!(
            (delta.fc, delta.rd, delta.cc_tree),
            counts,
            "counters of invocation {}",
            i + 1
        );
        if i == 0 {
            let dups: Vec<_> = engine
                .state
                .duplicates
                .iter()
                .map(|d| d.edges.clone())
                .collect();
            assert_eq!(dups, vec![vec![2, 1]]);
        }
        if let Some(m) = script.get(i) {
            acquired.add(m.clone()).unwrap();
            let problem = Problem::new(&dpi, &acquired);
            still_valid = got
                .iter()
                .copied()
                .filter(|d| problem.is_diagnosis(*d, &mut reasoner))
                .collect();
        }
    }
    assert_eq!(
        reasoning.counters,
        Counters {
            fc: 6,
            rd: 4,
            cc_tree: 5,
            cc_session: 0
        }
    );
    assert!(engine.violations().is_empty(), "{:?}", engine.violations());
}

#[test]
fn first_redundancy_witnesses() {
    let dpi = example_dpi();
    let acq = Acquired::new()
        .with(Measurement::new("A -> C".parse().unwrap(), false))
        .unwrap();
    let p = Problem::new(&dpi, &acq);
    let mut r = Reasoning::new(Box::new(QuickXplainFinder));
    let nd = DynNode {
        id: 1,
        edges: vec![1, 3],
        cs: vec![s(&[1, 2]), s(&[2, 3, 4])],
    };
    assert_eq!(
        redundant(&nd, &p, &mut r),
        Some(RedundancyWitness {
            position: 1,
            conflict: s(&[2, 4])
        })
    );
    assert_eq!(r.counters.rd, 1);
    assert_eq!(r.counters.tree_searches(), 0);

    let acq2 = acq
        .with(Measurement::new("A -> !B".parse().unwrap(), false))
        .unwrap();
    let p2 = Problem::new(&dpi, &acq2);
    let nd = DynNode {
        id: 2,
        edges: vec![2, 5],
        cs: vec![s(&[1, 2]), s(&[1, 3, 5])],
    };
    assert_eq!(
        redundant(&nd, &p2, &mut r),
        Some(RedundancyWitness {
            position: 0,
            conflict: s(&[1])
        })
    );
    let fine = DynNode {
        id: 3,
        edges: vec![1, 4],
        cs: vec![s(&[1, 2]), s(&[2, 4])],
    };
    assert_eq!(redundant(&fine, &p, &mut r), None);
}

#[test]
fn unchanged_problem_only_requeues_known_diagnoses() {
    let dpi = example_dpi();
    let acq = Acquired::new();
    let p = Problem::new(&dpi, &acq);
    let mut r = Reasoning::new(Box::new(QuickXplainFinder));
    let mut engine = DynamicHs::new().with_audit(true);
    let first = engine.run(&p, &bfs(), Some(5), &[], &mut r);
    let before = r.counters;
    let again = engine.run(&p, &bfs(), Some(5), &first, &mut r);
    assert_eq!(first, again);
    let delta = r.counters - before;
    assert_eq!(delta.rd, 0);
    assert!(engine.violations().is_empty());
}

#[test]
fn engine_round_trips_through_json() {
    let dpi = example_dpi();
    let acq = Acquired::new();
    let p = Problem::new(&dpi, &acq);
    let mut r = Reasoning::new(Box::new(QuickXplainFinder));
    let mut engine = DynamicHs::new();
    engine.run(&p, &bfs(), Some(2), &[], &mut r);
    let json = serde_json::to_string(&engine).unwrap();
    let mut back: DynamicHs = serde_json::from_str(&json).unwrap();
    let prev: Vec<ComponentSet> = engine.previous.iter().map(DynNode::set).collect();
    let a = engine.run(&p, &bfs(), Some(4), &prev, &mut r);
    let b = back.run(&p, &bfs(), Some(4), &prev, &mut r);
    assert_eq!(a, b);
}
