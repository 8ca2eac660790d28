//! Cross-checks against the brute-force oracles, shared by the property
//! suites and the acceptance harness.

use crate::brute;
use crate::components::ComponentSet;
use crate::conflict::QuickXplainFinder;
use crate::counters::Reasoning;
use crate::dpi::{Acquired, Dpi, Measurement, Problem};
use crate::dynamic::DynamicHs;
use crate::hstree::run_hs_tree;
use crate::logic::Reasoner;
use crate::rank::{QueueOrder, Ranking};

/// Slack for comparing summed log-weights.
const COST_EPS: f64 = 1e-9;

/// `None` when `emitted` respects the ranking's order: cardinalities never
/// drop under `bfs`, probabilities never rise under `prob`.
pub fn best_first_violation(emitted: &[ComponentSet], ranking: &Ranking) -> Option<String> {
    emitted.windows(2).find_map(|w| {
        let bad = match ranking.order {
            QueueOrder::Bfs => w[1].len() < w[0].len(),
            QueueOrder::Prob => ranking.pr.cost(w[1]) + COST_EPS < ranking.pr.cost(w[0]),
        };
        bad.then(|| format!("{} emitted after {} under {}", w[1], w[0], ranking.order))
    })
}

/// What running both engines with unbounded `ld` turned up.
#[derive(Debug, Clone, Default)]
pub struct ExhaustiveCheck {
    pub expected: Vec<ComponentSet>,
    /// Result sets that differ from the brute-force ones.
    pub mismatches: Vec<String>,
    /// Emission order violations.
    pub order: Vec<String>,
    /// Engine invariant violations.
    pub audit: Vec<String>,
}

impl ExhaustiveCheck {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.order.is_empty() && self.audit.is_empty()
    }
}

/// Runs both engines to exhaustion on `dpi` under `acquired` and compares
/// them with the brute-force diagnoses, emission order and engine audits.
pub fn engines_against_brute(dpi: &Dpi, acquired: &Acquired, ranking: &Ranking) -> ExhaustiveCheck {
    let problem = Problem::new(dpi, acquired);
    let mut out = ExhaustiveCheck::default();
    out.expected =
        match brute::minimal_diagnoses(&problem, &mut Reasoner::new(), brute::DEFAULT_CAP) {
            Ok(d) => d,
            Err(e) => {
                out.mismatches.push(e.to_string());
                return out;
            }
        };

    let mut reasoning = Reasoning::new(Box::new(QuickXplainFinder));
    let hs = run_hs_tree(&problem, ranking, None, &mut reasoning).diagnoses;
    let mut dynamic = DynamicHs::new().with_audit(true);
    let mut reasoning = Reasoning::new(Box::new(QuickXplainFinder));
    let dy = dynamic.run(&problem, ranking, None, &[], &mut reasoning);

    for (name, got) in [("hstree", &hs), ("dynamic", &dy)] {
        let mut sorted = got.clone();
        sorted.sort();
        if sorted != out.expected {
            out.mismatches.push(format!(
                "{name} found {} but brute force {}",
                fmt(got),
                fmt(&out.expected)
            ));
        }
        if let Some(v) = best_first_violation(got, ranking) {
            out.order.push(format!("{name}: {v}"));
        }
    }
    out.audit.extend(dynamic.violations().iter().cloned());
    out
}

/// Outcome of checking one measurement transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transition {
    /// The measurement invalidates no minimal diagnosis.
    Uninformative,
    /// The measurement leaves no diagnosis at all.
    Inconsistent,
    Holds,
    Violated(Vec<String>),
}

/// Checks how minimal diagnoses and conflicts evolve when `m` is added:
///
/// * every new minimal diagnosis contains an old one;
/// * every old minimal conflict contains a new one;
/// * some old minimal conflict strictly contains a new one, or some new
///   minimal conflict is incomparable with every old one.
pub fn check_transition(dpi: &Dpi, acquired: &Acquired, m: Measurement) -> Transition {
    let mut r = Reasoner::new();
    let cap = brute::DEFAULT_CAP;
    let before = Problem::new(dpi, acquired);
    let Ok(old_diags) = brute::minimal_diagnoses(&before, &mut r, cap) else {
        return Transition::Inconsistent;
    };
    let Ok(after_acq) = acquired.with(m) else {
        return Transition::Uninformative;
    };
    let after = Problem::new(dpi, &after_acq);
    if !after.is_diagnosis(dpi.all_components(), &mut r) {
        return Transition::Inconsistent;
    }
    if old_diags.iter().all(|&d| after.is_diagnosis(d, &mut r)) {
        return Transition::Uninformative;
    }
    let old_conf = brute::minimal_conflicts(&before, &mut r, cap).expect("within cap");
    let new_diags = brute::minimal_diagnoses(&after, &mut r, cap).expect("within cap");
    let new_conf = brute::minimal_conflicts(&after, &mut r, cap).expect("within cap");

    let mut problems = Vec::new();
    for d in &new_diags {
        if !old_diags.iter().any(|o| o.is_subset(*d)) {
            problems.push(format!("new diagnosis {d} extends no old one"));
        }
    }
    for c in &old_conf {
        if !new_conf.iter().any(|n| n.is_subset(*c)) {
            problems.push(format!(
                "old conflict {} contains no new one",
                c.as_conflict()
            ));
        }
    }
    let shrunk = old_conf
        .iter()
        .any(|c| new_conf.iter().any(|n| n.is_proper_subset(*c)));
    let fresh = new_conf.iter().any(|n| {
        old_conf
            .iter()
            .all(|c| !c.is_subset(*n) && !n.is_subset(*c))
    });
    if !shrunk && !fresh {
        problems.push("no minimal conflict shrank or appeared".into());
    }
    if problems.is_empty() {
        Transition::Holds
    } else {
        Transition::Violated(problems)
    }
}

fn fmt(sets: &[ComponentSet]) -> String {
    let parts: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}
