//! Sorting diagnoses after a measurement, and choosing the next one.

use serde::{Deserialize, Serialize};

use crate::components::ComponentSet;
use crate::counters::Reasoning;
use crate::dpi::Problem;
use crate::logic::{Formula, Reasoner};

/// Default upper bound on the number of candidate measurement points.
pub const DEFAULT_POOL_CAP: usize = 1024;

/// Previous diagnoses split by whether they survived the latest measurement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub check: Vec<ComponentSet>,
    pub times: Vec<ComponentSet>,
}

/// Re-checks each diagnosis against `problem` (which already includes the
/// new measurement). Each check is charged to `cc_session`.
pub fn assign_diags_ok_nok(
    diagnoses: &[ComponentSet],
    problem: &Problem<'_>,
    reasoning: &mut Reasoning,
) -> Split {
    let mut split = Split::default();
    for &d in diagnoses {
        reasoning.counters.cc_session += 1;
        if problem.is_diagnosis(d, &mut reasoning.reasoner) {
            split.check.push(d);
        } else {
            split.times.push(d);
        }
    }
    split
}

/// How a candidate measurement point partitions the diagnoses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointScore {
    pub point: Formula,
    /// Diagnoses predicting a positive outcome.
    pub positive: Vec<ComponentSet>,
    /// Diagnoses ruled out by a positive outcome.
    pub negative: Vec<ComponentSet>,
    /// Diagnoses that predict nothing.
    pub undecided: Vec<ComponentSet>,
}

impl PointScore {
    /// `| |D+| - |D-| | + |D0|`; lower is better.
    pub fn score(&self) -> usize {
        self.positive.len().abs_diff(self.negative.len()) + self.undecided.len()
    }

    /// Both outcomes eliminate at least one diagnosis.
    pub fn is_eligible(&self) -> bool {
        !self.positive.is_empty() && !self.negative.is_empty()
    }
}

pub fn score_point(
    point: &Formula,
    diagnoses: &[ComponentSet],
    problem: &Problem<'_>,
    reasoner: &mut Reasoner,
) -> PointScore {
    let mut out = PointScore {
        point: point.clone(),
        positive: Vec::new(),
        negative: Vec::new(),
        undecided: Vec::new(),
    };
    let all = problem.all_components();
    for &d in diagnoses {
        let mut theory = problem.theory(all.difference(d));
        if reasoner.entails(theory.iter().copied(), point) {
            out.positive.push(d);
            continue;
        }
        theory.push(point);
        if problem.violates(&theory, reasoner) {
            out.negative.push(d);
        } else {
            out.undecided.push(d);
        }
    }
    out
}

/// Atoms `v` and implications `v -> l` over the problem's variables,
/// skipping sentences already measured or already decided by `B ∪ P ∪ P'`.
/// At most `cap` sentences are returned.
pub fn candidate_pool(problem: &Problem<'_>, cap: usize, reasoner: &mut Reasoner) -> Vec<Formula> {
    let dpi = problem.dpi;
    let mut vars = std::collections::BTreeSet::new();
    for f in dpi
        .axioms
        .iter()
        .chain(&dpi.background)
        .chain(&dpi.positive)
        .chain(&dpi.negative)
    {
        vars.extend(f.variables());
    }
    let vars: Vec<String> = vars.into_iter().collect();

    let mut raw = Vec::new();
    for v in &vars {
        raw.push(Formula::var(v.clone()));
        for w in vars.iter().filter(|w| *w != v) {
            for positive in [true, false] {
                raw.push(Formula::implies(
                    Formula::var(v.clone()),
                    Formula::literal(w.clone(), positive),
                ));
            }
        }
    }

    let base = problem.base();
    let mut pool: Vec<Formula> = Vec::new();
    for q in raw {
        if pool.len() >= cap {
            break;
        }
        if problem.acquired.contains(&q) || pool.iter().any(|p| p.same_sentence(&q)) {
            continue;
        }
        if reasoner.entails(base.iter().copied(), &q) {
            continue;
        }
        let mut with_q: Vec<&Formula> = base.to_vec();
        with_q.push(&q);
        if problem.violates(&with_q, reasoner) {
            continue;
        }
        pool.push(q);
    }
    pool
}

/// The eligible candidate with the lowest split-in-half score; ties go to
/// the lexicographically smallest printed form. `None` when no candidate
/// can tell the diagnoses apart.
pub fn compute_best_meas_point(
    diagnoses: &[ComponentSet],
    problem: &Problem<'_>,
    cap: usize,
    reasoner: &mut Reasoner,
) -> Option<PointScore> {
    let pool = candidate_pool(problem, cap, reasoner);
    let mut best: Option<(usize, String, PointScore)> = None;
    for q in &pool {
        let s = score_point(q, diagnoses, problem, reasoner);
        if !s.is_eligible() {
            continue;
        }
        let key = (s.score(), q.to_string());
        if best
            .as_ref()
            .is_none_or(|(bs, bt, _)| key < (*bs, bt.clone()))
        {
            best = Some((key.0, key.1, s));
        }
    }
    best.map(|(_, _, s)| s)
}
