//! Minimal conflict computation.
//!
//! [`QuickXplainFinder`] runs the divide-and-conquer QuickXPlain search over
//! candidates in ascending id order. [`ScriptedFinder`] answers from a list
//! of pinned results (validated against the problem when loaded) and defers
//! to QuickXPlain for anything the script does not cover.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::ComponentSet;
use crate::dpi::{Dpi, Problem};
use crate::logic::{Formula, Reasoner};

/// Computes a minimal conflict within a universe of components.
pub trait ConflictFinder: Send + Sync {
    /// A minimal conflict `C ⊆ universe` of `problem`, or `None` if the
    /// universe's axioms together with `B ∪ P ∪ P'` are consistent and
    /// entail no negative measurement.
    fn find_min_conflict(
        &mut self,
        problem: &Problem<'_>,
        universe: ComponentSet,
        reasoner: &mut Reasoner,
    ) -> Option<ComponentSet>;
}

/// QuickXPlain over an arbitrary item type.
///
/// `conflicting(items)` must be monotone (supersets of conflicting sets are
/// conflicting) and false for the empty set. Returns a subset-minimal
/// conflicting subset of `candidates`, preferring earlier candidates, or
/// `None` if the whole list is not conflicting.
pub fn quick_xplain<T: Clone>(
    candidates: &[T],
    conflicting: &mut impl FnMut(&[T]) -> bool,
) -> Option<Vec<T>> {
    if candidates.is_empty() || !conflicting(candidates) {
        return None;
    }
    let mut background = Vec::new();
    Some(qx(&mut background, false, candidates, conflicting))
}

fn qx<T: Clone>(
    background: &mut Vec<T>,
    background_changed: bool,
    candidates: &[T],
    conflicting: &mut impl FnMut(&[T]) -> bool,
) -> Vec<T> {
    if background_changed && conflicting(background) {
        return Vec::new();
    }
    if candidates.len() == 1 {
        return candidates.to_vec();
    }
    let (c1, c2) = candidates.split_at(candidates.len().div_ceil(2));

    let mark = background.len();
    background.extend_from_slice(c1);
    let d2 = qx(background, !c1.is_empty(), c2, conflicting);
    background.truncate(mark);

    background.extend_from_slice(&d2);
    let d1 = qx(background, !d2.is_empty(), c1, conflicting);
    background.truncate(mark);

    let mut out = d1;
    out.extend(d2);
    out
}

/// QuickXPlain over formulas: finds a minimal subset of `candidates` that,
/// added to `background`, is inconsistent or entails one of `negatives`.
/// Returns candidate positions in ascending order.
pub fn quick_xplain_formulas(
    reasoner: &mut Reasoner,
    background: &[&Formula],
    negatives: &[&Formula],
    candidates: &[&Formula],
) -> Option<Vec<usize>> {
    let positions: Vec<usize> = (0..candidates.len()).collect();
    let mut conflicting = |items: &[usize]| {
        let sentences: Vec<&Formula> = items
            .iter()
            .map(|&i| candidates[i])
            .chain(background.iter().copied())
            .collect();
        !reasoner.is_consistent(sentences.iter().copied())
            || negatives
                .iter()
                .any(|n| reasoner.entails(sentences.iter().copied(), n))
    };
    let mut found = quick_xplain(&positions, &mut conflicting)?;
    found.sort_unstable();
    Some(found)
}

/// QuickXPlain with candidates in ascending axiom id order.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuickXplainFinder;

impl ConflictFinder for QuickXplainFinder {
    fn find_min_conflict(
        &mut self,
        problem: &Problem<'_>,
        universe: ComponentSet,
        reasoner: &mut Reasoner,
    ) -> Option<ComponentSet> {
        let ids = universe.to_vec();
        let candidates: Vec<&Formula> = ids.iter().map(|&id| problem.dpi.axiom(id)).collect();
        let found =
            quick_xplain_formulas(reasoner, problem.base(), problem.negatives(), &candidates)?;
        Some(found.into_iter().map(|i| ids[i]).collect())
    }
}

/// Result field of a script entry: a conflict or the string `"none"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedResult {
    Conflict(ComponentSet),
    None(NoneTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoneTag {
    None,
}

/// One pinned answer: the result for `universe` under the given acquired
/// measurements (compared as sets of sentences).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub universe: ComponentSet,
    #[serde(default)]
    pub p_prime: Vec<Formula>,
    #[serde(default)]
    pub n_prime: Vec<Formula>,
    pub result: ScriptedResult,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("malformed conflict script: {0}")]
    Json(#[from] serde_json::Error),
    #[error("script entry {index}: {message}")]
    Invalid { index: usize, message: String },
}

fn same_sentences(a: &[Formula], b: &[Formula]) -> bool {
    let mut x: Vec<Formula> = a.iter().map(Formula::canonical).collect();
    let mut y: Vec<Formula> = b.iter().map(Formula::canonical).collect();
    x.sort();
    x.dedup();
    y.sort();
    y.dedup();
    x == y
}

/// Pinned conflicts, consulted in order; falls back to QuickXPlain.
#[derive(Debug, Clone, Default)]
pub struct ScriptedFinder {
    entries: Vec<ScriptEntry>,
    fallback: QuickXplainFinder,
    hits: usize,
}

impl ScriptedFinder {
    /// Checks each entry against `dpi`: a conflict result must be a minimal
    /// conflict inside its universe, a `"none"` result must be conflict-free.
    pub fn new(
        dpi: &Dpi,
        entries: Vec<ScriptEntry>,
        reasoner: &mut Reasoner,
    ) -> Result<Self, ScriptError> {
        let n = dpi.num_axioms();
        for (index, e) in entries.iter().enumerate() {
            let invalid = |message: String| ScriptError::Invalid { index, message };
            if e.universe.max().is_some_and(|m| m > n) {
                return Err(invalid(format!("universe mentions an id above {n}")));
            }
            let acquired = crate::dpi::Acquired {
                positive: e.p_prime.clone(),
                negative: e.n_prime.clone(),
            };
            let problem = Problem::new(dpi, &acquired);
            match &e.result {
                ScriptedResult::Conflict(c) => {
                    if !c.is_subset(e.universe) {
                        return Err(invalid(format!(
                            "{} is not inside the universe",
                            c.as_conflict()
                        )));
                    }
                    if !problem.is_minimal_conflict(*c, reasoner) {
                        return Err(invalid(format!(
                            "{} is not a minimal conflict",
                            c.as_conflict()
                        )));
                    }
                }
                ScriptedResult::None(_) => {
                    if problem.is_conflict(e.universe, reasoner) {
                        return Err(invalid("universe contains a conflict".into()));
                    }
                }
            }
        }
        Ok(ScriptedFinder {
            entries,
            fallback: QuickXplainFinder,
            hits: 0,
        })
    }

    pub fn from_json(dpi: &Dpi, text: &str, reasoner: &mut Reasoner) -> Result<Self, ScriptError> {
        Self::new(dpi, serde_json::from_str(text)?, reasoner)
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    /// Number of lookups answered from the script.
    pub fn hits(&self) -> usize {
        self.hits
    }
}

impl ConflictFinder for ScriptedFinder {
    fn find_min_conflict(
        &mut self,
        problem: &Problem<'_>,
        universe: ComponentSet,
        reasoner: &mut Reasoner,
    ) -> Option<ComponentSet> {
        let acquired = problem.acquired;
        let hit = self.entries.iter().find(|e| {
            e.universe == universe
                && same_sentences(&e.p_prime, &acquired.positive)
                && same_sentences(&e.n_prime, &acquired.negative)
        });
        match hit {
            Some(e) => {
                self.hits += 1;
                match e.result {
                    ScriptedResult::Conflict(c) => Some(c),
                    ScriptedResult::None(_) => None,
                }
            }
            None => self.fallback.find_min_conflict(problem, universe, reasoner),
        }
    }
}
