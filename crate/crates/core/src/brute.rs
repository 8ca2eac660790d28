//! Exhaustive subset enumeration: ground truth for the search engines.

use thiserror::Error;

use crate::components::ComponentSet;
use crate::dpi::Problem;
use crate::logic::Reasoner;

/// Default largest `|O|` the brute-force oracles accept.
pub const DEFAULT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{axioms} axioms exceed the brute-force cap of {cap}")]
pub struct CapExceeded {
    pub axioms: usize,
    pub cap: usize,
}

/// All `k`-subsets of `{1..n}` in increasing bitmask order.
fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = ComponentSet> {
    let limit = 1u64 << n;
    let mut next = if k == 0 {
        Some(0u64)
    } else {
        Some((1u64 << k) - 1)
    };
    if k > n {
        next = None;
    }
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let n = (((r ^ cur) >> 2) / c) | r;
            (n < limit).then_some(n)
        };
        Some(ComponentSet::from_bits(cur))
    })
}

fn minimal_by(
    problem: &Problem<'_>,
    cap: usize,
    mut holds: impl FnMut(ComponentSet) -> bool,
) -> Result<Vec<ComponentSet>, CapExceeded> {
    let n = problem.num_axioms();
    if n > cap {
        return Err(CapExceeded { axioms: n, cap });
    }
    let mut found: Vec<ComponentSet> = Vec::new();
    for k in 0..=n {
        for s in subsets_of_size(n, k) {
            if found.iter().any(|m| m.is_subset(s)) {
                continue;
            }
            if holds(s) {
                found.push(s);
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Every subset-minimal diagnosis, sorted.
pub fn minimal_diagnoses(
    problem: &Problem<'_>,
    reasoner: &mut Reasoner,
    cap: usize,
) -> Result<Vec<ComponentSet>, CapExceeded> {
    minimal_by(problem, cap, |s| problem.is_diagnosis(s, reasoner))
}

/// Every subset-minimal conflict, sorted.
pub fn minimal_conflicts(
    problem: &Problem<'_>,
    reasoner: &mut Reasoner,
    cap: usize,
) -> Result<Vec<ComponentSet>, CapExceeded> {
    minimal_by(problem, cap, |s| problem.is_conflict(s, reasoner))
}

/// Every subset-minimal hitting set of `collection`, sorted. Only ids in
/// `1..=n` are considered.
pub fn minimal_hitting_sets(collection: &[ComponentSet], n: usize) -> Vec<ComponentSet> {
    let mut found: Vec<ComponentSet> = Vec::new();
    for k in 0..=n {
        for s in subsets_of_size(n, k) {
            if found.iter().any(|m| m.is_subset(s)) {
                continue;
            }
            if collection.iter().all(|c| !c.is_disjoint(s)) {
                found.push(s);
            }
        }
    }
    found.sort();
    found
}
