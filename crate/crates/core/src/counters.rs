use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

use crate::components::ComponentSet;
use crate::conflict::ConflictFinder;
use crate::dpi::Problem;
use crate::logic::Reasoner;

/// Expensive-operation tallies.
///
/// `fc` and `cc_tree` count conflict searches made while building a search
/// tree, split by whether a conflict came back. `rd` counts redundancy
/// checks; the conflict searches they run internally are not counted
/// separately. `cc_session` counts diagnosis checks made between engine
/// runs when sorting previous diagnoses into still-valid and invalidated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counters {
    pub fc: u64,
    pub rd: u64,
    pub cc_tree: u64,
    pub cc_session: u64,
}

impl Counters {
    /// `fc + cc_tree`: every tree-internal conflict search.
    pub fn tree_searches(&self) -> u64 {
        self.fc + self.cc_tree
    }
}

impl Add for Counters {
    type Output = Counters;

    fn add(self, o: Counters) -> Counters {
        Counters {
            fc: self.fc + o.fc,
            rd: self.rd + o.rd,
            cc_tree: self.cc_tree + o.cc_tree,
            cc_session: self.cc_session + o.cc_session,
        }
    }
}

impl AddAssign for Counters {
    fn add_assign(&mut self, o: Counters) {
        *self = *self + o;
    }
}

impl Sub for Counters {
    type Output = Counters;

    fn sub(self, o: Counters) -> Counters {
        Counters {
            fc: self.fc - o.fc,
            rd: self.rd - o.rd,
            cc_tree: self.cc_tree - o.cc_tree,
            cc_session: self.cc_session - o.cc_session,
        }
    }
}

/// The reasoning services an engine needs, with counting built in.
pub struct Reasoning {
    pub reasoner: Reasoner,
    pub finder: Box<dyn ConflictFinder>,
    pub counters: Counters,
}

impl std::fmt::Debug for Reasoning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reasoning")
            .field("reasoner", &self.reasoner)
            .field("counters", &self.counters)
            .finish_non_exhaustive()
    }
}

impl Reasoning {
    pub fn new(finder: Box<dyn ConflictFinder>) -> Self {
        Reasoning {
            reasoner: Reasoner::new(),
            finder,
            counters: Counters::default(),
        }
    }

    /// Tree-internal conflict search; charged to `fc` or `cc_tree`.
    pub fn tree_conflict(
        &mut self,
        problem: &Problem<'_>,
        universe: ComponentSet,
    ) -> Option<ComponentSet> {
        let found = self.uncounted_conflict(problem, universe);
        match found {
            Some(_) => self.counters.fc += 1,
            None => self.counters.cc_tree += 1,
        }
        found
    }

    /// Conflict search not charged to any counter.
    pub fn uncounted_conflict(
        &mut self,
        problem: &Problem<'_>,
        universe: ComponentSet,
    ) -> Option<ComponentSet> {
        self.finder
            .find_min_conflict(problem, universe, &mut self.reasoner)
    }
}
