use std::collections::HashMap;
use std::fmt;

use super::cnf::{Clause, CnfEncoder, Lit};
use super::formula::Formula;
use super::sat::{Dpll, SatBackend};

/// Consistency and entailment checks with a call counter.
///
/// Each formula is compiled to clauses once and cached; a check assembles the
/// cached clauses, renumbers their variables densely and hands them to the
/// SAT backend. Every satisfiability query increments [`Reasoner::checks`].
pub struct Reasoner {
    encoder: CnfEncoder,
    compiled: HashMap<Formula, (usize, usize)>,
    arena: Vec<Clause>,
    backend: Box<dyn SatBackend>,
    checks: u64,
    // dense renumbering scratch space
    remap: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl fmt::Debug for Reasoner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reasoner")
            .field("checks", &self.checks)
            .field("compiled", &self.compiled.len())
            .finish()
    }
}

impl Default for Reasoner {
    fn default() -> Self {
        Self::new()
    }
}

impl Reasoner {
    pub fn new() -> Self {
        Self::with_backend(Box::new(Dpll))
    }

    pub fn with_backend(backend: Box<dyn SatBackend>) -> Self {
        Reasoner {
            encoder: CnfEncoder::new(),
            compiled: HashMap::new(),
            arena: Vec::new(),
            backend,
            checks: 0,
            remap: Vec::new(),
            stamp: Vec::new(),
            epoch: 0,
        }
    }

    /// Number of satisfiability queries answered so far.
    pub fn checks(&self) -> u64 {
        self.checks
    }

    fn compile(&mut self, f: &Formula) -> (usize, usize) {
        if let Some(&range) = self.compiled.get(f) {
            return range;
        }
        let mut clauses = Vec::new();
        self.encoder.encode(f, &mut clauses);
        let start = self.arena.len();
        self.arena.extend(clauses);
        let range = (start, self.arena.len());
        self.compiled.insert(f.clone(), range);
        range
    }

    /// True iff the conjunction of `sentences` is satisfiable.
    pub fn is_consistent<'a>(&mut self, sentences: impl IntoIterator<Item = &'a Formula>) -> bool {
        self.checks += 1;
        let ranges: Vec<_> = sentences.into_iter().map(|f| self.compile(f)).collect();

        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let n = self.encoder.num_vars();
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.remap.resize(n, 0);
        }

        let mut dense_vars = 0u32;
        let mut clauses: Vec<Clause> = Vec::new();
        for (start, end) in ranges {
            for clause in &self.arena[start..end] {
                let mut out = Vec::with_capacity(clause.len());
                for &l in clause {
                    let v = l.var() as usize;
                    if self.stamp[v] != self.epoch {
                        self.stamp[v] = self.epoch;
                        self.remap[v] = dense_vars;
                        dense_vars += 1;
                    }
                    out.push(Lit::new(self.remap[v], l.is_positive()));
                }
                clauses.push(out);
            }
        }
        self.backend.solve(dense_vars as usize, &clauses)
    }

    /// True iff `sentences` entail `query`, i.e. `sentences ∪ {¬query}` is
    /// unsatisfiable.
    pub fn entails<'a>(
        &mut self,
        sentences: impl IntoIterator<Item = &'a Formula>,
        query: &Formula,
    ) -> bool {
        let negated = Formula::not(query.clone());
        let mut all: Vec<&Formula> = sentences.into_iter().collect();
        all.push(&negated);
        !self.is_consistent(all)
    }
}
