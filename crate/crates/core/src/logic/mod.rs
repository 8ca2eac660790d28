//! Propositional logic: formulas, parsing, CNF conversion and SAT-backed
//! consistency/entailment checks.

mod cnf;
mod formula;
mod parser;
mod reasoner;
mod sat;

pub use cnf::{to_cnf, Clause, ClauseSet, CnfEncoder, Lit, Var};
pub use formula::Formula;
pub use parser::{parse_formula, ParseError};
pub use reasoner::Reasoner;
pub use sat::{Dpll, SatBackend};
