//! Sequential model-based diagnosis over propositional knowledge bases.
//!
//! Two hitting-set engines compute minimal diagnoses: [`hstree`], which
//! rebuilds its search tree for every query, and [`dynamic`], which keeps
//! the tree across measurements and repairs it. [`session`] runs the
//! measure-and-refine loop around either engine.

pub mod bench;
pub mod brute;
pub mod components;
pub mod conflict;
pub mod counters;
pub mod dpi;
pub mod dynamic;
pub mod fixtures;
pub mod generate;
pub mod hstree;
pub mod logic;
pub mod rank;
pub mod session;
pub mod verify;

pub use components::ComponentSet;
pub use counters::{Counters, Reasoning};
pub use dpi::{Acquired, Dpi, DpiError, Measurement, Problem};
pub use logic::{Formula, Reasoner};
pub use rank::{FaultProbabilities, QueueOrder, Ranking};
