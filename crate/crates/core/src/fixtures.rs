//! The five-axiom example problem and its golden scenario files.

use crate::dpi::{Dpi, Measurement};

pub const EXAMPLE_DPI: &str = include_str!("../../../data/example.dpi");
pub const EXAMPLE_SCRIPT: &str = include_str!("../../../data/example.script.json");
pub const EXAMPLE_CONFLICTS: &str = include_str!("../../../data/example.conflicts.json");

pub fn example_dpi() -> Dpi {
    Dpi::parse(EXAMPLE_DPI).expect("bundled example is valid")
}

/// The three measurements that isolate `[a1,a4]`.
pub fn example_script() -> Vec<Measurement> {
    serde_json::from_str(EXAMPLE_SCRIPT).expect("bundled script is valid")
}
