//! Seeded random problem instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{ComponentSet, MAX_COMPONENTS};
use crate::dpi::{Acquired, Dpi, Problem};
use crate::logic::{Formula, Reasoner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("bad generator settings: {0}")]
    Spec(String),
    #[error("no valid instance after {0} attempts")]
    Exhausted(usize),
}

/// Relative weights of the axiom shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeMix {
    /// `l`
    pub literal: u32,
    /// `l1 -> l2`
    pub implication: u32,
    /// `l1 -> l2 | l3` or `l1 & l2 -> l3`
    pub ternary: u32,
}

impl Default for ShapeMix {
    fn default() -> Self {
        ShapeMix {
            literal: 1,
            implication: 4,
            ternary: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomDpiSpec {
    pub axioms: usize,
    pub vars: usize,
    pub seed: u64,
    #[serde(default)]
    pub shape: ShapeMix,
    /// Random literals placed in `N`.
    #[serde(default = "default_negatives")]
    pub negatives: usize,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn default_negatives() -> usize {
    1
}

fn default_attempts() -> usize {
    1000
}

impl RandomDpiSpec {
    pub fn new(axioms: usize, vars: usize, seed: u64) -> Self {
        RandomDpiSpec {
            axioms,
            vars,
            seed,
            shape: ShapeMix::default(),
            negatives: default_negatives(),
            max_attempts: default_attempts(),
        }
    }

    fn check(&self) -> Result<(), GenerateError> {
        let bad = |m: String| Err(GenerateError::Spec(m));
        if self.axioms == 0 || self.axioms > MAX_COMPONENTS {
            return bad(format!(
                "axiom count must be in 1..={MAX_COMPONENTS}, got {}",
                self.axioms
            ));
        }
        if self.vars == 0 || self.vars > 26 {
            return bad(format!(
                "variable count must be in 1..=26, got {}",
                self.vars
            ));
        }
        if self.negatives > self.vars {
            return bad("more negative measurements than variables".into());
        }
        let s = self.shape;
        if s.literal + s.implication + s.ternary == 0 {
            return bad("all shape weights are zero".into());
        }
        if self.vars < 3 && s.literal == 0 && (self.vars < 2 || s.implication == 0) {
            return bad("too few variables for the requested shapes".into());
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        Ok(())
    }
}

fn var_name(i: usize) -> String {
    ((b'A' + i as u8) as char).to_string()
}

fn literal(rng: &mut impl Rng, v: usize) -> Formula {
    Formula::literal(var_name(v), rng.gen_bool(0.5))
}

fn axiom(rng: &mut impl Rng, spec: &RandomDpiSpec) -> Formula {
    let s = spec.shape;
    let ternary = if spec.vars >= 3 { s.ternary } else { 0 };
    let implication = if spec.vars >= 2 { s.implication } else { 0 };
    let total = s.literal + implication + ternary;
    let pick = rng.gen_range(0..total);
    let mut vars: Vec<usize> = (0..spec.vars).collect();
    vars.shuffle(rng);
    if pick < s.literal {
        literal(rng, vars[0])
    } else if pick < s.literal + implication {
        Formula::implies(literal(rng, vars[0]), literal(rng, vars[1]))
    } else if rng.gen_bool(0.5) {
        Formula::implies(
            literal(rng, vars[0]),
            Formula::or(vec![literal(rng, vars[1]), literal(rng, vars[2])]),
        )
    } else {
        Formula::implies(
            Formula::and(vec![literal(rng, vars[0]), literal(rng, vars[1])]),
            literal(rng, vars[2]),
        )
    }
}

/// Draws instances until one passes validation. The result depends only
/// on the spec.
pub fn generate(spec: &RandomDpiSpec) -> Result<Dpi, GenerateError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut reasoner = Reasoner::new();
    for _ in 0..spec.max_attempts {
        let axioms = (0..spec.axioms).map(|_| axiom(&mut rng, spec)).collect();
        let mut vars: Vec<usize> = (0..spec.vars).collect();
        vars.shuffle(&mut rng);
        let negative = vars[..spec.negatives]
            .iter()
            .map(|&v| literal(&mut rng, v))
            .collect();
        let dpi = Dpi {
            axioms,
            background: Vec::new(),
            positive: Vec::new(),
            negative,
        };
        if dpi.validate(&mut reasoner).is_ok() {
            return Ok(dpi);
        }
    }
    Err(GenerateError::Exhausted(spec.max_attempts))
}

/// A uniformly shuffled greedy shrink of the full axiom set: a random
/// minimal diagnosis, usable as the planted fault of a simulated session.
pub fn random_minimal_diagnosis(dpi: &Dpi, seed: u64, reasoner: &mut Reasoner) -> ComponentSet {
    let acquired = Acquired::new();
    let problem = Problem::new(dpi, &acquired);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = dpi.all_components().to_vec();
    order.shuffle(&mut rng);
    let mut d = dpi.all_components();
    for id in order {
        let mut smaller = d;
        smaller.remove(id);
        if problem.is_diagnosis(smaller, reasoner) {
            d = smaller;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute;

    #[test]
    fn same_seed_same_instance() {
        let spec = RandomDpiSpec::new(8, 5, 1);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a, generate(&RandomDpiSpec::new(8, 5, 2)).unwrap());
    }

    #[test]
    fn instances_are_valid_and_have_diagnoses() {
        let mut r = Reasoner::new();
        for seed in 0..30 {
            let dpi = generate(&RandomDpiSpec::new(6, 4, seed)).unwrap();
            dpi.validate(&mut r).unwrap();
            let acq = Acquired::new();
            let p = Problem::new(&dpi, &acq);
            let sol = brute::minimal_diagnoses(&p, &mut r, brute::DEFAULT_CAP).unwrap();
            assert!(!sol.is_empty());
            let planted = random_minimal_diagnosis(&dpi, seed, &mut r);
            assert!(sol.contains(&planted));
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(matches!(
            generate(&RandomDpiSpec::new(0, 5, 1)),
            Err(GenerateError::Spec(_))
        ));
        assert!(matches!(
            generate(&RandomDpiSpec::new(3, 0, 1)),
            Err(GenerateError::Spec(_))
        ));
        let mut spec = RandomDpiSpec::new(3, 2, 1);
        spec.negatives = 3;
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn hopeless_spec_hits_the_attempt_cap() {
        // a single positive literal axiom can never conflict with `N = {}`
        let mut spec = RandomDpiSpec::new(1, 1, 3);
        spec.negatives = 0;
        spec.max_attempts = 5;
        assert_eq!(generate(&spec), Err(GenerateError::Exhausted(5)));
    }
}
