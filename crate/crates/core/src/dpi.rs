//! Diagnosis problem instances, acquired measurements and the validity
//! predicates for diagnoses and conflicts.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{ComponentSet, MAX_COMPONENTS};
use crate::logic::{parse_formula, Formula, ParseError, Reasoner};

#[derive(Debug, Error)]
pub enum DpiError {
    #[error("line {line}: {source}")]
    Syntax {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasurementError {
    #[error("measurement `{0}` was already acquired")]
    Duplicate(Formula),
}

/// A diagnosis problem instance: component axioms `O` (ids `1..=|O|`),
/// background knowledge `B`, positive measurements `P` and negative
/// measurements `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dpi {
    pub axioms: Vec<Formula>,
    #[serde(default)]
    pub background: Vec<Formula>,
    #[serde(default)]
    pub positive: Vec<Formula>,
    #[serde(default)]
    pub negative: Vec<Formula>,
}

/// A measurement outcome: `true` puts the sentence in `P'`, `false` in `N'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub sentence: Formula,
    pub outcome: bool,
}

impl Measurement {
    pub fn new(sentence: Formula, outcome: bool) -> Self {
        Measurement { sentence, outcome }
    }
}

/// Measurements acquired during a session, kept apart from the initial
/// problem.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acquired {
    pub positive: Vec<Formula>,
    pub negative: Vec<Formula>,
}

impl Acquired {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn contains(&self, sentence: &Formula) -> bool {
        self.positive
            .iter()
            .chain(&self.negative)
            .any(|s| s.same_sentence(sentence))
    }

    pub fn add(&mut self, m: Measurement) -> Result<(), MeasurementError> {
        if self.contains(&m.sentence) {
            return Err(MeasurementError::Duplicate(m.sentence));
        }
        if m.outcome {
            self.positive.push(m.sentence);
        } else {
            self.negative.push(m.sentence);
        }
        Ok(())
    }

    /// Functional form of [`Acquired::add`].
    pub fn with(&self, m: Measurement) -> Result<Acquired, MeasurementError> {
        let mut next = self.clone();
        next.add(m)?;
        Ok(next)
    }
}

impl Dpi {
    pub fn new(axioms: Vec<Formula>) -> Self {
        Dpi {
            axioms,
            background: Vec::new(),
            positive: Vec::new(),
            negative: Vec::new(),
        }
    }

    pub fn num_axioms(&self) -> usize {
        self.axioms.len()
    }

    pub fn all_components(&self) -> ComponentSet {
        ComponentSet::full(self.axioms.len())
    }

    /// Axiom with 1-based id `id`.
    pub fn axiom(&self, id: usize) -> &Formula {
        &self.axioms[id - 1]
    }

    /// Parses the sectioned text format (`[O]`, `[B]`, `[P]`, `[N]`) and
    /// validates the result.
    pub fn parse(text: &str) -> Result<Dpi, DpiError> {
        let dpi = Self::parse_unchecked(text)?;
        dpi.validate(&mut Reasoner::new())?;
        Ok(dpi)
    }

    /// Parses without the semantic checks of [`Dpi::validate`].
    pub fn parse_unchecked(text: &str) -> Result<Dpi, DpiError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Section {
            None,
            O,
            B,
            P,
            N,
        }
        let mut dpi = Dpi::new(Vec::new());
        let mut section = Section::None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if content.starts_with('[') {
                section = match content {
                    "[O]" => Section::O,
                    "[B]" => Section::B,
                    "[P]" => Section::P,
                    "[N]" => Section::N,
                    other => {
                        return Err(DpiError::Format {
                            line,
                            message: format!("unknown section `{other}`"),
                        })
                    }
                };
                continue;
            }
            let parse =
                |s: &str| parse_formula(s).map_err(|source| DpiError::Syntax { line, source });
            match section {
                Section::None => {
                    return Err(DpiError::Format {
                        line,
                        message: "formula outside of a section".into(),
                    })
                }
                Section::O => {
                    let Some((id, body)) = content.split_once(':') else {
                        return Err(DpiError::Format {
                            line,
                            message: "expected `aN: formula`".into(),
                        });
                    };
                    let expected = format!("a{}", dpi.axioms.len() + 1);
                    if id.trim() != expected {
                        return Err(DpiError::Format {
                            line,
                            message: format!(
                                "expected axiom id `{expected}`, found `{}`",
                                id.trim()
                            ),
                        });
                    }
                    dpi.axioms.push(parse(body)?);
                }
                Section::B => dpi.background.push(parse(content)?),
                Section::P => dpi.positive.push(parse(content)?),
                Section::N => dpi.negative.push(parse(content)?),
            }
        }
        if dpi.axioms.len() > MAX_COMPONENTS {
            return Err(DpiError::Invalid(format!(
                "{} axioms exceed the limit of {MAX_COMPONENTS}",
                dpi.axioms.len()
            )));
        }
        Ok(dpi)
    }

    /// Renders the text format accepted by [`Dpi::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("[O]\n");
        for (i, a) in self.axioms.iter().enumerate() {
            let _ = writeln!(out, "a{}: {a}", i + 1);
        }
        for (header, items) in [
            ("[B]", &self.background),
            ("[P]", &self.positive),
            ("[N]", &self.negative),
        ] {
            let _ = writeln!(out, "{header}");
            for f in items {
                let _ = writeln!(out, "{f}");
            }
        }
        out
    }

    /// Checks that `B ∪ P` is consistent, entails no negative measurement,
    /// and that the axioms are actually faulty (the empty set is not a
    /// diagnosis).
    pub fn validate(&self, reasoner: &mut Reasoner) -> Result<(), DpiError> {
        if self.axioms.is_empty() {
            return Err(DpiError::Invalid("no component axioms".into()));
        }
        if self.axioms.len() > MAX_COMPONENTS {
            return Err(DpiError::Invalid(format!(
                "{} axioms exceed the limit of {MAX_COMPONENTS}",
                self.axioms.len()
            )));
        }
        let acquired = Acquired::new();
        let problem = Problem::new(self, &acquired);
        if problem.is_conflict(ComponentSet::EMPTY, reasoner) {
            return Err(DpiError::Invalid(
                "background and positive measurements are inconsistent or entail a negative measurement"
                    .into(),
            ));
        }
        if problem.is_diagnosis(ComponentSet::EMPTY, reasoner) {
            return Err(DpiError::Invalid(
                "the empty set is a diagnosis; nothing to diagnose".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Dpi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A problem together with the measurements acquired so far: the instance
/// `⟨O, B, P ∪ P', N ∪ N'⟩` that diagnoses and conflicts refer to.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub dpi: &'a Dpi,
    pub acquired: &'a Acquired,
    base: Vec<&'a Formula>,
    negatives: Vec<&'a Formula>,
}

impl<'a> Problem<'a> {
    pub fn new(dpi: &'a Dpi, acquired: &'a Acquired) -> Self {
        let base = dpi
            .background
            .iter()
            .chain(&dpi.positive)
            .chain(&acquired.positive)
            .collect();
        let negatives = dpi.negative.iter().chain(&acquired.negative).collect();
        Problem {
            dpi,
            acquired,
            base,
            negatives,
        }
    }

    pub fn num_axioms(&self) -> usize {
        self.dpi.axioms.len()
    }

    pub fn all_components(&self) -> ComponentSet {
        self.dpi.all_components()
    }

    /// `B ∪ P ∪ P'`.
    pub fn base(&self) -> &[&'a Formula] {
        &self.base
    }

    /// `N ∪ N'`.
    pub fn negatives(&self) -> &[&'a Formula] {
        &self.negatives
    }

    /// Axioms of `components` followed by `B ∪ P ∪ P'`.
    pub fn theory(&self, components: ComponentSet) -> Vec<&'a Formula> {
        components
            .iter()
            .map(|id| self.dpi.axiom(id))
            .chain(self.base.iter().copied())
            .collect()
    }

    /// True iff `sentences` are inconsistent or entail some negative
    /// measurement.
    pub fn violates(&self, sentences: &[&Formula], reasoner: &mut Reasoner) -> bool {
        if !reasoner.is_consistent(sentences.iter().copied()) {
            return true;
        }
        self.negatives
            .iter()
            .any(|n| reasoner.entails(sentences.iter().copied(), n))
    }

    pub fn is_conflict(&self, c: ComponentSet, reasoner: &mut Reasoner) -> bool {
        self.violates(&self.theory(c), reasoner)
    }

    pub fn is_diagnosis(&self, d: ComponentSet, reasoner: &mut Reasoner) -> bool {
        !self.is_conflict(self.all_components().difference(d), reasoner)
    }

    pub fn is_minimal_conflict(&self, c: ComponentSet, reasoner: &mut Reasoner) -> bool {
        self.is_conflict(c, reasoner)
            && c.iter().all(|id| {
                let mut smaller = c;
                smaller.remove(id);
                !self.is_conflict(smaller, reasoner)
            })
    }

    pub fn is_minimal_diagnosis(&self, d: ComponentSet, reasoner: &mut Reasoner) -> bool {
        self.is_diagnosis(d, reasoner)
            && d.iter().all(|id| {
                let mut smaller = d;
                smaller.remove(id);
                !self.is_diagnosis(smaller, reasoner)
            })
    }
}
