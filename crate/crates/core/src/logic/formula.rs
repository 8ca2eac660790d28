use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A propositional formula.
///
/// Conjunctions and disjunctions are n-ary. The parser only produces them with
/// at least two children; a parenthesised conjunct nested inside a conjunction
/// stays nested so that printing and re-parsing is a fixpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Var(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(children: Vec<Formula>) -> Formula {
        Formula::And(children)
    }

    pub fn or(children: Vec<Formula>) -> Formula {
        Formula::Or(children)
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    /// Literal helper: `v` when `positive`, `!v` otherwise.
    pub fn literal(name: impl Into<String>, positive: bool) -> Formula {
        let v = Formula::var(name);
        if positive {
            v
        } else {
            Formula::not(v)
        }
    }

    /// Returns a copy in which the children of every conjunction and
    /// disjunction are sorted. Two formulas denote the same sentence iff
    /// their canonical forms are structurally equal.
    pub fn canonical(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Var(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.canonical()),
            Formula::And(cs) => {
                let mut cs: Vec<_> = cs.iter().map(Formula::canonical).collect();
                cs.sort();
                Formula::And(cs)
            }
            Formula::Or(cs) => {
                let mut cs: Vec<_> = cs.iter().map(Formula::canonical).collect();
                cs.sort();
                Formula::Or(cs)
            }
            Formula::Implies(l, r) => Formula::implies(l.canonical(), r.canonical()),
            Formula::Iff(l, r) => Formula::iff(l.canonical(), r.canonical()),
        }
    }

    /// Sentence identity: structural equality modulo the order of
    /// conjuncts and disjuncts.
    pub fn same_sentence(&self, other: &Formula) -> bool {
        self == other || self.canonical() == other.canonical()
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    pub(crate) fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Not(f) => f.collect_variables(out),
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.collect_variables(out);
                }
            }
            Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
        }
    }

    /// Truth value under an assignment given as a lookup function.
    pub fn eval(&self, value: &impl Fn(&str) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(v) => value(v),
            Formula::Not(f) => !f.eval(value),
            Formula::And(cs) => cs.iter().all(|c| c.eval(value)),
            Formula::Or(cs) => cs.iter().any(|c| c.eval(value)),
            Formula::Implies(l, r) => !l.eval(value) || r.eval(value),
            Formula::Iff(l, r) => l.eval(value) == r.eval(value),
        }
    }

    // Binding strength used by the printer; higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(cs) if cs.len() >= 2 => 3,
            Formula::And(cs) if cs.len() >= 2 => 4,
            // Degenerate n-ary nodes have no infix syntax; they print as
            // their single child or a constant.
            Formula::Or(cs) | Formula::And(cs) if cs.len() == 1 => cs[0].precedence(),
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Var(v) => f.write_str(v),
            Formula::Not(inner) => {
                f.write_str("!")?;
                inner.fmt_child(f, inner.precedence() < 5)
            }
            Formula::And(cs) | Formula::Or(cs) if cs.is_empty() => {
                let empty_and = matches!(self, Formula::And(_));
                f.write_str(if empty_and { "true" } else { "false" })
            }
            Formula::And(cs) | Formula::Or(cs) if cs.len() == 1 => write!(f, "{}", cs[0]),
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    c.fmt_child(f, c.precedence() <= 4)?;
                }
                Ok(())
            }
            Formula::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    c.fmt_child(f, c.precedence() <= 3)?;
                }
                Ok(())
            }
            Formula::Implies(l, r) => {
                // right-associative
                l.fmt_child(f, l.precedence() <= 2)?;
                f.write_str(" -> ")?;
                r.fmt_child(f, r.precedence() < 2)
            }
            Formula::Iff(l, r) => {
                // left-associative
                l.fmt_child(f, l.precedence() < 1)?;
                f.write_str(" <-> ")?;
                r.fmt_child(f, r.precedence() <= 1)
            }
        }
    }
}

/// Formulas travel as strings in the proplogic grammar in every JSON payload.
impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn prints_with_minimal_parentheses() {
        assert_eq!(p("A -> !B").to_string(), "A -> !B");
        assert_eq!(p("(A -> B) -> C").to_string(), "(A -> B) -> C");
        assert_eq!(p("A -> (B -> C)").to_string(), "A -> B -> C");
        assert_eq!(p("!(A & B) | C").to_string(), "!(A & B) | C");
        assert_eq!(p("(A | B) & C").to_string(), "(A | B) & C");
        assert_eq!(p("A <-> (B <-> C)").to_string(), "A <-> (B <-> C)");
        assert_eq!(p("(A <-> B) <-> C").to_string(), "A <-> B <-> C");
    }

    #[test]
    fn same_sentence_ignores_operand_order() {
        assert!(p("A | B").same_sentence(&p("B | A")));
        assert!(p("X -> A & B").same_sentence(&p("X -> B & A")));
        assert!(!p("A -> B").same_sentence(&p("B -> A")));
    }

    #[test]
    fn serde_uses_the_text_grammar() {
        let f = p("A -> B | C");
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, "\"A -> B | C\"");
        let back: Formula = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn eval_follows_connective_semantics() {
        let f = p("A -> B | C");
        let val = |a: bool, b: bool, c: bool| {
            f.eval(&|v: &str| match v {
                "A" => a,
                "B" => b,
                _ => c,
            })
        };
        assert!(val(false, false, false));
        assert!(!val(true, false, false));
        assert!(val(true, false, true));
    }
}
