use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::formula::Formula;

/// Variable index inside a [`ClauseSet`] or an encoder's variable table.
pub type Var = u32;

/// A literal packed as `var << 1 | negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var << 1 | u32::from(!positive))
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

pub type Clause = Vec<Lit>;

/// Clauses over a variable table. Auxiliary (Tseitin) variables have no name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseSet {
    pub clauses: Vec<Clause>,
    pub names: Vec<Option<String>>,
}

impl ClauseSet {
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Clauses rendered as sets of `(name, polarity)`; auxiliary variables
    /// are named `_aux<n>`.
    pub fn named_clauses(&self) -> BTreeSet<BTreeSet<(String, bool)>> {
        self.clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|l| (self.var_name(l.var()), l.is_positive()))
                    .collect()
            })
            .collect()
    }

    fn var_name(&self, v: Var) -> String {
        match &self.names[v as usize] {
            Some(n) => n.clone(),
            None => format!("_aux{v}"),
        }
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            f.write_str("(")?;
            for (j, l) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(" | ")?;
                }
                if !l.is_positive() {
                    f.write_str("!")?;
                }
                f.write_str(&self.var_name(l.var()))?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

// Negation normal form over encoder variables.
#[derive(Debug, Clone)]
enum Nnf {
    Const(bool),
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

/// Largest clause count a disjunction may produce by distribution before the
/// encoder switches to auxiliary variables.
const DISTRIBUTION_LIMIT: usize = 32;

/// Converts formulas to clauses over a shared, growing variable table.
///
/// Small formulas are distributed into their exact CNF. Disjunctions whose
/// distribution would exceed [`DISTRIBUTION_LIMIT`] clauses get one-sided
/// Tseitin definitions instead, which keeps the output equisatisfiable.
#[derive(Debug, Clone, Default)]
pub struct CnfEncoder {
    index: HashMap<String, Var>,
    names: Vec<Option<String>>,
}

impl CnfEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_for(&mut self, name: &str) -> Var {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.names.len() as Var;
        self.names.push(Some(name.to_string()));
        self.index.insert(name.to_string(), v);
        v
    }

    fn fresh(&mut self) -> Var {
        let v = self.names.len() as Var;
        self.names.push(None);
        v
    }

    /// Appends the clauses of `f` to `out`.
    pub fn encode(&mut self, f: &Formula, out: &mut Vec<Clause>) {
        let nnf = self.nnf(f, true, out);
        let clauses = self.clauses(nnf, out);
        out.extend(clauses);
    }

    /// Consumes the encoder into a standalone clause set.
    pub fn into_clause_set(self, clauses: Vec<Clause>) -> ClauseSet {
        ClauseSet {
            clauses,
            names: self.names,
        }
    }

    fn nnf(&mut self, f: &Formula, positive: bool, defs: &mut Vec<Clause>) -> Nnf {
        match f {
            Formula::True => Nnf::Const(positive),
            Formula::False => Nnf::Const(!positive),
            Formula::Var(name) => Nnf::Lit(Lit::new(self.var_for(name), positive)),
            Formula::Not(inner) => self.nnf(inner, !positive, defs),
            Formula::And(cs) | Formula::Or(cs) => {
                let conj = matches!(f, Formula::And(_)) == positive;
                let children = cs.iter().map(|c| self.nnf(c, positive, defs)).collect();
                if conj {
                    Nnf::And(children)
                } else {
                    Nnf::Or(children)
                }
            }
            Formula::Implies(l, r) => {
                if positive {
                    Nnf::Or(vec![self.nnf(l, false, defs), self.nnf(r, true, defs)])
                } else {
                    Nnf::And(vec![self.nnf(l, true, defs), self.nnf(r, false, defs)])
                }
            }
            Formula::Iff(l, r) => {
                // Name compound sides once so nested biconditionals stay linear.
                let a = self.atom_for(l, defs);
                let b = self.atom_for(r, defs);
                if positive {
                    Nnf::And(vec![
                        Nnf::Or(vec![Nnf::Lit(a.negate()), Nnf::Lit(b)]),
                        Nnf::Or(vec![Nnf::Lit(a), Nnf::Lit(b.negate())]),
                    ])
                } else {
                    Nnf::And(vec![
                        Nnf::Or(vec![Nnf::Lit(a), Nnf::Lit(b)]),
                        Nnf::Or(vec![Nnf::Lit(a.negate()), Nnf::Lit(b.negate())]),
                    ])
                }
            }
        }
    }

    // A literal equivalent to `f`, adding a two-sided definition if needed.
    fn atom_for(&mut self, f: &Formula, defs: &mut Vec<Clause>) -> Lit {
        match f {
            Formula::Var(name) => Lit::new(self.var_for(name), true),
            Formula::Not(inner) if matches!(**inner, Formula::Var(_)) => {
                self.atom_for(inner, defs).negate()
            }
            _ => {
                let x = Lit::new(self.fresh(), true);
                // x -> f
                let pos = self.nnf(f, true, defs);
                for mut c in self.clauses(pos, defs) {
                    c.push(x.negate());
                    push_normalized(defs, c);
                }
                // !x -> !f
                let neg = self.nnf(f, false, defs);
                for mut c in self.clauses(neg, defs) {
                    c.push(x);
                    push_normalized(defs, c);
                }
                x
            }
        }
    }

    fn clauses(&mut self, nnf: Nnf, defs: &mut Vec<Clause>) -> Vec<Clause> {
        match nnf {
            Nnf::Const(true) => vec![],
            Nnf::Const(false) => vec![vec![]],
            Nnf::Lit(l) => vec![vec![l]],
            Nnf::And(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    for clause in self.clauses(c, defs) {
                        push_normalized(&mut out, clause);
                    }
                }
                out
            }
            Nnf::Or(cs) => {
                let mut parts: Vec<Vec<Clause>> = Vec::with_capacity(cs.len());
                for c in cs {
                    let part = self.clauses(c, defs);
                    if part.is_empty() {
                        // a true disjunct satisfies the whole disjunction
                        return vec![];
                    }
                    parts.push(part);
                }
                let product = parts
                    .iter()
                    .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
                    .unwrap_or(usize::MAX);
                if product > DISTRIBUTION_LIMIT {
                    for part in parts.iter_mut().filter(|p| p.len() > 1) {
                        let x = Lit::new(self.fresh(), true);
                        for mut c in std::mem::take(part) {
                            c.push(x.negate());
                            push_normalized(defs, c);
                        }
                        *part = vec![vec![x]];
                    }
                }
                let mut acc: Vec<Clause> = vec![vec![]];
                for part in parts {
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for a in &acc {
                        for b in &part {
                            let mut c = a.clone();
                            c.extend_from_slice(b);
                            next.push(c);
                        }
                    }
                    acc = next;
                }
                let mut out = Vec::new();
                for c in acc {
                    push_normalized(&mut out, c);
                }
                out
            }
        }
    }
}

// Sorts and deduplicates literals; drops tautologies and repeated clauses.
fn push_normalized(out: &mut Vec<Clause>, mut clause: Clause) {
    clause.sort_unstable();
    clause.dedup();
    if clause.windows(2).any(|w| w[0].var() == w[1].var()) {
        return;
    }
    if !out.contains(&clause) {
        out.push(clause);
    }
}

/// Converts the conjunction of `sentences` to an equisatisfiable clause set.
pub fn to_cnf<'a>(sentences: impl IntoIterator<Item = &'a Formula>) -> ClauseSet {
    let mut enc = CnfEncoder::new();
    let mut clauses = Vec::new();
    for s in sentences {
        enc.encode(s, &mut clauses);
    }
    let mut normalized = Vec::new();
    for c in clauses {
        push_normalized(&mut normalized, c);
    }
    enc.into_clause_set(normalized)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(spec: &[&[(&str, bool)]]) -> BTreeSet<BTreeSet<(String, bool)>> {
        spec.iter()
            .map(|c| c.iter().map(|(n, p)| (n.to_string(), *p)).collect())
            .collect()
    }

    #[test]
    fn example_axioms_convert_without_auxiliaries() {
        let sentences: Vec<Formula> = ["A -> !C", "B -> C", "A -> B | C"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let cnf = to_cnf(&sentences);
        assert_eq!(
            cnf.named_clauses(),
            named(&[
                &[("A", false), ("C", false)],
                &[("B", false), ("C", true)],
                &[("A", false), ("B", true), ("C", true)],
            ])
        );
    }

    #[test]
    fn empty_input_gives_empty_clause_set() {
        let cnf = to_cnf(std::iter::empty());
        assert!(cnf.is_empty());
    }

    #[test]
    fn contradiction_yields_empty_clause_pair() {
        let f: Formula = "A & !A".parse().unwrap();
        let cnf = to_cnf([&f]);
        assert_eq!(
            cnf.named_clauses(),
            named(&[&[("A", true)], &[("A", false)]])
        );
        let f: Formula = "false".parse().unwrap();
        let cnf = to_cnf([&f]);
        assert_eq!(cnf.clauses, vec![Vec::<Lit>::new()]);
    }

    #[test]
    fn large_disjunction_falls_back_to_definitions() {
        let f: Formula = "(A & B & C) | (D & E & F) | (G & H & I) | (J & K & L)"
            .parse()
            .unwrap();
        let cnf = to_cnf([&f]);
        // 81 clauses by distribution, far fewer with definitions
        assert!(cnf.clauses.len() < 20);
        assert!(cnf.names.iter().any(Option::is_none));
    }

    #[test]
    fn literals_round_trip_polarity() {
        let l = Lit::new(7, false);
        assert_eq!(l.var(), 7);
        assert!(!l.is_positive());
        assert!(l.negate().is_positive());
        assert_eq!(l.negate().negate(), l);
    }
}
