use super::cnf::Lit;

/// A satisfiability decision procedure over dense variables `0..num_vars`.
pub trait SatBackend: Send + Sync {
    fn solve(&mut self, num_vars: usize, clauses: &[Vec<Lit>]) -> bool;
}

/// DPLL with unit propagation and chronological backtracking.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dpll;

const UNASSIGNED: i8 = 0;

fn value(assign: &[i8], l: Lit) -> i8 {
    let v = assign[l.var() as usize];
    if l.is_positive() {
        v
    } else {
        -v
    }
}

fn set(assign: &mut [i8], l: Lit) {
    assign[l.var() as usize] = if l.is_positive() { 1 } else { -1 };
}

enum Propagation {
    Conflict,
    // All clauses satisfied.
    Satisfied,
    // Open; carries a branching literal.
    Open(Lit),
}

fn propagate(clauses: &[Vec<Lit>], assign: &mut [i8]) -> Propagation {
    loop {
        let mut changed = false;
        let mut all_sat = true;
        let mut branch: Option<(usize, Lit)> = None;
        for clause in clauses {
            let mut unassigned = 0usize;
            let mut last = None;
            let mut satisfied = false;
            for &l in clause {
                match value(assign, l) {
                    1 => {
                        satisfied = true;
                        break;
                    }
                    UNASSIGNED => {
                        unassigned += 1;
                        last = Some(l);
                    }
                    _ => {}
                }
            }
            if satisfied {
                continue;
            }
            all_sat = false;
            match (unassigned, last) {
                (0, _) => return Propagation::Conflict,
                (1, Some(l)) => {
                    set(assign, l);
                    changed = true;
                }
                (n, Some(l)) => {
                    if branch.is_none_or(|(best, _)| n < best) {
                        branch = Some((n, l));
                    }
                }
                _ => unreachable!(),
            }
        }
        if !changed {
            return match branch {
                _ if all_sat => Propagation::Satisfied,
                Some((_, l)) => Propagation::Open(l),
                None => Propagation::Satisfied,
            };
        }
    }
}

fn search(clauses: &[Vec<Lit>], assign: &mut Vec<i8>) -> bool {
    match propagate(clauses, assign) {
        Propagation::Conflict => false,
        Propagation::Satisfied => true,
        Propagation::Open(l) => {
            for choice in [l, l.negate()] {
                let mut next = assign.clone();
                set(&mut next, choice);
                if search(clauses, &mut next) {
                    *assign = next;
                    return true;
                }
            }
            false
        }
    }
}

impl SatBackend for Dpll {
    fn solve(&mut self, num_vars: usize, clauses: &[Vec<Lit>]) -> bool {
        if clauses.iter().any(Vec::is_empty) {
            return false;
        }
        let mut assign = vec![UNASSIGNED; num_vars];
        search(clauses, &mut assign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl(lits: &[i32]) -> Vec<Lit> {
        lits.iter()
            .map(|&l| Lit::new(l.unsigned_abs() - 1, l > 0))
            .collect()
    }

    #[test]
    fn solves_small_instances() {
        let mut s = Dpll;
        assert!(s.solve(0, &[]));
        assert!(!s.solve(1, &[cl(&[1]), cl(&[-1])]));
        assert!(s.solve(3, &[cl(&[1, 2]), cl(&[-1, 3]), cl(&[-2, -3])]));
        // pigeonhole: 3 pigeons, 2 holes
        let p = |i: i32, h: i32| (i - 1) * 2 + h;
        let mut clauses = Vec::new();
        for i in 1..=3 {
            clauses.push(cl(&[p(i, 1), p(i, 2)]));
        }
        for h in 1..=2 {
            for i in 1..=3 {
                for j in (i + 1)..=3 {
                    clauses.push(cl(&[-p(i, h), -p(j, h)]));
                }
            }
        }
        assert!(!s.solve(6, &clauses));
    }

    #[test]
    fn empty_clause_is_unsatisfiable() {
        assert!(!Dpll.solve(2, &[cl(&[1]), vec![]]));
    }
}
