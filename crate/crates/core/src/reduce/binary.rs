//! Compaction of binary clauses through head/tail implications.
//!
//! Each binary clause `{a, b}` with `a < b` in literal order is read as the
//! implication `a ∨ [b]`; clauses sharing a head are grouped into
//! `a ∨ [b1 ∧ … ∧ bn]`. The tails form a transaction database. A frequent tail
//! set `I = {y1..yn}` covered by `k` implications is replaced by a fresh `z`
//! in each of those tails, and `¬z ∨ [y1 ∧ … ∧ yn]` is added, which turns `n·k`
//! binary clauses into `k + n`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{
    build_overlap_classes, mine_candidates, DefinitionKind, Engine, Policy, ReduceError, ReduceOptions, Reduction,
    ReductionMap, ReductionStats,
};
use crate::cnf::{Clause, CnfFormula, Literal, Var};
use crate::mining::TransactionDb;

/// `head ∨ (t1 ∧ … ∧ tn)`, i.e. the binary clauses `{head, ti}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BImplication {
    pub head: Literal,
    /// Sorted in literal order.
    pub tail: Vec<Literal>,
}

impl BImplication {
    pub fn to_clauses(&self) -> impl Iterator<Item = Clause> + '_ {
        self.tail.iter().map(move |&t| Clause::new([self.head, t]))
    }
}

/// Groups a 2-CNF formula into implications keyed by the smaller literal of
/// each clause. Exact duplicate clauses collapse.
pub fn to_b_implications(f: &CnfFormula) -> Result<Vec<BImplication>, ReduceError> {
    let mut groups: BTreeMap<Literal, BTreeSet<Literal>> = BTreeMap::new();
    for (index, clause) in f.clauses().iter().enumerate() {
        if clause.len() != 2 {
            return Err(ReduceError::NotBinary {
                index,
                len: clause.len(),
            });
        }
        if clause.is_tautology() {
            return Err(ReduceError::Tautology { index });
        }
        let lits = clause.literals();
        groups.entry(lits[0]).or_default().insert(lits[1]);
    }
    Ok(groups
        .into_iter()
        .map(|(head, tail)| BImplication {
            head,
            tail: tail.into_iter().collect(),
        })
        .collect())
}

/// Transactions over implication tails, with the heads kept alongside.
#[derive(Clone, Debug)]
pub struct ImplicationDb {
    /// Tid `i` is the `i`-th implication.
    pub db: TransactionDb,
    pub heads: Vec<Literal>,
}

pub fn bimpl_to_db(bs: &[BImplication]) -> ImplicationDb {
    ImplicationDb {
        db: TransactionDb::from_rows(bs.iter().map(|b| b.tail.iter().map(|l| l.item()))),
        heads: bs.iter().map(|b| b.head).collect(),
    }
}

/// Whether substituting a tail set of `size` literals shared by `support`
/// implications strictly lowers the binary clause count (`n·k > n + k`).
pub fn binary_interesting(size: usize, support: usize) -> bool {
    size >= 2 && support >= 2 && size * support > size + support
}

/// Binary clauses saved: `n·k − n − k`.
pub fn clause_gain(size: usize, support: usize) -> i64 {
    let (n, k) = (size as i64, support as i64);
    n * k - n - k
}

pub(crate) struct BinaryPolicy;

impl Policy for BinaryPolicy {
    fn interesting(&self, size: usize, support: usize) -> bool {
        binary_interesting(size, support)
    }

    fn score(&self, size: usize, support: usize) -> i64 {
        clause_gain(size, support)
    }

    fn kind(&self) -> DefinitionKind {
        DefinitionKind::And
    }

    fn definition_row(&self, set: &[Literal], _fresh: Var) -> Vec<Literal> {
        set.to_vec()
    }
}

/// Compacts the binary sub-formula of `f`; longer clauses (and tautological
/// binary ones) pass through untouched.
///
/// The output lists the untouched clauses in their original order followed
/// by the expanded implications. Without any substitution `f` is returned as
/// is.
pub fn reduce_binary(f: &CnfFormula, options: &ReduceOptions) -> Result<Reduction, ReduceError> {
    let mut passthrough = Vec::new();
    let mut seen: HashSet<&Clause> = HashSet::new();
    let mut binary = CnfFormula::new(0);
    let mut merged = 0;
    for clause in f.clauses() {
        if clause.len() == 2 && !clause.is_tautology() {
            if seen.insert(clause) {
                binary.push_clause(clause.clone());
            } else {
                merged += 1;
            }
        } else {
            passthrough.push(clause.clone());
        }
    }
    let implications = to_b_implications(&binary)?;
    let mut heads: Vec<Literal> = implications.iter().map(|b| b.head).collect();
    let mut rows: Vec<Vec<Literal>> = implications.into_iter().map(|b| b.tail).collect();

    let min_support = options.min_support.max(2);
    let candidates = mine_candidates(&rows, min_support, 2, &BinaryPolicy);
    if candidates.is_empty() {
        return Ok(Reduction::unchanged(f));
    }
    let mut next_var = f.next_fresh_var();
    let mut map = ReductionMap::new();
    let mut applied = Vec::new();
    let mut engine = Engine {
        rows: &mut rows,
        policy: &BinaryPolicy,
        next_var: &mut next_var,
        map: &mut map,
        salvage: options.overlap_salvage,
        validate: options.validate_covers,
    };
    for class in build_overlap_classes(candidates) {
        applied.extend(engine.run_class(class)?);
    }
    if applied.is_empty() {
        return Ok(Reduction::unchanged(f));
    }
    for a in &applied {
        debug_assert_eq!(a.definition_row, heads.len());
        heads.push(a.var.negative());
    }

    let mut formula = CnfFormula::new(f.num_declared_vars());
    formula.declare_vars(next_var - 1);
    for clause in passthrough {
        formula.push_clause(clause);
    }
    for (head, tail) in heads.iter().zip(&rows) {
        for &t in tail {
            formula.push_clause(Clause::new([*head, t]));
        }
    }
    let stats = ReductionStats::between(f, &formula, merged, applied.len());
    Ok(Reduction { formula, map, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    #[test]
    fn example_decomposition_uses_literal_order() {
        // (a ∨ b)(a ∨ c)(c ∨ d) with a..d = x1..x4
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2], &[1, 3], &[3, 4]]);
        let bs = to_b_implications(&f).unwrap();
        assert_eq!(
            bs,
            vec![
                BImplication {
                    head: lit(1),
                    tail: vec![lit(2), lit(3)]
                },
                BImplication {
                    head: lit(3),
                    tail: vec![lit(4)]
                },
            ]
        );
        let view = bimpl_to_db(&bs);
        let rows: Vec<Vec<u32>> = view.db.transactions().map(|(_, r)| r.to_vec()).collect();
        assert_eq!(rows, vec![vec![lit(2).item(), lit(3).item()], vec![lit(4).item()]]);
        assert_eq!(view.heads, vec![lit(1), lit(3)]);
    }

    #[test]
    fn negative_literal_heads_first() {
        let f = CnfFormula::from_dimacs_clauses(&[&[2, -1], &[1, 3]]);
        let bs = to_b_implications(&f).unwrap();
        assert_eq!(bs[0].head, lit(-1));
        assert_eq!(bs[1].head, lit(1));
    }

    #[test]
    fn trivial_cases() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2]]);
        assert_eq!(to_b_implications(&f).unwrap().len(), 1);
        assert!(to_b_implications(&CnfFormula::default()).unwrap().is_empty());
        assert!(bimpl_to_db(&[]).db.is_empty());
    }

    #[test]
    fn non_binary_input_rejected() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2], &[1, 2, 3]]);
        assert_eq!(to_b_implications(&f), Err(ReduceError::NotBinary { index: 1, len: 3 }));
        let f = CnfFormula::from_dimacs_clauses(&[&[1, -1]]);
        assert_eq!(to_b_implications(&f), Err(ReduceError::Tautology { index: 0 }));
    }

    #[test]
    fn expansion_round_trip() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2], &[-3, 1], &[2, 3], &[-2, -4], &[1, 4]]);
        let bs = to_b_implications(&f).unwrap();
        let mut back: Vec<Clause> = bs.iter().flat_map(|b| b.to_clauses().collect::<Vec<_>>()).collect();
        back.sort();
        let mut orig = f.clauses().to_vec();
        orig.sort();
        assert_eq!(back, orig);
    }

    #[test]
    fn interest_gate() {
        assert!(!binary_interesting(2, 2));
        assert!(binary_interesting(2, 3));
        assert!(binary_interesting(3, 2));
        assert!(!binary_interesting(1, 9));
        assert!(!binary_interesting(9, 1));
    }

    #[test]
    fn biclique_three_by_three() {
        let mut clauses = Vec::new();
        for x in 1..=3 {
            for y in 4..=6 {
                clauses.push(vec![x, y]);
            }
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let f = CnfFormula::from_dimacs_clauses(&refs);
        let r = reduce_binary(&f, &ReduceOptions::default()).unwrap();
        assert_eq!(r.map.len(), 1);
        let out: Vec<Vec<i64>> = r.formula.clauses().iter().map(|c| c.to_dimacs()).collect();
        assert_eq!(
            out,
            vec![
                vec![1, 7],
                vec![2, 7],
                vec![3, 7],
                vec![4, -7],
                vec![5, -7],
                vec![6, -7]
            ]
        );
    }

    #[test]
    fn longer_clauses_pass_through() {
        let mut clauses = vec![vec![1, 2, 3], vec![5, 5]];
        for x in 1..=3 {
            for y in 4..=6 {
                clauses.push(vec![x, y]);
            }
        }
        clauses.push(vec![1, -1]);
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let f = CnfFormula::from_dimacs_clauses(&refs);
        let r = reduce_binary(&f, &ReduceOptions::default()).unwrap();
        let out: Vec<Vec<i64>> = r.formula.clauses().iter().map(|c| c.to_dimacs()).collect();
        assert_eq!(&out[..3], &[vec![1, 2, 3], vec![5], vec![-1, 1]]);
        assert_eq!(out.len(), 3 + 6);
    }

    #[test]
    fn small_clique_is_left_alone_by_the_break_even_gate() {
        // 4-clique: tails {2,3,4},{3,4},{4}; {3,4} has support 2 only.
        let mut clauses = Vec::new();
        for i in 1..=4 {
            for j in (i + 1)..=4 {
                clauses.push(vec![i, j]);
            }
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let f = CnfFormula::from_dimacs_clauses(&refs);
        let r = reduce_binary(&f, &ReduceOptions::default()).unwrap();
        assert_eq!(r.formula, f);
        assert!(r.map.is_empty());
    }
}
