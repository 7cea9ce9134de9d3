//! Substitution of frequent literal sets in arbitrary clauses.
//!
//! A set `I` of `n` literals shared by `k` clauses is replaced by a fresh
//! literal `x` in each of them and the clause `I ∨ ¬x` is added, turning `n·k`
//! literals into `k + n + 1`.

use std::collections::HashSet;

use rayon::prelude::*;

use super::{
    build_overlap_classes, mine_candidates, CandidateItemset, DefinitionKind, Engine, OverlapClass, Policy,
    ReduceError, ReduceOptions, Reduction, ReductionMap, ReductionStats,
};
use crate::cnf::{Clause, CnfFormula, Literal, Var};
use crate::mining::TransactionDb;

/// Net literal reduction of substituting a set of `size` literals occurring in
/// `support` clauses: `support·(size−1) − size − 1`.
pub fn alpha(size: usize, support: usize) -> i64 {
    let (n, k) = (size as i64, support as i64);
    k * (n - 1) - n - 1
}

/// `size ≥ 2` and `support > (size+1)/(size−1)`, compared exactly.
pub fn is_interesting(size: usize, support: usize) -> bool {
    size >= 2 && support * (size - 1) > size + 1
}

/// Whether `sub` still pays off after `sup ⊃ sub` has been substituted, i.e.
/// `S(sub) − S(sup) > (|sub|+1)/(|sub|−1) − 1`. The residual support of `sub`
/// is `S(sub) − S(sup) + 1` (the definition clause of `sup` contains it).
pub fn subset_still_interesting(sub: &CandidateItemset, sup: &CandidateItemset) -> bool {
    debug_assert!(sub.literals.len() < sup.literals.len());
    match (sub.support + 1).checked_sub(sup.support) {
        Some(residual) => is_interesting(sub.literals.len(), residual),
        None => false,
    }
}

/// Smallest size a set needs to be worth substituting at `support`
/// (2 for support ≥ 4, 3 for support 3, 4 otherwise).
pub fn required_size(support: usize) -> usize {
    match support {
        s if s >= 4 => 2,
        3 => 3,
        _ => 4,
    }
}

/// Whether two overlapping sets, neither containing the other, can both be
/// used: either one keeps enough residual support once the other has been
/// substituted, or one's private part is large enough to be substituted on
/// its own.
pub fn overlap_both_interesting(a: &CandidateItemset, b: &CandidateItemset, union_support: usize) -> bool {
    let residual_ok = |x: &CandidateItemset| match (x.support + 1).checked_sub(union_support) {
        Some(residual) => is_interesting(x.literals.len(), residual),
        None => false,
    };
    let private_ok = |x: &CandidateItemset, y: &CandidateItemset| {
        super::difference(&x.literals, &y.literals).len() >= required_size(x.support)
    };
    residual_ok(a) || residual_ok(b) || private_ok(a, b) || private_ok(b, a)
}

pub(crate) struct GeneralPolicy;

impl Policy for GeneralPolicy {
    fn interesting(&self, size: usize, support: usize) -> bool {
        is_interesting(size, support)
    }

    fn score(&self, size: usize, support: usize) -> i64 {
        alpha(size, support)
    }

    fn kind(&self) -> DefinitionKind {
        DefinitionKind::Or
    }

    fn definition_row(&self, set: &[Literal], fresh: Var) -> Vec<Literal> {
        let mut row = set.to_vec();
        row.push(fresh.negative());
        row.sort_unstable();
        row
    }
}

/// Transaction view of a formula: one transaction per distinct clause.
#[derive(Clone, Debug)]
pub struct CnfDatabase {
    /// Tids are the index of the first occurrence of each clause.
    pub db: TransactionDb,
    pub duplicates_merged: usize,
}

/// One transaction per distinct clause, items encoded by [`Literal::item`].
pub fn cnf_to_db(f: &CnfFormula) -> CnfDatabase {
    let mut seen: HashSet<&Clause> = HashSet::new();
    let mut db = TransactionDb::new();
    let mut merged = 0;
    for (i, c) in f.clauses().iter().enumerate() {
        if seen.insert(c) {
            db.push(i, c.literals().iter().map(|l| l.item()))
                .expect("clause indices are distinct");
        } else {
            merged += 1;
        }
    }
    CnfDatabase {
        db,
        duplicates_merged: merged,
    }
}

fn distinct_rows(f: &CnfFormula) -> (Vec<Vec<Literal>>, usize) {
    let mut seen: HashSet<&Clause> = HashSet::new();
    let mut rows = Vec::with_capacity(f.num_clauses());
    for c in f.clauses() {
        if seen.insert(c) {
            rows.push(c.literals().to_vec());
        }
    }
    let merged = f.num_clauses() - rows.len();
    (rows, merged)
}

fn rows_to_formula(rows: Vec<Vec<Literal>>, declared: u32, next_var: u32) -> CnfFormula {
    let mut out = CnfFormula::from_clauses(declared, rows.into_iter().map(Clause::from_sorted));
    out.declare_vars(next_var - 1);
    out
}

/// Greedily substitutes the members of one overlap class into `f`.
///
/// Member covers are clause indices of `f`. New fresh variables continue
/// after `f.next_fresh_var()` and are appended to `map`.
pub fn apply_reduction(
    f: &CnfFormula,
    class: OverlapClass,
    map: ReductionMap,
    options: &ReduceOptions,
) -> Result<(CnfFormula, ReductionMap), ReduceError> {
    let mut rows: Vec<Vec<Literal>> = f.clauses().iter().map(|c| c.literals().to_vec()).collect();
    let mut next_var = f.next_fresh_var();
    let mut map = map;
    Engine {
        rows: &mut rows,
        policy: &GeneralPolicy,
        next_var: &mut next_var,
        map: &mut map,
        salvage: options.overlap_salvage,
        validate: options.validate_covers,
    }
    .run_class(class)?;
    Ok((rows_to_formula(rows, f.num_declared_vars(), next_var), map))
}

/// Mines closed literal sets, groups them into overlap classes and rewrites
/// each class greedily; repeated for up to `options.passes` cycles.
///
/// Exact duplicate clauses are merged once substitution happens. A formula
/// with nothing worth substituting is returned as is.
pub fn reduce_formula(f: &CnfFormula, options: &ReduceOptions) -> Result<Reduction, ReduceError> {
    options.validate()?;
    let (mut rows, merged) = distinct_rows(f);
    let mut next_var = f.next_fresh_var();
    let mut map = ReductionMap::new();
    let mut applied = 0;

    for pass in 0..options.passes {
        let candidates = mine_candidates(&rows, options.min_support, options.min_size, &GeneralPolicy);
        if candidates.is_empty() {
            break;
        }
        let classes = build_overlap_classes(candidates);
        log::debug!("pass {}: {} overlap classes", pass + 1, classes.len());
        let mut engine = Engine {
            rows: &mut rows,
            policy: &GeneralPolicy,
            next_var: &mut next_var,
            map: &mut map,
            salvage: options.overlap_salvage,
            validate: options.validate_covers,
        };
        let mut this_pass = 0;
        for class in classes {
            this_pass += engine.run_class(class)?.len();
        }
        applied += this_pass;
        if this_pass == 0 {
            break;
        }
    }

    if applied == 0 {
        return Ok(Reduction::unchanged(f));
    }
    let formula = rows_to_formula(rows, f.num_declared_vars(), next_var);
    let stats = ReductionStats::between(f, &formula, merged, applied);
    Ok(Reduction { formula, map, stats })
}

/// Reduces `parts` contiguous chunks of the clause list independently and
/// concatenates the results. Fresh variables of chunk `i` are numbered after
/// those of chunks `0..i`.
pub fn reduce_partitioned(f: &CnfFormula, parts: usize, options: &ReduceOptions) -> Result<Reduction, ReduceError> {
    if parts == 0 {
        return Err(ReduceError::InvalidOptions("parts must be at least 1".into()));
    }
    options.validate()?;
    if parts == 1 {
        return reduce_formula(f, options);
    }
    let chunk_len = f.num_clauses().div_ceil(parts).max(1);
    let chunks: Vec<CnfFormula> = (0..parts)
        .map(|i| {
            let lo = (i * chunk_len).min(f.num_clauses());
            let hi = ((i + 1) * chunk_len).min(f.num_clauses());
            let mut chunk = CnfFormula::from_clauses(f.num_declared_vars(), f.clauses()[lo..hi].iter().cloned());
            chunk.declare_vars(f.num_vars());
            chunk
        })
        .collect();
    let results: Vec<Reduction> = chunks
        .par_iter()
        .map(|chunk| reduce_formula(chunk, options))
        .collect::<Result<_, _>>()?;

    let base = f.next_fresh_var();
    let mut offset = 0u32;
    let mut formula = CnfFormula::new(f.num_declared_vars());
    formula.declare_vars(f.num_vars());
    let mut map = ReductionMap::new();
    let (mut merged, mut applied) = (0, 0);
    for mut r in results {
        let used = r.formula.next_fresh_var() - base;
        let shift = |v: Var| {
            if v.index() >= base {
                Var::new(v.index() + offset).expect("shifted index is positive")
            } else {
                v
            }
        };
        r.map.remap(shift);
        for clause in r.formula.clauses() {
            formula.push_clause(Clause::new(
                clause
                    .literals()
                    .iter()
                    .map(|l| Literal::new(shift(l.var()), l.is_positive())),
            ));
        }
        map.append(r.map);
        merged += r.stats.duplicate_clauses_merged;
        applied += r.stats.itemsets_applied;
        offset += used;
    }
    formula.declare_vars(base - 1 + offset);
    let stats = ReductionStats::between(f, &formula, merged, applied);
    Ok(Reduction { formula, map, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::to_dimacs_string;

    fn lits(v: &[i64]) -> Vec<Literal> {
        let mut out: Vec<Literal> = v.iter().map(|&x| Literal::from_dimacs(x).unwrap()).collect();
        out.sort();
        out
    }

    fn cand(size: usize, support: usize) -> CandidateItemset {
        CandidateItemset::new(lits(&(1..=size as i64).collect::<Vec<_>>()), (0..support).collect())
    }

    #[test]
    fn interest_thresholds() {
        assert!(is_interesting(2, 4));
        assert!(!is_interesting(2, 3));
        assert!(!is_interesting(1, 100));
        assert!(is_interesting(3, 3));
        assert!(!is_interesting(3, 2));
        assert!(is_interesting(4, 2));
        assert!(!is_interesting(0, 10));
        for n in 2..20 {
            assert!(is_interesting(n, 4));
        }
    }

    #[test]
    fn required_size_matches_threshold() {
        for support in 1..10 {
            let k = required_size(support);
            assert!(is_interesting(k, support) || support < 2);
            assert!(!is_interesting(k - 1, support));
        }
    }

    #[test]
    fn subset_residual_support() {
        let sup = CandidateItemset::new(lits(&[1, 2, 3]), (0..4).collect());
        let sub8 = CandidateItemset::new(lits(&[1, 2]), (0..8).collect());
        let sub5 = CandidateItemset::new(lits(&[1, 2]), (0..5).collect());
        assert!(subset_still_interesting(&sub8, &sup));
        assert!(!subset_still_interesting(&sub5, &sup));
        let same = CandidateItemset::new(lits(&[1, 2]), (0..4).collect());
        assert!(!subset_still_interesting(&same, &sup));
        for n in 2..6 {
            let sub = cand(n, 7);
            let sup = cand(n + 1, 7);
            assert!(!subset_still_interesting(&sub, &sup));
        }
    }

    #[test]
    fn overlap_conditions() {
        let a = CandidateItemset::new(lits(&[1, 2, 3]), (0..6).collect());
        let b = CandidateItemset::new(lits(&[3, 4, 5]), vec![0, 1, 7]);
        assert!(overlap_both_interesting(&a, &b, 2));

        let a = CandidateItemset::new(lits(&[1, 2, 3]), (0..4).collect());
        let b = CandidateItemset::new(lits(&[3, 9]), (0..4).collect());
        assert!(overlap_both_interesting(&a, &b, 4));

        let a = CandidateItemset::new(lits(&[1, 2]), (0..3).collect());
        let b = CandidateItemset::new(lits(&[2, 3]), (0..3).collect());
        assert!(!overlap_both_interesting(&a, &b, 3));
    }

    #[test]
    fn database_view_merges_duplicates() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, -2, 3], &[1, -2, 4], &[1, -2, 3]]);
        let view = cnf_to_db(&f);
        assert_eq!(view.db.len(), 2);
        assert_eq!(view.duplicates_merged, 1);
        let tids: Vec<usize> = view.db.transactions().map(|(t, _)| t).collect();
        assert_eq!(tids, vec![0, 1]);
        assert_eq!(view.db.universe().len(), 4);
        assert!(cnf_to_db(&CnfFormula::default()).db.is_empty());
    }

    #[test]
    fn single_pattern_substitution() {
        // (x1 ∨ ¬x2 ∨ a_j) for four distinct a_j
        let f = CnfFormula::from_dimacs_clauses(&[&[1, -2, 3], &[1, -2, 4], &[1, -2, 5], &[1, -2, 6]]);
        let r = reduce_formula(&f, &ReduceOptions::default()).unwrap();
        assert_eq!(r.stats.literals_before, 12);
        assert_eq!(r.stats.literals_after, 11);
        assert_eq!(r.stats.itemsets_applied, 1);
        assert_eq!(
            to_dimacs_string(&r.formula),
            "p cnf 7 5\n3 7 0\n4 7 0\n5 7 0\n6 7 0\n1 -2 -7 0\n"
        );
        assert_eq!(r.map.definitions()[0].defines, lits(&[1, -2]));
    }

    #[test]
    fn nothing_frequent_means_unchanged() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2], &[1, 2], &[3, 4]]);
        let r = reduce_formula(&f, &ReduceOptions::default()).unwrap();
        assert_eq!(r.formula, f);
        assert!(r.map.is_empty());
        assert_eq!(r.stats.literals_after, r.stats.literals_before);
    }

    #[test]
    fn closed_beats_maximal() {
        // m = 4 clauses over x1..x5, m' = 4 clauses over x1, x2
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for j in 0..4 {
            clauses.push(vec![1, 2, 3, 4, 5, 10 + j]);
        }
        for j in 0..4 {
            clauses.push(vec![1, 2, 20 + j]);
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let f = CnfFormula::from_dimacs_clauses(&refs);
        let r = reduce_formula(
            &f,
            &ReduceOptions {
                passes: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let (y, z) = (24, 25);
        let out: Vec<Vec<i64>> = r.formula.clauses().iter().map(|c| c.to_dimacs()).collect();
        for j in 0..4 {
            assert!(out.contains(&vec![10 + j, y]));
            assert!(out.contains(&vec![20 + j, z]));
        }
        assert!(out.contains(&vec![3, 4, 5, -y, z]));
        assert!(out.contains(&vec![1, 2, -z]));
        assert_eq!(out.len(), 10);
        assert_eq!(r.map.len(), 2);
    }

    #[test]
    fn overlapping_sets_prune_each_other() {
        // S({1,2,3}) = 3, S({2,3,4}) = 3, S({1,2,3,4}) = 2
        let f =
            CnfFormula::from_dimacs_clauses(&[&[1, 2, 3, 4, 10], &[1, 2, 3, 4, 11], &[1, 2, 3, 12], &[2, 3, 4, 13]]);
        let view = cnf_to_db(&f);
        let closed = crate::mining::closed_itemsets(&view.db, 2, 2);
        assert!(closed.iter().any(|c| c.items.len() == 4 && c.support == 2));
        let r = reduce_formula(
            &f,
            &ReduceOptions {
                passes: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.stats.itemsets_applied, 1);
        // Both triples score 2; {1,2,3} wins the tie. {2,3,4} overlaps it and is
        // dropped, {1,2,3,4} shrinks to {4, y} with support 2 and {2,3} keeps a
        // residual support of 2, so nothing else qualifies.
        assert_eq!(r.map.definitions()[0].defines, lits(&[1, 2, 3]));
    }

    #[test]
    fn overlap_trap_residual() {
        let f =
            CnfFormula::from_dimacs_clauses(&[&[1, 2, 3, 4, 10], &[1, 2, 3, 4, 11], &[1, 2, 3, 12], &[2, 3, 4, 13]]);
        let class = OverlapClass {
            members: vec![
                CandidateItemset::new(lits(&[1, 2, 3]), vec![0, 1, 2]),
                CandidateItemset::new(lits(&[2, 3, 4]), vec![0, 1, 3]),
            ],
        };
        let (g, map) = apply_reduction(
            &f,
            class,
            ReductionMap::new(),
            &ReduceOptions {
                validate_covers: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(map.definitions()[0].defines, lits(&[1, 2, 3]));
        let view = cnf_to_db(&g);
        let items: Vec<u32> = lits(&[2, 3, 4]).iter().map(|l| l.item()).collect();
        assert_eq!(view.db.support(&items).unwrap().0, 1);
    }

    #[test]
    fn stale_cover_is_reported() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2, 3], &[1, 2, 4], &[1, 2, 5], &[6, 7]]);
        let class = OverlapClass {
            members: vec![CandidateItemset::new(lits(&[1, 2]), vec![0, 1, 2, 3])],
        };
        let err = apply_reduction(&f, class, ReductionMap::new(), &ReduceOptions::default()).unwrap_err();
        assert!(matches!(err, ReduceError::CoverMismatch { row: 3, .. }));
    }

    #[test]
    fn partitioned_with_one_part_matches() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2, 3], &[1, 2, 4], &[1, 2, 5], &[1, 2, 6], &[7, 8]]);
        let a = reduce_formula(&f, &ReduceOptions::default()).unwrap();
        let b = reduce_partitioned(&f, 1, &ReduceOptions::default()).unwrap();
        assert_eq!(a.formula, b.formula);
        assert_eq!(a.map, b.map);
    }

    #[test]
    fn partitioned_chunks_use_disjoint_fresh_vars() {
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for j in 0..8 {
            clauses.push(vec![1, 2, 10 + j]);
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let f = CnfFormula::from_dimacs_clauses(&refs);
        let whole = reduce_partitioned(&f, 1, &ReduceOptions::default()).unwrap();
        let split = reduce_partitioned(&f, 2, &ReduceOptions::default()).unwrap();
        assert_eq!(whole.stats.literals_before - whole.stats.literals_after, 5);
        assert_eq!(split.stats.literals_before - split.stats.literals_after, 2);
        let vars: Vec<u32> = split.map.definitions().iter().map(|d| d.var.index()).collect();
        assert_eq!(vars, vec![18, 19]);
        assert_eq!(split.formula.num_vars(), 19);
    }

    #[test]
    fn rejects_bad_options() {
        let f = CnfFormula::default();
        let opts = ReduceOptions {
            min_size: 1,
            ..Default::default()
        };
        assert!(reduce_formula(&f, &opts).is_err());
        assert!(reduce_partitioned(&f, 0, &ReduceOptions::default()).is_err());
    }
}
