#![allow(dead_code)]

use cnfcompact::mining::{frequent_itemsets, Item, MinedItemset};
use cnfcompact::{CandidateItemset, Clause, CnfFormula, TransactionDb};

/// Closed frequent itemsets straight from the definition: frequent sets with
/// no frequent strict superset of identical cover.
pub fn brute_closed(db: &TransactionDb, min_support: usize, min_size: usize) -> Vec<MinedItemset> {
    let frequent = frequent_itemsets(db, min_support, 0);
    let mut out: Vec<MinedItemset> = frequent
        .iter()
        .filter(|i| i.items.len() >= min_size)
        .filter(|i| {
            !frequent
                .iter()
                .any(|j| j.items.len() > i.items.len() && contains_all(&j.items, &i.items) && j.cover == i.cover)
        })
        .cloned()
        .collect();
    out.sort();
    out
}

pub fn contains_all(big: &[Item], small: &[Item]) -> bool {
    small.iter().all(|s| big.contains(s))
}

/// Overlap classes by repeated pairwise merging, as sorted index groups.
pub fn brute_classes(cands: &[CandidateItemset]) -> Vec<Vec<Vec<i64>>> {
    let mut groups: Vec<Vec<usize>> = (0..cands.len()).map(|i| vec![i]).collect();
    loop {
        let mut merged = false;
        'search: for a in 0..groups.len() {
            for b in (a + 1)..groups.len() {
                let touch = groups[a].iter().any(|&i| {
                    groups[b]
                        .iter()
                        .any(|&j| cands[i].literals.iter().any(|l| cands[j].literals.contains(l)))
                });
                if touch {
                    let moved = groups.remove(b);
                    groups[a].extend(moved);
                    merged = true;
                    break 'search;
                }
            }
        }
        if !merged {
            break;
        }
    }
    let mut out: Vec<Vec<Vec<i64>>> = groups
        .into_iter()
        .map(|g| {
            let mut sets: Vec<Vec<i64>> = g
                .into_iter()
                .map(|i| cands[i].literals.iter().map(|l| l.to_dimacs()).collect())
                .collect();
            sets.sort();
            sets
        })
        .collect();
    out.sort();
    out
}

/// Clause as bit masks over variables `1..=n` (bit `v-1`).
struct MaskClause {
    pos: u64,
    neg: u64,
}

fn masks(f: &CnfFormula) -> Vec<MaskClause> {
    f.clauses()
        .iter()
        .map(|c| {
            let mut m = MaskClause { pos: 0, neg: 0 };
            for l in c.literals() {
                let bit = 1u64 << (l.var().index() - 1);
                if l.is_positive() {
                    m.pos |= bit;
                } else {
                    m.neg |= bit;
                }
            }
            m
        })
        .collect()
}

/// Every satisfying assignment over variables `1..=n`, as bit sets.
pub fn all_models(f: &CnfFormula, n: u32) -> Vec<u64> {
    assert!(n <= 20 && f.num_vars() <= n);
    let cs = masks(f);
    (0..1u64 << n)
        .filter(|&a| cs.iter().all(|c| (a & c.pos) != 0 || (!a & c.neg) != 0))
        .collect()
}

/// Truth-table satisfiability over `1..=n`.
pub fn brute_sat(f: &CnfFormula, n: u32) -> bool {
    assert!(n <= 24 && f.num_vars() <= n);
    let cs = masks(f);
    (0..1u64 << n).any(|a| cs.iter().all(|c| (a & c.pos) != 0 || (!a & c.neg) != 0))
}

pub fn formula(clauses: &[Vec<i64>]) -> CnfFormula {
    let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
    CnfFormula::from_dimacs_clauses(&refs)
}

/// All pairwise clauses over variables `1..=n`.
pub fn clique(n: i64) -> CnfFormula {
    let mut clauses = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            clauses.push(vec![i, j]);
        }
    }
    formula(&clauses)
}

/// `(x_i ∨ y_j)` for `x = 1..=n`, `y = n+1..=n+m`.
pub fn biclique(n: i64, m: i64) -> CnfFormula {
    let mut clauses = Vec::new();
    for x in 1..=n {
        for y in (n + 1)..=(n + m) {
            clauses.push(vec![x, y]);
        }
    }
    formula(&clauses)
}

/// `k` clauses `(x1 ∨ … ∨ xn ∨ a_j)` with distinct unit tails `a_j`.
pub fn shared_prefix(n: i64, k: i64) -> CnfFormula {
    let clauses: Vec<Vec<i64>> = (0..k)
        .map(|j| {
            let mut c: Vec<i64> = (1..=n).collect();
            c.push(n + 1 + j);
            c
        })
        .collect();
    formula(&clauses)
}

/// Fresh-variable count predicted for an `n`-clique:
/// `V(n) = 2·V(⌈n/2⌉ + 1) + 1`, `V(6) = 1`, `V(n < 6) = 0`.
pub fn clique_vars(n: u64) -> u64 {
    match n {
        0..=5 => 0,
        6 => 1,
        _ => 2 * clique_vars(n.div_ceil(2) + 1) + 1,
    }
}

pub fn sorted_clauses(f: &CnfFormula) -> Vec<Clause> {
    let mut v = f.clauses().to_vec();
    v.sort();
    v
}

/// Exhaustive model check for a reduction whose formula has at most 20 variables.
pub fn check_clique_formula(original: &CnfFormula, r: &cnfcompact::Reduction) {
    let n = original.num_vars();
    let total = r.formula.num_vars();
    let orig = all_models(original, n);
    let mask = (1u64 << n) - 1;
    for m in all_models(&r.formula, total) {
        assert!(orig.binary_search(&(m & mask)).is_ok());
    }
    for &m in &orig {
        let mut a = cnfcompact::Assignment::new();
        for v in 1..=n {
            a.set(cnfcompact::Var::new(v).unwrap(), m >> (v - 1) & 1 == 1);
        }
        let ext = cnfcompact::oracle::extend_model(&a, &r.map);
        assert_eq!(ext.first_violation(&r.formula), None);
    }
}
