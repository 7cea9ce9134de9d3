//! Deterministic instance generators shared by the benchmarks.

use cnfcompact::{Clause, CnfFormula, Literal, TransactionDb};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn from_dimacs(clauses: Vec<Vec<i64>>, vars: u32) -> CnfFormula {
    CnfFormula::from_clauses(
        vars,
        clauses.into_iter().map(|c| {
            Clause::new(
                c.into_iter()
                    .map(|d| Literal::from_dimacs(d).expect("non-zero literal")),
            )
        }),
    )
}

/// All pairwise binary clauses over `1..=n`.
pub fn clique(n: u32) -> CnfFormula {
    let n = n as i64;
    let clauses = (1..=n).flat_map(|i| ((i + 1)..=n).map(move |j| vec![i, j])).collect();
    from_dimacs(clauses, n as u32)
}

/// `(x_i ∨ y_j)` for `n` x-variables and `m` y-variables.
pub fn biclique(n: u32, m: u32) -> CnfFormula {
    let (n, m) = (n as i64, m as i64);
    let clauses = (1..=n)
        .flat_map(|x| ((n + 1)..=(n + m)).map(move |y| vec![x, y]))
        .collect();
    from_dimacs(clauses, (n + m) as u32)
}

/// Random clauses of length 1..=4 over `vars` variables, 60% of which also
/// contain one of `clauses/40 + 1` repeated literal blocks.
pub fn planted(seed: u64, vars: u32, clauses: usize) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars_i = vars as i64;
    let lit = |rng: &mut ChaCha8Rng| {
        let v = rng.gen_range(1..=vars_i);
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    };
    let blocks: Vec<Vec<i64>> = (0..clauses / 40 + 1)
        .map(|_| (0..rng.gen_range(2..=5)).map(|_| lit(&mut rng)).collect())
        .collect();
    let out = (0..clauses)
        .map(|_| {
            let mut c: Vec<i64> = (0..rng.gen_range(1..=4)).map(|_| lit(&mut rng)).collect();
            if rng.gen_bool(0.6) {
                c.extend(&blocks[rng.gen_range(0..blocks.len())]);
            }
            c
        })
        .collect();
    from_dimacs(out, vars)
}

/// Clauses of `f` as transactions over literal item ids.
pub fn transactions(f: &CnfFormula) -> TransactionDb {
    TransactionDb::from_rows(
        f.clauses()
            .iter()
            .map(|c| c.literals().iter().map(|l| l.item()).collect::<Vec<_>>()),
    )
}
