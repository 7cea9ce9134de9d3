//! Random small formulas and an end-to-end reduce-and-verify harness.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Clause, CnfFormula, Literal, Var};
use crate::oracle::{check_equisat, EquisatReport, OracleError};
use crate::pipeline::{compact, Mode};
use crate::reduce::{ReduceError, ReduceOptions, Reduction};

#[derive(Clone, Debug)]
pub struct FormulaShape {
    pub max_vars: u32,
    pub max_clauses: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability of planting a repeated literal set into several clauses.
    pub plant_probability: f64,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape {
            max_vars: 14,
            max_clauses: 60,
            min_len: 1,
            max_len: 5,
            plant_probability: 0.7,
        }
    }
}

/// Draws a formula with 3..=max_vars variables and 1..=max_clauses clauses.
///
/// Uniform random clauses rarely share a literal set often enough to be worth
/// substituting, so with `plant_probability` a random set of 2–4 literals is
/// copied into a run of clauses.
pub fn random_formula<R: Rng>(rng: &mut R, shape: &FormulaShape) -> CnfFormula {
    let max_vars = shape.max_vars.max(3);
    let vars = rng.gen_range(3..=max_vars);
    let n_clauses = rng.gen_range(1..=shape.max_clauses.max(1));
    let mut rows: Vec<Vec<Literal>> = (0..n_clauses)
        .map(|_| random_clause(rng, vars, shape.min_len, shape.max_len))
        .collect();

    if rng.gen_bool(shape.plant_probability) {
        let plants = rng.gen_range(1..=3);
        for _ in 0..plants {
            let size = rng.gen_range(2..=4.min(vars as usize));
            let planted = random_clause(rng, vars, size, size);
            let copies = rng.gen_range(2..=8.min(rows.len().max(2)));
            let start = rng.gen_range(0..rows.len());
            let n_rows = rows.len();
            for k in 0..copies {
                let row = &mut rows[(start + k) % n_rows];
                row.extend(planted.iter().copied());
                row.sort_unstable();
                row.dedup();
                // keep the generated clause length bound (planted set wins)
                while row.len() > shape.max_len.max(size) {
                    let removable: Vec<usize> = (0..row.len()).filter(|&i| !planted.contains(&row[i])).collect();
                    match removable.choose(rng) {
                        Some(&i) => {
                            row.remove(i);
                        }
                        None => break,
                    }
                }
            }
        }
    }
    CnfFormula::from_clauses(vars, rows.into_iter().map(Clause::new))
}

fn random_clause<R: Rng>(rng: &mut R, vars: u32, min_len: usize, max_len: usize) -> Vec<Literal> {
    let len = rng.gen_range(min_len..=max_len).min(vars as usize);
    let mut pool: Vec<u32> = (1..=vars).collect();
    pool.shuffle(rng);
    pool.truncate(len);
    pool.into_iter()
        .map(|v| Literal::new(Var::new(v).expect("pool starts at 1"), rng.gen_bool(0.5)))
        .collect()
}

/// A formula made mostly of binary clauses, with an embedded bi-clique.
pub fn random_binary_formula<R: Rng>(rng: &mut R, max_vars: u32, max_clauses: usize) -> CnfFormula {
    let shape = FormulaShape {
        max_vars,
        max_clauses,
        min_len: 2,
        max_len: 2,
        plant_probability: 0.0,
    };
    let mut f = random_formula(rng, &shape);
    let vars = f.num_vars().max(4);
    let xs = rng.gen_range(2..=3u32);
    let ys = rng.gen_range(2..=3u32);
    let mut pool: Vec<u32> = (1..=vars).collect();
    pool.shuffle(rng);
    if pool.len() >= (xs + ys) as usize {
        let lit = |v: u32, rng: &mut R| Literal::new(Var::new(v).expect("positive"), rng.gen_bool(0.5));
        let x: Vec<Literal> = pool[..xs as usize].iter().map(|&v| lit(v, rng)).collect();
        let y: Vec<Literal> = pool[xs as usize..(xs + ys) as usize]
            .iter()
            .map(|&v| lit(v, rng))
            .collect();
        for &a in &x {
            for &b in &y {
                f.push_clause(Clause::new([a, b]));
            }
        }
    }
    f
}

/// Outcome of one fuzz case.
#[derive(Clone, Debug)]
pub struct FuzzCase {
    pub index: usize,
    pub original: CnfFormula,
    pub reduction: Reduction,
    pub report: EquisatReport,
}

#[derive(Debug, thiserror::Error)]
pub enum FuzzError {
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Generates `count` formulas from `seed`, reduces each with `mode`, and
/// checks the result with the oracle. Every case is returned; callers decide
/// what a failure means.
pub fn fuzz_reduce(
    seed: u64,
    count: usize,
    shape: &FormulaShape,
    mode: Mode,
    parts: usize,
    options: &ReduceOptions,
    var_limit: usize,
) -> Result<Vec<FuzzCase>, FuzzError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let original = if mode == Mode::Binary && index % 2 == 1 {
            random_binary_formula(&mut rng, shape.max_vars, shape.max_clauses)
        } else {
            random_formula(&mut rng, shape)
        };
        let reduction = compact(&original, mode, parts, options)?;
        let report = check_equisat(&original, &reduction.formula, &reduction.map, var_limit)?;
        out.push(FuzzCase {
            index,
            original,
            reduction,
            report,
        });
    }
    Ok(out)
}
