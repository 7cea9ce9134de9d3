//! Small complete SAT oracle and equi-satisfiability checks.
//!
//! The solver is plain DPLL with unit propagation, branching on the lowest
//! unassigned variable. It is meant for desk-scale verification, hence the
//! variable limit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Literal, Var};
use crate::reduce::ReductionMap;

pub const DEFAULT_VAR_LIMIT: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("formula has {vars} variables, oracle limit is {limit}")]
    TooManyVariables { vars: usize, limit: usize },
    #[error("reduction map defines variable {0}, which occurs in the original formula")]
    DefinesOriginal(u32),
    #[error("reduction map entry for {var} refers to unknown variable {unknown}")]
    UnknownVariable { var: u32, unknown: u32 },
}

/// Truth values for a set of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    /// Value of `lit`; unassigned variables read as false.
    pub fn literal(&self, lit: Literal) -> bool {
        self.get(lit.var()).unwrap_or(false) == lit.is_positive()
    }

    pub fn satisfies(&self, clause: &Clause) -> bool {
        clause.literals().iter().any(|&l| self.literal(l))
    }

    /// Index of the first clause of `f` this assignment falsifies.
    pub fn first_violation(&self, f: &CnfFormula) -> Option<usize> {
        f.clauses().iter().position(|c| !self.satisfies(c))
    }

    /// Keeps only variables `1..=max_var`.
    pub fn restrict(&self, max_var: u32) -> Assignment {
        Assignment {
            values: self
                .values
                .iter()
                .filter(|(v, _)| v.index() <= max_var)
                .map(|(&v, &b)| (v, b))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SolveResult::Sat(a) => Some(a),
            SolveResult::Unsat => None,
        }
    }
}

/// Decides `f`. The returned model assigns every occurring variable.
pub fn solve(f: &CnfFormula, var_limit: usize) -> Result<SolveResult, OracleError> {
    let mut vars: Vec<Var> = f
        .clauses()
        .iter()
        .flat_map(|c| c.literals().iter().map(|l| l.var()))
        .collect();
    vars.sort_unstable();
    vars.dedup();
    if vars.len() > var_limit {
        return Err(OracleError::TooManyVariables {
            vars: vars.len(),
            limit: var_limit,
        });
    }
    let index: HashMap<Var, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let clauses: Vec<Vec<(usize, bool)>> = f
        .clauses()
        .iter()
        .map(|c| {
            c.literals()
                .iter()
                .map(|l| (index[&l.var()], l.is_positive()))
                .collect()
        })
        .collect();
    let mut solver = Dpll {
        clauses,
        values: vec![None; vars.len()],
        trail: Vec::new(),
    };
    if !solver.search() {
        return Ok(SolveResult::Unsat);
    }
    let mut model = Assignment::new();
    for (i, v) in vars.iter().enumerate() {
        model.set(*v, solver.values[i].unwrap_or(false));
    }
    debug_assert!(model.first_violation(f).is_none());
    Ok(SolveResult::Sat(model))
}

struct Dpll {
    clauses: Vec<Vec<(usize, bool)>>,
    values: Vec<Option<bool>>,
    trail: Vec<usize>,
}

enum Status {
    Satisfied,
    Conflict,
    Unit(usize, bool),
    Open,
}

impl Dpll {
    fn status(&self, clause: &[(usize, bool)]) -> Status {
        let mut unassigned = None;
        let mut count = 0;
        for &(v, sign) in clause {
            match self.values[v] {
                Some(b) if b == sign => return Status::Satisfied,
                Some(_) => {}
                None => {
                    count += 1;
                    unassigned = Some((v, sign));
                }
            }
        }
        match (count, unassigned) {
            (0, _) => Status::Conflict,
            (1, Some((v, s))) => Status::Unit(v, s),
            _ => Status::Open,
        }
    }

    /// Propagates to fixpoint; false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for i in 0..self.clauses.len() {
                match self.status(&self.clauses[i]) {
                    Status::Conflict => return false,
                    Status::Unit(v, s) => {
                        self.values[v] = Some(s);
                        self.trail.push(v);
                        changed = true;
                    }
                    Status::Satisfied | Status::Open => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.values[v] = None;
        }
    }

    fn search(&mut self) -> bool {
        if !self.propagate() {
            return false;
        }
        let Some(var) = self.values.iter().position(Option::is_none) else {
            return true;
        };
        for value in [false, true] {
            let mark = self.trail.len();
            self.values[var] = Some(value);
            self.trail.push(var);
            if self.search() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

/// Which relation between original and reduced formula failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Satisfiability,
    Projection,
    Extension,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Satisfiability => "satisfiability",
            Check::Projection => "projection",
            Check::Extension => "extension",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub check: Check,
    /// Falsified clause (index in the formula the check evaluated), if any.
    pub clause_index: Option<usize>,
    pub clause: Option<Clause>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.clause_index, &self.clause) {
            (Some(i), Some(c)) => write!(f, "{} check failed: clause #{} ({}) falsified", self.check, i + 1, c),
            _ => write!(f, "{} check failed", self.check),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquisatReport {
    pub original_sat: bool,
    pub reduced_sat: bool,
    pub violations: Vec<Violation>,
}

impl EquisatReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `reduced` (with fresh variables described by `map`) is
/// equi-satisfiable with `original`, that every model of `reduced` projects
/// onto a model of `original`, and that a model of `original` extends to a
/// model of `reduced` by evaluating the definitions in order.
pub fn check_equisat(
    original: &CnfFormula,
    reduced: &CnfFormula,
    map: &ReductionMap,
    var_limit: usize,
) -> Result<EquisatReport, OracleError> {
    validate_map(original, map)?;

    let orig = solve(original, var_limit)?;
    let red = solve(reduced, var_limit)?;
    let mut violations = Vec::new();
    if orig.is_sat() != red.is_sat() {
        violations.push(Violation {
            check: Check::Satisfiability,
            clause_index: None,
            clause: None,
        });
    }
    if red.is_sat() {
        for i in projection_violations(original, reduced, var_limit)? {
            violations.push(Violation {
                check: Check::Projection,
                clause_index: Some(i),
                clause: Some(original.clauses()[i].clone()),
            });
        }
    }
    if let Some(model) = orig.model() {
        let extended = extend_model(model, map);
        if let Some(i) = extended.first_violation(reduced) {
            violations.push(Violation {
                check: Check::Extension,
                clause_index: Some(i),
                clause: Some(reduced.clauses()[i].clone()),
            });
        }
    }
    Ok(EquisatReport {
        original_sat: orig.is_sat(),
        reduced_sat: red.is_sat(),
        violations,
    })
}

/// Indices of original clauses falsified by the projection of some model of
/// `reduced`: clause `C` is reported iff `reduced ∧ ¬C` is satisfiable.
fn projection_violations(
    original: &CnfFormula,
    reduced: &CnfFormula,
    var_limit: usize,
) -> Result<Vec<usize>, OracleError> {
    let mut out = Vec::new();
    for (i, clause) in original.clauses().iter().enumerate() {
        if clause.is_tautology() {
            continue;
        }
        let mut query = reduced.clone();
        for &l in clause.literals() {
            query.push_clause(Clause::new([!l]));
        }
        if solve(&query, var_limit)?.is_sat() {
            out.push(i);
        }
    }
    Ok(out)
}

/// Assigns each fresh variable from its definition, in ledger order.
pub fn extend_model(model: &Assignment, map: &ReductionMap) -> Assignment {
    let mut out = model.clone();
    for def in map.definitions() {
        let value = def.evaluate(|l| out.literal(l));
        out.set(def.var, value);
    }
    out
}

fn validate_map(original: &CnfFormula, map: &ReductionMap) -> Result<(), OracleError> {
    let original_vars = original.num_vars();
    let mut known: Vec<Var> = Vec::new();
    for def in map.definitions() {
        let var = def.var.index();
        if var <= original_vars {
            return Err(OracleError::DefinesOriginal(var));
        }
        for l in &def.defines {
            let v = l.var();
            if v.index() > original_vars && !known.contains(&v) {
                return Err(OracleError::UnknownVariable {
                    var,
                    unknown: v.index(),
                });
            }
        }
        known.push(def.var);
    }
    Ok(())
}
