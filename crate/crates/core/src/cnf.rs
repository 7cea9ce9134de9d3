//! CNF data model, DIMACS reading/writing and size accounting.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

/// Largest variable index accepted by default.
pub const DEFAULT_VAR_CAP: u32 = i32::MAX as u32;

/// A propositional variable, numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Returns `None` for index 0.
    pub fn new(index: u32) -> Option<Var> {
        (index >= 1).then_some(Var(index))
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Literal {
        Literal::new(self, true)
    }

    pub fn negative(self) -> Literal {
        Literal::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable with a polarity.
///
/// The derived order is the lexicographic literal order used throughout the
/// crate: `¬x1 < x1 < ¬x2 < x2 < ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: Var,
    positive: bool,
}

impl Literal {
    pub fn new(var: Var, positive: bool) -> Literal {
        Literal { var, positive }
    }

    /// Builds a literal from the signed DIMACS convention. Returns `None` for 0
    /// or for magnitudes that do not fit a variable index.
    pub fn from_dimacs(value: i64) -> Option<Literal> {
        let index = u32::try_from(value.unsigned_abs()).ok()?;
        Var::new(index).map(|v| Literal::new(v, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var.0);
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn complement(self) -> Literal {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// Mining item id: `2·var + (0 if positive else 1)`. Complementary literals
    /// map to distinct items.
    pub fn item(self) -> u32 {
        2 * self.var.0 + u32::from(!self.positive)
    }

    pub fn from_item(item: u32) -> Option<Literal> {
        Var::new(item / 2).map(|v| Literal::new(v, item & 1 == 0))
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.complement()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of distinct literals, kept sorted in literal order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new<I: IntoIterator<Item = Literal>>(literals: I) -> Clause {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort_unstable();
        literals.dedup();
        Clause { literals }
    }

    /// Convenience constructor from signed DIMACS integers.
    ///
    /// # Panics
    ///
    /// Panics if a value is 0.
    pub fn from_dimacs(values: &[i64]) -> Clause {
        Clause::new(
            values
                .iter()
                .map(|&v| Literal::from_dimacs(v).expect("literal 0 in clause")),
        )
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    /// True when the clause holds a literal and its complement.
    pub fn is_tautology(&self) -> bool {
        self.literals.windows(2).any(|w| w[0].var() == w[1].var())
    }

    pub fn max_var(&self) -> Option<Var> {
        self.literals.last().map(|l| l.var())
    }

    pub fn to_dimacs(&self) -> Vec<i64> {
        self.literals.iter().map(|l| l.to_dimacs()).collect()
    }

    pub(crate) fn from_sorted(literals: Vec<Literal>) -> Clause {
        debug_assert!(literals.windows(2).all(|w| w[0] < w[1]));
        Clause { literals }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lit in &self.literals {
            write!(f, "{lit} ")?;
        }
        write!(f, "0")
    }
}

/// A conjunction of clauses together with its variable bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    clauses: Vec<Clause>,
    num_declared_vars: u32,
    next_fresh_var: u32,
}

impl Default for CnfFormula {
    fn default() -> Self {
        CnfFormula::new(0)
    }
}

impl CnfFormula {
    pub fn new(num_declared_vars: u32) -> CnfFormula {
        CnfFormula {
            clauses: Vec::new(),
            num_declared_vars,
            next_fresh_var: num_declared_vars + 1,
        }
    }

    pub fn from_clauses<I: IntoIterator<Item = Clause>>(num_declared_vars: u32, clauses: I) -> Self {
        let mut f = CnfFormula::new(num_declared_vars);
        for c in clauses {
            f.push_clause(c);
        }
        f
    }

    /// Builds a formula from signed DIMACS clauses, declaring exactly the
    /// largest variable that occurs.
    pub fn from_dimacs_clauses(clauses: &[&[i64]]) -> CnfFormula {
        let clauses: Vec<Clause> = clauses.iter().map(|c| Clause::from_dimacs(c)).collect();
        let max = clauses
            .iter()
            .filter_map(|c| c.max_var())
            .map(Var::index)
            .max()
            .unwrap_or(0);
        CnfFormula::from_clauses(max, clauses)
    }

    pub fn push_clause(&mut self, clause: Clause) {
        if let Some(v) = clause.max_var() {
            self.next_fresh_var = self.next_fresh_var.max(v.index() + 1);
        }
        self.clauses.push(clause);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_declared_vars(&self) -> u32 {
        self.num_declared_vars
    }

    pub fn next_fresh_var(&self) -> u32 {
        self.next_fresh_var
    }

    /// Number of variables the header should declare: every occurring and
    /// every allocated variable.
    pub fn num_vars(&self) -> u32 {
        self.next_fresh_var - 1
    }

    /// Allocates a variable that does not occur in the formula.
    pub fn fresh_var(&mut self) -> Var {
        let v = Var(self.next_fresh_var);
        self.next_fresh_var += 1;
        self.num_declared_vars = self.num_declared_vars.max(v.0);
        v
    }

    /// Raises the declared variable count (and the fresh counter with it).
    pub fn declare_vars(&mut self, n: u32) {
        self.num_declared_vars = self.num_declared_vars.max(n);
        self.next_fresh_var = self.next_fresh_var.max(n + 1);
    }

    /// Size of the formula: the sum of clause lengths.
    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// Number of distinct variables that occur in some clause.
    pub fn occurring_var_count(&self) -> usize {
        let mut vars: Vec<Var> = self
            .clauses
            .iter()
            .flat_map(|c| c.literals().iter().map(|l| l.var()))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars.len()
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    /// Appends the clauses of `other`, keeping the larger variable bookkeeping.
    pub fn extend(&mut self, other: CnfFormula) {
        self.declare_vars(other.num_declared_vars);
        self.next_fresh_var = self.next_fresh_var.max(other.next_fresh_var);
        self.clauses.extend(other.clauses);
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: clause data before the `p cnf` header")]
    MissingHeader { line: usize },
    #[error("line {line}: token `{token}` is not an integer")]
    NotAnInteger { line: usize, token: String },
    #[error("line {line}: literal `{token}` refers to variable 0")]
    ZeroVariable { line: usize, token: String },
    #[error("line {line}: variable {var} exceeds the cap {cap}")]
    VariableTooLarge { line: usize, var: u64, cap: u32 },
    #[error("final clause is not terminated by 0")]
    UnterminatedClause,
    #[error("no `p cnf` header found")]
    NoHeader,
    #[error("input is not valid UTF-8")]
    Encoding,
}

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    pub var_cap: u32,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            var_cap: DEFAULT_VAR_CAP,
        }
    }
}

/// A parsed DIMACS file together with what the header claimed.
#[derive(Clone, Debug)]
pub struct ParsedDimacs {
    pub formula: CnfFormula,
    pub header_vars: u32,
    pub header_clauses: usize,
}

impl ParsedDimacs {
    pub fn clause_count_matches(&self) -> bool {
        self.header_clauses == self.formula.num_clauses()
    }
}

pub fn parse_dimacs(input: &[u8]) -> Result<CnfFormula, DimacsError> {
    parse_dimacs_with(input, ParseOptions::default()).map(|p| p.formula)
}

pub fn parse_dimacs_with(input: &[u8], options: ParseOptions) -> Result<ParsedDimacs, DimacsError> {
    let text = std::str::from_utf8(input).map_err(|_| DimacsError::Encoding)?;
    let mut header: Option<(u32, usize)> = None;
    let mut formula = CnfFormula::new(0);
    let mut current: Vec<Literal> = Vec::new();
    let mut open = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        // SATLIB files end with a `%` trailer.
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader {
                    line: line_no,
                    reason: "duplicate header".into(),
                });
            }
            let (vars, clauses) = parse_header(line, line_no, options.var_cap)?;
            formula.declare_vars(vars);
            header = Some((vars, clauses));
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::MissingHeader { line: line_no });
        }
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::NotAnInteger {
                line: line_no,
                token: token.to_string(),
            })?;
            if value == 0 {
                if token.starts_with('-') {
                    return Err(DimacsError::ZeroVariable {
                        line: line_no,
                        token: token.to_string(),
                    });
                }
                formula.push_clause(Clause::new(current.drain(..)));
                open = false;
                continue;
            }
            let magnitude = value.unsigned_abs();
            if magnitude > u64::from(options.var_cap) {
                return Err(DimacsError::VariableTooLarge {
                    line: line_no,
                    var: magnitude,
                    cap: options.var_cap,
                });
            }
            current.push(Literal::from_dimacs(value).expect("nonzero literal within cap"));
            open = true;
        }
    }

    let (header_vars, header_clauses) = header.ok_or(DimacsError::NoHeader)?;
    if open {
        return Err(DimacsError::UnterminatedClause);
    }
    if header_clauses != formula.num_clauses() {
        log::warn!(
            "header declares {} clauses but {} were read",
            header_clauses,
            formula.num_clauses()
        );
    }
    if formula.num_vars() > header_vars {
        log::warn!(
            "header declares {} variables but variable {} occurs",
            header_vars,
            formula.num_vars()
        );
    }
    Ok(ParsedDimacs {
        formula,
        header_vars,
        header_clauses,
    })
}

fn parse_header(line: &str, line_no: usize, cap: u32) -> Result<(u32, usize), DimacsError> {
    let malformed = |reason: &str| DimacsError::MalformedHeader {
        line: line_no,
        reason: reason.to_string(),
    };
    let mut parts = line.split_whitespace();
    if parts.next() != Some("p") {
        return Err(malformed("expected `p cnf <vars> <clauses>`"));
    }
    if parts.next() != Some("cnf") {
        return Err(malformed("format is not `cnf`"));
    }
    let vars: u64 = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("bad variable count"))?;
    let clauses: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed("bad clause count"))?;
    if parts.next().is_some() {
        return Err(malformed("trailing tokens"));
    }
    if vars > u64::from(cap) {
        return Err(DimacsError::VariableTooLarge {
            line: line_no,
            var: vars,
            cap,
        });
    }
    Ok((vars as u32, clauses))
}

/// Writes `f` in DIMACS format with literals in ascending literal order.
pub fn write_dimacs<W: Write>(f: &CnfFormula, mut out: W) -> io::Result<()> {
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses())?;
    let mut line = String::new();
    for clause in f.clauses() {
        line.clear();
        for lit in clause.literals() {
            line.push_str(&lit.to_dimacs().to_string());
            line.push(' ');
        }
        line.push_str("0\n");
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn to_dimacs_string(f: &CnfFormula) -> String {
    let mut buf = Vec::new();
    write_dimacs(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}
