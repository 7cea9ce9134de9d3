//! CNF compaction by closed frequent literal sets.
//!
//! A clause database is read as a transaction database (clauses are
//! transactions, literals are items). Closed frequent literal sets are mined,
//! grouped into overlap classes, and greedily replaced by fresh variables
//! with a defining clause, which yields a smaller equi-satisfiable formula.
//! Binary clauses get their own path through head/tail implications.
//!
//! ```
//! use cnfcompact::{parse_dimacs, reduce_formula, ReduceOptions};
//!
//! let f = parse_dimacs(b"p cnf 6 4\n1 -2 3 0\n1 -2 4 0\n1 -2 5 0\n1 -2 6 0\n").unwrap();
//! let r = reduce_formula(&f, &ReduceOptions::default()).unwrap();
//! assert_eq!((r.stats.literals_before, r.stats.literals_after), (12, 11));
//! ```

pub mod cnf;
pub mod fuzz;
pub mod mining;
pub mod oracle;
pub mod pipeline;
pub mod reduce;
mod unionfind;

pub use cnf::{
    parse_dimacs, parse_dimacs_with, to_dimacs_string, write_dimacs, Clause, CnfFormula, DimacsError, Literal,
    ParseOptions, ParsedDimacs, Var,
};
pub use mining::{closed_itemsets, frequent_itemsets, maximal_itemsets, MinedItemset, TransactionDb};
pub use oracle::{check_equisat, solve, Assignment, EquisatReport, OracleError, SolveResult};
pub use pipeline::{compact, Mode};
pub use reduce::binary::{reduce_binary, BImplication};
pub use reduce::general::{is_interesting, reduce_formula, reduce_partitioned};
pub use reduce::{
    CandidateItemset, Definition, DefinitionKind, OverlapClass, ReduceError, ReduceOptions, Reduction, ReductionMap,
    ReductionStats,
};
pub use unionfind::UnionFind;
