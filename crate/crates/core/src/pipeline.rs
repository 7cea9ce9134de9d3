//! Mode selection on top of the general and binary reducers.

use std::fmt;
use std::str::FromStr;

use crate::cnf::CnfFormula;
use crate::reduce::binary::reduce_binary;
use crate::reduce::general::reduce_partitioned;
use crate::reduce::{ReduceError, ReduceOptions, Reduction, ReductionStats};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    General,
    Binary,
    /// General first, then binary on its output.
    Both,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "general" => Ok(Mode::General),
            "binary" => Ok(Mode::Binary),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode `{other}` (expected general, binary or both)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::General => "general",
            Mode::Binary => "binary",
            Mode::Both => "both",
        })
    }
}

/// Runs the reducer(s) selected by `mode`. `parts` applies to the general
/// reducer only.
pub fn compact(f: &CnfFormula, mode: Mode, parts: usize, options: &ReduceOptions) -> Result<Reduction, ReduceError> {
    match mode {
        Mode::General => reduce_partitioned(f, parts, options),
        Mode::Binary => {
            options.validate()?;
            reduce_binary(f, options)
        }
        Mode::Both => {
            let first = reduce_partitioned(f, parts, options)?;
            let second = reduce_binary(&first.formula, options)?;
            let mut map = first.map;
            map.append(second.map);
            let stats = ReductionStats::between(
                f,
                &second.formula,
                first.stats.duplicate_clauses_merged + second.stats.duplicate_clauses_merged,
                first.stats.itemsets_applied + second.stats.itemsets_applied,
            );
            Ok(Reduction {
                formula: second.formula,
                map,
                stats,
            })
        }
    }
}
