//! Formula rewriting by substituting frequent literal sets with fresh
//! variables.
//!
//! [`general`] rewrites arbitrary clauses (a frequent set `I` found in `k`
//! clauses becomes one fresh literal `x` in each of them, plus the definition
//! clause `I ∨ ¬x`). [`binary`] compacts the binary sub-formula after grouping
//! it into head/tail implications. Both drive the same greedy per-class loop in
//! this module and differ only in their [`Policy`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{CnfFormula, Literal, Var};
use crate::mining::{closed_itemsets, is_sorted_subset, TransactionDb};
use crate::unionfind::UnionFind;

pub mod binary;
pub mod general;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("clause {index} has {len} literals, expected 2")]
    NotBinary { index: usize, len: usize },
    #[error("clause {index} is tautological")]
    Tautology { index: usize },
    #[error("recorded cover of {set:?} disagrees with the formula at row {row}")]
    CoverMismatch { set: Vec<i64>, row: usize },
}

/// How a fresh variable relates to the literals it stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefinitionKind {
    /// `x` stands for the disjunction of its set (general clauses).
    #[default]
    Or,
    /// `z` stands for the conjunction of its set (implication tails).
    And,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub var: Var,
    pub defines: Vec<Literal>,
    pub kind: DefinitionKind,
}

impl Definition {
    /// Value the fresh variable takes when extending a model.
    pub fn evaluate(&self, value: impl Fn(Literal) -> bool) -> bool {
        match self.kind {
            DefinitionKind::Or => self.defines.iter().any(|&l| value(l)),
            DefinitionKind::And => self.defines.iter().all(|&l| value(l)),
        }
    }
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("malformed reduction map: {0}")]
    Json(#[from] serde_json::Error),
    #[error("entry {0}: variable index must be positive")]
    BadVariable(usize),
    #[error("entry {0}: literal 0 in `defines`")]
    BadLiteral(usize),
    #[error("entry {0}: variables must be strictly increasing")]
    NotIncreasing(usize),
}

/// Ledger of fresh variables in allocation order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionMap {
    definitions: Vec<Definition>,
}

#[derive(Serialize, Deserialize)]
struct DefinitionRecord {
    var: u32,
    defines: Vec<i64>,
    #[serde(default)]
    kind: DefinitionKind,
}

impl ReductionMap {
    pub fn new() -> ReductionMap {
        ReductionMap::default()
    }

    pub fn push(&mut self, def: Definition) {
        if let Some(last) = self.definitions.last() {
            assert!(def.var > last.var, "fresh variables must increase");
        }
        self.definitions.push(def);
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.definitions
    }

    pub fn len(&self) -> usize {
        self.definitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.definitions.is_empty()
    }

    pub fn append(&mut self, other: ReductionMap) {
        for d in other.definitions {
            self.push(d);
        }
    }

    pub(crate) fn remap(&mut self, f: impl Fn(Var) -> Var) {
        for d in &mut self.definitions {
            d.var = f(d.var);
            for l in &mut d.defines {
                *l = Literal::new(f(l.var()), l.is_positive());
            }
        }
    }

    pub fn to_json(&self) -> String {
        let records: Vec<DefinitionRecord> = self
            .definitions
            .iter()
            .map(|d| DefinitionRecord {
                var: d.var.index(),
                defines: d.defines.iter().map(|l| l.to_dimacs()).collect(),
                kind: d.kind,
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&records).expect("map serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ReductionMap, MapError> {
        let records: Vec<DefinitionRecord> = serde_json::from_str(text)?;
        let mut map = ReductionMap::new();
        for (i, r) in records.into_iter().enumerate() {
            let var = Var::new(r.var).ok_or(MapError::BadVariable(i))?;
            if map.definitions.last().is_some_and(|d| d.var >= var) {
                return Err(MapError::NotIncreasing(i));
            }
            let defines = r
                .defines
                .iter()
                .map(|&v| Literal::from_dimacs(v).ok_or(MapError::BadLiteral(i)))
                .collect::<Result<Vec<_>, _>>()?;
            map.push(Definition {
                var,
                defines,
                kind: r.kind,
            });
        }
        Ok(map)
    }
}

/// Size accounting for one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub literals_before: usize,
    pub literals_after: usize,
    pub clauses_before: usize,
    pub clauses_after: usize,
    pub vars_before: u32,
    pub vars_after: u32,
    pub duplicate_clauses_merged: usize,
    pub itemsets_applied: usize,
}

impl ReductionStats {
    pub fn between(before: &CnfFormula, after: &CnfFormula, merged: usize, applied: usize) -> ReductionStats {
        ReductionStats {
            literals_before: before.literal_count(),
            literals_after: after.literal_count(),
            clauses_before: before.num_clauses(),
            clauses_after: after.num_clauses(),
            vars_before: before.num_vars(),
            vars_after: after.num_vars(),
            duplicate_clauses_merged: merged,
            itemsets_applied: applied,
        }
    }

    /// `100·(before − after)/before`, 0 for an empty input.
    pub fn percent_removed(&self) -> f64 {
        if self.literals_before == 0 {
            return 0.0;
        }
        100.0 * (self.literals_before as f64 - self.literals_after as f64) / self.literals_before as f64
    }
}

/// Output of a reduction: the rewritten formula, its fresh-variable ledger
/// and size accounting.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub formula: CnfFormula,
    pub map: ReductionMap,
    pub stats: ReductionStats,
}

impl Reduction {
    pub(crate) fn unchanged(f: &CnfFormula) -> Reduction {
        Reduction {
            formula: f.clone(),
            map: ReductionMap::new(),
            stats: ReductionStats::between(f, f, 0, 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Minimum support λ.
    pub min_support: usize,
    /// Smallest itemset size considered.
    pub min_size: usize,
    /// Mine/rewrite cycles; later cycles recover sets pruned by overlap.
    pub passes: usize,
    /// Re-admit the non-overlapping remainder of pruned sets as candidates.
    pub overlap_salvage: bool,
    /// Re-check every maintained cover against the formula after each step.
    pub validate_covers: bool,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            min_support: 2,
            min_size: 2,
            passes: 2,
            overlap_salvage: false,
            validate_covers: false,
        }
    }
}

impl ReduceOptions {
    pub fn validate(&self) -> Result<(), ReduceError> {
        if self.min_support < 2 {
            return Err(ReduceError::InvalidOptions("min_support must be at least 2".into()));
        }
        if self.min_size < 2 {
            return Err(ReduceError::InvalidOptions("min_size must be at least 2".into()));
        }
        if self.passes < 1 {
            return Err(ReduceError::InvalidOptions("passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// A closed frequent literal set considered for substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CandidateItemset {
    /// Sorted in literal order.
    pub literals: Vec<Literal>,
    pub support: usize,
    /// Indices of the clauses (or implication rows) containing `literals`.
    pub cover: Vec<usize>,
    pub score: i64,
}

impl CandidateItemset {
    /// Builds a candidate scored with the general literal-saving score.
    pub fn new(literals: impl IntoIterator<Item = Literal>, cover: Vec<usize>) -> CandidateItemset {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort_unstable();
        literals.dedup();
        let mut cover = cover;
        cover.sort_unstable();
        cover.dedup();
        let support = cover.len();
        CandidateItemset {
            score: general::alpha(literals.len(), support),
            literals,
            support,
            cover,
        }
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn overlaps(&self, other: &CandidateItemset) -> bool {
        intersects(&self.literals, &other.literals)
    }
}

/// A connected component of the overlap graph over candidates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapClass {
    /// Sorted by literal sequence.
    pub members: Vec<CandidateItemset>,
}

/// Partitions candidates into overlap classes (edge iff a literal is shared).
/// Classes are ordered by their smallest member.
pub fn build_overlap_classes(cands: Vec<CandidateItemset>) -> Vec<OverlapClass> {
    let mut uf = UnionFind::new(cands.len());
    let mut owner: HashMap<Literal, usize> = HashMap::new();
    for (i, c) in cands.iter().enumerate() {
        for &l in &c.literals {
            match owner.get(&l) {
                Some(&j) => {
                    uf.union(i, j);
                }
                None => {
                    owner.insert(l, i);
                }
            }
        }
    }
    let groups = uf.groups();
    let mut slots: Vec<Option<CandidateItemset>> = cands.into_iter().map(Some).collect();
    let mut classes: Vec<OverlapClass> = groups
        .into_iter()
        .map(|g| {
            let mut members: Vec<CandidateItemset> = g
                .into_iter()
                .map(|i| slots[i].take().expect("each index once"))
                .collect();
            members.sort_by(|a, b| a.literals.cmp(&b.literals));
            OverlapClass { members }
        })
        .collect();
    classes.sort_by(|a, b| a.members[0].literals.cmp(&b.members[0].literals));
    classes
}

/// What distinguishes the general and binary rewrites.
pub(crate) trait Policy {
    fn interesting(&self, size: usize, support: usize) -> bool;
    fn score(&self, size: usize, support: usize) -> i64;
    fn kind(&self) -> DefinitionKind;
    /// Row added for a new fresh variable standing for `set`.
    fn definition_row(&self, set: &[Literal], fresh: Var) -> Vec<Literal>;
}

/// Mines closed literal sets over `rows` and keeps those the policy accepts.
pub(crate) fn mine_candidates<P: Policy>(
    rows: &[Vec<Literal>],
    min_support: usize,
    min_size: usize,
    policy: &P,
) -> Vec<CandidateItemset> {
    let db = TransactionDb::from_rows(rows.iter().map(|r| r.iter().map(|l| l.item())));
    closed_itemsets(&db, min_support, min_size)
        .into_iter()
        .filter(|m| policy.interesting(m.items.len(), m.support))
        .map(|m| {
            let mut literals: Vec<Literal> = m
                .items
                .iter()
                .map(|&i| Literal::from_item(i).expect("items come from literals"))
                .collect();
            literals.sort_unstable();
            CandidateItemset {
                score: policy.score(literals.len(), m.support),
                literals,
                support: m.support,
                cover: m.cover,
            }
        })
        .collect()
}

/// State shared by the per-class greedy loop.
pub(crate) struct Engine<'a, P> {
    pub rows: &'a mut Vec<Vec<Literal>>,
    pub policy: &'a P,
    pub next_var: &'a mut u32,
    pub map: &'a mut ReductionMap,
    pub salvage: bool,
    pub validate: bool,
}

pub(crate) struct Applied {
    pub var: Var,
    pub definition_row: usize,
}

impl<P: Policy> Engine<'_, P> {
    /// Greedily applies the members of one overlap class until none is left.
    pub fn run_class(&mut self, class: OverlapClass) -> Result<Vec<Applied>, ReduceError> {
        let mut members = class.members;
        let mut applied = Vec::new();
        loop {
            members.retain(|m| self.policy.interesting(m.literals.len(), m.support));
            if members.is_empty() {
                break;
            }
            for m in &mut members {
                m.score = self.policy.score(m.literals.len(), m.support);
            }
            let best = members.remove(most_interesting(&members));
            let set = &best.literals;

            let var = Var::new(*self.next_var).expect("fresh counter starts above 0");
            *self.next_var += 1;
            let fresh = var.positive();
            for &row in &best.cover {
                if !substitute(&mut self.rows[row], set, fresh) {
                    return Err(ReduceError::CoverMismatch {
                        set: set.iter().map(|l| l.to_dimacs()).collect(),
                        row,
                    });
                }
            }
            let definition_row = self.rows.len();
            self.rows.push(self.policy.definition_row(set, var));
            self.map.push(Definition {
                var,
                defines: set.clone(),
                kind: self.policy.kind(),
            });

            for m in &mut members {
                if m.literals.len() > set.len() && is_sorted_subset(set, &m.literals) {
                    substitute(&mut m.literals, set, fresh);
                }
            }

            let mut salvaged = Vec::new();
            members.retain(|m| {
                if !intersects(&m.literals, set) || is_sorted_subset(&m.literals, set) {
                    return true;
                }
                if self.salvage {
                    let rest = difference(&m.literals, set);
                    if self.policy.interesting(rest.len(), m.support) {
                        salvaged.push(rest);
                    }
                }
                false
            });

            for m in &mut members {
                if m.literals.len() < set.len() && is_sorted_subset(&m.literals, set) {
                    m.cover = difference(&m.cover, &best.cover);
                    m.cover.push(definition_row);
                    m.support = m.cover.len();
                }
            }

            for rest in salvaged {
                if members.iter().any(|m| m.literals == rest) {
                    continue;
                }
                let cover = self.scan_cover(&rest);
                members.push(CandidateItemset {
                    score: self.policy.score(rest.len(), cover.len()),
                    support: cover.len(),
                    literals: rest,
                    cover,
                });
            }

            if self.validate {
                for m in &members {
                    let actual = self.scan_cover(&m.literals);
                    if actual != m.cover {
                        let row = actual
                            .iter()
                            .chain(&m.cover)
                            .copied()
                            .find(|r| actual.contains(r) != m.cover.contains(r))
                            .unwrap_or(0);
                        return Err(ReduceError::CoverMismatch {
                            set: m.literals.iter().map(|l| l.to_dimacs()).collect(),
                            row,
                        });
                    }
                }
            }

            applied.push(Applied { var, definition_row });
        }
        Ok(applied)
    }

    fn scan_cover(&self, set: &[Literal]) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| is_sorted_subset(set, r))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Index of the member with the best score; ties go to larger support, then to
/// the smallest literal sequence.
fn most_interesting(members: &[CandidateItemset]) -> usize {
    let mut best = 0;
    for (i, m) in members.iter().enumerate().skip(1) {
        let b = &members[best];
        let better = (m.score, m.support)
            .cmp(&(b.score, b.support))
            .then_with(|| b.literals.cmp(&m.literals))
            .is_gt();
        if better {
            best = i;
        }
    }
    best
}

/// Replaces `set` inside the sorted `row` by `fresh`. Returns false (leaving
/// the row untouched) when `set` is not contained in `row`.
pub(crate) fn substitute(row: &mut Vec<Literal>, set: &[Literal], fresh: Literal) -> bool {
    if !is_sorted_subset(set, row) {
        return false;
    }
    row.retain(|l| set.binary_search(l).is_err());
    let at = row.partition_point(|&l| l < fresh);
    row.insert(at, fresh);
    true
}

pub(crate) fn intersects<T: Ord>(a: &[T], b: &[T]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

pub(crate) fn difference<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().copied().filter(|x| b.binary_search(x).is_err()).collect()
}
