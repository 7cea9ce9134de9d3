//! Transaction databases and frequent / closed / maximal itemset enumeration.
//!
//! Closed itemsets are enumerated depth-first by prefix-preserving closure
//! extension: starting from the closure of the empty set, an itemset `P` with
//! core item `c` is extended by every frequent item `e > c` not in `P`, the
//! closure `Q` of `P ∪ {e}` is computed as the intersection of the covering
//! transactions, and `Q` is kept only if it adds no item smaller than `e`.
//! Every closed frequent itemset is reached exactly once this way.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

/// Opaque item identifier.
pub type Item = u32;
/// Transaction identifier.
pub type Tid = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MiningError {
    #[error("item {0} is not part of the item universe")]
    UnknownItem(Item),
    #[error("transaction id {0} is used twice")]
    DuplicateTid(Tid),
}

/// A finite set of transactions over an item universe.
#[derive(Clone, Debug, Default)]
pub struct TransactionDb {
    tids: Vec<Tid>,
    rows: Vec<Vec<Item>>,
    universe: BTreeSet<Item>,
    seen: BTreeSet<Tid>,
}

impl TransactionDb {
    pub fn new() -> TransactionDb {
        TransactionDb::default()
    }

    /// Builds a database whose tids are the row positions `0..n`.
    pub fn from_rows<I, R>(rows: I) -> TransactionDb
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = Item>,
    {
        let mut db = TransactionDb::new();
        for (tid, row) in rows.into_iter().enumerate() {
            db.push(tid, row).expect("positional tids are distinct");
        }
        db
    }

    /// Adds items to the universe without adding a transaction.
    pub fn extend_universe<I: IntoIterator<Item = Item>>(&mut self, items: I) {
        self.universe.extend(items);
    }

    pub fn push<R: IntoIterator<Item = Item>>(&mut self, tid: Tid, items: R) -> Result<(), MiningError> {
        if !self.seen.insert(tid) {
            return Err(MiningError::DuplicateTid(tid));
        }
        let mut row: Vec<Item> = items.into_iter().collect();
        row.sort_unstable();
        row.dedup();
        self.universe.extend(row.iter().copied());
        self.tids.push(tid);
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn universe(&self) -> &BTreeSet<Item> {
        &self.universe
    }

    pub fn transactions(&self) -> impl Iterator<Item = (Tid, &[Item])> + '_ {
        self.tids.iter().copied().zip(self.rows.iter().map(Vec::as_slice))
    }

    /// Support and cover of `items`.
    pub fn support(&self, items: &[Item]) -> Result<(usize, Vec<Tid>), MiningError> {
        if let Some(&unknown) = items.iter().find(|i| !self.universe.contains(i)) {
            return Err(MiningError::UnknownItem(unknown));
        }
        let mut wanted = items.to_vec();
        wanted.sort_unstable();
        wanted.dedup();
        let mut cover: Vec<Tid> = self
            .transactions()
            .filter(|(_, row)| is_sorted_subset(&wanted, row))
            .map(|(tid, _)| tid)
            .collect();
        cover.sort_unstable();
        Ok((cover.len(), cover))
    }

    /// Frequency as an exact ratio `support / |D|`.
    pub fn frequency(&self, items: &[Item]) -> Result<Frequency, MiningError> {
        let (support, _) = self.support(items)?;
        Ok(Frequency {
            support,
            total: self.len(),
        })
    }
}

/// `support / total`, compared exactly.
#[derive(Clone, Copy, Debug)]
pub struct Frequency {
    pub support: usize,
    pub total: usize,
}

impl Frequency {
    pub fn equals_ratio(&self, num: usize, den: usize) -> bool {
        self.support * den == num * self.total
    }

    pub fn as_f64(&self) -> f64 {
        self.support as f64 / self.total as f64
    }
}

/// An itemset together with its support and cover in the source database.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MinedItemset {
    pub items: Vec<Item>,
    pub support: usize,
    pub cover: Vec<Tid>,
}

/// All itemsets with support ≥ `min_support` and at least `min_size` items.
///
/// Output size is exponential; meant for tiny inputs and cross-checking.
pub fn frequent_itemsets(db: &TransactionDb, min_support: usize, min_size: usize) -> Vec<MinedItemset> {
    assert!(min_support >= 1, "minimum support must be at least 1");
    let universe: Vec<Item> = db.universe.iter().copied().collect();
    let all: Vec<usize> = (0..db.len()).collect();
    let mut out = Vec::new();
    if all.len() < min_support {
        return out;
    }
    let mut current = Vec::new();
    brute_extend(db, &universe, 0, &all, min_support, min_size, &mut current, &mut out);
    out.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn brute_extend(
    db: &TransactionDb,
    universe: &[Item],
    start: usize,
    cover: &[usize],
    min_support: usize,
    min_size: usize,
    current: &mut Vec<Item>,
    out: &mut Vec<MinedItemset>,
) {
    if current.len() >= min_size {
        out.push(itemset(db, current.clone(), cover));
    }
    for (offset, &item) in universe[start..].iter().enumerate() {
        let next: Vec<usize> = cover
            .iter()
            .copied()
            .filter(|&r| db.rows[r].binary_search(&item).is_ok())
            .collect();
        if next.len() >= min_support {
            current.push(item);
            brute_extend(
                db,
                universe,
                start + offset + 1,
                &next,
                min_support,
                min_size,
                current,
                out,
            );
            current.pop();
        }
    }
}

fn itemset(db: &TransactionDb, items: Vec<Item>, rows: &[usize]) -> MinedItemset {
    let mut cover: Vec<Tid> = rows.iter().map(|&r| db.tids[r]).collect();
    cover.sort_unstable();
    MinedItemset {
        items,
        support: rows.len(),
        cover,
    }
}

/// Closed frequent itemsets with at least `min_size` items, sorted by item
/// sequence.
pub fn closed_itemsets(db: &TransactionDb, min_support: usize, min_size: usize) -> Vec<MinedItemset> {
    assert!(min_support >= 1, "minimum support must be at least 1");
    if db.len() < min_support {
        return Vec::new();
    }
    let dense = DenseDb::new(db);
    let all: Vec<u32> = (0..dense.rows.len() as u32).collect();
    let root = dense.closure(&all);
    let mut found: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    if root.len() >= min_size {
        found.push((root.clone(), all.clone()));
    }
    let branches = dense.extensions(&root, None, &all, min_support);
    let nested: Vec<Vec<(Vec<u32>, Vec<u32>)>> = branches
        .into_par_iter()
        .map(|(e, cover)| {
            let mut local = Vec::new();
            let q = dense.closure(&cover);
            if prefix_preserving(&root, &q, e) {
                dense.expand(q, e, cover, min_support, min_size, &mut local);
            }
            local
        })
        .collect();
    found.extend(nested.into_iter().flatten());

    let mut out: Vec<MinedItemset> = found
        .into_iter()
        .map(|(ranks, rows)| {
            let items = ranks.iter().map(|&r| dense.items[r as usize]).collect();
            let rows: Vec<usize> = rows.iter().map(|&r| r as usize).collect();
            itemset(db, items, &rows)
        })
        .collect();
    out.sort();
    out
}

/// Maximal frequent itemsets, derived from the closed ones.
pub fn maximal_itemsets(db: &TransactionDb, min_support: usize, min_size: usize) -> Vec<MinedItemset> {
    let closed = closed_itemsets(db, min_support, 0);
    closed
        .iter()
        .filter(|c| {
            !closed
                .iter()
                .any(|d| d.items.len() > c.items.len() && is_sorted_subset(&c.items, &d.items))
        })
        .filter(|c| c.items.len() >= min_size)
        .cloned()
        .collect()
}

/// Intersection of the rows of the given transactions.
pub fn closure_of(db: &TransactionDb, cover: &[Tid]) -> Vec<Item> {
    let rows: Vec<&Vec<Item>> = db
        .tids
        .iter()
        .zip(&db.rows)
        .filter(|(t, _)| cover.contains(t))
        .map(|(_, r)| r)
        .collect();
    let Some((first, rest)) = rows.split_first() else {
        return db.universe.iter().copied().collect();
    };
    let mut acc: Vec<Item> = (*first).clone();
    for r in rest {
        acc.retain(|i| r.binary_search(i).is_ok());
    }
    acc
}

pub(crate) fn is_sorted_subset<T: Ord>(small: &[T], big: &[T]) -> bool {
    let mut it = big.iter();
    'outer: for s in small {
        for b in it.by_ref() {
            match b.cmp(s) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

fn prefix_preserving(p: &[u32], q: &[u32], e: u32) -> bool {
    p.iter().take_while(|&&x| x < e).count() == q.iter().take_while(|&&x| x < e).count()
}

/// Database with items renumbered to dense ranks (order-preserving).
struct DenseDb {
    items: Vec<Item>,
    rows: Vec<Vec<u32>>,
}

impl DenseDb {
    fn new(db: &TransactionDb) -> DenseDb {
        let items: Vec<Item> = db.universe.iter().copied().collect();
        let rows = db
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|i| items.binary_search(i).expect("row item in universe") as u32)
                    .collect()
            })
            .collect();
        DenseDb { items, rows }
    }

    fn closure(&self, cover: &[u32]) -> Vec<u32> {
        let mut rows = cover.iter().map(|&r| &self.rows[r as usize]);
        let Some(first) = rows.next() else {
            return (0..self.items.len() as u32).collect();
        };
        let mut acc = first.clone();
        for row in rows {
            acc.retain(|i| row.binary_search(i).is_ok());
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// Frequent single-item extensions of `p` beyond `core`, with their covers.
    fn extensions(&self, p: &[u32], core: Option<u32>, cover: &[u32], min_support: usize) -> Vec<(u32, Vec<u32>)> {
        let mut buckets: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &r in cover {
            let row = &self.rows[r as usize];
            let start = match core {
                Some(c) => row.partition_point(|&i| i <= c),
                None => 0,
            };
            for &item in &row[start..] {
                if p.binary_search(&item).is_err() {
                    buckets.entry(item).or_default().push(r);
                }
            }
        }
        buckets
            .into_iter()
            .filter(|(_, rows)| rows.len() >= min_support)
            .collect()
    }

    fn expand(
        &self,
        p: Vec<u32>,
        core: u32,
        cover: Vec<u32>,
        min_support: usize,
        min_size: usize,
        out: &mut Vec<(Vec<u32>, Vec<u32>)>,
    ) {
        for (e, sub) in self.extensions(&p, Some(core), &cover, min_support) {
            let q = self.closure(&sub);
            if prefix_preserving(&p, &q, e) {
                self.expand(q, e, sub, min_support, min_size, out);
            }
        }
        if p.len() >= min_size {
            out.push((p, cover));
        }
    }
}

/// Names for items read from a plain transaction file.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    names: Vec<String>,
}

impl Vocabulary {
    pub fn name(&self, item: Item) -> &str {
        &self.names[item as usize]
    }

    pub fn item(&self, name: &str) -> Option<Item> {
        self.names.iter().position(|n| n == name).map(|p| p as Item)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Reads one transaction per non-empty line, items separated by whitespace.
/// Lines starting with `#` are skipped. Item ids follow the sorted token
/// order; tids count transactions from 1.
pub fn parse_transactions(text: &str) -> (TransactionDb, Vocabulary) {
    let lines: Vec<Vec<&str>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().collect())
        .collect();
    let names: BTreeSet<&str> = lines.iter().flatten().copied().collect();
    let names: Vec<String> = names.into_iter().map(str::to_string).collect();
    let vocab = Vocabulary { names };
    let mut db = TransactionDb::new();
    for (i, tokens) in lines.iter().enumerate() {
        let items = tokens.iter().map(|t| vocab.item(t).expect("token interned"));
        db.push(i + 1, items).expect("line tids are distinct");
    }
    (db, vocab)
}
