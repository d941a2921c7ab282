//! Symbol sequences realizing ordinal partitions of an orbit, empirical
//! partitions (cell histograms), joins, k-blocks and refinement checks.
//!
//! Cell keys are canonical byte strings: each pattern index is written as a
//! big-endian `u64`, tuples and k-grams are plain concatenations, and join
//! keys length-prefix each component with a big-endian `u32`.

use std::collections::BTreeMap;
use std::hash::Hash;

use rustc_hash::FxHashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, OrdError, Result};
use crate::ordinal::{self, alphabet_size, D_MAX};

/// Magic prefix of the binary formats.
pub const MAGIC: &[u8; 4] = b"ORD1";
const KIND_PARTITION: u8 = 1;
const KIND_SYMBOLS: u8 = 2;

/// Opaque cell identifier.
pub type CellKey = Vec<u8>;

/// Per-time-step pattern indices of `arity` observables at a fixed degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSequence {
    d: usize,
    arity: usize,
    /// Row-major `len x arity`.
    symbols: Vec<u64>,
}

impl SymbolSequence {
    pub fn new(d: usize, arity: usize, symbols: Vec<u64>) -> Result<Self> {
        if d == 0 || d > D_MAX {
            return invalid(format!("degree {d} outside [1, {D_MAX}]"));
        }
        if arity == 0 {
            return invalid("arity must be >= 1");
        }
        if !symbols.len().is_multiple_of(arity) {
            return invalid("symbol count is not a multiple of the arity");
        }
        let n = alphabet_size(d);
        if let Some(s) = symbols.iter().find(|&&s| s >= n) {
            return invalid(format!("symbol {s} >= {n} for degree {d}"));
        }
        Ok(SymbolSequence { d, arity, symbols })
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.symbols.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The symbol tuple at time `t`.
    pub fn at(&self, t: usize) -> &[u64] {
        &self.symbols[t * self.arity..(t + 1) * self.arity]
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[u64]> {
        self.symbols.chunks_exact(self.arity)
    }

    pub fn raw(&self) -> &[u64] {
        &self.symbols
    }

    /// Canonical byte key of each k-gram starting at `t = 0, ..., len - k`.
    pub fn block_keys(&self, k: usize) -> Result<Vec<CellKey>> {
        check_block_len(self.len(), k)?;
        let width = self.arity * k;
        Ok(self.symbols.windows(width).step_by(self.arity).map(encode_symbols).collect())
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<&[u64]> = self.tuples().collect();
        serde_json::json!({ "d": self.d, "arity": self.arity, "symbols": rows }).to_string()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            d: usize,
            arity: usize,
            symbols: Vec<Vec<u64>>,
        }
        let raw: Raw = serde_json::from_str(s).map_err(|e| OrdError::Format(e.to_string()))?;
        if raw.symbols.iter().any(|r| r.len() != raw.arity) {
            return Err(OrdError::Format("tuple length differs from arity".into()));
        }
        SymbolSequence::new(raw.d, raw.arity, raw.symbols.concat())
    }

    /// `ORD1`, kind byte 2, then `d`, `arity`, `len` and the symbols, all little-endian `u64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(29 + 8 * self.symbols.len());
        out.extend_from_slice(MAGIC);
        out.push(KIND_SYMBOLS);
        for v in [self.d as u64, self.arity as u64, self.len() as u64] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for s in &self.symbols {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, KIND_SYMBOLS)?;
        let d = r.u64()? as usize;
        let arity = r.u64()? as usize;
        let len = r.u64()? as usize;
        let n = len.checked_mul(arity).ok_or_else(|| OrdError::Format("size overflow".into()))?;
        if n > r.remaining() / 8 {
            return Err(OrdError::Format("truncated symbol data".into()));
        }
        let symbols = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        SymbolSequence::new(d, arity, symbols)
    }
}

fn encode_symbols(s: &[u64]) -> CellKey {
    s.iter().flat_map(|v| v.to_be_bytes()).collect()
}

fn check_block_len(len: usize, k: usize) -> Result<()> {
    if k == 0 {
        return invalid("block length must be >= 1");
    }
    if k > len {
        return invalid(format!("block length {k} exceeds sequence length {len}"));
    }
    Ok(())
}

/// Maps each distinct tuple to a dense id, in first-seen order. Ids are
/// shared across `seqs`, so equal tuples get equal ids in every sequence.
pub(crate) fn dense_ids(seqs: &[SymbolSequence]) -> Vec<Vec<u32>> {
    if seqs.iter().all(|s| s.arity == 1) {
        let mut map: FxHashMap<u64, u32> = FxHashMap::default();
        return seqs
            .iter()
            .map(|s| {
                s.symbols
                    .iter()
                    .map(|&v| {
                        let next = map.len() as u32;
                        *map.entry(v).or_insert(next)
                    })
                    .collect()
            })
            .collect();
    }
    let mut map: FxHashMap<&[u64], u32> = FxHashMap::default();
    seqs.iter()
        .map(|s| {
            s.tuples()
                .map(|t| {
                    let next = map.len() as u32;
                    *map.entry(t).or_insert(next)
                })
                .collect()
        })
        .collect()
}

/// Ordinal symbols of every length-`d+1` window of `series` (stride 1).
pub fn symbolize(series: &[f64], d: usize) -> Result<SymbolSequence> {
    if d == 0 || d > D_MAX {
        return invalid(format!("degree {d} outside [1, {D_MAX}]"));
    }
    if series.len() < d + 1 {
        return invalid(format!("series of length {} is shorter than window {}", series.len(), d + 1));
    }
    if let Some(x) = series.iter().find(|x| !x.is_finite()) {
        return invalid(format!("non-finite series entry {x}"));
    }
    let symbols = series.windows(d + 1).map(ordinal::window_index_unchecked).collect();
    Ok(SymbolSequence { d, arity: 1, symbols })
}

/// Joint symbolization of several equally long series (the join over observables).
pub fn symbolize_multi<S: AsRef<[f64]>>(series_list: &[S], d: usize) -> Result<SymbolSequence> {
    let Some(first) = series_list.first() else {
        return invalid("need at least one series");
    };
    let n = first.as_ref().len();
    if series_list.iter().any(|s| s.as_ref().len() != n) {
        return invalid("series lengths differ");
    }
    let per: Vec<SymbolSequence> = series_list.iter().map(|s| symbolize(s.as_ref(), d)).collect::<Result<_>>()?;
    let arity = per.len();
    let len = per[0].len();
    let mut symbols = Vec::with_capacity(len * arity);
    for t in 0..len {
        symbols.extend(per.iter().map(|s| s.symbols[t]));
    }
    Ok(SymbolSequence { d, arity, symbols })
}

/// Histogram over cells of a finite partition, standing in for the measure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EmpiricalPartition {
    counts: BTreeMap<CellKey, u64>,
    total: u64,
}

impl EmpiricalPartition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys<I, K>(keys: I) -> Self
    where
        I: IntoIterator<Item = K>,
        K: Into<CellKey>,
    {
        let mut p = Self::new();
        for k in keys {
            p.add(k.into(), 1);
        }
        p
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (CellKey, u64)>) -> Self {
        let mut p = Self::new();
        for (k, c) in counts {
            p.add(k, c);
        }
        p
    }

    pub fn add(&mut self, key: CellKey, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += count;
        self.total += count;
    }

    /// Adds counts and totals of `other`; associative and commutative.
    pub fn merge(&mut self, other: &EmpiricalPartition) {
        for (k, &c) in &other.counts {
            self.add(k.clone(), c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn num_cells(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, key: &[u8]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Cells in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&CellKey, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.values().copied()
    }

    pub fn to_json(&self) -> String {
        let cells: Vec<serde_json::Value> = self
            .counts
            .iter()
            .map(|(k, c)| serde_json::json!({ "key": hex::encode(k), "count": c }))
            .collect();
        serde_json::json!({ "total": self.total, "cells": cells }).to_string()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Cell {
            key: String,
            count: u64,
        }
        #[derive(Deserialize)]
        struct Raw {
            total: u64,
            cells: Vec<Cell>,
        }
        let raw: Raw = serde_json::from_str(s).map_err(|e| OrdError::Format(e.to_string()))?;
        let mut p = Self::new();
        for c in raw.cells {
            let key = hex::decode(&c.key).map_err(|e| OrdError::Format(e.to_string()))?;
            if c.count == 0 {
                return Err(OrdError::Format("zero-count cell".into()));
            }
            p.add(key, c.count);
        }
        if p.total != raw.total {
            return Err(OrdError::Format(format!("total {} != sum of counts {}", raw.total, p.total)));
        }
        Ok(p)
    }

    /// `ORD1`, kind byte 1, `total`, cell count, then per cell the key length,
    /// key bytes and count. Integers are little-endian `u64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(KIND_PARTITION);
        out.extend_from_slice(&self.total.to_le_bytes());
        out.extend_from_slice(&(self.counts.len() as u64).to_le_bytes());
        for (k, c) in &self.counts {
            out.extend_from_slice(&(k.len() as u64).to_le_bytes());
            out.extend_from_slice(k);
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, KIND_PARTITION)?;
        let total = r.u64()?;
        let cells = r.u64()?;
        let mut p = Self::new();
        for _ in 0..cells {
            let len = r.u64()? as usize;
            let key = r.take(len)?.to_vec();
            let c = r.u64()?;
            if c == 0 {
                return Err(OrdError::Format("zero-count cell".into()));
            }
            p.add(key, c);
        }
        r.finish()?;
        if p.total != total {
            return Err(OrdError::Format(format!("total {total} != sum of counts {}", p.total)));
        }
        Ok(p)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], kind: u8) -> Result<Self> {
        if bytes.len() < 5 || &bytes[..4] != MAGIC {
            return Err(OrdError::Format("missing ORD1 magic".into()));
        }
        if bytes[4] != kind {
            return Err(OrdError::Format(format!("expected record kind {kind}, found {}", bytes[4])));
        }
        Ok(Reader { bytes, pos: 5 })
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(OrdError::Format("unexpected end of data".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(OrdError::Format(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

/// Histogram of contiguous k-grams of symbol tuples.
pub fn k_blocks(s: &SymbolSequence, k: usize) -> Result<EmpiricalPartition> {
    check_block_len(s.len(), k)?;
    let width = s.arity * k;
    let mut counts: FxHashMap<&[u64], u64> = FxHashMap::default();
    for w in s.symbols.windows(width).step_by(s.arity) {
        *counts.entry(w).or_insert(0) += 1;
    }
    Ok(EmpiricalPartition::from_counts(counts.into_iter().map(|(w, c)| (encode_symbols(w), c))))
}

/// Key of the cell `a ∩ b` in a join.
pub fn join_key(a: &[u8], b: &[u8]) -> CellKey {
    let mut k = Vec::with_capacity(8 + a.len() + b.len());
    k.extend_from_slice(&(a.len() as u32).to_be_bytes());
    k.extend_from_slice(a);
    k.extend_from_slice(&(b.len() as u32).to_be_bytes());
    k.extend_from_slice(b);
    k
}

/// Splits a join key back into its components.
pub fn split_join_key(key: &[u8]) -> Result<(&[u8], &[u8])> {
    let bad = || OrdError::Format("malformed join key".into());
    let la = u32::from_be_bytes(key.get(..4).ok_or_else(bad)?.try_into().unwrap()) as usize;
    let a = key.get(4..4 + la).ok_or_else(bad)?;
    let rest = &key[4 + la..];
    let lb = u32::from_be_bytes(rest.get(..4).ok_or_else(bad)?.try_into().unwrap()) as usize;
    if rest.len() != 4 + lb {
        return Err(bad());
    }
    Ok((a, &rest[4..]))
}

/// Join of two partitions sampled along the same stream, keyed by cell pairs.
pub fn join<A: AsRef<[u8]>, B: AsRef<[u8]>>(a: &[A], b: &[B]) -> Result<EmpiricalPartition> {
    Ok(EmpiricalPartition::from_keys(join_keys(a, b)?))
}

/// Per-sample keys of the join, for chaining joins or refinement checks.
pub fn join_keys<A: AsRef<[u8]>, B: AsRef<[u8]>>(a: &[A], b: &[B]) -> Result<Vec<CellKey>> {
    if a.len() != b.len() {
        return invalid(format!("stream lengths differ: {} vs {}", a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| join_key(x.as_ref(), y.as_ref())).collect())
}

/// Whether `fine` refines `coarse` on the observed stream: each fine cell
/// co-occurs with a single coarse cell.
pub fn refines<F: Hash + Eq, C: Eq>(fine: &[F], coarse: &[C]) -> Result<bool> {
    if fine.len() != coarse.len() {
        return invalid(format!("stream lengths differ: {} vs {}", fine.len(), coarse.len()));
    }
    let mut image: FxHashMap<&F, &C> = FxHashMap::default();
    for (f, c) in fine.iter().zip(coarse) {
        match image.get(f) {
            Some(&seen) if seen != c => return Ok(false),
            Some(_) => {}
            None => {
                image.insert(f, c);
            }
        }
    }
    Ok(true)
}

/// Checks that degree-`d` symbols of the once-shifted series are a function of
/// the degree-`(d+1)` symbols of the original series at aligned times.
pub fn shift_refinement_check(series: &[f64], d: usize) -> Result<bool> {
    if series.len() < d + 2 {
        return invalid(format!("series of length {} too short for degree {}", series.len(), d + 1));
    }
    let fine = symbolize(series, d + 1)?;
    let shifted = symbolize(&series[1..], d)?;
    refines(fine.raw(), shifted.raw())
}
