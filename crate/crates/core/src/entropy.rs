//! Plug-in Shannon entropy of empirical partitions, block and conditional
//! entropy rates of symbol sequences, and the degree-by-block-length table
//! whose double limit recovers the Kolmogorov-Sinai entropy.
//!
//! All entropies are in nats.

use rustc_hash::FxHashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{orbit, typical_points, ObservableSpec, SystemSpec, BURN_IN};
use crate::error::{invalid, OrdError, Result};
use crate::ordinal::alphabet_size;
use crate::partition::{self, EmpiricalPartition, SymbolSequence};

/// A cell is unreliable when its distinct-block count exceeds `total / UNDERSAMPLING_RATIO`.
pub const UNDERSAMPLING_RATIO: u64 = 10;

/// Sequences must hold at least this many symbols per unit of `k_max`.
pub const MIN_SAMPLES_PER_K: usize = 10;

/// Largest degree accepted by [`ks_table`].
pub const KS_D_MAX: usize = 8;

/// Tolerance (nats) for the monotonicity of block estimates in `k` and `d`.
pub const MONOTONICITY_TOLERANCE: f64 = 0.01;

/// Recommended orbit length per pattern in the alphabet.
pub const SAMPLES_PER_PATTERN: u64 = 50;

/// `-Σ p ln p` from raw counts, summed in sorted order so the result does not
/// depend on hash-map iteration order.
pub(crate) fn entropy_of_counts(mut counts: Vec<u64>) -> f64 {
    counts.sort_unstable();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Shannon entropy of an empirical partition.
pub fn shannon(p: &EmpiricalPartition) -> Result<f64> {
    if p.total() == 0 {
        return invalid("entropy of an empty partition");
    }
    Ok(entropy_of_counts(p.counts().collect()))
}

/// One `(d, k)` entry of an [`EntropyTable`].
///
/// `distinct_blocks` and `total_blocks` describe the `(k+1)`-blocks, the finer
/// of the two block lengths the estimates read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub d: usize,
    pub k: usize,
    /// `(1/k) H(k-blocks)`.
    pub block_nats: f64,
    /// `H(k+1-blocks) - H(k-blocks)`, evaluated on the same starting positions.
    pub cond_nats: f64,
    pub distinct_blocks: u64,
    pub total_blocks: u64,
    #[serde(rename = "reliable_flag")]
    pub reliable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsEstimate {
    pub d: usize,
    pub k: usize,
    pub nats: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub system: SystemSpec,
    pub observable: ObservableSpec,
    pub orbit_len: usize,
    pub orbits: usize,
    pub seed: u64,
    pub monotonicity_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyTable {
    pub d_max: usize,
    pub k_max: usize,
    /// Row-major over `d = 1..=d_max`, then `k = 1..=k_max`.
    pub cells: Vec<TableCell>,
    /// Conditional estimate at the largest reliable `(d, k)`, `d` first.
    pub ks_estimate: Option<KsEstimate>,
    pub metadata: TableMetadata,
    pub warnings: Vec<String>,
}

impl EntropyTable {
    pub fn cell(&self, d: usize, k: usize) -> Option<&TableCell> {
        if d == 0 || k == 0 || d > self.d_max || k > self.k_max {
            return None;
        }
        self.cells.get((d - 1) * self.k_max + (k - 1))
    }

    pub fn row(&self, d: usize) -> &[TableCell] {
        &self.cells[(d - 1) * self.k_max..d * self.k_max]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| OrdError::Format(e.to_string()))
    }

    /// CSV with columns `d,k,block_nats,cond_nats,distinct_blocks,total_blocks,reliable_flag`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(c).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }

    /// Cells flagged unreliable.
    pub fn unreliable(&self) -> impl Iterator<Item = &TableCell> {
        self.cells.iter().filter(|c| !c.reliable)
    }
}

struct BlockStats {
    entropy: f64,
    distinct: u64,
    total: u64,
    /// Plug-in `H(last symbol | first k-1 symbols)` over these blocks.
    cond_last: f64,
}

/// Statistics of all k-grams of `ids` (several independent sequences;
/// blocks do not straddle sequence boundaries).
fn block_stats(seqs: &[Vec<u32>], k: usize) -> BlockStats {
    let mut counts: FxHashMap<&[u32], u64> = FxHashMap::default();
    for s in seqs {
        for w in s.windows(k) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    let total: u64 = counts.values().sum();
    let cond_last = if k >= 2 && total > 0 {
        let mut prefix: FxHashMap<&[u32], u64> = FxHashMap::default();
        for (w, &c) in &counts {
            *prefix.entry(&w[..k - 1]).or_insert(0) += c;
        }
        let mut terms: Vec<(u64, u64)> = counts.iter().map(|(w, &c)| (c, prefix[&w[..k - 1]])).collect();
        terms.sort_unstable();
        // each term is c ln(n/c) with c <= n, so the sum is exactly zero when
        // every prefix has a single continuation
        terms.iter().map(|&(c, n)| c as f64 * (n as f64 / c as f64).ln()).sum::<f64>() / total as f64
    } else {
        0.0
    };
    BlockStats {
        entropy: entropy_of_counts(counts.values().copied().collect()),
        distinct: counts.len() as u64,
        total,
        cond_last,
    }
}

fn is_reliable(distinct: u64, total: u64) -> bool {
    distinct * UNDERSAMPLING_RATIO <= total
}

fn table_row(seqs: &[Vec<u32>], d: usize, k_max: usize) -> Vec<TableCell> {
    let stats: Vec<BlockStats> = (1..=k_max + 1).into_par_iter().map(|k| block_stats(seqs, k)).collect();
    (1..=k_max)
        .map(|k| {
            let (this, next) = (&stats[k - 1], &stats[k]);
            TableCell {
                d,
                k,
                block_nats: this.entropy / k as f64,
                cond_nats: next.cond_last,
                distinct_blocks: next.distinct,
                total_blocks: next.total,
                reliable: next.total > 0 && is_reliable(next.distinct, next.total),
            }
        })
        .collect()
}

fn check_length(len: usize, k_max: usize) -> Result<()> {
    if k_max == 0 {
        return invalid("k_max must be >= 1");
    }
    let required = k_max * MIN_SAMPLES_PER_K;
    if len < required {
        return Err(OrdError::InsufficientData { required, actual: len });
    }
    Ok(())
}

/// Block and conditional entropy estimates for `k = 1..=k_max` at the
/// sequence's degree.
pub fn entropy_rate_table(s: &SymbolSequence, k_max: usize) -> Result<Vec<TableCell>> {
    check_length(s.len(), k_max)?;
    Ok(table_row(&partition::dense_ids(std::slice::from_ref(s)), s.degree(), k_max))
}

/// Parameters of a [`ks_table`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableParams {
    pub d_max: usize,
    pub k_max: usize,
    pub orbit_len: usize,
    pub seed: u64,
    /// Number of independent orbits; their block counts are pooled with equal weight.
    pub orbits: usize,
}

impl TableParams {
    pub fn new(d_max: usize, k_max: usize, orbit_len: usize, seed: u64) -> Self {
        TableParams { d_max, k_max, orbit_len, seed, orbits: 1 }
    }
}

/// Observable series along `params.orbits` orbits started from typical points
/// and burnt in for [`BURN_IN`] steps.
pub fn observable_series(sys: &SystemSpec, obs: &ObservableSpec, orbit_len: usize, orbits: usize, seed: u64) -> Result<Vec<Vec<Vec<f64>>>> {
    obs.validate()?;
    let starts = typical_points(sys, orbits, seed)?;
    starts
        .into_par_iter()
        .map(|x0| {
            let o = orbit(sys, x0, BURN_IN + orbit_len)?;
            Ok(obs.apply(&o[BURN_IN..]))
        })
        .collect()
}

/// The entropy table `(1/k) H(∨_{j<k} T^{-j} P_d)` over `d = 1..=d_max`,
/// `k = 1..=k_max`, estimated from orbits of `sys` observed through `obs`.
pub fn ks_table(sys: &SystemSpec, obs: &ObservableSpec, params: &TableParams) -> Result<EntropyTable> {
    let TableParams { d_max, k_max, orbit_len, seed, orbits } = *params;
    if d_max == 0 || d_max > KS_D_MAX {
        return invalid(format!("d_max = {d_max} outside [1, {KS_D_MAX}]"));
    }
    if orbits == 0 {
        return invalid("need at least one orbit");
    }
    sys.validate()?;
    check_length(orbit_len.saturating_sub(d_max), k_max)?;

    let mut warnings = Vec::new();
    let recommended = alphabet_size(d_max) * SAMPLES_PER_PATTERN;
    if ((orbit_len * orbits) as u64) < recommended {
        warnings.push(format!(
            "orbit length {} is below the recommended {} for d = {d_max}; expect undersampled cells",
            orbit_len * orbits,
            recommended
        ));
    }

    let series = observable_series(sys, obs, orbit_len, orbits, seed)?;
    let rows: Vec<Vec<TableCell>> = (1..=d_max)
        .into_par_iter()
        .map(|d| {
            let symbols = series
                .iter()
                .map(|components| partition::symbolize_multi(components, d))
                .collect::<Result<Vec<_>>>()?;
            Ok(table_row(&partition::dense_ids(&symbols), d, k_max))
        })
        .collect::<Result<_>>()?;
    let cells: Vec<TableCell> = rows.into_iter().flatten().collect();

    let ks_estimate = cells
        .iter()
        .filter(|c| c.reliable)
        .max_by_key(|c| (c.d, c.k))
        .map(|c| KsEstimate { d: c.d, k: c.k, nats: c.cond_nats });
    let flagged = cells.iter().filter(|c| !c.reliable).count();
    if flagged > 0 {
        warnings.push(format!("{flagged} of {} cells are undersampled (distinct blocks > total/{UNDERSAMPLING_RATIO})", cells.len()));
    }
    if ks_estimate.is_none() {
        warnings.push("no reliable cell; no KS estimate reported".into());
    }

    Ok(EntropyTable {
        d_max,
        k_max,
        cells,
        ks_estimate,
        metadata: TableMetadata {
            system: sys.clone(),
            observable: obs.clone(),
            orbit_len,
            orbits,
            seed,
            monotonicity_tolerance: MONOTONICITY_TOLERANCE,
        },
        warnings,
    })
}

/// `H(pattern histogram) / d`.
pub fn permutation_entropy(s: &SymbolSequence) -> Result<f64> {
    let d = s.degree();
    let required = (10.0 * (alphabet_size(d) as f64).sqrt()).ceil() as usize;
    if s.len() < required {
        return Err(OrdError::InsufficientData { required, actual: s.len() });
    }
    Ok(shannon(&partition::k_blocks(s, 1)?)? / d as f64)
}
