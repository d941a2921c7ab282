//! Ordinal patterns of real windows and the combinatorics on them.
//!
//! A window `(x_0, ..., x_d)` is mapped to the permutation `(i_0, ..., i_d)`
//! with `x_{i_0} >= x_{i_1} >= ... >= x_{i_d}`, where equal values are listed
//! with the larger index first. Every finite window has exactly one such
//! permutation, so the patterns of degree `d` partition `R^{d+1}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest supported degree. `13!` still fits in a `u64` symbol.
pub const D_MAX: usize = 12;

const FACTORIALS: [u64; D_MAX + 2] = {
    let mut f = [1u64; D_MAX + 2];
    let mut i = 1;
    while i < D_MAX + 2 {
        f[i] = f[i - 1] * i as u64;
        i += 1;
    }
    f
};

/// `n!` for `n <= D_MAX + 1`.
pub fn factorial(n: usize) -> u64 {
    FACTORIALS[n]
}

/// Number of patterns of degree `d`, i.e. `(d + 1)!`.
pub fn alphabet_size(d: usize) -> u64 {
    FACTORIALS[d + 1]
}

fn check_degree(d: usize) -> Result<()> {
    if d == 0 || d > D_MAX {
        return invalid(format!("degree {d} outside [1, {D_MAX}]"));
    }
    Ok(())
}

/// A permutation of `{0, ..., d}` giving the order type of a window of length `d + 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    order: Vec<u8>,
}

impl Pattern {
    /// Builds a pattern from an explicit index order, checking it is a permutation.
    pub fn new(order: Vec<u8>) -> Result<Self> {
        if order.len() < 2 {
            return invalid("pattern needs at least two entries");
        }
        check_degree(order.len() - 1)?;
        let mut seen = [false; D_MAX + 1];
        for &i in &order {
            let i = i as usize;
            if i >= order.len() || seen[i] {
                return invalid(format!("{order:?} is not a permutation of 0..={}", order.len() - 1));
            }
            seen[i] = true;
        }
        Ok(Pattern { order })
    }

    pub fn degree(&self) -> usize {
        self.order.len() - 1
    }

    pub fn order(&self) -> &[u8] {
        &self.order
    }

    /// All patterns of degree `d` in index order.
    pub fn all(d: usize) -> Result<Vec<Pattern>> {
        check_degree(d)?;
        (0..alphabet_size(d))
            .map(|v| index_to_pattern(PatternIndex { value: v, degree: d as u8 }))
            .collect()
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern{:?}", self.order)
    }
}

/// Lehmer-code index of a [`Pattern`], in `[0, (d+1)!)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternIndex {
    pub value: u64,
    pub degree: u8,
}

/// Order type of `window` under the descending-value, descending-index-on-ties rule.
pub fn ordinal_pattern(window: &[f64]) -> Result<Pattern> {
    validate_window(window)?;
    let mut order = [0u8; D_MAX + 1];
    sort_window(window, &mut order[..window.len()]);
    Ok(Pattern { order: order[..window.len()].to_vec() })
}

fn validate_window(window: &[f64]) -> Result<()> {
    if window.len() < 2 {
        return invalid(format!("window length {} < 2", window.len()));
    }
    check_degree(window.len() - 1)?;
    if let Some(x) = window.iter().find(|x| !x.is_finite()) {
        return invalid(format!("non-finite window entry {x}"));
    }
    Ok(())
}

/// Insertion sort of window indices; windows are at most 13 long.
#[inline]
fn sort_window(window: &[f64], order: &mut [u8]) {
    for (slot, i) in order.iter_mut().zip(0u8..) {
        *slot = i;
    }
    for j in 1..order.len() {
        let cur = order[j];
        let v = window[cur as usize];
        let mut k = j;
        // `cur` has the largest index seen so far, so on ties it moves ahead.
        while k > 0 && window[order[k - 1] as usize] <= v {
            order[k] = order[k - 1];
            k -= 1;
        }
        order[k] = cur;
    }
}

#[inline]
fn lehmer(order: &[u8]) -> u64 {
    let n = order.len();
    let mut acc = 0u64;
    for i in 0..n {
        let smaller = order[i + 1..].iter().filter(|&&o| o < order[i]).count() as u64;
        acc += smaller * FACTORIALS[n - 1 - i];
    }
    acc
}

/// Pattern index of a window without materializing the [`Pattern`].
///
/// Callers must have validated the window (finite, length in `2..=D_MAX+1`).
#[inline]
pub(crate) fn window_index_unchecked(window: &[f64]) -> u64 {
    let mut order = [0u8; D_MAX + 1];
    let order = &mut order[..window.len()];
    sort_window(window, order);
    lehmer(order)
}

/// Pattern index of a window, validating it first.
pub fn window_index(window: &[f64]) -> Result<PatternIndex> {
    validate_window(window)?;
    Ok(PatternIndex {
        value: window_index_unchecked(window),
        degree: (window.len() - 1) as u8,
    })
}

pub fn pattern_to_index(p: &Pattern) -> PatternIndex {
    PatternIndex { value: lehmer(&p.order), degree: p.degree() as u8 }
}

pub fn index_to_pattern(ix: PatternIndex) -> Result<Pattern> {
    let d = ix.degree as usize;
    check_degree(d)?;
    if ix.value >= alphabet_size(d) {
        return invalid(format!("index {} out of range for degree {d}", ix.value));
    }
    let n = d + 1;
    let mut remaining: Vec<u8> = (0..n as u8).collect();
    let mut rest = ix.value;
    let mut order = Vec::with_capacity(n);
    for i in 0..n {
        let w = FACTORIALS[n - 1 - i];
        let digit = (rest / w) as usize;
        rest %= w;
        order.push(remaining.remove(digit));
    }
    Ok(Pattern { order })
}

/// Pattern of the first `d + 1` coordinates given the pattern of all `d + 2`.
pub fn pattern_restriction(p: &Pattern) -> Result<Pattern> {
    let d = p.degree();
    if d < 2 {
        return invalid("restriction needs a pattern of degree >= 2");
    }
    let last = d as u8;
    let order = p.order.iter().copied().filter(|&i| i != last).collect();
    Ok(Pattern { order })
}

/// The `d + 2` patterns of degree `d + 1` whose windows, with the first entry
/// dropped, have pattern `p`.
///
/// Entry `j` inserts index 0 at position `j` of `(i_0 + 1, ..., i_d + 1)`.
pub fn alpha_decomposition(p: &Pattern) -> Result<Vec<Pattern>> {
    let d = p.degree();
    check_degree(d + 1)?;
    let shifted: Vec<u8> = p.order.iter().map(|&i| i + 1).collect();
    Ok((0..=d + 1)
        .map(|j| {
            let mut order = Vec::with_capacity(d + 2);
            order.extend_from_slice(&shifted[..j]);
            order.push(0);
            order.extend_from_slice(&shifted[j..]);
            Pattern { order }
        })
        .collect())
}

/// Inverse direction of [`alpha_decomposition`]: the unique degree-`d` pattern
/// whose alpha set contains `q`.
pub fn alpha_parent(q: &Pattern) -> Result<Pattern> {
    if q.degree() < 2 {
        return invalid("alpha parent needs a pattern of degree >= 2");
    }
    let order = q.order.iter().filter(|&&i| i != 0).map(|&i| i - 1).collect();
    Ok(Pattern { order })
}
