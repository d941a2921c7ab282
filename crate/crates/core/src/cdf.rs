//! Distribution functions, their level sets `F^{-1}F(q) = [q-, q+)` or
//! `[q-, q+]`, and the rank statistic `I_d` whose normalization `I_d / d`
//! converges to `F(Ξ(ω))` along orbits of ergodic maps.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{analytic_cdf, orbit, typical_points, ObservableSpec, SystemSpec};
use crate::error::{invalid, Result};

/// Length of the orbit used to calibrate an empirical CDF when no analytic one is known.
pub const CALIBRATION_LEN: usize = 1_000_000;

/// A point of `[-inf, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Comparison against a real number.
    pub fn le(self, x: f64) -> bool {
        match self {
            ExtReal::NegInf => true,
            ExtReal::Finite(v) => v <= x,
            ExtReal::PosInf => false,
        }
    }

    pub fn ge(self, x: f64) -> bool {
        match self {
            ExtReal::NegInf => false,
            ExtReal::Finite(v) => v >= x,
            ExtReal::PosInf => true,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

/// Which end of a level set is included; the left end always is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelSetForm {
    /// `[q-, q+)`
    ClosedOpen,
    /// `[q-, q+]`; also reported when `q+ = +inf`.
    Closed,
}

/// The level set `F^{-1}F(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub form: LevelSetForm,
}

impl LevelSet {
    pub fn contains(&self, t: f64) -> bool {
        self.lower.le(t)
            && match self.form {
                LevelSetForm::Closed => self.upper.ge(t),
                LevelSetForm::ClosedOpen => self.upper.ge(t) && self.upper != ExtReal::Finite(t),
            }
    }
}

/// A right-continuous distribution function on the real line.
pub trait Cdf {
    fn eval(&self, q: f64) -> f64;
    fn level_set(&self, q: f64) -> LevelSet;
}

/// `(q-, q+)`: infimum and supremum of `F^{-1}F(q)`.
pub fn q_bounds<F: Cdf + ?Sized>(cdf: &F, q: f64) -> (ExtReal, ExtReal) {
    let ls = cdf.level_set(q);
    (ls.lower, ls.upper)
}

pub fn level_set_form<F: Cdf + ?Sized>(cdf: &F, q: f64) -> LevelSetForm {
    cdf.level_set(q).form
}

/// `Z = F^{-1}F((-inf, q)) \ (-inf, q)`, which is `F^{-1}F(q) ∩ [q, inf)` when
/// `q- < q` and empty otherwise.
pub fn z_set<F: Cdf + ?Sized>(cdf: &F, q: f64) -> Option<LevelSet> {
    let ls = cdf.level_set(q);
    if ls.lower.ge(q) {
        return None;
    }
    Some(LevelSet { lower: ExtReal::Finite(q), ..ls })
}

/// Piecewise-constant distribution function with jumps at `jumps[i]` to `cum[i]`.
///
/// `cum` is nondecreasing, so zero-height jumps (support points carrying no
/// mass) are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCdf {
    jumps: Vec<f64>,
    cum: Vec<f64>,
}

impl StepCdf {
    pub fn new(jumps: Vec<f64>, cum: Vec<f64>) -> Result<Self> {
        if jumps.is_empty() || jumps.len() != cum.len() {
            return invalid("step cdf needs equally many (>= 1) jumps and cumulative values");
        }
        if jumps.iter().any(|x| !x.is_finite()) || jumps.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("jumps must be finite and strictly increasing");
        }
        if cum.iter().any(|&c| !(c > 0.0 && c <= 1.0)) || cum.windows(2).any(|w| w[0] > w[1]) {
            return invalid("cumulative values must be nondecreasing in (0, 1]");
        }
        if *cum.last().unwrap() != 1.0 {
            return invalid("last cumulative value must be 1");
        }
        Ok(StepCdf { jumps, cum })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    /// CSV with columns `jump,cum`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["jump", "cum"]).expect("in-memory csv write");
        for (j, c) in self.jumps.iter().zip(&self.cum) {
            w.serialize((j, c)).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

impl Cdf for StepCdf {
    fn eval(&self, q: f64) -> f64 {
        match self.jumps.partition_point(|&x| x <= q) {
            0 => 0.0,
            i => self.cum[i - 1],
        }
    }

    fn level_set(&self, q: f64) -> LevelSet {
        let i = self.jumps.partition_point(|&x| x <= q);
        if i == 0 {
            return LevelSet {
                lower: ExtReal::NegInf,
                upper: ExtReal::Finite(self.jumps[0]),
                form: LevelSetForm::ClosedOpen,
            };
        }
        let y = self.cum[i - 1];
        let mut lo = i - 1;
        while lo > 0 && self.cum[lo - 1] == y {
            lo -= 1;
        }
        let mut hi = i;
        while hi < self.jumps.len() && self.cum[hi] == y {
            hi += 1;
        }
        if hi == self.jumps.len() {
            LevelSet { lower: ExtReal::Finite(self.jumps[lo]), upper: ExtReal::PosInf, form: LevelSetForm::Closed }
        } else {
            LevelSet {
                lower: ExtReal::Finite(self.jumps[lo]),
                upper: ExtReal::Finite(self.jumps[hi]),
                form: LevelSetForm::ClosedOpen,
            }
        }
    }
}

/// Empirical distribution function of `samples`.
pub fn empirical_cdf(samples: &[f64]) -> Result<StepCdf> {
    if samples.is_empty() {
        return invalid("empirical cdf of no samples");
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return invalid("samples must be finite");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut jumps = Vec::new();
    let mut cum = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if i + 1 == sorted.len() || sorted[i + 1] != x {
            jumps.push(x);
            cum.push((i + 1) as f64 / n);
        }
    }
    StepCdf::new(jumps, cum)
}

/// Right-continuous CDF that is linear between knots and may jump at them.
///
/// At knot `x_i` the left limit is `left[i]` and the value is `value[i]`;
/// between `x_i` and `x_{i+1}` the function runs linearly from `value[i]` to
/// `left[i+1]`. Below the first knot it is 0, from the last knot on it is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCdf {
    knots: Vec<f64>,
    left: Vec<f64>,
    value: Vec<f64>,
}

impl PiecewiseCdf {
    pub fn new(knots: Vec<f64>, left: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        let m = knots.len();
        if m == 0 || left.len() != m || value.len() != m {
            return invalid("piecewise cdf needs equally many (>= 1) knots, left limits and values");
        }
        if knots.iter().any(|x| !x.is_finite()) || knots.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("knots must be finite and strictly increasing");
        }
        if left[0] != 0.0 || value[m - 1] != 1.0 {
            return invalid("cdf must start from 0 and end at 1");
        }
        for i in 0..m {
            if !(0.0..=1.0).contains(&left[i]) || left[i] > value[i] || (i + 1 < m && value[i] > left[i + 1]) {
                return invalid(format!("values around knot {i} are not nondecreasing in [0, 1]"));
            }
        }
        Ok(PiecewiseCdf { knots, left, value })
    }

    fn flat(&self, seg: isize) -> bool {
        let m = self.knots.len() as isize;
        if seg < 0 || seg >= m - 1 {
            // tails are flat at 0 and 1; the last "segment" is the right tail
            return true;
        }
        self.value[seg as usize] == self.left[seg as usize + 1]
    }

    fn continuous_at(&self, i: usize) -> bool {
        self.left[i] == self.value[i]
    }

    fn walk_left(&self, mut i: usize) -> ExtReal {
        loop {
            if !(self.continuous_at(i) && self.flat(i as isize - 1)) {
                return ExtReal::Finite(self.knots[i]);
            }
            if i == 0 {
                return ExtReal::NegInf;
            }
            i -= 1;
        }
    }

    /// Starting at knot `j` reached along a flat stretch at level `y`.
    fn walk_right(&self, mut j: usize, y: f64) -> (ExtReal, LevelSetForm) {
        let m = self.knots.len();
        loop {
            if self.value[j] != y {
                return (ExtReal::Finite(self.knots[j]), LevelSetForm::ClosedOpen);
            }
            if j + 1 == m {
                return (ExtReal::PosInf, LevelSetForm::Closed);
            }
            if !self.flat(j as isize) {
                return (ExtReal::Finite(self.knots[j]), LevelSetForm::Closed);
            }
            j += 1;
        }
    }
}

impl Cdf for PiecewiseCdf {
    fn eval(&self, q: f64) -> f64 {
        let m = self.knots.len();
        let p = self.knots.partition_point(|&x| x <= q);
        if p == 0 {
            return 0.0;
        }
        let i = p - 1;
        if q == self.knots[i] || i + 1 == m {
            return self.value[i];
        }
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.value[i], self.left[i + 1]);
        if y0 == y1 {
            return y0;
        }
        y0 + (y1 - y0) * (q - x0) / (x1 - x0)
    }

    fn level_set(&self, q: f64) -> LevelSet {
        let m = self.knots.len();
        let y = self.eval(q);
        let p = self.knots.partition_point(|&x| x <= q);
        let single = LevelSet { lower: ExtReal::Finite(q), upper: ExtReal::Finite(q), form: LevelSetForm::Closed };
        if p == 0 {
            // left tail
            let (upper, form) = self.walk_right(0, y);
            return LevelSet { lower: ExtReal::NegInf, upper, form };
        }
        let i = p - 1;
        if q == self.knots[i] {
            let lower = self.walk_left(i);
            let (upper, form) = if i + 1 == m {
                (ExtReal::PosInf, LevelSetForm::Closed)
            } else if self.flat(i as isize) {
                self.walk_right(i + 1, y)
            } else {
                (ExtReal::Finite(q), LevelSetForm::Closed)
            };
            return LevelSet { lower, upper, form };
        }
        if i + 1 == m {
            return LevelSet { lower: self.walk_left(i), upper: ExtReal::PosInf, form: LevelSetForm::Closed };
        }
        if !self.flat(i as isize) {
            return single;
        }
        let lower = self.walk_left(i);
        let (upper, form) = self.walk_right(i + 1, y);
        LevelSet { lower, upper, form }
    }
}

/// `#{r = 1, ..., d-1 : series[t+r] <= series[t]}`.
pub fn rank_statistic(series: &[f64], t: usize, d: usize) -> Result<usize> {
    if d == 0 {
        return invalid("rank statistic needs d >= 1");
    }
    if t + d > series.len() {
        return invalid(format!("window [{t}, {}) exceeds series of length {}", t + d, series.len()));
    }
    let x = series[t];
    Ok(series[t + 1..t + d].iter().filter(|&&v| v <= x).count())
}

/// One step of the SplitMix64 generator; used to derive per-trial seeds.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The seeds `splitmix64` yields from `master`, in order.
pub fn trial_seeds(master: u64, n: usize) -> Vec<u64> {
    let mut state = master;
    (0..n).map(|_| splitmix64(&mut state)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdfSource {
    Analytic,
    Calibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub d: usize,
    pub mean_abs_dev: f64,
    pub max_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub system: SystemSpec,
    pub observable: ObservableSpec,
    pub trials: usize,
    pub seed: u64,
    pub cdf_source: CdfSource,
    pub rows: Vec<RankRow>,
    /// Whether mean deviations are nonincreasing along `rows`.
    pub means_nonincreasing: bool,
}

impl RankReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

enum Reference {
    Analytic(fn(f64) -> f64),
    Empirical(StepCdf),
}

impl Reference {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Reference::Analytic(f) => f(x),
            Reference::Empirical(c) => c.eval(x),
        }
    }
}

/// Compares `I_d(ω)/d` with `F(Ξ(ω))` over `trials` typical points `ω`.
///
/// `F` is analytic for the identity observable on systems with a known
/// invariant law, otherwise calibrated from an orbit of [`CALIBRATION_LEN`]
/// steps. Trial `i` uses the `i`-th seed of [`trial_seeds`].
pub fn rank_convergence_report(
    sys: &SystemSpec,
    obs: &ObservableSpec,
    d_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<RankReport> {
    obs.validate()?;
    if obs.arity() != 1 {
        return invalid("rank statistic needs a scalar observable");
    }
    if trials == 0 || d_list.is_empty() || d_list.contains(&0) {
        return invalid("need trials >= 1 and a nonempty list of degrees >= 1");
    }
    let reference = match (obs, analytic_cdf(sys)) {
        (ObservableSpec::Identity, Some(f)) => Reference::Analytic(f),
        _ => {
            let x0 = typical_points(sys, 1, seed)?[0];
            let cal = orbit(sys, x0, CALIBRATION_LEN)?;
            Reference::Empirical(empirical_cdf(&obs.apply(&cal)[0])?)
        }
    };
    let source = match reference {
        Reference::Analytic(_) => CdfSource::Analytic,
        Reference::Empirical(_) => CdfSource::Calibrated,
    };
    let longest = *d_list.iter().max().unwrap();
    let deviations: Vec<Vec<f64>> = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| {
            let omega = typical_points(sys, 1, s)?[0];
            let xs = obs.apply(&orbit(sys, omega, longest)?).swap_remove(0);
            let target = reference.eval(xs[0]);
            d_list
                .iter()
                .map(|&d| Ok((rank_statistic(&xs, 0, d)? as f64 / d as f64 - target).abs()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<RankRow> = d_list
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let col = deviations.iter().map(|row| row[j]);
            RankRow {
                d,
                mean_abs_dev: col.clone().sum::<f64>() / trials as f64,
                max_abs_dev: col.fold(0.0, f64::max),
            }
        })
        .collect();
    let means_nonincreasing = rows.windows(2).all(|w| w[1].mean_abs_dev <= w[0].mean_abs_dev);
    Ok(RankReport {
        system: sys.clone(),
        observable: obs.clone(),
        trials,
        seed,
        cdf_source: source,
        rows,
        means_nonincreasing,
    })
}
