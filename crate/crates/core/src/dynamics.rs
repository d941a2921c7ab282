//! Interval maps, observables and the oracles used to check entropy estimates
//! against them (Lyapunov exponents, invariant-law sampling, non-injectivity).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OrdError, Result};

/// Steps discarded before an orbit is used.
pub const BURN_IN: usize = 1000;

/// Default tent slope for long symbolizations; slope 2 collapses onto 0 in binary floating point.
pub const DEFAULT_TENT_SLOPE: f64 = 1.9999;

/// Golden-mean rotation number `(sqrt 5 - 1) / 2`.
pub const GOLDEN_ROTATION: f64 = 0.618_033_988_749_894_8;

/// Largest fraction of Lyapunov terms that may be skipped at critical points.
const MAX_SKIPPED_FRACTION: f64 = 1e-3;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A map `T` of the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemSpec {
    /// `x -> r x (1 - x)`, `r` in `(0, 4]`.
    Logistic { r: f64 },
    /// `x -> slope * min(x, 1 - x)`, slope in `(1, 2]`.
    Tent { slope: f64 },
    /// `x -> x + alpha mod 1` on `[0, 1)`.
    Rotation { alpha: f64 },
    /// Piecewise-linear interpolation of `(x, T(x))` nodes covering `[0, 1]`.
    CustomTable { nodes: Vec<(f64, f64)> },
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SystemSpec::Logistic { r } if !(r > 0.0 && r <= 4.0) => {
                invalid(format!("logistic parameter r = {r} must lie in (0, 4]"))
            }
            SystemSpec::Tent { slope } if !(slope > 1.0 && slope <= 2.0) => {
                invalid(format!("tent slope = {slope} must lie in (1, 2]"))
            }
            SystemSpec::Rotation { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                invalid(format!("rotation alpha = {alpha} must lie in (0, 1)"))
            }
            SystemSpec::CustomTable { ref nodes } => {
                validate_table(nodes)?;
                if nodes.iter().any(|&(_, y)| !(0.0..=1.0).contains(&y)) {
                    return invalid("custom-table values must lie in [0, 1]");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            SystemSpec::Rotation { .. } => (0.0..1.0).contains(&x),
            _ => (0.0..=1.0).contains(&x),
        }
    }

    #[inline]
    pub fn step(&self, x: f64) -> f64 {
        match *self {
            SystemSpec::Logistic { r } => r * x * (1.0 - x),
            SystemSpec::Tent { slope } => {
                if x < 0.5 {
                    slope * x
                } else {
                    slope * (1.0 - x)
                }
            }
            SystemSpec::Rotation { alpha } => {
                let y = x + alpha;
                if y >= 1.0 {
                    y - 1.0
                } else {
                    y
                }
            }
            SystemSpec::CustomTable { ref nodes } => interpolate(nodes, x),
        }
    }

    /// `|T'(x)|`, or `None` where `T` is not differentiable.
    pub fn abs_derivative(&self, x: f64) -> Option<f64> {
        match *self {
            SystemSpec::Logistic { r } => Some((r * (1.0 - 2.0 * x)).abs()),
            SystemSpec::Tent { slope } => (x != 0.5).then_some(slope),
            SystemSpec::Rotation { .. } => Some(1.0),
            SystemSpec::CustomTable { ref nodes } => {
                let i = segment(nodes, x);
                if nodes[1..nodes.len() - 1].iter().any(|&(nx, _)| nx == x) {
                    return None;
                }
                let ((x0, y0), (x1, y1)) = (nodes[i], nodes[i + 1]);
                Some(((y1 - y0) / (x1 - x0)).abs())
            }
        }
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSpec::Logistic { r } => write!(f, "logistic:{r}"),
            SystemSpec::Tent { slope } => write!(f, "tent:{slope}"),
            SystemSpec::Rotation { alpha } => write!(f, "rotation:{alpha}"),
            SystemSpec::CustomTable { nodes } => write!(f, "custom-table:{}", format_nodes(nodes)),
        }
    }
}

/// Parses `logistic[:r]`, `tent[:slope]`, `rotation[:alpha]` or
/// `custom-table:x0,y0;x1,y1;...`, validating parameter bounds.
impl FromStr for SystemSpec {
    type Err = OrdError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = split_kind(s);
        let sys = match kind {
            "logistic" => SystemSpec::Logistic { r: parse_param(arg, 4.0)? },
            "tent" => SystemSpec::Tent { slope: parse_param(arg, DEFAULT_TENT_SLOPE)? },
            "rotation" => SystemSpec::Rotation { alpha: parse_param(arg, GOLDEN_ROTATION)? },
            "custom-table" => SystemSpec::CustomTable { nodes: parse_nodes(arg.unwrap_or(""))? },
            other => return invalid(format!("unknown system kind `{other}`")),
        };
        sys.validate()?;
        Ok(sys)
    }
}

/// An observable `Θ = (Ξ_1, ..., Ξ_n)` on the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObservableSpec {
    Identity,
    Affine { a: f64, b: f64 },
    /// `(sin 2πx, cos 2πx)`: injective on `[0, 1)`.
    SinCos,
    /// `(x - c)^2`: two-to-one around `c`.
    QuadraticFold { c: f64 },
    /// Piecewise-linear interpolation of `(x, Ξ(x))` nodes covering `[0, 1]`.
    Custom { nodes: Vec<(f64, f64)> },
}

impl ObservableSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ObservableSpec::Affine { a, b } if !(a.is_finite() && b.is_finite()) => invalid("affine coefficients must be finite"),
            ObservableSpec::QuadraticFold { c } if !c.is_finite() => invalid("fold center must be finite"),
            ObservableSpec::Custom { nodes } => validate_table(nodes),
            _ => Ok(()),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            ObservableSpec::SinCos => 2,
            _ => 1,
        }
    }

    /// Writes the `arity()` components at `x` into `out`.
    #[inline]
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        match *self {
            ObservableSpec::Identity => out[0] = x,
            ObservableSpec::Affine { a, b } => out[0] = a * x + b,
            ObservableSpec::SinCos => {
                let (s, c) = (TAU * x).sin_cos();
                out[0] = s;
                out[1] = c;
            }
            ObservableSpec::QuadraticFold { c } => out[0] = (x - c) * (x - c),
            ObservableSpec::Custom { ref nodes } => out[0] = interpolate(nodes, x),
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.arity()];
        self.eval_into(x, &mut out);
        out
    }

    /// Component series `Ξ_i(x_t)` of an orbit.
    pub fn apply(&self, orbit: &[f64]) -> Vec<Vec<f64>> {
        let n = self.arity();
        let mut series = vec![Vec::with_capacity(orbit.len()); n];
        let mut buf = [0.0; 2];
        for &x in orbit {
            self.eval_into(x, &mut buf[..n]);
            for (s, &v) in series.iter_mut().zip(&buf[..n]) {
                s.push(v);
            }
        }
        series
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableSpec::Identity => write!(f, "identity"),
            ObservableSpec::Affine { a, b } => write!(f, "affine:{a},{b}"),
            ObservableSpec::SinCos => write!(f, "sin-cos"),
            ObservableSpec::QuadraticFold { c } => write!(f, "quadratic-fold:{c}"),
            ObservableSpec::Custom { nodes } => write!(f, "custom:{}", format_nodes(nodes)),
        }
    }
}

/// Parses `identity`, `affine:a,b`, `sin-cos`, `quadratic-fold[:c]` or `custom:x0,y0;...`.
impl FromStr for ObservableSpec {
    type Err = OrdError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = split_kind(s);
        let obs = match kind {
            "identity" => ObservableSpec::Identity,
            "affine" => {
                let v = parse_list(arg.unwrap_or(""))?;
                if v.len() != 2 {
                    return invalid("affine observable needs `affine:a,b`");
                }
                ObservableSpec::Affine { a: v[0], b: v[1] }
            }
            "sin-cos" | "sincos" => ObservableSpec::SinCos,
            "quadratic-fold" | "fold" => ObservableSpec::QuadraticFold { c: parse_param(arg, 0.5)? },
            "custom" => ObservableSpec::Custom { nodes: parse_nodes(arg.unwrap_or(""))? },
            other => return invalid(format!("unknown observable kind `{other}`")),
        };
        obs.validate()?;
        Ok(obs)
    }
}

fn split_kind(s: &str) -> (&str, Option<&str>) {
    match s.trim().split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (s.trim(), None),
    }
}

fn parse_param(arg: Option<&str>, default: f64) -> Result<f64> {
    match arg {
        None | Some("") => Ok(default),
        Some(a) => a.parse().map_err(|_| OrdError::InvalidInput(format!("cannot parse parameter `{a}`"))),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| OrdError::InvalidInput(format!("cannot parse number `{v}`"))))
        .collect()
}

fn parse_nodes(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(|pair| match parse_list(pair)?.as_slice() {
            &[x, y] => Ok((x, y)),
            _ => invalid(format!("table node `{pair}` is not `x,y`")),
        })
        .collect()
}

fn format_nodes(nodes: &[(f64, f64)]) -> String {
    nodes.iter().map(|(x, y)| format!("{x},{y}")).collect::<Vec<_>>().join(";")
}

fn validate_table(nodes: &[(f64, f64)]) -> Result<()> {
    if nodes.len() < 2 {
        return invalid("table needs at least two nodes");
    }
    if nodes.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return invalid("table nodes must be finite");
    }
    if nodes[0].0 != 0.0 || nodes[nodes.len() - 1].0 != 1.0 {
        return invalid("table must start at x = 0 and end at x = 1");
    }
    if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
        return invalid("table abscissae must be strictly increasing");
    }
    Ok(())
}

/// Index `i` of the segment `[x_i, x_{i+1})` containing `x` (last segment is closed).
fn segment(nodes: &[(f64, f64)], x: f64) -> usize {
    let i = nodes.partition_point(|&(nx, _)| nx <= x);
    i.clamp(1, nodes.len() - 1) - 1
}

fn interpolate(nodes: &[(f64, f64)], x: f64) -> f64 {
    let i = segment(nodes, x);
    let ((x0, y0), (x1, y1)) = (nodes[i], nodes[i + 1]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// `(x0, T x0, ..., T^{len-1} x0)`.
pub fn orbit(sys: &SystemSpec, x0: f64, len: usize) -> Result<Vec<f64>> {
    sys.validate()?;
    if !sys.contains(x0) {
        return invalid(format!("initial point {x0} outside the domain of {sys}"));
    }
    if len == 0 {
        return invalid("orbit length must be >= 1");
    }
    let mut out = Vec::with_capacity(len);
    let mut x = x0;
    out.push(x);
    for _ in 1..len {
        x = sys.step(x);
        out.push(x);
    }
    Ok(out)
}

/// I.i.d. draws from the known invariant density of `sys`.
///
/// Logistic `r = 4` uses the arcsine law via `x = sin^2(πu/2)`; tent slope 2
/// and rotations use the uniform law. Other parameters have no closed-form
/// density and yield [`OrdError::UnsupportedSystem`].
pub fn sample_invariant(sys: &SystemSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    sys.validate()?;
    if count == 0 {
        return invalid("sample count must be >= 1");
    }
    let mut rng = rng_from_seed(seed);
    match *sys {
        SystemSpec::Logistic { r: 4.0 } => Ok((0..count)
            .map(|_| {
                let s = (FRAC_PI_2 * rng.random::<f64>()).sin();
                s * s
            })
            .collect()),
        SystemSpec::Tent { slope: 2.0 } => Ok((0..count).map(|_| rng.random::<f64>()).collect()),
        SystemSpec::Rotation { .. } => Ok((0..count).map(|_| rng.random::<f64>()).collect()),
        _ => Err(OrdError::UnsupportedSystem(format!("no closed-form invariant density for {sys}"))),
    }
}

/// Points approximately distributed by the invariant law: exact draws where
/// [`sample_invariant`] supports the system, otherwise uniform draws pushed
/// through [`BURN_IN`] iterations.
pub fn typical_points(sys: &SystemSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    match sample_invariant(sys, count, seed) {
        Err(OrdError::UnsupportedSystem(_)) => {
            let mut rng = rng_from_seed(seed);
            Ok((0..count)
                .map(|_| {
                    let mut x = rng.random::<f64>();
                    for _ in 0..BURN_IN {
                        x = sys.step(x);
                    }
                    x
                })
                .collect())
        }
        other => other,
    }
}

/// Birkhoff average of `ln |T'|` over `n` steps after a burn-in of [`BURN_IN`] steps.
///
/// Points where `T` is not differentiable or `T' = 0` are skipped; more than
/// 0.1% skipped terms is an error.
pub fn lyapunov(sys: &SystemSpec, x0: f64, n: usize) -> Result<f64> {
    if n < 1000 {
        return invalid(format!("lyapunov needs n >= 1000, got {n}"));
    }
    sys.validate()?;
    if !sys.contains(x0) {
        return invalid(format!("initial point {x0} outside the domain of {sys}"));
    }
    let mut x = x0;
    for _ in 0..BURN_IN {
        x = sys.step(x);
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for _ in 0..n {
        match sys.abs_derivative(x) {
            Some(g) if g > 0.0 => {
                sum += g.ln();
                used += 1;
            }
            _ => {}
        }
        x = sys.step(x);
    }
    let skipped = n - used;
    if skipped as f64 > MAX_SKIPPED_FRACTION * n as f64 {
        return invalid(format!("{skipped} of {n} orbit points hit critical or non-differentiable points"));
    }
    Ok(sum / used as f64)
}

/// Monte-Carlo estimate of how often two independent invariant-law points are
/// identified by the observable.
///
/// A pair `(ω, ω')` counts when `|ω - ω'| > sqrt(tol)` (the points are
/// genuinely distinct) and `max_i |Ξ_i(ω) - Ξ_i(ω')| <= tol`. Returns the
/// count divided by `pairs`.
pub fn noninjectivity_fraction(
    obs: &ObservableSpec,
    sys: &SystemSpec,
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<f64> {
    obs.validate()?;
    if pairs == 0 {
        return invalid("pairs must be >= 1");
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return invalid(format!("tolerance {tol} must be positive"));
    }
    let pts = typical_points(sys, 2 * pairs, seed)?;
    let sep = tol.sqrt();
    let n = obs.arity();
    let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
    let hits = pts
        .chunks_exact(2)
        .filter(|p| {
            if (p[0] - p[1]).abs() <= sep {
                return false;
            }
            obs.eval_into(p[0], &mut a[..n]);
            obs.eval_into(p[1], &mut b[..n]);
            a[..n].iter().zip(&b[..n]).all(|(u, v)| (u - v).abs() <= tol)
        })
        .count();
    Ok(hits as f64 / pairs as f64)
}

/// Analytic invariant CDF where known (identity observable only).
pub fn analytic_cdf(sys: &SystemSpec) -> Option<fn(f64) -> f64> {
    fn arcsine(x: f64) -> f64 {
        2.0 / PI * x.clamp(0.0, 1.0).sqrt().asin()
    }
    fn uniform(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }
    match *sys {
        SystemSpec::Logistic { r: 4.0 } => Some(arcsine),
        SystemSpec::Tent { .. } | SystemSpec::Rotation { .. } => Some(uniform),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn orbit_examples() {
        let a = GOLDEN_ROTATION;
        let o = orbit(&SystemSpec::Rotation { alpha: a }, 0.0, 3).unwrap();
        assert_eq!(o, vec![0.0, a, 2.0 * a - 1.0]);

        let o = orbit(&SystemSpec::Logistic { r: 4.0 }, 0.5, 5).unwrap();
        assert_eq!(o, vec![0.5, 1.0, 0.0, 0.0, 0.0]);

        let o = orbit(&SystemSpec::Tent { slope: 2.0 }, 1.0 / 3.0, 4).unwrap();
        for (got, want) in o.iter().zip([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
            assert!((got - want).abs() < 1e-12, "{o:?}");
        }

        assert!(orbit(&SystemSpec::Logistic { r: 4.0 }, 1.5, 3).is_err());
        assert!(orbit(&SystemSpec::Rotation { alpha: 0.3 }, 1.0, 3).is_err());
        assert!(orbit(&SystemSpec::Logistic { r: 4.0 }, 0.2, 0).is_err());
    }

    #[test]
    fn parameter_bounds() {
        assert!("logistic:5".parse::<SystemSpec>().unwrap_err().to_string().contains("(0, 4]"));
        assert!("tent:1".parse::<SystemSpec>().is_err());
        assert!("tent:2.5".parse::<SystemSpec>().is_err());
        assert!("rotation:1".parse::<SystemSpec>().is_err());
        assert!("henon".parse::<SystemSpec>().is_err());
        assert_eq!("tent".parse::<SystemSpec>().unwrap(), SystemSpec::Tent { slope: DEFAULT_TENT_SLOPE });
        assert_eq!("rotation".parse::<SystemSpec>().unwrap(), SystemSpec::Rotation { alpha: GOLDEN_ROTATION });
        assert_eq!("logistic:3.8".parse::<SystemSpec>().unwrap(), SystemSpec::Logistic { r: 3.8 });
        assert!("custom-table:0,0;0.5,1;1,0".parse::<SystemSpec>().is_ok());
        assert!("custom-table:0,0;0.5,2;1,0".parse::<SystemSpec>().is_err());
        assert!("custom-table:0.1,0;1,0".parse::<SystemSpec>().is_err());

        assert_eq!("affine:2,1".parse::<ObservableSpec>().unwrap(), ObservableSpec::Affine { a: 2.0, b: 1.0 });
        assert_eq!("fold".parse::<ObservableSpec>().unwrap(), ObservableSpec::QuadraticFold { c: 0.5 });
        assert!("affine:2".parse::<ObservableSpec>().is_err());
        assert!("nope".parse::<ObservableSpec>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["logistic:4", "tent:1.9999", "rotation:0.25", "custom-table:0,0;0.5,1;1,0"] {
            assert_eq!(s.parse::<SystemSpec>().unwrap().to_string(), s);
        }
        for s in ["identity", "affine:2,-1", "sin-cos", "quadratic-fold:0.5", "custom:0,1;1,0"] {
            assert_eq!(s.parse::<ObservableSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn json_config_block() {
        let sys: SystemSpec = serde_json::from_str(r#"{"kind":"logistic","r":4.0}"#).unwrap();
        assert_eq!(sys, SystemSpec::Logistic { r: 4.0 });
        let obs: ObservableSpec = serde_json::from_str(r#"{"kind":"identity"}"#).unwrap();
        assert_eq!(obs, ObservableSpec::Identity);
        let obs: ObservableSpec = serde_json::from_str(r#"{"kind":"quadratic-fold","c":0.5}"#).unwrap();
        assert_eq!(obs, ObservableSpec::QuadraticFold { c: 0.5 });
        let sys: SystemSpec = serde_json::from_str(r#"{"kind":"custom-table","nodes":[[0,0],[0.5,1],[1,0]]}"#).unwrap();
        assert_eq!(sys.step(0.25), 0.5);
    }

    #[test]
    fn custom_table_matches_tent() {
        let table: SystemSpec = "custom-table:0,0;0.5,1;1,0".parse().unwrap();
        let tent = SystemSpec::Tent { slope: 2.0 };
        for x in [0.0, 0.1, 0.3, 0.7, 0.9, 1.0] {
            assert!((table.step(x) - tent.step(x)).abs() < 1e-15);
            assert_eq!(table.abs_derivative(x), Some(2.0));
        }
        assert_eq!(table.abs_derivative(0.5), None);
    }

    #[test]
    fn sampler_laws() {
        let tent = SystemSpec::Tent { slope: 2.0 };
        let n = 100_000;
        let xs = sample_invariant(&tent, n, 7).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sigma = (1.0 / 12.0 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");

        // Kolmogorov distance to the arcsine law
        let mut ys = sample_invariant(&SystemSpec::Logistic { r: 4.0 }, n, 8).unwrap();
        ys.sort_by(f64::total_cmp);
        let dist = ys
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let f = 2.0 / PI * y.sqrt().asin();
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(dist < 0.01, "KS distance {dist}");

        assert_eq!(sample_invariant(&tent, 10, 3).unwrap(), sample_invariant(&tent, 10, 3).unwrap());
        assert!(matches!(
            sample_invariant(&SystemSpec::Logistic { r: 3.7 }, 10, 1),
            Err(OrdError::UnsupportedSystem(_))
        ));
        assert!(matches!(
            sample_invariant(&SystemSpec::Tent { slope: 1.9999 }, 10, 1),
            Err(OrdError::UnsupportedSystem(_))
        ));
        assert_eq!(typical_points(&SystemSpec::Tent { slope: 1.9999 }, 10, 1).unwrap().len(), 10);
    }

    #[test]
    fn lyapunov_oracles() {
        let rot = SystemSpec::Rotation { alpha: GOLDEN_ROTATION };
        assert_eq!(lyapunov(&rot, 0.1, 10_000).unwrap(), 0.0);
        let tent = SystemSpec::Tent { slope: 2.0 };
        assert!((lyapunov(&tent, 0.3, 10_000).unwrap() - LN2).abs() < 1e-12);
        let logi = SystemSpec::Logistic { r: 4.0 };
        let x0 = sample_invariant(&logi, 1, 42).unwrap()[0];
        let l = lyapunov(&logi, x0, 1_000_000).unwrap();
        assert!((l - LN2).abs() < 1e-2, "lyapunov {l}");
        assert!(lyapunov(&logi, x0, 999).is_err());
    }

    #[test]
    fn lyapunov_fails_when_stuck_on_critical_point() {
        // 0.5 is a fixed point sitting on the corner
        let sys: SystemSpec = "custom-table:0,0;0.5,0.5;1,0".parse().unwrap();
        assert!(lyapunov(&sys, 0.5, 5000).is_err());
    }

    #[test]
    fn noninjectivity_cases() {
        let tent = SystemSpec::Tent { slope: 2.0 };
        let id = noninjectivity_fraction(&ObservableSpec::Identity, &tent, 10_000, 1e-6, 1).unwrap();
        assert_eq!(id, 0.0);
        let sc = noninjectivity_fraction(&ObservableSpec::SinCos, &tent, 10_000, 1e-6, 1).unwrap();
        assert_eq!(sc, 0.0);
        let fold = ObservableSpec::QuadraticFold { c: 0.5 };
        let f = noninjectivity_fraction(&fold, &tent, 100_000, 1e-3, 2).unwrap();
        // pairs mirrored about 0.5 within tol: probability ≈ tol · ln(1/tol)
        let expected = 1e-3 * (1e3f64).ln();
        assert!((f / expected - 1.0).abs() < 0.2, "fraction {f}, expected {expected}");
        assert!(noninjectivity_fraction(&fold, &tent, 10, 0.0, 2).is_err());
    }
}
