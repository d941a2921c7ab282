//! Ordinal-pattern symbolization of orbits and estimation of the
//! Kolmogorov-Sinai entropy as the double limit over window degree `d` and
//! block length `k` of `(1/k) H(P_d ∨ T^{-1} P_d ∨ ... ∨ T^{-(k-1)} P_d)`.
//!
//! Modules:
//! - [`ordinal`]: ordinal patterns, Lehmer indices, restriction and alpha sets.
//! - [`partition`]: symbol sequences, empirical partitions, joins, refinement.
//! - [`dynamics`]: interval maps, observables, Lyapunov and non-injectivity oracles.
//! - [`entropy`]: plug-in entropies, entropy-rate tables, permutation entropy.
//! - [`cdf`]: distribution functions, level sets and the rank statistic.
//! - [`verify`]: named property suites with fixed seeds.

pub mod cdf;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod ordinal;
pub mod partition;
pub mod verify;

pub use cdf::{empirical_cdf, rank_statistic, Cdf, ExtReal, LevelSet, LevelSetForm, PiecewiseCdf, StepCdf};
pub use dynamics::{ObservableSpec, SystemSpec};
pub use entropy::{EntropyTable, TableCell, TableParams};
pub use error::{OrdError, Result};
pub use ordinal::{Pattern, PatternIndex};
pub use partition::{EmpiricalPartition, SymbolSequence};
