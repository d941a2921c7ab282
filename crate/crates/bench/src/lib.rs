//! Shared fixtures for the benchmarks.

use ordent_core::dynamics::{orbit, typical_points, SystemSpec, BURN_IN};

/// A burnt-in logistic(4) orbit of `len` points.
pub fn logistic_orbit(len: usize, seed: u64) -> Vec<f64> {
    let sys = SystemSpec::Logistic { r: 4.0 };
    let x0 = typical_points(&sys, 1, seed).expect("logistic(4) has an invariant sampler")[0];
    orbit(&sys, x0, BURN_IN + len).expect("valid orbit").split_off(BURN_IN)
}
