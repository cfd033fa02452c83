//! Shared fixtures for the benchmarks.

use qghjm_core::{ForwardCurve, ModelParams, SimConfig};

/// Log-normal parameters of the explosive reference case.
pub fn explosive() -> ModelParams {
    ModelParams::lognormal(0.2, 0.0, 0.1)
}

/// Parameters for which the explosion conditions hold with `beta > 0`.
pub fn mean_reverting() -> ModelParams {
    ModelParams::lognormal(0.2, 0.05, 0.1)
}

pub fn flat_curve() -> ForwardCurve {
    ForwardCurve::flat(0.1).expect("positive level")
}

/// `n_paths` paths of daily-ish steps over `horizon` years.
pub fn batch(n_paths: usize, horizon: f64) -> SimConfig {
    SimConfig::new(0.01, horizon, n_paths, 42)
}
