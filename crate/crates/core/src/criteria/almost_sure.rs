//! Almost-sure explosion for large initial rates: the initial-rate threshold
//! and the check `L V0 < 0` off `Gamma = [2R, inf)^2` for `V0 = e^-r + e^-y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{generator_apply, ModelParams, Partials, State, TestFunction};
use crate::numerics::log_space;

/// Values above `exp(700)` are reported through their logarithm only.
pub const OVERFLOW_LOG: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R0Threshold {
    /// Natural log of the threshold.
    pub log_value: f64,
    /// The threshold itself, absent when it would exceed `exp(700)`.
    pub value: Option<f64>,
    pub overflow: bool,
    /// Log of `(e / beta)(4 beta R + beta + sigma^2)`.
    pub log_first: f64,
    /// Log of `(sigma^2 / beta) exp(e^(2R)(4 beta R + beta + sigma^2)/sigma^2 - 2R - 1)`.
    pub log_second: f64,
}

impl R0Threshold {
    /// Whether `r0` strictly exceeds the threshold.
    pub fn admits(&self, r0: f64) -> bool {
        r0 > 0.0 && r0.ln() > self.log_value
    }
}

/// Initial short rate above which explosion is almost sure:
/// `max((e/beta) q, (sigma^2/beta) exp(e^(2R) q / sigma^2 - 2R - 1))` with
/// `q = 4 beta R + beta + sigma^2`, evaluated in log space.
pub fn as_explosion_r0_threshold(r: f64, p: &ModelParams) -> Result<R0Threshold> {
    if !(p.beta > 0.0) {
        return Err(Error::Domain(format!(
            "almost-sure explosion needs beta > 0, got {}",
            p.beta
        )));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {r}")));
    }
    let s2 = p.sigma * p.sigma;
    let q = 4.0 * p.beta * r + p.beta + s2;
    let log_first = 1.0 - p.beta.ln() + q.ln();
    let log_second = (s2 / p.beta).ln() + (2.0 * r).exp() * q / s2 - 2.0 * r - 1.0;
    let log_value = log_first.max(log_second);
    let overflow = log_value > OVERFLOW_LOG;
    Ok(R0Threshold {
        log_value,
        value: (!overflow).then(|| log_value.exp()),
        overflow,
        log_first,
        log_second,
    })
}

/// `V0(r, y) = e^-r + e^-y`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpSum;

impl TestFunction for ExpSum {
    fn value(&self, r: f64, y: f64) -> f64 {
        (-r).exp() + (-y).exp()
    }

    fn partials(&self, r: f64, y: f64) -> Partials {
        let er = (-r).exp();
        Partials {
            dr: -er,
            drr: er,
            dy: -(-y).exp(),
        }
    }
}

/// Grid over `Gamma^c = {r < 2R or y < 2R}` truncated at `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A5Grid {
    pub n: usize,
    /// Smallest coordinate, as a fraction of `2R`.
    pub floor: f64,
    /// Truncation `L`; defaults to `max(20 R, 50)`.
    pub extent: Option<f64>,
}

impl Default for A5Grid {
    fn default() -> Self {
        Self {
            n: 200,
            floor: 1e-6,
            extent: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A5Report {
    /// Initial rate used in the drift (`lambda0` of the parameters).
    pub r0: f64,
    /// Whether `r0` exceeds the almost-sure threshold for this `R`.
    pub r0_compliant: bool,
    pub max_value: f64,
    pub argmax: (f64, f64),
    pub n_points: usize,
    /// Grid points where `L V0 >= 0`.
    pub n_nonnegative: usize,
}

impl A5Report {
    pub fn passed(&self) -> bool {
        self.max_value < 0.0
    }
}

/// Evaluates `L V0` on `Gamma^c`, with `r0 = p.lambda0` in the drift.
pub fn verify_a5_function(p: &ModelParams, r: f64, grid: &A5Grid) -> Result<A5Report> {
    let threshold = as_explosion_r0_threshold(r, p)?;
    let l = grid.extent.unwrap_or((20.0 * r).max(50.0));
    let axis = log_space(grid.floor * 2.0 * r, l, grid.n);
    let mut max_value = f64::NEG_INFINITY;
    let mut argmax = (f64::NAN, f64::NAN);
    let (mut n_points, mut n_nonnegative) = (0, 0);
    for &x in &axis {
        for &y in &axis {
            if x >= 2.0 * r && y >= 2.0 * r {
                continue;
            }
            let v = generator_apply(&ExpSum, &State::new(x, y, 0.0), p);
            n_points += 1;
            if !(v < 0.0) {
                n_nonnegative += 1;
            }
            if v > max_value || v.is_nan() {
                max_value = v;
                argmax = (x, y);
            }
        }
    }
    Ok(A5Report {
        r0: p.lambda0,
        r0_compliant: threshold.admits(p.lambda0),
        max_value,
        argmax,
        n_points,
        n_nonnegative,
    })
}
