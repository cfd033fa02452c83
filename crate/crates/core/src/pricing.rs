//! Bond prices from the Markov state, simple-compounded rates, and Monte Carlo
//! diagnostics for futures and discounting.
//!
//! With `x = r - lambda(t)` the zero-coupon bond is
//! `P(t,T) = P(0,T)/P(0,t) exp(-G(t,T) x - G(t,T)^2 y / 2)`,
//! `G(t,T) = (1 - exp(-beta (T-t))) / beta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ForwardCurve, ModelParams, State};
use crate::sde::{reduce_payoffs, simulate_summaries, McEstimate, OnExplosion, SimConfig};

/// Below this exponent `exp` underflows; the price is reported as exactly 0.
const UNDERFLOW_EXPONENT: f64 = -745.0;

/// Today's discount factors `P(0, T) = exp(-int_0^T lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    curve: ForwardCurve,
}

impl DiscountCurve {
    pub fn new(curve: ForwardCurve) -> Self {
        Self { curve }
    }

    pub fn forward_curve(&self) -> &ForwardCurve {
        &self.curve
    }

    pub fn price(&self, t: f64) -> f64 {
        (-self.curve.integral(t)).exp()
    }

    /// `P(0, T) / P(0, t)`, computed from the integral over `[t, T]`.
    pub fn ratio(&self, t: f64, big_t: f64) -> f64 {
        (self.curve.integral(t) - self.curve.integral(big_t)).exp()
    }
}

/// `G(t, T) = (1 - exp(-beta (T - t))) / beta`, and `T - t` at `beta = 0`.
pub fn g_factor(t: f64, big_t: f64, beta: f64) -> f64 {
    let tau = big_t - t;
    if beta == 0.0 {
        tau
    } else {
        -(-beta * tau).exp_m1() / beta
    }
}

/// Zero-coupon bond price at `t` for maturity `T` given `x = r - lambda(t)`
/// and `y`. Exponents below the `f64` underflow limit return exactly 0.
pub fn zcb_price(t: f64, big_t: f64, x: f64, y: f64, p: &ModelParams, dc: &DiscountCurve) -> f64 {
    let g = g_factor(t, big_t, p.beta);
    let exponent = dc.curve.integral(t) - dc.curve.integral(big_t) - g * x - 0.5 * g * g * y;
    if exponent < UNDERFLOW_EXPONENT {
        0.0
    } else {
        exponent.exp()
    }
}

/// Simple-compounded rate `(1/P - 1) / (T2 - t)`.
pub fn libor(t: f64, t2: f64, zcb: f64) -> Result<f64> {
    if zcb == 0.0 {
        return Err(Error::CollapsedBond);
    }
    if !(zcb > 0.0) || !(t2 > t) {
        return Err(Error::Domain(format!(
            "need a positive bond price and T2 > t (zcb = {zcb}, t = {t}, T2 = {t2})"
        )));
    }
    Ok((1.0 / zcb - 1.0) / (t2 - t))
}

/// One line of the futures report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuturesRow {
    #[serde(rename = "T")]
    pub maturity: f64,
    pub delta: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub n_exploded: usize,
    pub diverged: bool,
}

impl FuturesRow {
    pub fn new(maturity: f64, delta: f64, est: &McEstimate) -> Self {
        Self {
            maturity,
            delta,
            estimate: est.mean,
            std_error: est.std_error,
            n_exploded: est.n_exploded,
            diverged: est.diverged,
        }
    }
}

fn horizon_check(what: &str, t: f64, cfg: &SimConfig) -> Result<()> {
    if !(t <= cfg.horizon) {
        return Err(Error::Domain(format!(
            "{what} = {t} lies beyond the simulation horizon {}",
            cfg.horizon
        )));
    }
    Ok(())
}

/// `E[1 / P(T, T + delta)] = P(0,T)/P(0,T+delta) E[exp(G x_T + G^2 y_T / 2)]`.
///
/// Paths are simulated to `T`; any path that explodes before `T` marks the
/// estimate as divergent.
pub fn eurodollar_futures(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
    big_t: f64,
    delta: f64,
) -> Result<McEstimate> {
    if !(delta > 0.0) || !(big_t > 0.0) {
        return Err(Error::Domain(format!(
            "need T > 0 and delta > 0 (T = {big_t}, delta = {delta})"
        )));
    }
    horizon_check("T + delta", big_t + delta, cfg)?;
    let run = cfg.with_horizon(big_t);
    let dc = DiscountCurve::new(curve.clone());
    let ratio = dc.ratio(big_t + delta, big_t);
    let g = g_factor(big_t, big_t + delta, p.beta);
    let lam_t = curve.value(big_t);
    let summaries = simulate_summaries(p, curve, &run)?;
    reduce_payoffs(
        &summaries,
        |s| {
            let x = s.terminal.r - lam_t;
            ratio * (g * x + 0.5 * g * g * s.terminal.y).exp()
        },
        OnExplosion::Diverge,
    )
}

/// Monte Carlo `E[exp(-sum r_k dt)]` up to `T`, to compare against `P(0, T)`.
pub fn discount_consistency_check(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
    big_t: f64,
) -> Result<McEstimate> {
    horizon_check("T", big_t, cfg)?;
    if !(big_t >= 0.0) {
        return Err(Error::Domain(format!(
            "T must be non-negative, got {big_t}"
        )));
    }
    if big_t == 0.0 {
        p.validate()?;
        cfg.validate(p)?;
        return Ok(McEstimate {
            mean: 1.0,
            std_error: 0.0,
            n: cfg.n_paths,
            n_exploded: 0,
            diverged: false,
        });
    }
    let summaries = simulate_summaries(p, curve, &cfg.with_horizon(big_t))?;
    reduce_payoffs(
        &summaries,
        |s| (-s.integrated_rate).exp(),
        OnExplosion::Diverge,
    )
}

/// Bond prices `P(t, t + tau)` along a state, for reports.
pub fn bond_strip(
    s: &State,
    tenors: &[f64],
    p: &ModelParams,
    dc: &DiscountCurve,
) -> Vec<(f64, f64)> {
    let x = s.r - dc.curve.value(s.t);
    tenors
        .iter()
        .map(|&tau| (tau, zcb_price(s.t, s.t + tau, x, s.y, p, dc)))
        .collect()
}
