//! Euler-Maruyama simulation of the (r, y) system with explosion detection,
//! and the Monte Carlo estimators built on it.
//!
//! A path is a pure function of `(params, curve, config, path_index)`; batches
//! run in parallel and are reduced in path order, so every estimate is
//! bit-reproducible for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::model::{sigma_r, ForwardCurve, ModelParams, State};
use crate::rng::NormalStream;

fn default_threshold() -> f64 {
    1e6
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Euler step in years.
    pub dt: f64,
    /// Simulation horizon in years.
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Level of `r` or `y` at which a path is declared exploded.
    #[serde(default = "default_threshold")]
    pub explosion_threshold: f64,
    /// Keep every k-th step in [`PathResult::samples`].
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            dt,
            horizon,
            n_paths,
            seed,
            explosion_threshold: default_threshold(),
            record_stride: default_stride(),
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.explosion_threshold = threshold;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_paths(mut self, n_paths: usize) -> Self {
        self.n_paths = n_paths;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Number of Euler steps covering the horizon.
    pub fn n_steps(&self) -> usize {
        let n = self.horizon / self.dt;
        let nearest = n.round();
        if (n - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            n.ceil() as usize
        }
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(config(
                "horizon",
                format!("must be finite and >= dt, got {}", self.horizon),
            ));
        }
        if self.n_paths == 0 {
            return Err(config("n_paths", "must be at least 1"));
        }
        if self.record_stride == 0 {
            return Err(config("record_stride", "must be at least 1"));
        }
        let floor = 10.0 * (p.lambda0 + p.displacement);
        if !(self.explosion_threshold >= floor) {
            return Err(config(
                "explosion_threshold",
                format!(
                    "must be at least 10 x the initial rate ({floor}), got {}",
                    self.explosion_threshold
                ),
            ));
        }
        Ok(())
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub path_index: u64,
    pub exploded: bool,
    /// Left edge of the first step that crossed the threshold, `+inf` otherwise.
    pub tau_hat: f64,
    pub samples: Vec<Sample>,
    /// Last finite state (at the horizon when the path survived).
    pub terminal: State,
}

/// Unrecorded outcome of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub exploded: bool,
    pub tau_hat: f64,
    pub terminal: State,
    /// Left-Riemann sum of `r dt` up to the horizon; `+inf` after an explosion.
    pub integrated_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Paths simulated, exploded ones included.
    pub n: usize,
    pub n_exploded: usize,
    /// The estimand is infinite because some paths blew up; `mean` then only
    /// averages the surviving paths.
    pub diverged: bool,
}

impl McEstimate {
    /// Sample mean and standard error, summed in slice order.
    pub fn from_values(values: &[f64], n_exploded: usize, diverged: bool) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            n,
            n_exploded,
            diverged,
        }
    }
}

/// What to do with paths that explode before the payoff date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnExplosion {
    /// Flag the estimate as divergent and average the survivors.
    Diverge,
    /// Drop exploded paths from the average.
    Exclude,
}

/// Core Euler loop in shifted coordinates `z = r + a` with curve `lambda + a`,
/// so the displaced model runs the exact arithmetic of the log-normal one.
fn run_path<F: FnMut(f64, f64, f64)>(
    p: &ModelParams,
    shifted: &ForwardCurve,
    cfg: &SimConfig,
    path_index: u64,
    mut record: Option<F>,
) -> PathSummary {
    let a = p.displacement;
    let unshifted = ModelParams {
        displacement: 0.0,
        ..*p
    };
    let n_steps = cfg.n_steps();
    let stride = cfg.record_stride;
    let dt = cfg.dt;
    let sqdt = dt.sqrt();
    let beta = p.beta;
    let thr = cfg.explosion_threshold;
    let mut noise = NormalStream::new(cfg.seed, path_index);

    let mut z = shifted.value(0.0);
    let mut y = 0.0;
    let mut int_r = 0.0;
    if let Some(f) = record.as_mut() {
        f(0.0, z - a, y);
    }
    for k in 0..n_steps {
        let t = k as f64 * dt;
        let (lam, dlam) = shifted.value_and_slope(t);
        let vol = sigma_r(z, &unshifted);
        let dw = sqdt * noise.next_normal();
        let z_next = z + (y - beta * z + beta * lam + dlam) * dt + vol * dw;
        let y_next = y + (vol * vol - 2.0 * beta * y) * dt;
        int_r += (z - a) * dt;
        if !(z_next < thr && y_next < thr && z_next.is_finite()) {
            return PathSummary {
                exploded: true,
                tau_hat: t,
                terminal: State::new(z - a, y, t),
                integrated_rate: f64::INFINITY,
            };
        }
        z = z_next;
        y = y_next.max(0.0);
        let done = k + 1;
        if done % stride == 0 || done == n_steps {
            if let Some(f) = record.as_mut() {
                f(done as f64 * dt, z - a, y);
            }
        }
    }
    PathSummary {
        exploded: false,
        tau_hat: f64::INFINITY,
        terminal: State::new(z - a, y, n_steps as f64 * dt),
        integrated_rate: int_r,
    }
}

fn checked(p: &ModelParams, curve: &ForwardCurve, cfg: &SimConfig) -> Result<ForwardCurve> {
    p.validate()?;
    cfg.validate(p)?;
    Ok(curve.shifted(p.displacement))
}

/// Simulates one path, recording every `record_stride`-th step.
pub fn simulate_path(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
    path_index: u64,
) -> Result<PathResult> {
    let shifted = checked(p, curve, cfg)?;
    Ok(recorded_path(p, &shifted, cfg, path_index))
}

fn recorded_path(
    p: &ModelParams,
    shifted: &ForwardCurve,
    cfg: &SimConfig,
    path_index: u64,
) -> PathResult {
    let mut samples = Vec::with_capacity(cfg.n_steps() / cfg.record_stride + 2);
    let s = run_path(
        p,
        shifted,
        cfg,
        path_index,
        Some(|t, r, y| samples.push(Sample { t, r, y })),
    );
    PathResult {
        path_index,
        exploded: s.exploded,
        tau_hat: s.tau_hat,
        samples,
        terminal: s.terminal,
    }
}

/// Recorded paths `0..n` (all of `cfg.n_paths` when `n` is `None`).
pub fn simulate_paths(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
    n: Option<usize>,
) -> Result<Vec<PathResult>> {
    let shifted = checked(p, curve, cfg)?;
    let n = n.unwrap_or(cfg.n_paths).min(cfg.n_paths);
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| recorded_path(p, &shifted, cfg, i))
        .collect())
}

/// Unrecorded outcome of every path, in path order.
pub fn simulate_summaries(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
) -> Result<Vec<PathSummary>> {
    let shifted = checked(p, curve, cfg)?;
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| run_path(p, &shifted, cfg, i, None::<fn(f64, f64, f64)>))
        .collect())
}

/// `tau_hat` of every path (`+inf` for survivors).
pub fn explosion_times(p: &ModelParams, curve: &ForwardCurve, cfg: &SimConfig) -> Result<Vec<f64>> {
    Ok(simulate_summaries(p, curve, cfg)?
        .into_iter()
        .map(|s| s.tau_hat)
        .collect())
}

/// Fraction of paths with `tau_hat <= t`, from precomputed explosion times.
pub fn explosion_fraction(taus: &[f64], t: f64) -> McEstimate {
    let n = taus.len();
    let hits = taus.iter().filter(|&&tau| tau <= t).count();
    let p_hat = hits as f64 / n as f64;
    McEstimate {
        mean: p_hat,
        std_error: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
        n,
        n_exploded: hits,
        diverged: false,
    }
}

/// Monte Carlo estimate of `P(tau <= t)`.
pub fn explosion_probability(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
    t: f64,
) -> Result<McEstimate> {
    if t > cfg.horizon {
        return Err(Error::Domain(format!(
            "checkpoint {t} lies beyond the simulation horizon {}",
            cfg.horizon
        )));
    }
    Ok(explosion_fraction(&explosion_times(p, curve, cfg)?, t))
}

/// Explosion fractions at several checkpoints from a single batch.
pub fn explosion_profile(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
    checkpoints: &[f64],
) -> Result<Vec<(f64, McEstimate)>> {
    if let Some(&t) = checkpoints.iter().find(|&&t| t > cfg.horizon) {
        return Err(Error::Domain(format!(
            "checkpoint {t} lies beyond the simulation horizon {}",
            cfg.horizon
        )));
    }
    let taus = explosion_times(p, curve, cfg)?;
    Ok(checkpoints
        .iter()
        .map(|&t| (t, explosion_fraction(&taus, t)))
        .collect())
}

/// Monte Carlo mean of `payoff(state at horizon)`.
///
/// Paths that explode, or whose payoff is not finite, are either reported as
/// divergence ([`OnExplosion::Diverge`]) or dropped ([`OnExplosion::Exclude`]).
pub fn expectation_functional<F>(
    p: &ModelParams,
    curve: &ForwardCurve,
    cfg: &SimConfig,
    payoff: F,
    on_explosion: OnExplosion,
) -> Result<McEstimate>
where
    F: Fn(&State) -> f64 + Sync,
{
    let summaries = simulate_summaries(p, curve, cfg)?;
    reduce_payoffs(&summaries, |s| payoff(&s.terminal), on_explosion)
}

pub(crate) fn reduce_payoffs<F>(
    summaries: &[PathSummary],
    payoff: F,
    on_explosion: OnExplosion,
) -> Result<McEstimate>
where
    F: Fn(&PathSummary) -> f64,
{
    let n_exploded = summaries.iter().filter(|s| s.exploded).count();
    let values: Vec<f64> = summaries
        .iter()
        .filter(|s| !s.exploded)
        .map(payoff)
        .filter(|v| v.is_finite())
        .collect();
    let dropped = summaries.len() - values.len();
    match on_explosion {
        OnExplosion::Exclude => {
            if values.is_empty() {
                return Err(Error::EmptySample);
            }
            let mut est = McEstimate::from_values(&values, n_exploded, false);
            est.n = summaries.len();
            Ok(est)
        }
        OnExplosion::Diverge => {
            if values.is_empty() {
                return Ok(McEstimate {
                    mean: f64::INFINITY,
                    std_error: f64::INFINITY,
                    n: summaries.len(),
                    n_exploded,
                    diverged: true,
                });
            }
            let mut est = McEstimate::from_values(&values, n_exploded, dropped > 0);
            est.n = summaries.len();
            Ok(est)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::normal_at;

    fn flat(l: f64) -> ForwardCurve {
        ForwardCurve::flat(l).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = ModelParams::lognormal(0.2, 0.0, 0.1);
        let cfg = SimConfig::new(0.01, 1.0, 10, 1);
        assert!(cfg.validate(&p).is_ok());
        assert!(cfg.with_paths(0).validate(&p).is_err());
        assert!(cfg.with_dt(0.0).validate(&p).is_err());
        assert!(cfg.with_horizon(0.001).validate(&p).is_err());
        assert!(cfg.with_threshold(0.5).validate(&p).is_err());
        assert!(cfg.with_stride(0).validate(&p).is_err());
        assert!(matches!(
            simulate_path(&p, &flat(0.1), &cfg.with_paths(0), 0),
            Err(Error::Config {
                name: "n_paths",
                ..
            })
        ));
        assert_eq!(SimConfig::new(0.01, 100.0, 1, 0).n_steps(), 10_000);
        assert_eq!(SimConfig::new(1.0 / 365.0, 1.0, 1, 0).n_steps(), 365);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: SimConfig =
            serde_json::from_str(r#"{"dt":0.01,"horizon":5,"n_paths":3,"seed":9}"#).unwrap();
        assert_eq!(cfg.explosion_threshold, 1e6);
        assert_eq!(cfg.record_stride, 1);
        assert!(serde_json::from_str::<SimConfig>(
            r#"{"dt":0.01,"horizon":5,"n_paths":3,"seed":9,"bogus":1}"#
        )
        .is_err());
    }

    #[test]
    fn first_step_uses_stream_noise() {
        let p = ModelParams::lognormal(0.2, 0.05, 0.1);
        let cfg = SimConfig::new(0.01, 0.02, 1, 77);
        let path = simulate_path(&p, &flat(0.1), &cfg, 5).unwrap();
        let z0 = normal_at(77, 5, 0);
        let r1 = 0.1 + 0.0 + 0.02 * 0.1 * z0;
        assert_eq!(path.samples[1].r, r1);
        assert!((path.samples[1].y - 0.02f64.powi(2) * 0.01).abs() < 1e-18);
        assert_eq!(path.samples.len(), 3);
    }

    #[test]
    fn deterministic_and_order_independent() {
        let p = ModelParams::lognormal(0.2, 0.0, 0.1);
        let cfg = SimConfig::new(0.01, 60.0, 16, 3).with_stride(100);
        let batch = simulate_paths(&p, &flat(0.1), &cfg, None).unwrap();
        for i in (0..16).rev() {
            let single = simulate_path(&p, &flat(0.1), &cfg, i).unwrap();
            assert_eq!(single, batch[i as usize]);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let again = pool.install(|| simulate_paths(&p, &flat(0.1), &cfg, None).unwrap());
        assert_eq!(again, batch);
    }

    #[test]
    fn exploded_path_invariants() {
        let p = ModelParams::lognormal(0.2, 0.0, 0.1);
        let cfg = SimConfig::new(0.01, 100.0, 40, 11).with_stride(10);
        let paths = simulate_paths(&p, &flat(0.1), &cfg, None).unwrap();
        assert!(paths.iter().any(|p| p.exploded));
        for path in &paths {
            if path.exploded {
                assert!(path.tau_hat <= cfg.horizon);
                assert!(path.samples.iter().all(|s| s.t <= path.tau_hat));
            } else {
                assert_eq!(path.tau_hat, f64::INFINITY);
                assert_eq!(path.samples.last().unwrap().t, 100.0);
            }
            for s in &path.samples {
                assert!(s.r.is_finite() && s.y.is_finite());
                assert!(s.r < cfg.explosion_threshold && s.y < cfg.explosion_threshold);
                assert!(s.r > 0.0 && s.y >= 0.0);
            }
        }
    }

    #[test]
    fn single_surviving_path_has_zero_fraction() {
        let p = ModelParams::lognormal(0.2, 0.5, 0.1);
        let cfg = SimConfig::new(0.01, 5.0, 1, 1);
        let est = explosion_probability(&p, &flat(0.1), &cfg, 5.0).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.n_exploded, 0);
        assert!(explosion_probability(&p, &flat(0.1), &cfg, 6.0).is_err());
    }

    #[test]
    fn constant_payoff() {
        let p = ModelParams::lognormal(0.2, 0.5, 0.1);
        let cfg = SimConfig::new(0.01, 2.0, 50, 1);
        let est =
            expectation_functional(&p, &flat(0.1), &cfg, |_| 1.0, OnExplosion::Diverge).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert!(!est.diverged);
    }

    #[test]
    fn exclude_mode_with_all_paths_exploded() {
        // tiny threshold relative to the dynamics: everything explodes quickly
        let p = ModelParams::lognormal(1.5, 0.0, 0.1);
        let cfg = SimConfig::new(0.01, 50.0, 8, 1).with_threshold(1.0);
        let r = expectation_functional(&p, &flat(0.1), &cfg, |s| s.r, OnExplosion::Exclude);
        assert!(matches!(r, Err(Error::EmptySample)));
        let d =
            expectation_functional(&p, &flat(0.1), &cfg, |s| s.r, OnExplosion::Diverge).unwrap();
        assert!(d.diverged);
        assert_eq!(d.n_exploded, 8);
    }
}
