//! Sufficient conditions for explosion with positive probability, the
//! `(sigma, beta)` region they carve out, and the feasible wedge of Lyapunov
//! coefficients.

use serde::{Deserialize, Serialize};

use super::delta::{kappa_delta, DeltaPair};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{golden_max, grid_then_golden, log_space};

/// Which growth constant enters the conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionConstant {
    /// `2 beta + sigma^2 delta2 (delta2 + 1) / 2`.
    #[default]
    Standard,
    /// `max(2 delta1, delta2) beta + sigma^2 delta2 (delta2 + 1) / 2`, which is
    /// never larger and so admits more parameters.
    Widened,
}

impl ConditionConstant {
    pub fn value(self, p: &ModelParams, d: &DeltaPair) -> f64 {
        let diffusion = 0.5 * p.sigma * p.sigma * d.delta2 * (d.delta2 + 1.0);
        let drift = match self {
            Self::Standard => 2.0,
            Self::Widened => (2.0 * d.delta1).max(d.delta2),
        };
        drift * p.beta + diffusion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionKind {
    /// `sup_R F(R) > 0`.
    I,
    /// `G(R) - C >= 0` for some `R`.
    II,
}

/// Scan grids for [`check_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub n_delta2: usize,
    pub delta2_min: f64,
    pub n_r: usize,
    pub r_max: f64,
    pub tol: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            n_delta2: 400,
            delta2_min: 1e-4,
            n_r: 400,
            r_max: 1e4,
            tol: 1e-10,
        }
    }
}

impl ScanGrid {
    /// Log-uniform `delta2` values strictly inside `(0, 2 gamma - 1)`.
    pub fn delta2_values(&self, gamma: f64) -> Vec<f64> {
        let top = 2.0 * gamma - 1.0;
        let lo = self.delta2_min.min(1e-3 * top);
        let mut g = log_space(lo, top, self.n_delta2 + 1);
        g.pop();
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub constant: ConditionConstant,
    pub satisfied: bool,
    /// Maximizing `R`; present only when the condition holds.
    pub witness_r: Option<f64>,
    /// Maximizing exponents (reported whether or not the condition holds).
    pub witness_deltas: DeltaPair,
    pub sup_value: f64,
}

fn check_r(r: f64, p: &ModelParams) -> Result<()> {
    if !(r >= p.epsilon) {
        return Err(Error::Domain(format!(
            "R = {r} must be at least epsilon = {}",
            p.epsilon
        )));
    }
    Ok(())
}

/// `F(R) = R^(2g) - C [ (1+R)^(d1+1) / (d1 sigma^2) + R^(2g-1) (1+R)^(d2+1) / d2 ]`.
pub fn condition_f(r: f64, p: &ModelParams, d: &DeltaPair) -> Result<f64> {
    condition_f_with(r, p, d, ConditionConstant::Standard)
}

pub fn condition_f_with(
    r: f64,
    p: &ModelParams,
    d: &DeltaPair,
    constant: ConditionConstant,
) -> Result<f64> {
    check_r(r, p)?;
    Ok(f_unchecked(r, p, d, constant.value(p, d)))
}

fn f_unchecked(r: f64, p: &ModelParams, d: &DeltaPair, c: f64) -> f64 {
    let g2 = 2.0 * p.gamma;
    let first = (1.0 + r).powf(d.delta1 + 1.0) / (d.delta1 * p.sigma * p.sigma);
    let second = r.powf(g2 - 1.0) * (1.0 + r).powf(d.delta2 + 1.0) / d.delta2;
    r.powf(g2) - c * (first + second)
}

/// `G(R) = delta2 R / (1 + R)^(delta2 + 1)`.
pub fn condition_g(r: f64, delta2: f64) -> f64 {
    delta2 * r / (1.0 + r).powf(delta2 + 1.0)
}

/// Maximum of [`condition_g`], attained at `R = 1/delta2`.
pub fn g_max(delta2: f64) -> f64 {
    if delta2 == 0.0 {
        return 0.0;
    }
    (delta2 / (1.0 + delta2)).powf(delta2 + 1.0)
}

fn require_explosive_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.5 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

/// Scans `delta2` (and `R` for condition I) for a parameter witness.
pub fn check_condition(
    p: &ModelParams,
    which: ConditionKind,
    scan: &ScanGrid,
) -> Result<ConditionReport> {
    check_condition_with(p, which, scan, ConditionConstant::Standard)
}

pub fn check_condition_with(
    p: &ModelParams,
    which: ConditionKind,
    scan: &ScanGrid,
    constant: ConditionConstant,
) -> Result<ConditionReport> {
    require_explosive_gamma(p.gamma)?;
    p.validate()?;
    let deltas = scan.delta2_values(p.gamma);
    let (d2, r, sup) = match which {
        ConditionKind::I => {
            let rs = log_space(p.epsilon, scan.r_max.max(p.epsilon), scan.n_r);
            let best_r = |d2: f64| -> (f64, f64) {
                let d = DeltaPair::coupled(d2, p.gamma);
                let c = constant.value(p, &d);
                let f = |r: f64| f_unchecked(r, p, &d, c);
                let (lr, v) = grid_then_golden(|lr: f64| f(lr.exp()), &log_grid(&rs), scan.tol);
                (lr.exp(), v)
            };
            let (ld2, sup) =
                grid_then_golden(|ld: f64| best_r(ld.exp()).1, &log_grid(&deltas), scan.tol);
            let d2 = ld2.exp();
            (d2, best_r(d2).0, sup)
        }
        ConditionKind::II => {
            let obj = |d2: f64| {
                let d = DeltaPair::coupled(d2, p.gamma);
                condition_g(r_for_g(d2, p), d2) - constant.value(p, &d)
            };
            let (ld2, sup) =
                grid_then_golden(|ld: f64| obj(ld.exp()), &log_grid(&deltas), scan.tol);
            let d2 = ld2.exp();
            (d2, r_for_g(d2, p), sup)
        }
    };
    let satisfied = match which {
        ConditionKind::I => sup > 0.0,
        ConditionKind::II => sup >= 0.0,
    };
    Ok(ConditionReport {
        condition: which,
        constant,
        satisfied,
        witness_r: satisfied.then_some(r),
        witness_deltas: DeltaPair::coupled(d2, p.gamma),
        sup_value: sup,
    })
}

/// Best admissible `R >= eps` for `G`: `1/delta2`, or `eps` when that is smaller.
pub fn r_for_g(delta2: f64, p: &ModelParams) -> f64 {
    (1.0 / delta2).max(p.epsilon)
}

fn log_grid(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| x.ln()).collect()
}

/// `h(delta2) = G(1/delta2) - sigma^2 delta2 (delta2 + 1) / 2`.
fn region_objective(delta2: f64, sigma: f64) -> f64 {
    g_max(delta2) - 0.5 * sigma * sigma * delta2 * (delta2 + 1.0)
}

/// Maximizer of `G(1/delta2) - sigma^2 delta2 (delta2+1)/2` over
/// `[0, 2 gamma - 1]`, with ties broken toward larger `delta2`.
pub fn delta2_star(sigma: f64, gamma: f64) -> Result<(f64, f64)> {
    require_explosive_gamma(gamma)?;
    let top = 2.0 * gamma - 1.0;
    let mut grid = vec![0.0];
    grid.extend(log_space(1e-8_f64.min(top * 1e-3), top, 1000));
    let (x, fx) = grid_then_golden(|d| region_objective(d, sigma), &grid, 1e-13);
    // the boundary value is exact when it is the maximizer
    if region_objective(top, sigma) >= fx {
        return Ok((top, region_objective(top, sigma)));
    }
    Ok((x, fx))
}

/// Largest mean reversion for which condition II holds at this `sigma`.
pub fn beta_max(sigma: f64, gamma: f64) -> Result<f64> {
    let (_, h) = delta2_star(sigma, gamma)?;
    Ok((0.5 * h).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub sigma: f64,
    pub beta_max: f64,
    pub delta2_star: f64,
}

/// Boundary of the condition-II region in the `(sigma, beta)` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    pub gamma: f64,
    pub points: Vec<RegionPoint>,
}

pub fn region_curve(gamma: f64, sigma_grid: &[f64]) -> Result<RegionCurve> {
    require_explosive_gamma(gamma)?;
    let points = sigma_grid
        .iter()
        .map(|&sigma| {
            let (d, h) = delta2_star(sigma, gamma)?;
            Ok(RegionPoint {
                sigma,
                beta_max: (0.5 * h).max(0.0),
                delta2_star: d,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RegionCurve { gamma, points })
}

/// `(kappa1, kappa2)` with the standard constant.
pub fn kappas(r: f64, p: &ModelParams, d: &DeltaPair) -> (f64, f64) {
    kappas_with(r, p, d, ConditionConstant::Standard)
}

pub fn kappas_with(
    r: f64,
    p: &ModelParams,
    d: &DeltaPair,
    constant: ConditionConstant,
) -> (f64, f64) {
    let c = constant.value(p, d);
    let q = (1.0 + r) / r;
    (
        c / (d.delta1 * p.sigma * p.sigma) * q.powf(d.delta1 + 1.0),
        c / d.delta2 * q.powf(d.delta2 + 1.0),
    )
}

/// Feasible slopes `s = b/a` for which
/// `kappa1 a + kappa2 b <= min(kappa a^e1 b^e2, a R^(d2(d1+1)), b R^-d2)`.
///
/// Above `s* = R^(d2(d1+2))` the binding term is `a R^(d2(d1+1))`, below it
/// `b R^-d2`; the geometric-mean term never binds because `kappa > 1`. The
/// feasible set is therefore one interval, non-empty exactly when `F(R) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeReport {
    pub r: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Slope where the two linear bounds cross.
    pub s_star: f64,
    /// `kappa1 + kappa2 s* <= R^(d2(d1+1))`.
    pub ineq1: bool,
    /// `R^-d2 > kappa2`.
    pub ineq2: bool,
    /// Feasible slopes at or above `s*`.
    pub region1: Option<(f64, f64)>,
    /// Feasible slopes at or below `s*`.
    pub region2: Option<(f64, f64)>,
}

impl WedgeReport {
    pub fn is_empty(&self) -> bool {
        self.region1.is_none() && self.region2.is_none()
    }

    /// All feasible slopes as one closed interval.
    pub fn union(&self) -> Option<(f64, f64)> {
        match (self.region1, self.region2) {
            (Some((_, hi)), Some((lo, _))) => Some((lo, hi)),
            (Some(r), None) | (None, Some(r)) => Some(r),
            (None, None) => None,
        }
    }

    /// Geometric midpoint of the feasible interval.
    pub fn midpoint(&self) -> Option<f64> {
        self.union().map(|(lo, hi)| (lo * hi).sqrt())
    }
}

pub fn wedge_feasible_slopes(r: f64, p: &ModelParams, d: &DeltaPair) -> Result<WedgeReport> {
    wedge_feasible_slopes_with(r, p, d, ConditionConstant::Standard)
}

pub fn wedge_feasible_slopes_with(
    r: f64,
    p: &ModelParams,
    d: &DeltaPair,
    constant: ConditionConstant,
) -> Result<WedgeReport> {
    check_r(r, p)?;
    let (k1, k2) = kappas_with(r, p, d, constant);
    let cap = r.powf(d.delta2 * (d.delta1 + 1.0));
    let gain = r.powf(-d.delta2);
    let s_star = r.powf(d.delta2 * (d.delta1 + 2.0));
    let ineq1 = k1 + k2 * s_star <= cap;
    let ineq2 = gain > k2;
    let region1 = ineq1.then(|| (s_star, (cap - k1) / k2));
    let region2 = if ineq2 {
        let lo = k1 / (gain - k2);
        (lo <= s_star).then_some((lo, s_star))
    } else {
        None
    };
    Ok(WedgeReport {
        r,
        kappa1: k1,
        kappa2: k2,
        s_star,
        ineq1,
        ineq2,
        region1,
        region2,
    })
}

/// `min(kappa a^e1 b^e2, a R^(d2(d1+1)), b R^-d2) - (kappa1 a + kappa2 b)`;
/// non-negative exactly on the wedge.
pub fn wedge_margin(a: f64, b: f64, w: &WedgeReport, d: &DeltaPair) -> f64 {
    let (e1, e2) = d.mean_weights();
    let rhs = (kappa_delta(d.delta1) * a.powf(e1) * b.powf(e2))
        .min(a * w.r.powf(d.delta2 * (d.delta1 + 1.0)))
        .min(b * w.r.powf(-d.delta2));
    rhs - (w.kappa1 * a + w.kappa2 * b)
}

/// Largest `F` over `R` for fixed exponents, by grid plus golden section.
pub fn sup_f(p: &ModelParams, d: &DeltaPair, scan: &ScanGrid) -> (f64, f64) {
    let c = ConditionConstant::Standard.value(p, d);
    let rs = log_grid(&log_space(p.epsilon, scan.r_max.max(p.epsilon), scan.n_r));
    let (lr, v) = grid_then_golden(|lr: f64| f_unchecked(lr.exp(), p, d, c), &rs, scan.tol);
    (lr.exp(), v)
}

/// Golden-section maximum of `G` on `[lo, hi]` (used to cross-check `g_max`).
pub fn g_argmax(delta2: f64, lo: f64, hi: f64) -> (f64, f64) {
    let (lr, v) = golden_max(
        |lr: f64| condition_g(lr.exp(), delta2),
        lo.ln(),
        hi.ln(),
        1e-13,
    );
    (lr.exp(), v)
}
