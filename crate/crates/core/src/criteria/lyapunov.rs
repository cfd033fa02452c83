//! Lyapunov certificate `V = C1 - C2 (1+y)^-d1 - C3 (1+r)^-d2` for explosion
//! with positive probability, and its numerical verification on `D^c`,
//! the complement of `D = (0, R)^2`.

use serde::{Deserialize, Serialize};

use super::conditions::{
    r_for_g, wedge_feasible_slopes_with, ConditionConstant, ConditionKind, ConditionReport,
    WedgeReport,
};
use super::delta::{kappa_delta, DeltaPair};
use crate::error::{Error, Result};
use crate::model::{generator_apply, ModelParams, Partials, State, TestFunction};
use crate::numerics::{grid_then_golden, log_space};

/// How a [`LyapunovSpec`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateOrigin {
    /// Geometric midpoint of the analytic wedge of coefficient slopes.
    AnalyticWedge,
    /// Direct search over `C3/C2` maximizing the verified slack.
    NumericalSearch,
    /// Supplied by the caller.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpec {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub deltas: DeltaPair,
    /// Radius of the excluded square `D = (0, R)^2`.
    pub r: f64,
    /// Growth constant in `L V >= C V`.
    pub c: f64,
    pub origin: CertificateOrigin,
}

/// `max(2 d1, d2) beta + sigma^2 d2 (d2 + 1) / 2`, the smallest admissible `C`.
pub fn growth_constant(p: &ModelParams, d: &DeltaPair) -> f64 {
    ConditionConstant::Widened.value(p, d)
}

impl LyapunovSpec {
    /// Certificate with `C1 = C2 + C3` and the smallest admissible `C`.
    pub fn new(c2: f64, c3: f64, deltas: DeltaPair, r: f64, p: &ModelParams) -> Self {
        Self {
            c1: c2 + c3,
            c2,
            c3,
            deltas,
            r,
            c: growth_constant(p, &deltas),
            origin: CertificateOrigin::Explicit,
        }
    }

    /// Inverts `a = d1 C2 sigma^2 (R/(1+R))^(d1+1)` and
    /// `b = d2 C3 (R/(1+R))^(d2+1)`.
    pub fn from_ab(a: f64, b: f64, deltas: DeltaPair, r: f64, p: &ModelParams) -> Self {
        let q = r / (1.0 + r);
        let c2 = a / (deltas.delta1 * p.sigma * p.sigma * q.powf(deltas.delta1 + 1.0));
        let c3 = b / (deltas.delta2 * q.powf(deltas.delta2 + 1.0));
        Self::new(c2, c3, deltas, r, p)
    }

    /// `(a, b)` coordinates of `(C2, C3)`.
    pub fn ab(&self, p: &ModelParams) -> (f64, f64) {
        let q = self.r / (1.0 + self.r);
        let d = &self.deltas;
        (
            d.delta1 * self.c2 * p.sigma * p.sigma * q.powf(d.delta1 + 1.0),
            d.delta2 * self.c3 * q.powf(d.delta2 + 1.0),
        )
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        let bad = |reason: String| Err(Error::InfeasibleWedge(reason));
        if !(self.c2 > 0.0 && self.c3 > 0.0 && self.c1 > 0.0) {
            return bad(format!("coefficients must be positive: {self:?}"));
        }
        if self.c1 < (self.c2 + self.c3) * (1.0 - 1e-12) {
            return bad(format!("C1 = {} is below C2 + C3", self.c1));
        }
        if !(self.r >= p.epsilon) {
            return bad(format!("R = {} is below epsilon", self.r));
        }
        let floor = growth_constant(p, &self.deltas);
        if self.c < floor * (1.0 - 1e-12) {
            return bad(format!(
                "C = {} is below the admissible minimum {floor}",
                self.c
            ));
        }
        if self.deltas.coupling_residual().abs() > 1e-12 {
            return bad("exponents violate (1+d1)(1+d2) = 2 gamma".into());
        }
        Ok(())
    }

    /// Same certificate with `C3` multiplied by `factor` and `C1` reset to
    /// `C2 + C3`, so the result is still well-formed.
    pub fn scale_c3(&self, factor: f64) -> Self {
        let c3 = self.c3 * factor;
        Self {
            c1: self.c2 + c3,
            c3,
            ..*self
        }
    }

    /// Lower bound on `L V - C V` for `r, y >= R`:
    /// `kappa a^(1/(d1+2)) b^((d1+1)/(d1+2)) - C C1`.
    pub fn corner_bound(&self, p: &ModelParams) -> f64 {
        let (a, b) = self.ab(p);
        let (e1, e2) = self.deltas.mean_weights();
        kappa_delta(self.deltas.delta1) * a.powf(e1) * b.powf(e2) - self.c * self.c1
    }
}

impl TestFunction for LyapunovSpec {
    fn value(&self, r: f64, y: f64) -> f64 {
        let d = &self.deltas;
        self.c1 - self.c2 * (1.0 + y).powf(-d.delta1) - self.c3 * (1.0 + r).powf(-d.delta2)
    }

    fn partials(&self, r: f64, y: f64) -> Partials {
        let d = &self.deltas;
        let er = (1.0 + r).powf(-d.delta2 - 1.0);
        Partials {
            dr: d.delta2 * self.c3 * er,
            drr: -d.delta2 * (d.delta2 + 1.0) * self.c3 * er / (1.0 + r),
            dy: d.delta1 * self.c2 * (1.0 + y).powf(-d.delta1 - 1.0),
        }
    }
}

/// `K0 = min(C1 - C2 (1+R)^-d1 - C3, C1 - C2 - C3 (1+R)^-d2)`.
pub fn k0(spec: &LyapunovSpec) -> f64 {
    let d = &spec.deltas;
    let a = spec.c1 - spec.c2 * (1.0 + spec.r).powf(-d.delta1) - spec.c3;
    let b = spec.c1 - spec.c2 - spec.c3 * (1.0 + spec.r).powf(-d.delta2);
    a.min(b)
}

/// `K1 = C1`, the supremum of `V`.
pub fn k1(spec: &LyapunovSpec) -> f64 {
    spec.c1
}

/// `K2`, the supremum of `V` on the boundary of `D`.
pub fn k2(spec: &LyapunovSpec) -> f64 {
    level(spec, spec.r)
}

/// `K3`, the infimum of `V` on `[2R, inf)^2`.
pub fn k3(spec: &LyapunovSpec) -> f64 {
    level(spec, 2.0 * spec.r)
}

fn level(spec: &LyapunovSpec, x: f64) -> f64 {
    let d = &spec.deltas;
    spec.c1 - spec.c2 * (1.0 + x).powf(-d.delta1) - spec.c3 * (1.0 + x).powf(-d.delta2)
}

/// Sample points of `D^c` for [`verify_generator_inequality`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyGrid {
    /// Points per axis of the log grid.
    pub n: usize,
    /// Grid extends to `L = extent R`.
    pub extent: f64,
    /// Smallest grid coordinate, as a fraction of `R`.
    pub floor: f64,
    /// Extra points along each face of `D`.
    pub face_points: usize,
    /// Relative distance of the face points from the boundary.
    pub face_offset: f64,
    /// Slack below this counts as a violation.
    pub tolerance: f64,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self {
            n: 200,
            extent: 10.0,
            floor: 1e-6,
            face_points: 100,
            face_offset: 1e-6,
            tolerance: -1e-12,
        }
    }
}

impl VerifyGrid {
    fn coarse() -> Self {
        Self {
            n: 40,
            face_points: 20,
            ..Self::default()
        }
    }

    /// Points of `D^c` covered by this grid for radius `r`.
    pub fn points(&self, r: f64) -> Vec<(f64, f64)> {
        let axis = log_space(self.floor * r, self.extent * r, self.n);
        let mut pts = Vec::with_capacity(self.n * self.n + 2 * self.face_points);
        for &x in &axis {
            for &y in &axis {
                if x >= r || y >= r {
                    pts.push((x, y));
                }
            }
        }
        let face = r * (1.0 + self.face_offset);
        for &u in &log_space(self.floor * r, r, self.face_points) {
            pts.push((face, u));
            pts.push((u, face));
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    /// Smallest `L V - C V` over the grid.
    pub min_slack: f64,
    /// `(r, y)` where it occurs (first in grid order on ties).
    pub argmin: (f64, f64),
    pub violations: usize,
    pub n_points: usize,
    pub tolerance: f64,
    /// Closed-form lower bound valid for `r, y >= R`.
    pub corner_bound: f64,
    /// Smallest slack over grid points with `r, y >= 2R`.
    pub corner_min_slack: f64,
}

impl GeneratorReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `L V - C V` at `(r, y)`.
pub fn generator_slack(spec: &LyapunovSpec, p: &ModelParams, r: f64, y: f64) -> f64 {
    generator_apply(spec, &State::new(r, y, 0.0), p) - spec.c * spec.value(r, y)
}

/// Checks `L V >= C V` on a grid of `D^c`.
pub fn verify_generator_inequality(
    spec: &LyapunovSpec,
    p: &ModelParams,
    grid: &VerifyGrid,
) -> Result<GeneratorReport> {
    if grid.extent < 10.0 {
        return Err(Error::Domain(format!(
            "grid extent {} R must reach at least 10 R",
            grid.extent
        )));
    }
    Ok(scan_slack(spec, p, grid))
}

fn scan_slack(spec: &LyapunovSpec, p: &ModelParams, grid: &VerifyGrid) -> GeneratorReport {
    let pts = grid.points(spec.r);
    let mut min_slack = f64::INFINITY;
    let mut argmin = (f64::NAN, f64::NAN);
    let mut violations = 0;
    let mut corner_min = f64::INFINITY;
    for &(r, y) in &pts {
        let s = generator_slack(spec, p, r, y);
        // NaN counts as a violation
        if !(s >= grid.tolerance) {
            violations += 1;
        }
        if s < min_slack || s.is_nan() && !min_slack.is_nan() {
            min_slack = s;
            argmin = (r, y);
        }
        if r >= 2.0 * spec.r && y >= 2.0 * spec.r {
            corner_min = corner_min.min(s);
        }
    }
    GeneratorReport {
        min_slack,
        argmin,
        violations,
        n_points: pts.len(),
        tolerance: grid.tolerance,
        corner_bound: spec.corner_bound(p),
        corner_min_slack: corner_min,
    }
}

/// Builds a certificate for a satisfied condition.
///
/// The preferred route is the geometric midpoint of the feasible slope
/// interval at the witness `R`. When that interval is empty, `C3/C2` and
/// `delta2` are chosen by direct search to maximize the smaller of the
/// coarse-grid slack and the corner bound; [`LyapunovSpec::origin`] records
/// which route was taken.
pub fn build_lyapunov(p: &ModelParams, report: &ConditionReport) -> Result<LyapunovSpec> {
    if !report.satisfied {
        return Err(Error::InfeasibleWedge(
            "the explosion condition is not satisfied".into(),
        ));
    }
    let d = report.witness_deltas;
    let r = match report.condition {
        ConditionKind::I => report.witness_r.unwrap_or(p.epsilon),
        ConditionKind::II => r_for_g(d.delta2, p),
    };
    let wedge = wedge_feasible_slopes_with(r, p, &d, report.constant)?;
    if let Some(s) = wedge.midpoint() {
        let mut spec = LyapunovSpec::from_ab(1.0, s, d, r, p);
        spec.origin = CertificateOrigin::AnalyticWedge;
        spec.validate(p)?;
        return Ok(spec);
    }
    searched_certificate(p, report)
}

fn normalized(t: f64, d: DeltaPair, r: f64, p: &ModelParams) -> LyapunovSpec {
    let mut spec = LyapunovSpec::new(1.0 / (1.0 + t), t / (1.0 + t), d, r, p);
    spec.origin = CertificateOrigin::NumericalSearch;
    spec
}

fn search_objective(spec: &LyapunovSpec, p: &ModelParams, grid: &VerifyGrid) -> f64 {
    let rep = scan_slack(spec, p, grid);
    if rep.violations > 0 && rep.min_slack.is_nan() {
        return f64::NEG_INFINITY;
    }
    rep.min_slack.min(rep.corner_bound) / spec.c1
}

fn searched_certificate(p: &ModelParams, report: &ConditionReport) -> Result<LyapunovSpec> {
    let top = 2.0 * p.gamma - 1.0;
    let constant = report.constant;
    let holds = |d2: f64| {
        let d = DeltaPair::coupled(d2, p.gamma);
        super::conditions::condition_g(r_for_g(d2, p), d2) - constant.value(p, &d) >= 0.0
    };
    let mut candidates: Vec<f64> = log_space(1e-3 * top, top, 41)
        .into_iter()
        .take(40)
        .filter(|&d2| holds(d2))
        .collect();
    if candidates.is_empty() {
        candidates.push(report.witness_deltas.delta2);
    }
    let coarse = VerifyGrid::coarse();
    let log_t = log_space(1e-3, 1e3, 41)
        .into_iter()
        .map(f64::ln)
        .collect::<Vec<_>>();
    let mut best: Option<(f64, LyapunovSpec)> = None;
    for d2 in candidates {
        let d = DeltaPair::coupled(d2, p.gamma);
        let r = r_for_g(d2, p);
        let (lt, v) = grid_then_golden(
            |lt: f64| search_objective(&normalized(lt.exp(), d, r, p), p, &coarse),
            &log_t,
            1e-6,
        );
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, normalized(lt.exp(), d, r, p)));
        }
    }
    match best {
        Some((v, spec)) if v >= 0.0 => {
            spec.validate(p)?;
            Ok(spec)
        }
        Some((v, _)) => Err(Error::InfeasibleWedge(format!(
            "the analytic wedge is empty and the best searched certificate has margin {v:.3e}"
        ))),
        None => Err(Error::InfeasibleWedge("no candidate exponents".into())),
    }
}

/// The wedge used by [`build_lyapunov`] for this report.
pub fn witness_wedge(p: &ModelParams, report: &ConditionReport) -> Result<WedgeReport> {
    let d = report.witness_deltas;
    let r = match report.condition {
        ConditionKind::I => report.witness_r.unwrap_or(p.epsilon),
        ConditionKind::II => r_for_g(d.delta2, p),
    };
    wedge_feasible_slopes_with(r, p, &d, report.constant)
}
