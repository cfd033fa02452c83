//! Small-noise limit of the log-normal model:
//!
//! ```text
//! r' = y - beta r + beta lambda(t) + lambda'(t)
//! y' = sigma^2 r^2 - 2 beta y,      r(0) = lambda(0), y(0) = 0
//! ```
//!
//! For a flat curve the solution blows up in finite time when
//! `beta < beta_c = sigma sqrt(2 lambda0)` and converges to a fixed point
//! otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sigma_r, ForwardCurve, ModelParams, State};
use crate::sde::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    /// Relative tolerance of the embedded pair.
    pub tol: f64,
    /// Level of `r` at which the solution is declared exploded.
    pub blowup_level: f64,
    /// Lower level whose crossing time feeds the extrapolation.
    pub probe_level: f64,
    /// Explosion is also declared when the step falls below this fraction of
    /// the horizon.
    pub min_step_fraction: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            blowup_level: 1e10,
            probe_level: 1e8,
            min_step_fraction: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeResult {
    pub exploded: bool,
    /// Extrapolated blow-up time, `+inf` when the solution stays finite.
    pub t_exp: f64,
    /// State at the horizon; `None` after an explosion.
    pub terminal: Option<State>,
    /// `(level, time)` for each blow-up level crossed.
    pub crossings: Vec<(f64, f64)>,
    /// Accepted integrator steps.
    pub trace: Vec<Sample>,
}

/// `beta_c = sigma sqrt(2 lambda0)`.
pub fn beta_critical(p: &ModelParams) -> f64 {
    p.sigma * (2.0 * p.lambda0).sqrt()
}

/// Limit of `r(t)` for `beta >= beta_c` on a flat curve,
/// `(beta^2/sigma^2)(1 - sqrt(1 - 2 sigma^2 lambda0 / beta^2))`.
pub fn fixed_point_r(p: &ModelParams) -> Result<f64> {
    let bc = beta_critical(p);
    if p.beta < bc {
        return Err(Error::Domain(format!(
            "beta = {} is below the critical value {bc}; the limit ODE explodes",
            p.beta
        )));
    }
    if p.sigma == 0.0 {
        return Ok(p.lambda0);
    }
    // rationalized form: 2 lambda0 / (1 + sqrt(1 - u)), exact at beta = beta_c
    let u = (2.0 * p.sigma * p.sigma * p.lambda0 / (p.beta * p.beta)).min(1.0);
    Ok(2.0 * p.lambda0 / (1.0 + (1.0 - u).sqrt()))
}

/// `y` at the fixed point, `sigma^2 r^2 / (2 beta)`.
pub fn fixed_point_y(p: &ModelParams) -> Result<f64> {
    let r = fixed_point_r(p)?;
    if p.beta == 0.0 {
        return Ok(0.0);
    }
    Ok(p.sigma * p.sigma * r * r / (2.0 * p.beta))
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type V2 = [f64; 2];

#[inline]
fn axpy(y: V2, h: f64, terms: &[(f64, V2)]) -> V2 {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Root of the cubic Hermite interpolant of `r` on one step.
fn hermite_crossing(t0: f64, h: f64, r0: f64, d0: f64, r1: f64, d1: f64, level: f64) -> f64 {
    let eval = |s: f64| {
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * r0 + h10 * h * d0 + h01 * r1 + h11 * h * d1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    t0 + h * 0.5 * (lo + hi)
}

/// Integrates the small-noise limit from `(lambda(0), 0)` to `horizon`.
pub fn ode_integrate(
    p: &ModelParams,
    curve: &ForwardCurve,
    horizon: f64,
    tol: f64,
) -> Result<OdeResult> {
    ode_integrate_with(
        p,
        curve,
        horizon,
        OdeOptions {
            tol,
            ..OdeOptions::default()
        },
    )
}

pub fn ode_integrate_with(
    p: &ModelParams,
    curve: &ForwardCurve,
    horizon: f64,
    opts: OdeOptions,
) -> Result<OdeResult> {
    if p.gamma != 1.0 {
        return Err(Error::UnsupportedGamma(p.gamma));
    }
    if p.sigma == 0.0 {
        ModelParams { sigma: 1.0, ..*p }.validate()?;
    } else {
        p.validate()?;
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be > 0, got {}",
            opts.tol
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !(opts.probe_level < opts.blowup_level) {
        return Err(Error::Domain(
            "probe level must lie below the blow-up level".into(),
        ));
    }

    let beta = p.beta;
    let rhs = |t: f64, s: V2| -> V2 {
        let (lam, dlam) = curve.value_and_slope(t);
        let v = sigma_r(s[0], p);
        [
            s[1] - beta * s[0] + beta * lam + dlam,
            v * v - 2.0 * beta * s[1],
        ]
    };

    let rtol = opts.tol;
    let atol = opts.tol * 1e-4;
    let h_min = opts.min_step_fraction * horizon;
    let levels = [opts.probe_level, opts.blowup_level];

    let mut t = 0.0;
    let mut s: V2 = [curve.value(0.0), 0.0];
    let mut k1 = rhs(t, s);
    let mut h = (horizon * 1e-4).min(1e-3 * horizon.max(1.0));
    let mut trace = vec![Sample {
        t,
        r: s[0],
        y: s[1],
    }];
    let mut crossings: Vec<(f64, f64)> = Vec::new();

    let explosion = |crossings: &[(f64, f64)], t_fallback: f64| -> f64 {
        match crossings {
            [(x1, t1), (x2, t2)] => {
                // r ~ c (t_exp - t)^-2 near blow-up, so t_exp - t_x scales like x^(-1/2)
                let q = (x1 / x2).sqrt();
                t2 + (t2 - t1) * q / (1.0 - q)
            }
            [(_, t1)] => *t1,
            _ => t_fallback,
        }
    };

    while t < horizon {
        if h < h_min {
            let t_exp = explosion(&crossings, t);
            return Ok(OdeResult {
                exploded: true,
                t_exp,
                terminal: None,
                crossings,
                trace,
            });
        }
        let last = t + h >= horizon;
        if last {
            h = horizon - t;
        }
        let k2 = rhs(t + C2 * h, axpy(s, h, &[(A21, k1)]));
        let k3 = rhs(t + C3 * h, axpy(s, h, &[(A31, k1), (A32, k2)]));
        let k4 = rhs(t + C4 * h, axpy(s, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = rhs(
            t + C5 * h,
            axpy(s, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
        );
        let k6 = rhs(
            t + h,
            axpy(
                s,
                h,
                &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            ),
        );
        let s_new = axpy(
            s,
            h,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        );
        let k7 = rhs(t + h, s_new);

        let mut err = 0.0;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = atol + rtol * s[i].abs().max(s_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / 2.0).sqrt();

        if !err.is_finite() || !s_new[0].is_finite() || !s_new[1].is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            let t_new = if last { horizon } else { t + h };
            for &level in &levels {
                if s[0] < level && s_new[0] >= level {
                    let tc = hermite_crossing(t, t_new - t, s[0], k1[0], s_new[0], k7[0], level);
                    crossings.push((level, tc));
                }
            }
            t = t_new;
            s = s_new;
            k1 = k7;
            trace.push(Sample {
                t,
                r: s[0],
                y: s[1],
            });
            if s[0] >= opts.blowup_level {
                let t_exp = explosion(&crossings, t);
                return Ok(OdeResult {
                    exploded: true,
                    t_exp,
                    terminal: None,
                    crossings,
                    trace,
                });
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                0.9 * err.powf(-0.2)
            };
            h *= fac.clamp(0.2, 5.0);
        } else {
            let fac = 0.9 * err.powf(-0.2);
            h *= fac.clamp(0.1, 1.0);
        }
    }

    Ok(OdeResult {
        exploded: false,
        t_exp: f64::INFINITY,
        terminal: Some(State::new(s[0], s[1], t)),
        crossings,
        trace,
    })
}
