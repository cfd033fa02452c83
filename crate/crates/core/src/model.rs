//! Model parameters, the eps-CEV volatility family, the initial forward curve
//! and the coefficient fields of the (r, y) Markov representation.
//!
//! The state follows
//!
//! ```text
//! dr = (y - beta r + beta lambda(t) + lambda'(t)) dt + sigma_r(r) dW
//! dy = (sigma_r(r)^2 - 2 beta y) dt
//! sigma_r(x) = sigma x min(x^(gamma-1), eps^(gamma-1))
//! ```
//!
//! started from `r0 = lambda(0)`, `y0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Constants of the eps-CEV quasi-Gaussian model.
///
/// Rates are absolute decimals (0.1 is 10%), time is in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Volatility scale.
    pub sigma: f64,
    /// Mean-reversion speed (1/year).
    pub beta: f64,
    /// CEV exponent in (0, 1].
    pub gamma: f64,
    /// Level below which the volatility switches to log-normal behaviour.
    pub epsilon: f64,
    /// Initial (flat) forward rate, `r0 = lambda(0)`.
    pub lambda0: f64,
    /// Shift `a` of the displaced model; zero for the plain model.
    #[serde(default)]
    pub displacement: f64,
    /// Optional cap `c` applied as `min(max(0, sigma_r), c)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vol_cap: Option<f64>,
}

impl ModelParams {
    /// Log-normal (`gamma = 1`) parameters with a small default cutoff.
    pub fn lognormal(sigma: f64, beta: f64, lambda0: f64) -> Self {
        Self {
            sigma,
            beta,
            gamma: 1.0,
            epsilon: 0.01,
            lambda0,
            displacement: 0.0,
            vol_cap: None,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn with_displacement(mut self, a: f64) -> Self {
        self.displacement = a;
        self
    }

    pub fn with_vol_cap(mut self, cap: Option<f64>) -> Self {
        self.vol_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite, got {v}")))
            }
        };
        finite("sigma", self.sigma)?;
        finite("beta", self.beta)?;
        finite("gamma", self.gamma)?;
        finite("epsilon", self.epsilon)?;
        finite("lambda0", self.lambda0)?;
        finite("displacement", self.displacement)?;
        if self.sigma <= 0.0 {
            return Err(invalid("sigma", "must be > 0"));
        }
        if self.beta < 0.0 {
            return Err(invalid("beta", "must be >= 0"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(invalid(
                "gamma",
                format!("must lie in (0, 1], got {}", self.gamma),
            ));
        }
        if self.epsilon <= 0.0 {
            return Err(invalid("epsilon", "must be > 0"));
        }
        if self.lambda0 <= self.epsilon {
            return Err(invalid(
                "lambda0",
                format!(
                    "initial rate {} must exceed the cutoff epsilon = {}",
                    self.lambda0, self.epsilon
                ),
            ));
        }
        if self.displacement < 0.0 {
            return Err(invalid("displacement", "must be >= 0"));
        }
        if let Some(c) = self.vol_cap {
            if !(c > 0.0) {
                return Err(invalid(
                    "vol_cap",
                    format!("must be > 0 when present, got {c}"),
                ));
            }
        }
        Ok(())
    }

    /// The eps-CEV volatility evaluated on the (possibly shifted) rate.
    #[inline]
    pub fn sigma_r(&self, x: f64) -> f64 {
        sigma_r(x, self)
    }
}

/// Short-rate volatility `sigma x min(x^(gamma-1), eps^(gamma-1))` at `x + a`.
///
/// Non-positive arguments map to zero (full truncation), and the optional cap is
/// applied last.
#[inline]
pub fn sigma_r(x: f64, p: &ModelParams) -> f64 {
    let z = x + p.displacement;
    let raw = if !(z > 0.0) {
        0.0
    } else if p.gamma == 1.0 {
        p.sigma * z
    } else if z >= p.epsilon {
        p.sigma * z.powf(p.gamma)
    } else {
        p.sigma * z * p.epsilon.powf(p.gamma - 1.0)
    };
    match p.vol_cap {
        Some(c) => raw.max(0.0).min(c),
        None => raw,
    }
}

/// Diffusion coefficient of `r`; `y` carries no noise.
#[inline]
pub fn diffusion(s: &State, p: &ModelParams) -> f64 {
    sigma_r(s.r, p)
}

/// Drift `(dr/dt, dy/dt)` of the time-dependent system.
pub fn drift(s: &State, p: &ModelParams, curve: &ForwardCurve) -> (f64, f64) {
    let vol = sigma_r(s.r, p);
    let (lam, dlam) = curve.value_and_slope(s.t);
    (
        s.y - p.beta * s.r + p.beta * lam + dlam,
        vol * vol - 2.0 * p.beta * s.y,
    )
}

/// Point of the (r, y) state space at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub r: f64,
    pub y: f64,
    pub t: f64,
}

impl State {
    pub fn new(r: f64, y: f64, t: f64) -> Self {
        Self { r, y, t }
    }

    /// Initial state `(lambda(0), 0)` at `t = 0`.
    pub fn initial(curve: &ForwardCurve) -> Self {
        Self::new(curve.value(0.0), 0.0, 0.0)
    }
}

/// Analytic partial derivatives of a test function `V(r, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Partials {
    pub dr: f64,
    pub drr: f64,
    pub dy: f64,
}

/// A scalar field on the (r, y) quadrant with closed-form derivatives.
pub trait TestFunction {
    fn value(&self, r: f64, y: f64) -> f64;
    fn partials(&self, r: f64, y: f64) -> Partials;
}

/// Infinitesimal generator of the time-homogeneous (flat curve) diffusion:
///
/// ```text
/// L V = (sigma_r^2 - 2 beta y) V_y + (y - beta r + beta r0) V_r + 1/2 sigma_r^2 V_rr
/// ```
///
/// with `r0 = p.lambda0`. Time-dependent curves are not supported here.
pub fn generator_apply<V: TestFunction + ?Sized>(v: &V, s: &State, p: &ModelParams) -> f64 {
    generator_from_partials(v.partials(s.r, s.y), s, p)
}

/// Same as [`generator_apply`] for already-evaluated partials.
#[inline]
pub fn generator_from_partials(d: Partials, s: &State, p: &ModelParams) -> f64 {
    let vol = sigma_r(s.r, p);
    let v2 = vol * vol;
    (v2 - 2.0 * p.beta * s.y) * d.dy
        + (s.y - p.beta * s.r + p.beta * p.lambda0) * d.dr
        + 0.5 * v2 * d.drr
}

/// Initial instantaneous forward curve `lambda(t) = f(0, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub enum ForwardCurve {
    Flat {
        lambda0: f64,
    },
    /// Piecewise-linear through `(t, lambda)` knots, first knot at `t = 0`,
    /// held flat after the last knot.
    Tabulated {
        knots: Vec<(f64, f64)>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawCurve {
    Flat { lambda0: f64 },
    Tabulated { knots: Vec<[f64; 2]> },
}

impl TryFrom<RawCurve> for ForwardCurve {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        match raw {
            RawCurve::Flat { lambda0 } => ForwardCurve::flat(lambda0),
            RawCurve::Tabulated { knots } => {
                ForwardCurve::tabulated(knots.into_iter().map(|[t, l]| (t, l)).collect())
            }
        }
    }
}

impl From<ForwardCurve> for RawCurve {
    fn from(c: ForwardCurve) -> Self {
        match c {
            ForwardCurve::Flat { lambda0 } => RawCurve::Flat { lambda0 },
            ForwardCurve::Tabulated { knots } => RawCurve::Tabulated {
                knots: knots.into_iter().map(|(t, l)| [t, l]).collect(),
            },
        }
    }
}

impl ForwardCurve {
    pub fn flat(lambda0: f64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(Error::InvalidCurve(format!(
                "flat level must be positive and finite, got {lambda0}"
            )));
        }
        Ok(Self::Flat { lambda0 })
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(t0, _)) = knots.first() else {
            return Err(Error::InvalidCurve("no knots".into()));
        };
        if t0 != 0.0 {
            return Err(Error::InvalidCurve(format!(
                "first knot must be at t = 0, got t = {t0}"
            )));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidCurve(format!(
                    "knot times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(t, l)) = knots
            .iter()
            .find(|(t, l)| !(t.is_finite() && l.is_finite() && *l > 0.0))
        {
            return Err(Error::InvalidCurve(format!(
                "forward rates must be positive and finite (lambda({t}) = {l})"
            )));
        }
        Ok(Self::Tabulated { knots })
    }

    /// The same curve shifted up by `a`.
    pub fn shifted(&self, a: f64) -> Self {
        match self {
            Self::Flat { lambda0 } => Self::Flat {
                lambda0: lambda0 + a,
            },
            Self::Tabulated { knots } => Self::Tabulated {
                knots: knots.iter().map(|&(t, l)| (t, l + a)).collect(),
            },
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.value_and_slope(t).0
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.value_and_slope(t).1
    }

    /// `(lambda(t), lambda'(t))`; the slope at a knot is the right-hand one.
    #[inline]
    pub fn value_and_slope(&self, t: f64) -> (f64, f64) {
        match self {
            Self::Flat { lambda0 } => (*lambda0, 0.0),
            Self::Tabulated { knots } => {
                let i = knots.partition_point(|&(tk, _)| tk <= t);
                if i == 0 {
                    return (knots[0].1, 0.0);
                }
                if i == knots.len() {
                    return (knots[i - 1].1, 0.0);
                }
                let (ta, la) = knots[i - 1];
                let (tb, lb) = knots[i];
                let slope = (lb - la) / (tb - ta);
                (la + slope * (t - ta), slope)
            }
        }
    }

    /// `int_0^T lambda(s) ds`, exact on every linear segment.
    pub fn integral(&self, t_end: f64) -> f64 {
        match self {
            Self::Flat { lambda0 } => lambda0 * t_end,
            Self::Tabulated { knots } => {
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let (ta, la) = w[0];
                    let (tb, lb) = w[1];
                    if t_end <= ta {
                        return acc;
                    }
                    let te = t_end.min(tb);
                    let le = la + (lb - la) / (tb - ta) * (te - ta);
                    acc += 0.5 * (la + le) * (te - ta);
                    if t_end <= tb {
                        return acc;
                    }
                }
                let (tl, ll) = knots[knots.len() - 1];
                acc + ll * (t_end - tl).max(0.0)
            }
        }
    }

    /// Tests `lambda'(t) + beta lambda(t) >= beta lambda(0)` at every knot,
    /// using both one-sided slopes.
    pub fn satisfies_lower_bound(&self, beta: f64) -> bool {
        match self {
            Self::Flat { .. } => true,
            Self::Tabulated { knots } => {
                let l0 = knots[0].1;
                let ok = |slope: f64, l: f64| slope + beta * l >= beta * l0;
                let n = knots.len();
                (0..n).all(|i| {
                    let (t, l) = knots[i];
                    let right = if i + 1 < n {
                        (knots[i + 1].1 - l) / (knots[i + 1].0 - t)
                    } else {
                        0.0
                    };
                    let left = if i > 0 {
                        (l - knots[i - 1].1) / (t - knots[i - 1].0)
                    } else {
                        right
                    };
                    ok(right, l) && ok(left, l)
                })
            }
        }
    }
}
