//! One-factor quasi-Gaussian HJM short-rate model with eps-CEV volatility.
//!
//! The crate covers Monte Carlo simulation of the `(r, y)` Markov state with
//! explosion detection, the deterministic small-noise limit, sufficient
//! conditions for explosion together with Lyapunov certificates that are
//! checked on a grid, and bond and futures diagnostics.
//!
//! ```
//! use qghjm_core::{ode_integrate, ForwardCurve, ModelParams};
//!
//! let p = ModelParams::lognormal(0.2, 0.0, 0.1);
//! let curve = ForwardCurve::flat(0.1).unwrap();
//! let out = ode_integrate(&p, &curve, 100.0, 1e-10).unwrap();
//! assert!(out.exploded && (out.t_exp - 47.03).abs() < 0.05);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod ode;
pub mod pricing;
pub mod rng;
pub mod sde;

pub use criteria::{
    build_lyapunov, check_condition, ConditionKind, ConditionReport, DeltaPair, LyapunovSpec,
    RegionCurve,
};
pub use error::{Error, Result};
pub use model::{ForwardCurve, ModelParams, State};
pub use ode::{beta_critical, fixed_point_r, ode_integrate, OdeResult};
pub use pricing::{DiscountCurve, FuturesRow};
pub use sde::{McEstimate, OnExplosion, PathResult, Sample, SimConfig};
