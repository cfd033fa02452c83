use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents `(delta1, delta2)` of the Lyapunov function, tied to the CEV
/// exponent by `(1 + delta1)(1 + delta2) = 2 gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPair {
    pub delta1: f64,
    pub delta2: f64,
    pub gamma: f64,
}

impl DeltaPair {
    /// Solves the coupling for `delta1`. Requires `gamma` in `(1/2, 1]` and
    /// `delta2` in `(0, 2 gamma - 1)`.
    pub fn from_delta2(delta2: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.5 && gamma <= 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        let top = 2.0 * gamma - 1.0;
        if !(delta2 > 0.0 && delta2 < top) {
            return Err(Error::Domain(format!(
                "delta2 = {delta2} must lie in (0, {top}) for gamma = {gamma}"
            )));
        }
        Ok(Self::coupled(delta2, gamma))
    }

    /// Coupled pair without range checks; used on closed scan grids.
    pub(crate) fn coupled(delta2: f64, gamma: f64) -> Self {
        Self {
            delta1: 2.0 * gamma / (1.0 + delta2) - 1.0,
            delta2,
            gamma,
        }
    }

    /// `(1 + delta1)(1 + delta2) - 2 gamma`.
    pub fn coupling_residual(&self) -> f64 {
        (1.0 + self.delta1) * (1.0 + self.delta2) - 2.0 * self.gamma
    }

    /// Weights `(1/(delta1+2), (delta1+1)/(delta1+2))` of the weighted
    /// geometric mean in the infimum of `a x^(delta1+1) + b/x`.
    pub fn mean_weights(&self) -> (f64, f64) {
        let d = self.delta1 + 2.0;
        (1.0 / d, (self.delta1 + 1.0) / d)
    }
}

/// `kappa = (delta1 + 2)(delta1 + 1)^(-(delta1+1)/(delta1+2))`.
pub fn kappa_delta(delta1: f64) -> f64 {
    (delta1 + 2.0) * (delta1 + 1.0).powf(-(delta1 + 1.0) / (delta1 + 2.0))
}

/// Closed-form `inf_{x>0} a x^(delta1+1) + b / x`.
pub fn min_f_hat(a: f64, b: f64, delta1: f64) -> f64 {
    let d = delta1 + 2.0;
    kappa_delta(delta1) * a.powf(1.0 / d) * b.powf((delta1 + 1.0) / d)
}
