//! Explosion criteria: the parameter conditions, their `(sigma, beta)` region,
//! Lyapunov certificates with grid verification, and the almost-sure
//! explosion threshold.

mod almost_sure;
mod conditions;
mod delta;
mod lyapunov;

pub use almost_sure::{
    as_explosion_r0_threshold, verify_a5_function, A5Grid, A5Report, ExpSum, R0Threshold,
    OVERFLOW_LOG,
};
pub use conditions::{
    beta_max, check_condition, check_condition_with, condition_f, condition_f_with, condition_g,
    delta2_star, g_argmax, g_max, kappas, kappas_with, r_for_g, region_curve, sup_f,
    wedge_feasible_slopes, wedge_feasible_slopes_with, wedge_margin, ConditionConstant,
    ConditionKind, ConditionReport, RegionCurve, RegionPoint, ScanGrid, WedgeReport,
};
pub use delta::{kappa_delta, min_f_hat, DeltaPair};
pub use lyapunov::{
    build_lyapunov, generator_slack, growth_constant, k0, k1, k2, k3, verify_generator_inequality,
    witness_wedge, CertificateOrigin, GeneratorReport, LyapunovSpec, VerifyGrid,
};
