//! Acceptance checks, one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always shown by
//! `cargo test`. The process exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use qghjm_core::criteria::{
    beta_max, build_lyapunov, check_condition, delta2_star, k0, k2, k3, kappa_delta, kappas,
    min_f_hat, verify_generator_inequality, wedge_feasible_slopes, ConditionKind, DeltaPair,
    ScanGrid, VerifyGrid,
};
use qghjm_core::ode::{beta_critical, fixed_point_r, ode_integrate};
use qghjm_core::pricing::{
    discount_consistency_check, eurodollar_futures, zcb_price, DiscountCurve,
};
use qghjm_core::sde::{explosion_fraction, explosion_times, SimConfig};
use qghjm_core::{ForwardCurve, ModelParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// Pinned tolerances and budgets.
const T_EXP_TARGET: f64 = 47.03;
const T_EXP_TOL: f64 = 0.05;
const ODE_BUDGET: Duration = Duration::from_secs(1);
const BETA_C_TARGET: f64 = 0.08944;
const BETA_C_TOL: f64 = 1e-5;
const FIXED_POINT_REL_TOL: f64 = 1e-6;
const LONG_HORIZON: f64 = 5000.0;
const SIGMA_MAX_ZERO_TOL: f64 = 1e-4;
const OVERLAP_TOL: f64 = 1e-10;
const DISTINCT_MIN_GAP: f64 = 1e-6;
const MC_BUDGET: Duration = Duration::from_secs(60);
const MC_MIN_FRACTION: f64 = 0.5;
const CONCENTRATION_WINDOW: (f64, f64) = (30.0, 80.0);
const CONCENTRATION_SHARE: f64 = 0.8;
const ORDERING_STD_ERRORS: f64 = 2.0;
const SLACK_TOL: f64 = -1e-12;
const MIN_F_HAT_REL_TOL: f64 = 1e-8;
const KAPPA_TOL: f64 = 1e-12;
const WEDGE_SETS: usize = 200;
const WEDGE_SAMPLES: usize = 20;
const WEDGE_OUTSIDE: f64 = 1.01;
const DISCOUNT_REL_TOL: f64 = 0.01;
const ZCB_TOL: f64 = 1e-15;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn flat(l: f64) -> ForwardCurve {
    ForwardCurve::flat(l).expect("flat curve")
}

fn criterion_1() -> Outcome {
    let p = ModelParams::lognormal(0.2, 0.0, 0.1);
    let start = Instant::now();
    let out = ode_integrate(&p, &flat(0.1), 100.0, 1e-10).expect("ode");
    let elapsed = start.elapsed();
    let ok = out.exploded && (out.t_exp - T_EXP_TARGET).abs() <= T_EXP_TOL && elapsed < ODE_BUDGET;
    outcome(ok, format!("t_exp = {:.4} y in {:?}", out.t_exp, elapsed))
}

fn criterion_2() -> Outcome {
    let p = ModelParams::lognormal(0.2, 0.0, 0.1);
    let bc = beta_critical(&p);
    let below =
        ode_integrate(&p.with_beta(0.99 * bc), &flat(0.1), LONG_HORIZON, 1e-10).expect("ode");
    let above_p = p.with_beta(1.01 * bc);
    let above = ode_integrate(&above_p, &flat(0.1), LONG_HORIZON, 1e-10).expect("ode");
    let r_inf = fixed_point_r(&above_p).expect("fixed point");
    let rel = above
        .terminal
        .map(|s| (s.r - r_inf).abs() / r_inf)
        .unwrap_or(f64::INFINITY);
    let ok = (bc - BETA_C_TARGET).abs() <= BETA_C_TOL
        && below.exploded
        && !above.exploded
        && rel <= FIXED_POINT_REL_TOL;
    outcome(
        ok,
        format!(
            "beta_c = {bc:.6}; 0.99 beta_c explodes at {:.1} y; 1.01 beta_c terminal rel. error {rel:.2e}",
            below.t_exp
        ),
    )
}

fn criterion_3() -> Outcome {
    let gammas = [0.6, 0.75, 0.9, 1.0];
    let at_140 = beta_max(1.40, 1.0).expect("beta_max");
    let at_142 = gammas
        .iter()
        .map(|&g| beta_max(1.42, g).expect("beta_max"))
        .fold(0.0, f64::max);
    let mut monotone = true;
    for &g in &gammas {
        let mut prev = f64::INFINITY;
        for k in 0..=135 {
            let b = beta_max(0.1 + 0.01 * k as f64, g).expect("beta_max");
            monotone &= b <= prev;
            prev = b;
        }
    }
    let ok = at_140 > 0.0 && at_142 <= SIGMA_MAX_ZERO_TOL && monotone;
    outcome(
        ok,
        format!("beta_max(1.40) = {at_140:.3e}, max_gamma beta_max(1.42) = {at_142:.3e}, non-increasing: {monotone}"),
    )
}

fn criterion_4() -> Outcome {
    let gammas = [0.6, 0.75, 0.9, 1.0];
    let mut ok = true;
    let mut small = Vec::new();
    for &g in &gammas {
        let (d, _) = delta2_star(0.1, g).expect("delta2_star");
        ok &= d == 2.0 * g - 1.0;
        small.push(beta_max(0.1, g).expect("beta_max"));
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..small.len() {
        for j in i + 1..small.len() {
            min_gap = min_gap.min((small[i] - small[j]).abs());
        }
    }
    ok &= min_gap > DISTINCT_MIN_GAP;
    let mut max_overlap_gap: f64 = 0.0;
    for &sigma in &[0.9, 1.0, 1.1, 1.2, 1.3] {
        let mut vals = Vec::new();
        for &g in &gammas {
            let (d, _) = delta2_star(sigma, g).expect("delta2_star");
            ok &= d > 0.0 && d < 2.0 * g - 1.0;
            vals.push(beta_max(sigma, g).expect("beta_max"));
        }
        let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        max_overlap_gap = max_overlap_gap.max(hi - lo);
    }
    ok &= max_overlap_gap < OVERLAP_TOL;
    outcome(
        ok,
        format!("smallest gap at sigma=0.1: {min_gap:.3e}; largest gap with interior delta2*: {max_overlap_gap:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let cfg = SimConfig::new(0.01, 100.0, 10_000, 2024);
    let p0 = ModelParams::lognormal(0.2, 0.0, 0.1);
    let start = Instant::now();
    let taus0 = explosion_times(&p0, &flat(0.1), &cfg).expect("simulation");
    let taus1 = explosion_times(&p0.with_beta(0.05), &flat(0.1), &cfg).expect("simulation");
    let elapsed = start.elapsed();

    let total = explosion_fraction(&taus0, 100.0);
    let mut hit: Vec<f64> = taus0.iter().cloned().filter(|t| t.is_finite()).collect();
    hit.sort_by(|a, b| a.total_cmp(b));
    let median = hit.get(hit.len() / 2).copied().unwrap_or(f64::NAN);
    let (lo, hi) = CONCENTRATION_WINDOW;
    let inside =
        hit.iter().filter(|&&t| t >= lo && t <= hi).count() as f64 / hit.len().max(1) as f64;

    let mut ordered = true;
    for k in 1..=10 {
        let t = 10.0 * k as f64;
        let a = explosion_fraction(&taus0, t);
        let b = explosion_fraction(&taus1, t);
        ordered &= b.mean <= a.mean + ORDERING_STD_ERRORS * a.std_error.max(b.std_error);
    }
    let ok = total.mean > MC_MIN_FRACTION
        && median >= lo
        && median <= hi
        && inside >= CONCENTRATION_SHARE
        && ordered
        && elapsed < MC_BUDGET;
    outcome(
        ok,
        format!(
            "fraction {:.4} +- {:.4}; median tau {median:.1} y; {:.1}% in [{lo}, {hi}]; beta=0.05 ordered: {ordered} (final {:.4}); {:?}",
            total.mean,
            total.std_error,
            100.0 * inside,
            explosion_fraction(&taus1, 100.0).mean,
            elapsed
        ),
    )
}

fn criterion_6() -> Outcome {
    let cfg = SimConfig::new(0.01, 50.0, 10_000, 2024).with_threshold(1e8);
    let p = ModelParams::lognormal(0.2, 0.0, 0.1).with_gamma(0.5);
    let taus = explosion_times(&p, &flat(0.1), &cfg).expect("simulation");
    let n = taus.iter().filter(|t| t.is_finite()).count();
    outcome(n == 0, format!("{n} of {} paths exploded", taus.len()))
}

fn criterion_7() -> Outcome {
    let p = ModelParams::lognormal(0.2, 0.05, 0.1).with_epsilon(0.01);
    let rep = check_condition(&p, ConditionKind::II, &ScanGrid::default()).expect("condition");
    let spec = match build_lyapunov(&p, &rep) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("no certificate: {e}")),
    };
    let grid = VerifyGrid {
        tolerance: SLACK_TOL,
        ..VerifyGrid::default()
    };
    let good = verify_generator_inequality(&spec, &p, &grid).expect("verify");
    let bad = verify_generator_inequality(&spec.scale_c3(100.0), &p, &grid).expect("verify");
    let ok = rep.satisfied
        && k2(&spec) < k3(&spec)
        && k0(&spec) > 0.0
        && good.violations == 0
        && bad.violations > 0;
    outcome(
        ok,
        format!(
            "satisfied: {}; K2 = {:.4} < K3 = {:.4}; K0 = {:.4}; min slack {:.3e} over {} points, {} violations; corrupted certificate: {} violations",
            rep.satisfied,
            k2(&spec),
            k3(&spec),
            k0(&spec),
            good.min_slack,
            good.n_points,
            good.violations,
            bad.violations
        ),
    )
}

/// Brute-force minimum of `a x^(d1+1) + b/x`: scan `ln x` on a wide grid,
/// then ternary search in the winning cell.
fn brute_min(a: f64, b: f64, d1: f64) -> f64 {
    let f = |lx: f64| {
        let x = lx.exp();
        a * x.powf(d1 + 1.0) + b / x
    };
    let n = 4000;
    let (lo, hi) = (-40.0, 40.0);
    let h = (hi - lo) / n as f64;
    let mut best = 0;
    for i in 0..=n {
        if f(lo + h * i as f64) < f(lo + h * best as f64) {
            best = i;
        }
    }
    let (mut l, mut r) = (lo + h * (best as f64 - 1.0), lo + h * (best as f64 + 1.0));
    for _ in 0..200 {
        let m1 = l + (r - l) / 3.0;
        let m2 = r - (r - l) / 3.0;
        if f(m1) < f(m2) {
            r = m2;
        } else {
            l = m1;
        }
    }
    f(0.5 * (l + r))
}

fn criterion_8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = 10f64.powf(rng.random_range(-3.0..3.0));
        let b = 10f64.powf(rng.random_range(-3.0..3.0));
        let d1 = rng.random_range(0.0..1.0);
        let closed = min_f_hat(a, b, d1);
        let brute = brute_min(a, b, d1);
        worst = worst.max((closed - brute).abs() / brute);
    }
    let kappa_err = (kappa_delta(1.0) - 3.0 * 2f64.powf(-2.0 / 3.0)).abs();
    let ok = worst <= MIN_F_HAT_REL_TOL && kappa_err <= KAPPA_TOL;
    outcome(
        ok,
        format!("worst relative gap {worst:.2e}; kappa(1) error {kappa_err:.1e}"),
    )
}

/// Direct evaluation of
/// `kappa1 a + kappa2 b <= min(kappa a^e1 b^e2, a R^(d2(d1+1)), b R^-d2)`.
fn inequality_holds(a: f64, b: f64, r: f64, p: &ModelParams, d: &DeltaPair) -> bool {
    let (k1, k2) = kappas(r, p, d);
    let e = d.delta1 + 2.0;
    let kappa = e * (d.delta1 + 1.0).powf(-(d.delta1 + 1.0) / e);
    let lhs = k1 * a + k2 * b;
    let rhs = (kappa * a.powf(1.0 / e) * b.powf((d.delta1 + 1.0) / e))
        .min(a * r.powf(d.delta2 * (d.delta1 + 1.0)))
        .min(b * r.powf(-d.delta2));
    lhs <= rhs * (1.0 + 1e-12)
}

fn criterion_9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let (mut sets, mut attempts) = (0, 0);
    let (mut inside_fail, mut outside_pass) = (0, 0);
    while sets < WEDGE_SETS && attempts < 1_000_000 {
        attempts += 1;
        let gamma = rng.random_range(0.55..=1.0);
        let sigma = 10f64.powf(rng.random_range(-2.5..-0.5));
        let beta = if rng.random_bool(0.3) {
            0.0
        } else {
            10f64.powf(rng.random_range(-5.0..-2.0))
        };
        let p = ModelParams::lognormal(sigma, beta, 0.1).with_gamma(gamma);
        let d2 = rng.random_range(0.02..0.98) * (2.0 * gamma - 1.0);
        let d = DeltaPair::from_delta2(d2, gamma).expect("deltas");
        let r = 10f64.powf(rng.random_range(-2.0..3.0));
        let w = wedge_feasible_slopes(r, &p, &d).expect("wedge");
        let Some((lo, hi)) = w.union() else { continue };
        if hi <= lo * 1.001 {
            continue;
        }
        sets += 1;
        for k in 0..WEDGE_SAMPLES {
            let a = 10f64.powf(rng.random_range(-3.0..3.0));
            let u = rng.random_range(0.01..0.99);
            let s = lo * (hi / lo).powf(u);
            if !inequality_holds(a, s * a, r, &p, &d) {
                inside_fail += 1;
            }
            let s_out = if k % 2 == 0 {
                hi * WEDGE_OUTSIDE
            } else {
                lo / WEDGE_OUTSIDE
            };
            if inequality_holds(a, s_out * a, r, &p, &d) {
                outside_pass += 1;
            }
        }
    }
    let ok = sets == WEDGE_SETS && inside_fail == 0 && outside_pass == 0;
    outcome(
        ok,
        format!("{sets} parameter sets ({attempts} draws); interior failures {inside_fail}; exterior passes {outside_pass}"),
    )
}

fn criterion_10() -> Outcome {
    let p = ModelParams::lognormal(0.2, 0.2, 0.1);
    let cfg = SimConfig::new(1.0 / 365.0, 1.0, 100_000, 10);
    let disc = discount_consistency_check(&p, &flat(0.1), &cfg, 1.0).expect("discount");
    let target = (-0.1f64).exp();
    let disc_rel = (disc.mean - target).abs() / target;

    let dc = DiscountCurve::new(flat(0.1));
    let mut zcb_err: f64 = 0.0;
    for &(t, big_t) in &[(0.0, 0.0), (1.0, 1.0), (2.5, 2.5)] {
        zcb_err = zcb_err.max((zcb_price(t, big_t, 0.4, 0.3, &p, &dc) - 1.0).abs());
    }
    for &(t, big_t) in &[(0.0, 1.0), (1.0, 4.0), (2.0, 12.0)] {
        let ratio = dc.price(big_t) / dc.price(t);
        zcb_err = zcb_err.max((zcb_price(t, big_t, 0.0, 0.0, &p, &dc) - ratio).abs());
    }

    let explosive = ModelParams::lognormal(0.2, 0.0, 0.1);
    let fcfg = SimConfig::new(0.01, 90.25, 10_000, 10);
    let fut = eurodollar_futures(&explosive, &flat(0.1), &fcfg, 90.0, 0.25).expect("futures");

    let ok =
        disc_rel <= DISCOUNT_REL_TOL && zcb_err <= ZCB_TOL && fut.diverged && fut.n_exploded >= 1;
    outcome(
        ok,
        format!(
            "discount {:.5} +- {:.5} vs {target:.5} (rel {disc_rel:.2e}); zcb identity error {zcb_err:.1e}; futures diverged: {} ({} exploded)",
            disc.mean, disc.std_error, fut.diverged, fut.n_exploded
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("deterministic explosion time", criterion_1),
        ("critical mean reversion and fixed point", criterion_2),
        ("maximal volatility of the explosive region", criterion_3),
        ("region curves: distinct then overlapping", criterion_4),
        ("Monte Carlo explosion and beta ordering", criterion_5),
        ("no explosion for gamma = 1/2", criterion_6),
        ("Lyapunov certificate and negative control", criterion_7),
        ("closed-form infimum against brute force", criterion_8),
        ("wedge soundness", criterion_9),
        ("pricing sanity", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {name}: {}", i + 1, o.detail);
        if !o.ok {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
