use std::path::Path;

use qghjm_core::criteria::{
    as_explosion_r0_threshold, build_lyapunov, check_condition, k0, k1, k2, k3, kappas,
    verify_a5_function, verify_generator_inequality, wedge_feasible_slopes, A5Report,
    ConditionReport, GeneratorReport, LyapunovSpec, R0Threshold, ScanGrid, WedgeReport,
};
use qghjm_core::io::{
    to_file, write_explosions, write_futures, write_json, write_paths, write_region, write_rows,
    write_trace,
};
use qghjm_core::ode::{ode_integrate, OdeResult};
use qghjm_core::pricing::{discount_consistency_check, eurodollar_futures, zcb_price};
use qghjm_core::sde::{explosion_fraction, explosion_times, simulate_paths};
use qghjm_core::{criteria::region_curve, DiscountCurve, FuturesRow, McEstimate};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Serialize)]
struct Checkpoint {
    t: f64,
    fraction: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    config: &'a RunConfig,
    n_paths: usize,
    n_exploded: usize,
    checkpoints: Vec<Checkpoint>,
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let paths = simulate_paths(
        &cfg.model,
        &cfg.curve,
        &cfg.sim,
        Some(cfg.simulate.recorded_paths),
    )?;
    let taus = explosion_times(&cfg.model, &cfg.curve, &cfg.sim)?;
    to_file(&out.join("paths.csv"), |w| write_paths(w, &paths))?;
    to_file(&out.join("explosions.csv"), |w| write_explosions(w, &taus))?;
    let checkpoints = cfg
        .checkpoints()
        .into_iter()
        .map(|t| {
            let e = explosion_fraction(&taus, t);
            Checkpoint {
                t,
                fraction: e.mean,
                std_error: e.std_error,
            }
        })
        .collect();
    let summary = SimulateSummary {
        config: cfg,
        n_paths: taus.len(),
        n_exploded: taus.iter().filter(|t| t.is_finite()).count(),
        checkpoints,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(())
}

pub fn region(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let sigmas = cfg.region.sigmas();
    // check every gamma before writing anything
    let curves = cfg
        .region
        .gammas
        .iter()
        .map(|&g| region_curve(g, &sigmas))
        .collect::<Result<Vec<_>, _>>()?;
    for c in &curves {
        let file = out.join(format!("region_gamma_{}.csv", c.gamma));
        to_file(&file, |w| write_region(w, c))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Constants {
    k0: f64,
    k1: f64,
    k2: f64,
    k3: f64,
    c: f64,
    kappa1: f64,
    kappa2: f64,
}

#[derive(Serialize)]
struct AlmostSure {
    threshold: Option<R0Threshold>,
    /// Why the threshold is absent.
    note: Option<String>,
    a5: A5Report,
}

#[derive(Serialize)]
struct VerifyReport {
    status: &'static str,
    condition: Option<ConditionReport>,
    lyapunov: Option<LyapunovSpec>,
    c3_scale: Option<f64>,
    constants: Option<Constants>,
    wedge: Option<WedgeReport>,
    generator: Option<GeneratorReport>,
    almost_sure: Option<AlmostSure>,
    message: Option<String>,
}

impl VerifyReport {
    fn empty(status: &'static str, message: String) -> Self {
        Self {
            status,
            condition: None,
            lyapunov: None,
            c3_scale: None,
            constants: None,
            wedge: None,
            generator: None,
            almost_sure: None,
            message: Some(message),
        }
    }
}

/// Exit status 3 whenever the certificate cannot be confirmed.
pub fn verify(cfg: &RunConfig, out: &Path, c3_scale: Option<f64>) -> Result<(), CliError> {
    let p = &cfg.model;
    let file = out.join("verify.json");
    if p.gamma <= 0.5 {
        let msg = format!(
            "non-explosive regime: gamma = {} <= 1/2, the process cannot explode",
            p.gamma
        );
        write_json(&file, &VerifyReport::empty("non_explosive", msg.clone()))?;
        return Err(CliError::Unsatisfied(msg));
    }
    let report = check_condition(p, cfg.verify.condition, &ScanGrid::default())?;
    if !report.satisfied {
        let msg = format!(
            "condition {:?} does not hold (best value {:.3e})",
            report.condition, report.sup_value
        );
        let mut v = VerifyReport::empty("condition_unsatisfied", msg.clone());
        v.condition = Some(report);
        write_json(&file, &v)?;
        return Err(CliError::Unsatisfied(msg));
    }
    let base = match cfg.verify.lyapunov {
        Some(spec) => {
            spec.validate(p)?;
            spec
        }
        None => build_lyapunov(p, &report)?,
    };
    let spec = match c3_scale {
        Some(s) => base.scale_c3(s),
        None => base,
    };
    let generator = verify_generator_inequality(&spec, p, &cfg.verify.grid)?;
    let (kappa1, kappa2) = kappas(spec.r, p, &spec.deltas);
    let wedge = wedge_feasible_slopes(spec.r, p, &spec.deltas)?;
    let (threshold, note) = match as_explosion_r0_threshold(spec.r, p) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let a5 = verify_a5_function(p, spec.r, &cfg.verify.a5_grid)?;
    let passed = generator.violations == 0;
    let v = VerifyReport {
        status: if passed { "verified" } else { "violations" },
        condition: Some(report),
        lyapunov: Some(spec),
        c3_scale,
        constants: Some(Constants {
            k0: k0(&spec),
            k1: k1(&spec),
            k2: k2(&spec),
            k3: k3(&spec),
            c: spec.c,
            kappa1,
            kappa2,
        }),
        wedge: Some(wedge),
        generator: Some(generator),
        almost_sure: Some(AlmostSure {
            threshold,
            note,
            a5,
        }),
        message: None,
    };
    write_json(&file, &v)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Unsatisfied(format!(
            "{} of {} grid points violate the generator inequality (min slack {:.3e})",
            generator.violations, generator.n_points, generator.min_slack
        )))
    }
}

#[derive(Serialize)]
struct OdeSummary<'a> {
    config: &'a RunConfig,
    horizon: f64,
    exploded: bool,
    t_exp: Option<f64>,
    terminal: Option<qghjm_core::State>,
    crossings: &'a [(f64, f64)],
}

pub fn ode(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let horizon = cfg.ode.horizon.unwrap_or(cfg.sim.horizon);
    let res: OdeResult = ode_integrate(&cfg.model, &cfg.curve, horizon, cfg.ode.tol)?;
    to_file(&out.join("trace.csv"), |w| write_trace(w, &res.trace))?;
    let summary = OdeSummary {
        config: cfg,
        horizon,
        exploded: res.exploded,
        t_exp: res.exploded.then_some(res.t_exp),
        terminal: res.terminal,
        crossings: &res.crossings,
    };
    write_json(&out.join("ode.json"), &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct BondRow {
    tenor: f64,
    /// `P(0, T)` from the state `x = y = 0`.
    zcb: f64,
    /// `P(0, T)` from the curve.
    curve: f64,
    mc_mean: Option<f64>,
    mc_std_error: Option<f64>,
    n_exploded: Option<usize>,
    diverged: Option<bool>,
}

pub fn price(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = &cfg.model;
    let dc = DiscountCurve::new(cfg.curve.clone());
    let futures = cfg
        .price
        .futures
        .iter()
        .map(|f| {
            let est = eurodollar_futures(p, &cfg.curve, &cfg.sim, f.maturity, f.delta)?;
            Ok(FuturesRow::new(f.maturity, f.delta, &est))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let bonds = cfg
        .price
        .bond_tenors
        .iter()
        .map(|&t| {
            let mc: Option<McEstimate> = if t <= cfg.sim.horizon {
                Some(discount_consistency_check(p, &cfg.curve, &cfg.sim, t)?)
            } else {
                None
            };
            Ok(BondRow {
                tenor: t,
                zcb: zcb_price(0.0, t, 0.0, 0.0, p, &dc),
                curve: dc.price(t),
                mc_mean: mc.map(|e| e.mean),
                mc_std_error: mc.map(|e| e.std_error),
                n_exploded: mc.map(|e| e.n_exploded),
                diverged: mc.map(|e| e.diverged),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    to_file(&out.join("futures.csv"), |w| write_futures(w, &futures))?;
    to_file(&out.join("bonds.csv"), |w| write_rows(w, &bonds))?;
    Ok(())
}
