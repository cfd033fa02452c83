use proptest::prelude::*;
use qghjm_core::criteria::{
    beta_max, check_condition_with, delta2_star, region_curve, ConditionConstant, ConditionKind,
    ScanGrid,
};
use qghjm_core::ModelParams;

fn satisfied(p: &ModelParams, constant: ConditionConstant) -> bool {
    check_condition_with(p, ConditionKind::II, &ScanGrid::default(), constant)
        .unwrap()
        .satisfied
}

#[test]
fn widened_constant_admits_more_parameters() {
    for i in 0..12 {
        for j in 0..12 {
            let sigma = 0.05 + 0.12 * i as f64;
            let beta = 0.002 * j as f64;
            let p = ModelParams::lognormal(sigma, beta, 0.1).with_gamma(0.8);
            if satisfied(&p, ConditionConstant::Standard) {
                assert!(
                    satisfied(&p, ConditionConstant::Widened),
                    "sigma {sigma}, beta {beta}"
                );
            }
        }
    }
}

#[test]
fn region_boundary_separates_the_condition() {
    for &gamma in &[0.6, 0.75, 1.0] {
        for &sigma in &[0.1, 0.3, 0.6, 1.0] {
            let bm = beta_max(sigma, gamma).unwrap();
            assert!(bm > 0.0);
            let inside = ModelParams::lognormal(sigma, 0.9 * bm, 0.1).with_gamma(gamma);
            let outside = ModelParams::lognormal(sigma, 1.1 * bm, 0.1).with_gamma(gamma);
            assert!(
                satisfied(&inside, ConditionConstant::Standard),
                "gamma {gamma}, sigma {sigma}"
            );
            assert!(
                !satisfied(&outside, ConditionConstant::Standard),
                "gamma {gamma}, sigma {sigma}"
            );
        }
    }
}

#[test]
fn region_curves_are_ordered_in_gamma_for_small_sigma() {
    let sigmas: Vec<f64> = (1..=6).map(|k| 0.05 * k as f64).collect();
    let curves: Vec<_> = [0.6, 0.75, 0.9, 1.0]
        .iter()
        .map(|&g| region_curve(g, &sigmas).unwrap())
        .collect();
    for w in curves.windows(2) {
        for (lo, hi) in w[0].points.iter().zip(&w[1].points) {
            assert!(hi.beta_max >= lo.beta_max);
        }
    }
}

#[test]
fn regime_without_explosion_is_rejected() {
    assert!(delta2_star(0.2, 0.5).is_err());
    assert!(beta_max(0.2, 0.4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_max_is_nonincreasing_in_sigma(
        s in 0.01f64..1.4, ds in 1e-4f64..0.2, gamma in 0.55f64..=1.0,
    ) {
        prop_assert!(beta_max(s + ds, gamma).unwrap() <= beta_max(s, gamma).unwrap() + 1e-15);
    }

    #[test]
    fn delta2_star_stays_in_range(sigma in 0.01f64..2.0, gamma in 0.55f64..=1.0) {
        let (d, _) = delta2_star(sigma, gamma).unwrap();
        prop_assert!(d >= 0.0 && d <= 2.0 * gamma - 1.0);
    }
}
