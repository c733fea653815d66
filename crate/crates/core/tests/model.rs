mod common;

use std::f64::consts::PI;

use efimov_core::model::{
    build_s_r, channel_symbol, count_s_r, counting_functional, lambda0, s0_closed_form, s_hat, slope_s_r,
    superlevel_measure, SrParams, SymbolTable, LAMBDA_WINDOW,
};
use proptest::prelude::*;

const S0_AT_ZERO: f64 = 2.418_399_152_312_290_6;

#[test]
fn lambda0_agrees_with_oracle_and_slopes() {
    let l = lambda0();
    assert!((l.value - common::lambda0_oracle()).abs() < 1e-12);
    assert!((l.half_slope() - l.value / (2.0 * PI)).abs() < 1e-16);
    assert!((l.full_slope() - 2.0 * l.half_slope()).abs() < 1e-16);
    assert!(l.residual < 1e-12);
}

#[test]
fn s_wave_symbol_at_zero() {
    assert!((s0_closed_form(0.0) - 4.0 * PI / (3.0 * 3f64.sqrt())).abs() < 1e-15);
    assert!((s0_closed_form(0.0) - S0_AT_ZERO).abs() < 1e-14);
    assert!((channel_symbol(0, 0.0, 24).unwrap() - S0_AT_ZERO).abs() < 1e-10);
}

#[test]
fn symbol_kernel_decays_exponentially() {
    let prefactor = 2.0 / (3f64.sqrt() * PI);
    for lambda in [5.0, 10.0, 15.0] {
        let ratio = s_hat(0.0, lambda).unwrap() / (prefactor * (-PI * lambda / 2.0).exp());
        assert!((ratio - 1.0).abs() < 1e-6, "lambda = {lambda}: {ratio}");
    }
    assert!(s_hat(1.5, 1.0).is_err());
}

#[test]
fn higher_waves_stay_below_one() {
    for l in 1..=6 {
        for i in 0..=400 {
            let lambda = 20.0 * i as f64 / 400.0;
            assert!(channel_symbol(l, lambda, 24).unwrap() < 1.0, "l = {l}, lambda = {lambda}");
        }
    }
}

#[test]
fn symbol_table_matches_closed_form() {
    let grid: Vec<f64> = (0..50).map(|i| 0.2 * i as f64).collect();
    let table = SymbolTable::new(grid, 4, 24).unwrap();
    assert!(table.s_wave_defect() < 1e-9);
}

#[test]
fn counting_functional_limits() {
    let above = counting_functional(S0_AT_ZERO + 0.01, 6, LAMBDA_WINDOW, 24).unwrap();
    assert_eq!(above, 0.0);
    let near = [0.99, 1.0, 1.01].map(|mu| counting_functional(mu, 6, LAMBDA_WINDOW, 24).unwrap());
    assert!(near[0] >= near[1] && near[1] >= near[2]);
    assert!((near[0] - near[2]).abs() < 0.01);
    let l = common::lambda0_oracle();
    let measure = superlevel_measure(0, 1.0, LAMBDA_WINDOW, 24).unwrap();
    assert!((measure - 2.0 * l).abs() < 1e-6);
}

#[test]
fn s_r_channels_are_symmetric_toeplitz() {
    let ops = build_s_r(20.0, SrParams::default()).unwrap();
    assert_eq!(ops.len(), SrParams::default().l_max + 1);
    for op in &ops {
        assert!(op.symmetry_defect() < 1e-15);
        let m = &op.matrix;
        for i in 1..m.nrows() {
            assert_eq!(m[(i, i)], m[(0, 0)]);
            assert_eq!(m[(i, i - 1)], m[(1, 0)]);
        }
    }
}

#[test]
fn s_r_count_is_stable_under_refinement() {
    let base = SrParams::default();
    let fine = SrParams {
        x_step: base.x_step / 2.0,
        ..base
    };
    let a: usize = count_s_r(40.0, base).unwrap().iter().sum();
    let b: usize = count_s_r(40.0, fine).unwrap().iter().sum();
    assert!(a.abs_diff(b) <= 1, "{a} vs {b}");
}

#[test]
fn s_r_counts_are_s_wave_only_and_monotone() {
    let curve = slope_s_r(&[10.0, 20.0, 40.0], SrParams::default()).unwrap();
    assert!(curve.is_nondecreasing());
    assert_eq!(curve.higher_wave_max(), 0);
    assert!(slope_s_r(&[20.0, 10.0], SrParams::default()).is_err());
    assert!(build_s_r(-1.0, SrParams::default()).is_err());
}

#[test]
fn both_counting_routes_agree_on_the_slope_ratio() {
    let sr = slope_s_r(&[25.0, 50.0, 75.0, 100.0], SrParams::default()).unwrap();
    let rhos: Vec<f64> = (0..13).map(|i| 10f64.powf(-6.0 - 2.0 * i as f64)).collect();
    let model = efimov_core::three_body::count_n_model(&rhos, efimov_core::three_body::T1Params::default()).unwrap();
    let ratio = sr.slope / model.slope;
    assert!((1.8..=2.2).contains(&ratio), "{} / {} = {ratio}", sr.slope, model.slope);
}

proptest! {
    #[test]
    fn symbols_are_even(l in 0usize..6, lambda in 0.0f64..15.0) {
        let a = channel_symbol(l, lambda, 24).unwrap();
        let b = channel_symbol(l, -lambda, 24).unwrap();
        prop_assert!((a - b).abs() < 1e-14 * (1.0 + a.abs()));
    }

    #[test]
    fn s_wave_symbol_decreases(lambda in 0.0f64..15.0, step in 1e-3f64..1.0) {
        prop_assert!(s0_closed_form(lambda + step) < s0_closed_form(lambda));
    }

    #[test]
    fn kernel_is_even_in_the_cosine(t in -1.0f64..1.0, lambda in -10.0f64..10.0) {
        let a = s_hat(t, lambda).unwrap();
        prop_assert!((a - s_hat(t, -lambda).unwrap()).abs() < 1e-14 * (1.0 + a.abs()));
        prop_assert!(a > 0.0);
    }
}
