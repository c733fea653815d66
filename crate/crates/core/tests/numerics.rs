use std::f64::consts::PI;

use efimov_core::fit::fit_line;
use efimov_core::linalg::{centrosymmetric_eigenvalues, sym_eigenvalues, sym_function};
use efimov_core::quadrature::{gauss_legendre, integrate_half_line};
use efimov_core::roots::bisect;
use efimov_core::special::{bessel_i_scaled, legendre};
use faer::Mat;
use proptest::prelude::*;

#[test]
fn bessel_matches_reference_library() {
    for m in 0..=8u32 {
        for &x in &[0.01, 0.5, 1.0, 5.0, 12.0, 29.0, 31.0, 45.0, 60.0] {
            let ours = bessel_i_scaled(m, x);
            let reference = puruspe::In(m, x) * (-x).exp();
            assert!((ours - reference).abs() <= 1e-11 * reference, "m = {m}, x = {x}: {ours} vs {reference}");
        }
    }
}

#[test]
fn bessel_large_argument_limit() {
    for m in [0u32, 3, 10] {
        let x = 1e6;
        let leading = 1.0 / (2.0 * PI * x).sqrt();
        assert!((bessel_i_scaled(m, x) / leading - 1.0).abs() < 1e-4);
    }
}

#[test]
fn gauss_legendre_is_exact_for_polynomials() {
    let rule = gauss_legendre(8).unwrap();
    for degree in 0..16 {
        let sum: f64 = rule.iter().map(|(x, w)| w * x.powi(degree)).sum();
        let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
        assert!((sum - exact).abs() < 1e-14, "degree {degree}");
    }
}

#[test]
fn legendre_orthogonality() {
    let rule = gauss_legendre(20).unwrap();
    for l in 0..8 {
        for m in 0..8 {
            let s: f64 = rule.iter().map(|(x, w)| w * legendre(l, *x) * legendre(m, *x)).sum();
            let expected = if l == m { 2.0 / (2.0 * l as f64 + 1.0) } else { 0.0 };
            assert!((s - expected).abs() < 1e-13);
        }
    }
}

#[test]
fn half_line_integrals() {
    let r = integrate_half_line(2, 1e-13, |s, out| {
        out[0] = (-s).exp();
        out[1] = 1.0 / (1.0 + s * s);
    })
    .unwrap();
    assert!((r.values[0] - 1.0).abs() < 1e-12);
    assert!((r.values[1] - PI / 2.0).abs() < 1e-12);
}

#[test]
fn bisection_finds_roots() {
    let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-13);
    assert!(bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).is_err());
}

#[test]
fn centrosymmetric_split_matches_full_solve() {
    let n = 9;
    let column: Vec<f64> = (0..n).map(|k| 1.0 / (1.0 + k as f64 * k as f64)).collect();
    let m = Mat::from_fn(n, n, |i, j| column[i.abs_diff(j)]);
    let a = centrosymmetric_eigenvalues(&m).unwrap();
    let b = sym_eigenvalues(&m).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-13);
    }
}

#[test]
fn matrix_function_square_root() {
    let m = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.5 });
    let root = sym_function(&m, f64::sqrt).unwrap();
    let back = &root * &root;
    for i in 0..3 {
        for j in 0..3 {
            assert!((back[(i, j)] - m[(i, j)]).abs() < 1e-14);
        }
    }
}

proptest! {
    #[test]
    fn line_fit_recovers_exact_lines(slope in -5.0f64..5.0, intercept in -5.0f64..5.0) {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + intercept).collect();
        let fit = fit_line(&x, &y).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-12);
        prop_assert!((fit.intercept - intercept).abs() < 1e-11);
        prop_assert!(fit.residual < 1e-11);
    }

    #[test]
    fn bessel_recurrence(m in 1u32..12, x in 0.05f64..80.0) {
        let lhs = bessel_i_scaled(m - 1, x) - bessel_i_scaled(m + 1, x);
        let rhs = 2.0 * m as f64 / x * bessel_i_scaled(m, x);
        prop_assert!((lhs - rhs).abs() < 1e-11 * (bessel_i_scaled(m - 1, x) + 1e-300));
    }
}
