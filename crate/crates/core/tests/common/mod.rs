//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Root of λ = (8/√3)·sinh(πλ/6)/cosh(πλ/2) by 200 plain bisection steps.
pub fn lambda0_oracle() -> f64 {
    let f = |y: f64| y - 8.0 / 3f64.sqrt() * (PI * y / 6.0).sinh() / (PI * y / 2.0).cosh();
    let (mut lo, mut hi) = (0.5, 2.0);
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// (2π)^{-3} ∫ dt / ε(t) from Watson's closed form for the simple cubic lattice.
pub fn watson_closed_form() -> f64 {
    let g = gamma(1.0 / 24.0) * gamma(5.0 / 24.0) * gamma(7.0 / 24.0) * gamma(11.0 / 24.0);
    6f64.sqrt() / (32.0 * PI.powi(3)) * g / 3.0
}

/// (2π)^{-3} ∫ dt / (E_k(t) − z) for the two-body symbol, integrating the last
/// axis in closed form and the other two with a periodic trapezoid rule that is
/// doubled until it settles.
pub fn resolvent_trace(k: [f64; 3], z: f64) -> f64 {
    let c: Vec<f64> = k.iter().map(|x| (0.5 * x).cos()).collect();
    let eval = |n: usize| {
        let h = 2.0 * PI / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let a1 = 2.0 - 2.0 * c[0] * (i as f64 * h).cos();
            for j in 0..n {
                let a = a1 + 2.0 - 2.0 * c[1] * (j as f64 * h).cos() + 2.0 - z;
                sum += 1.0 / (a * a - 4.0 * c[2] * c[2]).sqrt();
            }
        }
        sum / (n * n) as f64
    };
    let mut n = 64;
    let mut prev = eval(n);
    loop {
        n *= 2;
        let next = eval(n);
        if (next - prev).abs() <= 1e-14 * next.abs() || n >= 4096 {
            return next;
        }
        prev = next;
    }
}

/// Bound-state energy of the contact interaction of strength `mu` at pair
/// momentum `k`: the root of mu·resolvent_trace(k, z) = 1 below the band.
pub fn contact_bound_state(mu: f64, k: [f64; 3]) -> f64 {
    let e_min: f64 = k.iter().map(|x| 2.0 * (1.0 - (0.5 * x).cos().abs())).sum();
    let f = |z: f64| mu * resolvent_trace(k, z) - 1.0;
    let mut hi = e_min - 1e-9;
    let mut lo = e_min - 1.0;
    assert!(f(hi) > 0.0, "no bound state below the band at k = {k:?}");
    while f(lo) > 0.0 {
        hi = lo;
        lo -= 1.0;
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
