//! Site-space resolvent of the two-body kinetic symbol.
//!
//! For offsets `m ∈ ℤ³` the lattice Green's function
//!
//! ```text
//! L(m; k, z) = (2π)^{-3} ∫_{T³} e^{i(t,m)} / (E_k(t) − z) dt
//! ```
//!
//! is computed from its heat-kernel form
//! `∫₀^∞ e^{−s(E_min(k) − z)} Πⱼ ±e^{−2s|cⱼ|} I_{mⱼ}(2s|cⱼ|) ds` with `cⱼ = cos(kⱼ/2)`,
//! which stays accurate all the way down to the band bottom.

use crate::error::{Error, Result};
use crate::potential::Site;
use crate::quadrature::{integrate_half_line, HalfLineIntegral};
use crate::special::{bessel_i_scaled, MAX_BESSEL_ORDER};
use crate::torus::{twobody_band, Vec3};

/// Hopping amplitudes below this are treated as exactly zero (flat direction).
const FLAT_TOL: f64 = 1e-14;
const REL_TOL: f64 = 1e-13;

/// Green's function values `L(m; k, z)` for each offset in `offsets`.
///
/// Requires `z ≤ E_min(k)`. At `z = E_min(k)` the integral converges unless
/// some `cos(kⱼ/2)` vanishes, in which case [`Error::Divergent`] is returned.
pub fn lattice_green(k: Vec3, z: f64, offsets: &[Site]) -> Result<Vec<f64>> {
    Ok(lattice_green_detailed(k, z, offsets)?.values)
}

/// As [`lattice_green`], also returning the quadrature refinement history.
pub fn lattice_green_detailed(k: Vec3, z: f64, offsets: &[Site]) -> Result<HalfLineIntegral> {
    let e_min = twobody_band(k).min;
    let gap = e_min - z;
    if !(gap >= 0.0) {
        return Err(Error::ThresholdViolation { z, threshold: e_min });
    }
    let c: Vec3 = k.map(|x| (0.5 * x).cos());
    let flat = c.map(|x| x.abs() < FLAT_TOL);
    if gap == 0.0 && flat.iter().any(|&f| f) {
        return Err(Error::Divergent { k });
    }
    let mut max_order = [0u32; 3];
    for m in offsets {
        for d in 0..3 {
            max_order[d] = max_order[d].max(m[d].unsigned_abs());
        }
    }
    if max_order.iter().any(|&m| m > MAX_BESSEL_ORDER) {
        return Err(Error::InvalidArgument(format!(
            "site offsets beyond {MAX_BESSEL_ORDER} are not supported"
        )));
    }
    // A negative hopping amplitude flips the sign of odd orders.
    let sign: Vec<f64> = offsets
        .iter()
        .map(|m| {
            (0..3).fold(1.0, |acc, d| {
                if c[d] < 0.0 && !flat[d] && m[d] % 2 != 0 {
                    -acc
                } else {
                    acc
                }
            })
        })
        .collect();
    let amp = [0, 1, 2].map(|d| if flat[d] { 0.0 } else { c[d].abs() });
    let mut bessel: [Vec<f64>; 3] = [0, 1, 2].map(|d| vec![0.0; max_order[d] as usize + 1]);
    integrate_half_line(offsets.len(), REL_TOL, |s, out| {
        let decay = (-s * gap).exp();
        if decay == 0.0 {
            out.fill(0.0);
            return;
        }
        for d in 0..3 {
            let x = 2.0 * s * amp[d];
            for (order, slot) in bessel[d].iter_mut().enumerate() {
                *slot = bessel_i_scaled(order as u32, x);
            }
        }
        for ((o, m), sg) in out.iter_mut().zip(offsets).zip(&sign) {
            let mut v = decay * sg;
            for d in 0..3 {
                v *= bessel[d][m[d].unsigned_abs() as usize];
            }
            *o = v;
        }
    })
}

/// The lattice integral W = (2π)^{-3} ∫ dt / ε(t) ≈ 0.505462, with the value
/// after each refinement of the quadrature step.
pub fn watson_integral() -> Result<HalfLineIntegral> {
    // E_0(t) = 2ε(t), so W = 2 L(0; 0, 0).
    let mut r = lattice_green_detailed([0.0; 3], 0.0, &[[0, 0, 0]])?;
    for v in r.values.iter_mut().chain(r.history.iter_mut()) {
        *v *= 2.0;
    }
    r.last_change *= 2.0;
    Ok(r)
}
