//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Root of `f` in `[lo, hi]` by bisection down to `xtol`, followed by one secant
/// step on the final bracket when it stays inside it.
///
/// `f(lo)` and `f(hi)` must have opposite signs (a zero at an endpoint is returned
/// directly).
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    for _ in 0..400 {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let secant = hi - fhi * (hi - lo) / (fhi - flo);
    if secant.is_finite() && secant >= lo && secant <= hi {
        Ok(secant)
    } else {
        Ok(0.5 * (lo + hi))
    }
}
