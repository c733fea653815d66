//! Least-squares straight-line fits.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when the points are collinear or when
    /// only two are given.
    pub stderr: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidArgument("a line fit needs at least two paired points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let stderr = if n > 2 { (ss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LineFit {
        slope,
        intercept,
        stderr,
        residual: (ss / nf).sqrt(),
    })
}
