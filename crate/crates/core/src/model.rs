//! The scale-invariant model: the constant λ₀, the symbol Ŝ(t; λ) and its
//! partial waves, the counting functional U(μ), and the operator S(r) on the
//! finite log-interval (0, r).

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::linalg::{centrosymmetric_eigenvalues, count_above, KernelOperator};
use crate::quadrature::gauss_legendre;
use crate::roots::bisect;
use crate::special::legendre;
use crate::three_body::{gershgorin_bound, weighted_total, L_CAP};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// sinh(aλ)/sinh(bλ) for 0 ≤ a ≤ b and λ ≥ 0, without overflow.
fn sinh_ratio(a: f64, b: f64, lambda: f64) -> f64 {
    if lambda < 1.0 {
        (a * lambda).sinh() / (b * lambda).sinh()
    } else {
        let num = -(-2.0 * a * lambda).exp_m1();
        let den = -(-2.0 * b * lambda).exp_m1();
        ((a - b) * lambda).exp() * num / den
    }
}

/// The symbol Ŝ(t; λ) = (2/(√3π))·sinh(λθ) / (sin θ · sinh(πλ)), θ = arccos(t/2).
pub fn s_hat(t: f64, lambda: f64) -> Result<f64> {
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!("s_hat needs |t| <= 1, got {t}")));
    }
    let theta = (0.5 * t).acos();
    let lam = lambda.abs();
    let ratio = if lam < 1e-8 { theta / PI } else { sinh_ratio(theta, PI, lam) };
    Ok(2.0 / (SQRT_3 * PI) * ratio / theta.sin())
}

/// Closed form of the s-wave symbol, (8/√3)·sinh(πy/6) / (y·cosh(πy/2)).
pub fn s0_closed_form(y: f64) -> f64 {
    let y = y.abs();
    let a = PI / 6.0;
    let b = PI / 2.0;
    if y < 1e-4 {
        return 8.0 / SQRT_3 * a * (1.0 + y * y * (a * a / 6.0 - b * b / 2.0));
    }
    // sinh(ay)/cosh(by) = e^{(a−b)y}(1 − e^{−2ay})/(1 + e^{−2by})
    let ratio = ((a - b) * y).exp() * (-(-2.0 * a * y).exp_m1()) / (1.0 + (-2.0 * b * y).exp());
    8.0 / SQRT_3 * ratio / y
}

fn s0_derivative(y: f64) -> f64 {
    let a = PI / 6.0;
    let b = PI / 2.0;
    let c = 8.0 / SQRT_3;
    let (sa, ca) = ((a * y).sinh(), (a * y).cosh());
    let (sb, cb) = ((b * y).sinh(), (b * y).cosh());
    c * (a * ca / (y * cb) - sa / (y * y * cb) - b * sa * sb / (y * cb * cb))
}

/// The root of Ŝ⁽⁰⁾(λ) = 1 and its residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lambda0 {
    pub value: f64,
    /// |s0_closed_form(λ₀) − 1|.
    pub residual: f64,
    /// |λ₀ − (8/√3)·sinh(πλ₀/6)/cosh(πλ₀/2)|.
    pub equation_residual: f64,
}

impl Lambda0 {
    /// λ₀/(2π), the slope of the count against |log ρ|.
    pub fn half_slope(&self) -> f64 {
        self.value / (2.0 * PI)
    }

    /// λ₀/π, the slope of the S(r) count against r.
    pub fn full_slope(&self) -> f64 {
        self.value / PI
    }
}

/// Unique positive root of s0_closed_form(λ) = 1: bisection on [10⁻⁶, 10]
/// followed by one Newton step.
pub fn lambda0() -> Lambda0 {
    let g = |y: f64| Ok(s0_closed_form(y) - 1.0);
    let mut y = bisect(g, 1e-6, 10.0, 1e-13).expect("s0 - 1 changes sign on [1e-6, 10]");
    let step = (s0_closed_form(y) - 1.0) / s0_derivative(y);
    if step.abs() < 1e-10 {
        y -= step;
    }
    let a = PI / 6.0;
    let b = PI / 2.0;
    Lambda0 {
        value: y,
        residual: (s0_closed_form(y) - 1.0).abs(),
        equation_residual: (y - 8.0 / SQRT_3 * (a * y).sinh() / (b * y).cosh()).abs(),
    }
}

/// Partial-wave symbol Ŝ⁽ˡ⁾(λ) = 2π ∫₋₁¹ P_l(t) Ŝ(t; λ) dt.
pub fn channel_symbol(l: usize, lambda: f64, angular_n: usize) -> Result<f64> {
    let rule = gauss_legendre(angular_n)?;
    channel_symbol_with(l, lambda, &rule)
}

fn channel_symbol_with(l: usize, lambda: f64, rule: &[(f64, f64)]) -> Result<f64> {
    let mut s = 0.0;
    for &(t, w) in rule {
        s += w * legendre(l, t) * s_hat(t, lambda)?;
    }
    Ok(2.0 * PI * s)
}

/// Tabulated partial-wave symbols.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolTable {
    pub lambda_grid: Vec<f64>,
    pub l_max: usize,
    /// `values[l][i]` = Ŝ⁽ˡ⁾(lambda_grid[i]).
    pub values: Vec<Vec<f64>>,
}

impl SymbolTable {
    pub fn new(lambda_grid: Vec<f64>, l_max: usize, angular_n: usize) -> Result<Self> {
        let rule = gauss_legendre(angular_n)?;
        let values = (0..=l_max)
            .map(|l| {
                lambda_grid
                    .iter()
                    .map(|&y| channel_symbol_with(l, y, &rule))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            lambda_grid,
            l_max,
            values,
        })
    }

    /// max |Ŝ⁽⁰⁾ − closed form| over the grid.
    pub fn s_wave_defect(&self) -> f64 {
        self.lambda_grid
            .iter()
            .zip(&self.values[0])
            .map(|(&y, v)| (v - s0_closed_form(y)).abs())
            .fold(0.0, f64::max)
    }
}

/// Default half-width of the λ-window for superlevel sets.
pub const LAMBDA_WINDOW: f64 = 20.0;
const SCAN_STEP: f64 = 0.01;

/// Lebesgue measure of {λ ∈ [−window, window] : Ŝ⁽ˡ⁾(λ) > μ}.
///
/// The symbol is even in λ; crossings on [0, window] are located by a scan and
/// refined by bisection.
pub fn superlevel_measure(l: usize, mu: f64, window: f64, angular_n: usize) -> Result<f64> {
    let rule = gauss_legendre(angular_n)?;
    let f = |y: f64| -> Result<f64> { Ok(channel_symbol_with(l, y, &rule)? - mu) };
    let steps = (window / SCAN_STEP).ceil() as usize;
    let h = window / steps as f64;
    let mut measure = 0.0;
    let mut prev_y = 0.0;
    let mut prev = f(0.0)?;
    let mut start = if prev > 0.0 { Some(0.0) } else { None };
    for i in 1..=steps {
        let y = i as f64 * h;
        let v = f(y)?;
        if (prev > 0.0) != (v > 0.0) {
            let root = bisect(f, prev_y, y, 1e-14)?;
            match start.take() {
                Some(s) => measure += root - s,
                None => start = Some(root),
            }
        }
        prev = v;
        prev_y = y;
    }
    if let Some(s) = start {
        measure += window - s;
    }
    Ok(2.0 * measure)
}

/// U(μ) = (1/4π) Σ_l (2l + 1)·|{λ : Ŝ⁽ˡ⁾(λ) > μ}|.
pub fn counting_functional(mu: f64, l_max: usize, window: f64, angular_n: usize) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu = {mu} must be positive")));
    }
    let total: f64 = (0..=l_max)
        .into_par_iter()
        .map(|l| Ok((2 * l + 1) as f64 * superlevel_measure(l, mu, window, angular_n)?))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(total / (4.0 * PI))
}

/// Position-space kernel S(t; y) = (1/(√3π²)) / (cosh y + t/2).
pub fn s_kernel(t: f64, y: f64) -> f64 {
    1.0 / (SQRT_3 * PI * PI) / (y.cosh() + 0.5 * t)
}

/// Partial-wave kernel S_l(y) = 2π ∫₋₁¹ P_l(t) S(t; y) dt.
pub fn s_channel_kernel(l: usize, y: f64, rule: &[(f64, f64)]) -> f64 {
    2.0 * PI * rule.iter().map(|&(t, w)| w * legendre(l, t) * s_kernel(t, y)).sum::<f64>()
}

/// Discretization of S(r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrParams {
    /// Upper bound on the spacing of the uniform midpoint grid on (0, r).
    pub x_step: f64,
    pub l_max: usize,
    pub angular_n: usize,
}

impl Default for SrParams {
    fn default() -> Self {
        Self {
            x_step: 0.05,
            l_max: 6,
            angular_n: 24,
        }
    }
}

fn s_r_channel(r: f64, l: usize, params: &SrParams, rule: &[(f64, f64)]) -> KernelOperator {
    let n = (r / params.x_step).ceil().max(1.0) as usize;
    let h = r / n as f64;
    let column: Vec<f64> = (0..n).map(|m| h * s_channel_kernel(l, m as f64 * h, rule)).collect();
    let m = Mat::from_fn(n, n, |i, j| column[i.abs_diff(j)]);
    KernelOperator::new(format!("S(r={r}) channel l={l}"), m)
}

/// Channel matrices of S(r) for l = 0..=l_max on a uniform midpoint grid.
pub fn build_s_r(r: f64, params: SrParams) -> Result<Vec<KernelOperator>> {
    if !(r > 0.0 && r.is_finite()) || !(params.x_step > 0.0) {
        return Err(Error::InvalidArgument(format!("r = {r} and x_step must be positive")));
    }
    let rule = gauss_legendre(params.angular_n)?;
    Ok((0..=params.l_max).map(|l| s_r_channel(r, l, &params, &rule)).collect())
}

fn count_toeplitz(op: &KernelOperator) -> Result<usize> {
    if gershgorin_bound(&op.matrix) <= 1.0 {
        return Ok(0);
    }
    Ok(count_above(&centrosymmetric_eigenvalues(&op.matrix)?, 1.0))
}

/// n(1, ·) per channel of S(r), extending l while the top channel counts.
pub fn count_s_r(r: f64, params: SrParams) -> Result<Vec<usize>> {
    let channels = build_s_r(r, params)?;
    let rule = gauss_legendre(params.angular_n)?;
    let mut counts: Vec<usize> = channels.iter().map(count_toeplitz).collect::<Result<_>>()?;
    while counts.last().copied().unwrap_or(0) > 0 && counts.len() <= L_CAP {
        let l = counts.len();
        counts.push(count_toeplitz(&s_r_channel(r, l, &params, &rule))?);
    }
    Ok(counts)
}

/// Counts n(1, S(r)) over an increasing r sequence with a linear fit in r.
pub fn slope_s_r(rs: &[f64], params: SrParams) -> Result<CountingCurve> {
    if rs.len() < 2 {
        return Err(Error::InvalidArgument("at least two r values are required".into()));
    }
    if rs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("r values must be strictly increasing".into()));
    }
    let per_r: Vec<Vec<usize>> = rs
        .par_iter()
        .map(|&r| count_s_r(r, params))
        .collect::<Result<_>>()?;
    CountingCurve::from_channel_counts(rs.to_vec(), per_r)
}

/// Eigenvalue counts along a parameter sweep with a least-squares slope.
#[derive(Debug, Clone, Serialize)]
pub struct CountingCurve {
    /// Sweep parameter: r, or |log ρ|.
    pub abscissa: Vec<f64>,
    /// Σ_l (2l + 1)·(channel count) per point.
    pub counts: Vec<usize>,
    /// Per-point channel counts, l = 0, 1, ...
    pub channel_counts: Vec<Vec<usize>>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

impl CountingCurve {
    pub fn from_channel_counts(abscissa: Vec<f64>, channel_counts: Vec<Vec<usize>>) -> Result<Self> {
        let counts: Vec<usize> = channel_counts.iter().map(|c| weighted_total(c)).collect();
        let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let LineFit {
            slope,
            intercept,
            stderr,
            residual,
        } = fit_line(&abscissa, &y)?;
        Ok(Self {
            abscissa,
            counts,
            channel_counts,
            slope,
            intercept,
            stderr,
            residual,
        })
    }

    /// Whether the counts never decrease along the sweep.
    pub fn is_nondecreasing(&self) -> bool {
        self.counts.windows(2).all(|w| w[1] >= w[0])
    }

    /// Largest count contributed by any channel with l ≥ 1.
    pub fn higher_wave_max(&self) -> usize {
        self.channel_counts
            .iter()
            .flat_map(|c| c.iter().skip(1).copied())
            .max()
            .unwrap_or(0)
    }
}
