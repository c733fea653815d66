//! The two-particle fiber operator h(k) = h⁰(k) − v and its Birman–Schwinger
//! operator G(k, z) = v^{1/2} (h⁰(k) − z)^{-1} v^{1/2}.
//!
//! Two discretizations are provided. The grid (Nyström) route builds h(k) and
//! G(k, z) on a [`TorusGrid`] with the inner integral done on the same grid,
//! where the Birman–Schwinger identity holds exactly as matrix algebra. The site
//! route uses that G(k, z) has finite rank for a finitely supported potential:
//! with `φₛ(p) = (2π)^{-3/2} e^{i(p,s)}`, `G = A Γ A*` for the isometry
//! `A a = Σ aₛ φₛ` and the site matrix `Γ_{ss'} = cₛ c_{s'} L(s − s'; k, z)`,
//! `cₛ = √(μ v̂(s))`. The site route is exact in the continuum and is used for
//! everything that probes the threshold.

use std::f64::consts::PI;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::lattice_green;
use crate::linalg::{count_above, count_below, sym_eigen, sym_eigenvalues, KernelOperator};
use crate::potential::{LatticePotential, Site, FOURIER_NORM};
use crate::torus::{dot, norm, scale, twobody_band, twobody_symbol, TorusGrid, Vec3};

/// Bisection width for energies and couplings.
pub const ROOT_TOL: f64 = 1e-12;
/// |top eigenvalue − 1| below which a threshold value counts as a resonance.
pub const RESONANCE_TOL: f64 = 1e-10;
/// Offset below the band bottom used when the threshold resolvent diverges.
pub const THRESHOLD_OFFSET: f64 = 1e-12;

fn check_energy(k: Vec3, z: f64) -> Result<f64> {
    let e_min = twobody_band(k).min;
    if !(z <= e_min) {
        return Err(Error::ThresholdViolation { z, threshold: e_min });
    }
    Ok(e_min)
}

/// Nyström matrix of h(k) on `grid`.
pub fn build_h(pot: &LatticePotential, k: Vec3, grid: &TorusGrid) -> Result<KernelOperator> {
    let mut m = pot.convolution_matrix(grid);
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            m[(i, j)] = -m[(i, j)];
        }
        m[(i, i)] += twobody_symbol(k, grid.node(i));
    }
    Ok(KernelOperator::new(format!("h(k={k:?}), n={}", grid.n_per_axis()), m))
}

/// Nyström matrix of G(k, z) on `grid`, inner integral on the same grid.
///
/// `z` must not exceed E_min(k) and must lie strictly below every grid value of
/// the kinetic symbol.
pub fn build_g(pot: &LatticePotential, k: Vec3, z: f64, grid: &TorusGrid) -> Result<KernelOperator> {
    check_energy(k, z)?;
    let diag: Vec<f64> = grid.nodes().iter().map(|&t| twobody_symbol(k, t)).collect();
    let grid_min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(z < grid_min) {
        return Err(Error::ThresholdViolation { z, threshold: grid_min });
    }
    let half = pot.half_convolution_matrix(grid);
    let scaled = Mat::from_fn(grid.len(), grid.len(), |i, j| half[(i, j)] / (diag[i] - z));
    let mut g = &half * &scaled;
    crate::linalg::symmetrize(&mut g);
    Ok(KernelOperator::new(
        format!("G(k={k:?}, z={z}), n={}", grid.n_per_axis()),
        g,
    ))
}

/// Both sides of the discrete Birman–Schwinger identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TwoBodyCount {
    /// Eigenvalues of h(k) below z.
    pub direct: usize,
    /// Eigenvalues of G(k, z) above 1.
    pub birman_schwinger: usize,
}

/// Counts eigenvalues of h(k) below `z` directly and through G(k, z).
pub fn count_two_body_both(pot: &LatticePotential, k: Vec3, z: f64, grid: &TorusGrid) -> Result<TwoBodyCount> {
    let g = build_g(pot, k, z, grid)?;
    let h = build_h(pot, k, grid)?;
    Ok(TwoBodyCount {
        direct: count_below(&h.eigenvalues()?, z),
        birman_schwinger: count_above(&g.eigenvalues()?, 1.0),
    })
}

/// n(1, G(k, z)), checked against the direct count of h(k) below `z`.
pub fn count_two_body(pot: &LatticePotential, k: Vec3, z: f64, grid: &TorusGrid) -> Result<usize> {
    let c = count_two_body_both(pot, k, z, grid)?;
    if c.direct != c.birman_schwinger {
        return Err(Error::CountMismatch {
            direct: c.direct,
            birman_schwinger: c.birman_schwinger,
        });
    }
    Ok(c.birman_schwinger)
}

/// G(k, z) in the site basis of the potential's support.
#[derive(Debug, Clone)]
pub struct SiteOperator {
    pub k: Vec3,
    pub z: f64,
    pub sites: Vec<Site>,
    /// `√(μ v̂(s))` per site.
    pub amplitudes: Vec<f64>,
    pub matrix: Mat<f64>,
}

fn difference_offsets(sites: &[Site]) -> (Vec<Site>, Vec<usize>) {
    let mut offsets: Vec<Site> = Vec::new();
    let mut index = Vec::with_capacity(sites.len() * sites.len());
    for a in sites {
        for b in sites {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            let pos = match offsets.iter().position(|o| *o == d) {
                Some(p) => p,
                None => {
                    offsets.push(d);
                    offsets.len() - 1
                }
            };
            index.push(pos);
        }
    }
    (offsets, index)
}

/// Builds the site matrix Γ(k, z) for `z ≤ E_min(k)`.
pub fn site_g(pot: &LatticePotential, k: Vec3, z: f64) -> Result<SiteOperator> {
    check_energy(k, z)?;
    let sites = pot.sites();
    let amplitudes = pot.root_coefficients();
    let n = sites.len();
    let (offsets, index) = difference_offsets(&sites);
    let green = lattice_green(k, z, &offsets)?;
    let matrix = Mat::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j] * green[index[i * n + j]]);
    Ok(SiteOperator {
        k,
        z,
        sites,
        amplitudes,
        matrix,
    })
}

impl SiteOperator {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        sym_eigenvalues(&self.matrix)
    }

    pub fn top_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.last().copied().unwrap_or(0.0))
    }

    /// Top eigenpair, with the eigenvector signed so that Σ cₛ aₛ ≥ 0.
    pub fn top_eigenpair(&self) -> Result<(f64, Vec<f64>)> {
        let (values, vectors) = sym_eigen(&self.matrix)?;
        let n = values.len();
        if n == 0 {
            return Err(Error::NotResonant("potential has empty support".into()));
        }
        let mut a: Vec<f64> = (0..n).map(|i| vectors[(i, n - 1)]).collect();
        let overlap: f64 = a.iter().zip(&self.amplitudes).map(|(x, c)| x * c).sum();
        let flip = if overlap.abs() > 1e-14 {
            overlap < 0.0
        } else {
            let big = a.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            big < 0.0
        };
        if flip {
            a.iter_mut().for_each(|x| *x = -*x);
        }
        Ok((values[n - 1], a))
    }

    /// Kernel G(p, q) = (2π)^{-3} Σ Γ_{ss'} e^{i(p,s) − i(q,s')}.
    pub fn kernel(&self, p: Vec3, q: Vec3) -> f64 {
        let mut sum = 0.0;
        for (i, s) in self.sites.iter().enumerate() {
            for (j, t) in self.sites.iter().enumerate() {
                let phase = dot(p, site_vec(*s)) - dot(q, site_vec(*t));
                sum += self.matrix[(i, j)] * phase.cos();
            }
        }
        FOURIER_NORM * FOURIER_NORM * sum
    }

    /// Nyström matrix `w G(pᵢ, pⱼ)` of the exact kernel sampled on `grid`.
    pub fn sample(&self, grid: &TorusGrid) -> KernelOperator {
        KernelOperator::new(
            format!("exact G(k={:?}, z={}), n={}", self.k, self.z, grid.n_per_axis()),
            sample_site_matrix(&self.sites, &self.matrix, grid),
        )
    }
}

fn site_vec(s: Site) -> Vec3 {
    s.map(|x| x as f64)
}

/// `w (2π)^{-3} [C M Cᵀ + S M Sᵀ]` with `C_{is} = cos(pᵢ·s)`, `S_{is} = sin(pᵢ·s)`.
fn sample_site_matrix(sites: &[Site], m: &Mat<f64>, grid: &TorusGrid) -> Mat<f64> {
    let n = grid.len();
    let r = sites.len();
    let c = Mat::from_fn(n, r, |i, s| dot(grid.node(i), site_vec(sites[s])).cos());
    let s = Mat::from_fn(n, r, |i, j| dot(grid.node(i), site_vec(sites[j])).sin());
    let mut out = &c * m * c.transpose() + &s * m * s.transpose();
    let f = grid.weight() * FOURIER_NORM * FOURIER_NORM;
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] *= f;
        }
    }
    out
}

/// Values `(2π)^{-3/2} Σ aₛ e^{i(p,s)}` of a site vector on the grid nodes.
pub fn site_function_on_grid(sites: &[Site], a: &[f64], grid: &TorusGrid) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|&p| {
            FOURIER_NORM
                * sites
                    .iter()
                    .zip(a)
                    .map(|(s, x)| x * dot(p, site_vec(*s)).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Result of tuning the coupling to the zero-energy resonance.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceCalibration {
    pub mu_star: f64,
    /// Resonance function at the grid nodes, normalized so Σ w ψ² = 1.
    pub psi: Vec<f64>,
    /// (v^{1/2}, ψ) from the site representation.
    pub phi0: f64,
    /// The same inner product by grid quadrature.
    pub phi0_grid: f64,
    /// |top eigenvalue of G(0,0) at μ* − 1|.
    pub residual: f64,
    /// Second eigenvalue of G(0,0) at μ*.
    pub second_eigenvalue: f64,
    /// max |aₛ − a₋ₛ| of the site eigenvector.
    pub parity_defect: f64,
    pub sites: Vec<Site>,
    /// Resonance eigenvector in the site basis (unit norm).
    pub site_vector: Vec<f64>,
}

impl ResonanceCalibration {
    /// Limit of |k|·⟨w(k,0)ψ, ψ⟩ as k → 0: 8π/φ(0)².
    pub fn witness_limit(&self) -> f64 {
        8.0 * PI / (self.phi0 * self.phi0)
    }
}

/// Finds μ* at which G(0, 0) for `shape.with_mu(μ*)` has top eigenvalue 1.
///
/// The coupling of `shape` is ignored; its coefficients define the shape. Since
/// G is linear in μ, μ* is the reciprocal of the top eigenvalue at μ = 1; the
/// result is re-evaluated at μ* to report the residual.
pub fn calibrate_resonance(shape: &LatticePotential, grid: &TorusGrid) -> Result<ResonanceCalibration> {
    let unit = shape.with_mu(1.0)?;
    if unit.is_zero() {
        return Err(Error::NotResonant("shape has no nonzero coefficient".into()));
    }
    unit.check_resolved(grid)?;
    let top = site_g(&unit, [0.0; 3], 0.0)?.top_eigenvalue()?;
    if !(top > 0.0) {
        return Err(Error::NotResonant(format!("top eigenvalue {top} of the unit-coupling operator")));
    }
    let mu_star = 1.0 / top;
    let pot = shape.with_mu(mu_star)?;
    let op = site_g(&pot, [0.0; 3], 0.0)?;
    let values = op.eigenvalues()?;
    let second = if values.len() > 1 { values[values.len() - 2] } else { 0.0 };
    if 1.0 - second < 1e-8 {
        return Err(Error::NotResonant(format!("eigenvalue 1 is not simple (next eigenvalue {second})")));
    }
    let (lambda, a) = op.top_eigenpair()?;
    let phi0: f64 = a.iter().zip(&op.amplitudes).map(|(x, c)| x * c).sum();
    if phi0.abs() < 1e-10 {
        return Err(Error::NotResonant("(v^1/2, psi) vanishes: threshold eigenvalue, not a resonance".into()));
    }
    let parity_defect = op
        .sites
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let m = [-s[0], -s[1], -s[2]];
            let j = op.sites.iter().position(|t| *t == m).expect("support is even");
            (a[i] - a[j]).abs()
        })
        .fold(0.0, f64::max);
    let psi = site_function_on_grid(&op.sites, &a, grid);
    let half: Vec<f64> = grid.nodes().iter().map(|&p| pot.halfpower_kernel(p)).collect();
    let phi0_grid = grid.weight() * half.iter().zip(&psi).map(|(v, x)| v * x).sum::<f64>();
    Ok(ResonanceCalibration {
        mu_star,
        psi,
        phi0,
        phi0_grid,
        residual: (lambda - 1.0).abs(),
        second_eigenvalue: second,
        parity_defect,
        sites: op.sites,
        site_vector: a,
    })
}

/// The lowest eigenvalue z(k) of h(k) below E_min(k), or `None` when h(k) has
/// no spectrum below the band.
///
/// Solves top-eigenvalue(G(k, z)) = 1 by bisection in z. When the equation holds
/// at the band bottom within [`RESONANCE_TOL`] (the resonance at k = 0), the
/// band bottom itself is returned.
pub fn bound_state_energy(pot: &LatticePotential, k: Vec3) -> Result<Option<f64>> {
    if pot.is_zero() {
        return Ok(None);
    }
    let e_min = twobody_band(k).min;
    let f = |z: f64| -> Result<f64> { Ok(site_g(pot, k, z)?.top_eigenvalue()? - 1.0) };
    let (z_hi, f_hi) = match f(e_min) {
        Ok(v) => (e_min, v),
        Err(Error::Divergent { .. }) => {
            let z = e_min - THRESHOLD_OFFSET * e_min.max(1.0);
            (z, f(z)?)
        }
        Err(e) => return Err(e),
    };
    if f_hi < -RESONANCE_TOL {
        return Ok(None);
    }
    if f_hi <= RESONANCE_TOL {
        return Ok(Some(z_hi));
    }
    let mut step = 1.0;
    let mut z_lo = z_hi - step;
    let mut tries = 0;
    while f(z_lo)? > 0.0 {
        step *= 2.0;
        z_lo = z_hi - step;
        tries += 1;
        if tries > 80 {
            return Err(Error::NoBracket("no lower bracket for the bound-state energy".into()));
        }
    }
    crate::roots::bisect(f, z_lo, z_hi, ROOT_TOL).map(Some)
}

/// Distances of the first-order difference quotients to their predicted limit.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    /// Expansion parameters (|k| or √(−z)), in the order given.
    pub parameters: Vec<f64>,
    /// max-norm distance of D(parameter) to the limit matrix.
    pub distances: Vec<f64>,
    /// distances[i+1] / distances[i].
    pub ratios: Vec<f64>,
    /// max-norm of the limit matrix.
    pub limit_norm: f64,
}

fn expansion_report(
    pot: &LatticePotential,
    grid: &TorusGrid,
    parameters: &[f64],
    slope: f64,
    shifted: impl Fn(f64) -> Result<SiteOperator>,
) -> Result<ExpansionReport> {
    if parameters.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("expansion parameters must be positive".into()));
    }
    let base = site_g(pot, [0.0; 3], 0.0)?;
    let half: Vec<f64> = grid.nodes().iter().map(|&p| pot.halfpower_kernel(p)).collect();
    let w = grid.weight();
    let n = grid.len();
    let limit = Mat::from_fn(n, n, |i, j| slope * w * half[i] * half[j]);
    let limit_norm = max_abs(&limit);
    let mut distances = Vec::with_capacity(parameters.len());
    for &t in parameters {
        let op = shifted(t)?;
        let diff = Mat::from_fn(base.matrix.nrows(), base.matrix.ncols(), |i, j| {
            (op.matrix[(i, j)] - base.matrix[(i, j)]) / t
        });
        let sampled = sample_site_matrix(&base.sites, &diff, grid);
        distances.push(max_abs(&(&sampled - &limit)));
    }
    let ratios = distances.windows(2).map(|d| d[1] / d[0]).collect();
    Ok(ExpansionReport {
        parameters: parameters.to_vec(),
        distances,
        ratios,
        limit_norm,
    })
}

fn max_abs(m: &Mat<f64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

/// Compares (G(k,0) − G(0,0))/|k| with −(1/8π) v^{1/2}(p) v^{1/2}(q) for
/// `k = t·direction`, sampled on `grid`.
pub fn expansion_check_g(
    pot: &LatticePotential,
    grid: &TorusGrid,
    direction: Vec3,
    magnitudes: &[f64],
) -> Result<ExpansionReport> {
    let len = norm(direction);
    if !(len > 0.0) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    let unit = scale(1.0 / len, direction);
    expansion_report(pot, grid, magnitudes, -1.0 / (8.0 * PI), |t| {
        site_g(pot, scale(t, unit), 0.0)
    })
}

/// Compares (G(0,z) − G(0,0))/√(−z) with −(1/4π) v^{1/2}(p) v^{1/2}(q) for
/// `z = −κ²` over the given κ.
pub fn expansion_check_g_energy(pot: &LatticePotential, grid: &TorusGrid, kappas: &[f64]) -> Result<ExpansionReport> {
    expansion_report(pot, grid, kappas, -1.0 / (4.0 * PI), |kappa| {
        site_g(pot, [0.0; 3], -kappa * kappa)
    })
}

/// |k|·⟨w(k,0)ψ, ψ⟩ with w(k,0) = (I − G(k,0))^{-1} and ψ the unit top
/// eigenfunction of G(0,0).
///
/// ψ lies in the range of the site isometry, so the quadratic form reduces to
/// `aᵀ(I − Γ(k,0))^{-1} a` for its site vector `a`.
pub fn resonance_witness_w(pot: &LatticePotential, k: Vec3) -> Result<f64> {
    let len = norm(k);
    if !(len > 0.0) {
        return Err(Error::Conditioning("I - G(0,0) is singular at resonance; k must be nonzero".into()));
    }
    let (_, a) = site_g(pot, [0.0; 3], 0.0)?.top_eigenpair()?;
    let op = site_g(pot, k, 0.0)?;
    let (values, u) = sym_eigen(&op.matrix)?;
    let r = values.len();
    let mut quad = 0.0;
    for j in 0..r {
        let gap = 1.0 - values[j];
        if gap.abs() < 1e-13 {
            return Err(Error::Conditioning(format!("I - G(k,0) is numerically singular at k = {k:?}")));
        }
        let proj: f64 = (0..r).map(|i| u[(i, j)] * a[i]).sum();
        quad += proj * proj / gap;
    }
    Ok(len * quad)
}
