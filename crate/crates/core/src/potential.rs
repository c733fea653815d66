//! Finitely supported pair potentials on ℤ³ and their momentum kernels.

use std::collections::BTreeMap;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{TorusGrid, Vec3};

/// (2π)^{-3/2}, the Fourier normalization on the torus.
pub const FOURIER_NORM: f64 = 0.063_493_635_934_240_97;

pub type Site = [i32; 3];

/// Even, nonnegative lattice potential `μ·v̂(s)` with finite support.
///
/// The stored coefficients are the shape `v̂`; the coupling `μ` multiplies all
/// of them.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePotential {
    shape: BTreeMap<Site, f64>,
    mu: f64,
}

impl LatticePotential {
    /// Builds a potential from `(site, value)` pairs. Repeated sites must agree.
    pub fn new<I>(coefficients: I, mu: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (Site, f64)>,
    {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidPotential(format!("coupling {mu} must be finite and nonnegative")));
        }
        let mut shape = BTreeMap::new();
        for (s, v) in coefficients {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidPotential(format!("coefficient {v} at {s:?} must be finite and nonnegative")));
            }
            if let Some(old) = shape.insert(s, v) {
                if old != v {
                    return Err(Error::InvalidPotential(format!("site {s:?} given twice with different values")));
                }
            }
        }
        for (s, v) in &shape {
            let m = [-s[0], -s[1], -s[2]];
            if shape.get(&m) != Some(v) {
                return Err(Error::InvalidPotential(format!("coefficients are not even: site {s:?} has no matching {m:?}")));
            }
        }
        shape.retain(|_, v| *v != 0.0);
        Ok(Self { shape, mu })
    }

    /// Contact interaction `v̂(0) = μ`.
    pub fn zero_range(mu: f64) -> Result<Self> {
        Self::new([([0, 0, 0], 1.0)], mu)
    }

    /// On-site strength `a` plus strength `b` on the six nearest neighbours.
    pub fn nearest_neighbor(a: f64, b: f64, mu: f64) -> Result<Self> {
        let mut c = vec![([0, 0, 0], a)];
        for d in 0..3 {
            for sign in [-1, 1] {
                let mut s = [0; 3];
                s[d] = sign;
                c.push((s, b));
            }
        }
        Self::new(c, mu)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.shape.iter().map(|(s, v)| (*s, *v)), mu)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn shape(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.shape.iter().map(|(s, v)| (*s, *v))
    }

    /// Support sites in a fixed order.
    pub fn sites(&self) -> Vec<Site> {
        self.shape.keys().copied().collect()
    }

    /// Scaled coefficients `μ·v̂(s)` aligned with [`Self::sites`].
    pub fn coefficients(&self) -> Vec<f64> {
        self.shape.values().map(|v| self.mu * v).collect()
    }

    /// Square roots `√(μ·v̂(s))` aligned with [`Self::sites`].
    pub fn root_coefficients(&self) -> Vec<f64> {
        self.shape.values().map(|v| (self.mu * v).sqrt()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.mu == 0.0 || self.shape.is_empty()
    }

    /// Largest |sⱼ| over the support.
    pub fn radius(&self) -> usize {
        self.shape
            .keys()
            .flat_map(|s| s.iter().map(|x| x.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
    }

    /// Rejects grids too coarse to resolve the support without aliasing.
    pub fn check_resolved(&self, grid: &TorusGrid) -> Result<()> {
        let radius = self.radius();
        if grid.n_per_axis() <= 2 * radius {
            return Err(Error::GridTooCoarse {
                n: grid.n_per_axis(),
                radius,
            });
        }
        Ok(())
    }

    fn trig_sum(&self, p: Vec3, root: bool) -> f64 {
        let sum: f64 = self
            .shape
            .iter()
            .map(|(s, v)| {
                let c = if root { (self.mu * v).sqrt() } else { self.mu * v };
                let phase = p[0] * s[0] as f64 + p[1] * s[1] as f64 + p[2] * s[2] as f64;
                c * phase.cos()
            })
            .sum();
        FOURIER_NORM * sum
    }

    /// v(p) = (2π)^{-3/2} Σₛ μv̂(s) e^{i(p,s)}.
    pub fn momentum_kernel(&self, p: Vec3) -> f64 {
        self.trig_sum(p, false)
    }

    /// (2π)^{-3/2} Σₛ √(μv̂(s)) e^{i(p,s)}; the root is taken on the coefficients.
    pub fn halfpower_kernel(&self, p: Vec3) -> f64 {
        self.trig_sum(p, true)
    }

    /// Matrix of the convolution `f ↦ (2π)^{-3/2} Σⱼ w v(pᵢ − pⱼ) f(pⱼ)` on `grid`.
    pub fn convolution_matrix(&self, grid: &TorusGrid) -> Mat<f64> {
        self.convolution(grid, false)
    }

    /// Same as [`Self::convolution_matrix`] for the half-power kernel.
    pub fn half_convolution_matrix(&self, grid: &TorusGrid) -> Mat<f64> {
        self.convolution(grid, true)
    }

    /// Values `w (2π)^{-3/2} kernel(p_d)` for every node `d`, the row generator
    /// of the circulant convolution matrices.
    pub fn convolution_table(&self, grid: &TorusGrid, root: bool) -> Vec<f64> {
        let c = grid.weight() * FOURIER_NORM;
        grid.nodes().iter().map(|&p| c * self.trig_sum(p, root)).collect()
    }

    fn convolution(&self, grid: &TorusGrid, root: bool) -> Mat<f64> {
        let table = self.convolution_table(grid, root);
        let n = grid.len();
        Mat::from_fn(n, n, |i, j| table[grid.sub_index(i, j)])
    }
}

/// Serializable description of a potential, as used in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    ZeroRange {
        #[serde(default)]
        mu: Option<f64>,
    },
    NearestNeighbor {
        a: f64,
        b: f64,
        #[serde(default)]
        mu: Option<f64>,
    },
    Table {
        coefficients: Vec<[f64; 4]>,
        #[serde(default)]
        mu: Option<f64>,
    },
}

impl PotentialSpec {
    pub fn mu(&self) -> Option<f64> {
        match self {
            PotentialSpec::ZeroRange { mu } => *mu,
            PotentialSpec::NearestNeighbor { mu, .. } => *mu,
            PotentialSpec::Table { mu, .. } => *mu,
        }
    }

    /// The potential with coupling `mu`, ignoring any coupling given here.
    pub fn build_with_mu(&self, mu: f64) -> Result<LatticePotential> {
        match self {
            PotentialSpec::ZeroRange { .. } => LatticePotential::zero_range(mu),
            PotentialSpec::NearestNeighbor { a, b, .. } => LatticePotential::nearest_neighbor(*a, *b, mu),
            PotentialSpec::Table { coefficients, .. } => {
                let mut sites = Vec::with_capacity(coefficients.len());
                for row in coefficients {
                    let mut s = [0i32; 3];
                    for d in 0..3 {
                        let x = row[d];
                        if x.fract() != 0.0 || x.abs() > 1e6 {
                            return Err(Error::InvalidPotential(format!("site component {x} is not an integer")));
                        }
                        s[d] = x as i32;
                    }
                    sites.push((s, row[3]));
                }
                LatticePotential::new(sites, mu)
            }
        }
    }

    /// The potential with its declared coupling (1 when absent).
    pub fn build(&self) -> Result<LatticePotential> {
        self.build_with_mu(self.mu().unwrap_or(1.0))
    }
}
