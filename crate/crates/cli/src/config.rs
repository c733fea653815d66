//! Run configuration: JSON in, validated, hashed.

use std::path::Path;

use efimov_core::model::SrParams;
use efimov_core::potential::PotentialSpec;
use efimov_core::three_body::{T1Params, TINY_GRID_MAX};
use efimov_core::Vec3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Largest grid for the resonance calibration.
pub const MAX_GRID_N: usize = 32;
/// Largest grid over which τ(K) minimizes; every node needs a bound-state solve.
pub const MAX_TAU_GRID_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    /// Coupling as a multiple of the resonant μ*; used when the potential has no `mu`.
    pub mu_factor: Option<f64>,
    /// Grid for the resonance calibration.
    pub grid_n: usize,
    /// Grid of pair momenta over which τ(K) is minimized.
    pub tau_grid_n: usize,
    /// Grid for the dense three-body counts.
    pub tiny_grid_n: usize,
    pub k_list: Vec<Vec3>,
    pub big_k_list: Vec<Vec3>,
    /// Distances below the discrete channel threshold at which to count.
    pub z_offsets: Vec<f64>,
    /// Decreasing values of ρ.
    pub rho_list: Vec<f64>,
    /// Increasing values of r.
    pub r_list: Vec<f64>,
    pub model: T1Params,
    pub s_r: SrParams,
    /// Relative tolerance for reporting whether a fitted slope meets its target.
    pub slope_tolerance: f64,
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const PI: f64 = std::f64::consts::PI;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::ZeroRange { mu: None },
            mu_factor: None,
            grid_n: 8,
            tau_grid_n: 8,
            tiny_grid_n: 4,
            k_list: vec![[0.0; 3], [0.5, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]],
            big_k_list: vec![[0.0; 3], [HALF_PI, 0.0, 0.0], [PI, HALF_PI, 0.0], [PI, PI, PI]],
            z_offsets: vec![0.5, 2.0],
            rho_list: (6..=30).map(|e| 10f64.powi(-e)).collect(),
            r_list: vec![50.0, 100.0, 150.0, 200.0],
            model: T1Params::default(),
            s_r: SrParams::default(),
            slope_tolerance: 0.1,
        }
    }
}

fn invalid(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {why}"))
}

fn nonempty<T>(field: &str, list: &[T]) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(invalid(field, "list must not be empty"));
    }
    Ok(())
}

fn finite_all(field: &str, values: impl IntoIterator<Item = f64>) -> Result<(), CliError> {
    for v in values {
        if !v.is_finite() {
            return Err(invalid(field, format!("non-finite value {v}")));
        }
    }
    Ok(())
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(field, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

fn in_range(field: &str, v: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if v < lo || v > hi {
        return Err(invalid(field, format!("must lie in {lo}..={hi}, got {v}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.potential.mu().is_some() && self.mu_factor.is_some() {
            return Err(invalid("mu_factor", "conflicts with potential.mu; give one of them"));
        }
        if let Some(mu) = self.potential.mu() {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(invalid("potential.mu", format!("must be nonnegative and finite, got {mu}")));
            }
        }
        if let Some(f) = self.mu_factor {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(invalid("mu_factor", format!("must be nonnegative and finite, got {f}")));
            }
        }
        self.potential
            .build_with_mu(1.0)
            .map_err(|e| invalid("potential", e))?;

        in_range("grid_n", self.grid_n, 1, MAX_GRID_N)?;
        in_range("tau_grid_n", self.tau_grid_n, 1, MAX_TAU_GRID_N)?;
        in_range("tiny_grid_n", self.tiny_grid_n, 1, TINY_GRID_MAX)?;

        nonempty("k_list", &self.k_list)?;
        finite_all("k_list", self.k_list.iter().flatten().copied())?;
        nonempty("big_k_list", &self.big_k_list)?;
        finite_all("big_k_list", self.big_k_list.iter().flatten().copied())?;
        nonempty("z_offsets", &self.z_offsets)?;
        for &dz in &self.z_offsets {
            positive("z_offsets", dz)?;
        }
        nonempty("rho_list", &self.rho_list)?;
        for &rho in &self.rho_list {
            positive("rho_list", rho)?;
        }
        if self.rho_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("rho_list", "must be strictly decreasing"));
        }
        nonempty("r_list", &self.r_list)?;
        for &r in &self.r_list {
            positive("r_list", r)?;
        }
        if self.r_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("r_list", "must be strictly increasing"));
        }

        positive("model.delta", self.model.delta)?;
        positive("model.inner_factor", self.model.inner_factor)?;
        in_range("model.nodes_per_decade", self.model.nodes_per_decade, 1, 10_000)?;
        in_range("model.angular_n", self.model.angular_n, 1, 1024)?;
        in_range("model.l_max", self.model.l_max, 0, efimov_core::three_body::L_CAP)?;
        positive("s_r.x_step", self.s_r.x_step)?;
        in_range("s_r.angular_n", self.s_r.angular_n, 1, 1024)?;
        in_range("s_r.l_max", self.s_r.l_max, 0, 64)?;
        positive("slope_tolerance", self.slope_tolerance)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, defaults included.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
