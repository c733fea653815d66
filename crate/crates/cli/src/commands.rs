//! One function per subcommand; each returns a summary and an optional table.

use efimov_core::model::{lambda0, slope_s_r};
use efimov_core::potential::LatticePotential;
use efimov_core::three_body::{count_n_model, count_three_body_tiny_both, discrete_channel_threshold, tau_from_dispersion};
use efimov_core::torus::{norm, twobody_band};
use efimov_core::two_body::{bound_state_energy, calibrate_resonance, ResonanceCalibration};
use efimov_core::{CountingCurve, TorusGrid};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Cell, Report, Table};

/// The potential the run works with, and μ* of its shape.
struct Coupled {
    potential: LatticePotential,
    calibration: ResonanceCalibration,
}

fn coupled(config: &RunConfig) -> Result<Coupled, CliError> {
    let shape = config.potential.build_with_mu(1.0)?;
    let grid = TorusGrid::new(config.grid_n)?;
    let calibration = calibrate_resonance(&shape, &grid)?;
    let mu = match config.potential.mu() {
        Some(mu) => mu,
        None => config.mu_factor.unwrap_or(1.0) * calibration.mu_star,
    };
    Ok(Coupled {
        potential: shape.with_mu(mu)?,
        calibration,
    })
}

fn coupling_summary(c: &Coupled) -> Result<Map<String, Value>, CliError> {
    let mut m = Map::new();
    m.insert("mu".into(), num(c.potential.mu())?);
    m.insert("mu_star".into(), num(c.calibration.mu_star)?);
    m.insert("mu_over_mu_star".into(), num(c.potential.mu() / c.calibration.mu_star)?);
    Ok(m)
}

fn vec3_cells(k: [f64; 3]) -> Vec<Cell> {
    k.iter().map(|&x| Cell::from(x)).collect()
}

pub fn cmd_lambda0() -> Result<Report, CliError> {
    let l = lambda0();
    let mut summary = Map::new();
    summary.insert("lambda0".into(), num(l.value)?);
    summary.insert("half_slope".into(), num(l.half_slope())?);
    summary.insert("full_slope".into(), num(l.full_slope())?);
    summary.insert("residual".into(), num(l.equation_residual)?);
    Ok(Report {
        command: "lambda0",
        summary,
        table: None,
    })
}

pub fn cmd_resonance(config: &RunConfig) -> Result<Report, CliError> {
    let c = coupled(config)?;
    let cal = &c.calibration;
    let mut summary = coupling_summary(&c)?;
    summary.insert("grid_n".into(), Value::from(config.grid_n));
    summary.insert("residual".into(), num(cal.residual)?);
    summary.insert("second_eigenvalue".into(), num(cal.second_eigenvalue)?);
    summary.insert("phi0".into(), num(cal.phi0)?);
    summary.insert("phi0_grid".into(), num(cal.phi0_grid)?);
    summary.insert("witness_limit".into(), num(cal.witness_limit())?);
    summary.insert("parity_defect".into(), num(cal.parity_defect)?);
    let mut table = Table::new(vec!["site_x", "site_y", "site_z", "amplitude"]);
    for (s, &a) in cal.sites.iter().zip(&cal.site_vector) {
        table.push(vec![
            Cell::from(s[0]),
            Cell::from(s[1]),
            Cell::from(s[2]),
            Cell::from(a),
        ])?;
    }
    Ok(Report {
        command: "resonance",
        summary,
        table: Some(table),
    })
}

pub fn cmd_dispersion(config: &RunConfig) -> Result<Report, CliError> {
    let c = coupled(config)?;
    let energies: Vec<Option<f64>> = config
        .k_list
        .par_iter()
        .map(|&k| bound_state_energy(&c.potential, k))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec!["k_x", "k_y", "k_z", "abs_k", "z", "e_min"]);
    for (&k, &z) in config.k_list.iter().zip(&energies) {
        let mut row = vec3_cells(k);
        row.push(Cell::from(norm(k)));
        row.push(Cell::from(z));
        row.push(Cell::from(twobody_band(k).min));
        table.push(row)?;
    }
    let mut summary = coupling_summary(&c)?;
    summary.insert("points".into(), Value::from(energies.len()));
    summary.insert("bound_states".into(), Value::from(energies.iter().flatten().count()));
    Ok(Report {
        command: "dispersion",
        summary,
        table: Some(table),
    })
}

pub fn cmd_tau(config: &RunConfig) -> Result<Report, CliError> {
    let c = coupled(config)?;
    let grid = TorusGrid::new(config.tau_grid_n)?;
    let energies: Vec<Option<f64>> = grid
        .nodes()
        .par_iter()
        .map(|&p| bound_state_energy(&c.potential, p))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec!["big_k_x", "big_k_y", "big_k_z", "tau", "branch", "band_min", "two_body_min"]);
    for &big_k in &config.big_k_list {
        let r = tau_from_dispersion(big_k, &grid, &energies)?;
        let mut row = vec3_cells(big_k);
        row.push(Cell::from(r.tau));
        row.push(Cell::from(r.branch.as_str()));
        row.push(Cell::from(r.band.min));
        row.push(Cell::from(r.two_body_min));
        table.push(row)?;
    }
    let mut summary = coupling_summary(&c)?;
    summary.insert("tau_grid_n".into(), Value::from(config.tau_grid_n));
    Ok(Report {
        command: "tau",
        summary,
        table: Some(table),
    })
}

fn slope_summary(curve: &CountingCurve, target: f64, tolerance: f64) -> Result<Map<String, Value>, CliError> {
    let rel = (curve.slope - target).abs() / target;
    let mut m = Map::new();
    m.insert("slope".into(), num(curve.slope)?);
    m.insert("slope_stderr".into(), num(curve.stderr)?);
    m.insert("intercept".into(), num(curve.intercept)?);
    m.insert("target_slope".into(), num(target)?);
    m.insert("relative_error".into(), num(rel)?);
    m.insert("slope_tolerance".into(), num(tolerance)?);
    m.insert("within_tolerance".into(), Value::from(rel <= tolerance));
    m.insert("nondecreasing".into(), Value::from(curve.is_nondecreasing()));
    Ok(m)
}

fn curve_table(first: &'static str, xs: &[f64], curve: &CountingCurve) -> Result<Table, CliError> {
    let mut table = Table::new(vec![first, "abscissa", "count", "s_wave_count"]);
    for (i, &x) in xs.iter().enumerate() {
        table.push(vec![
            Cell::from(x),
            Cell::from(curve.abscissa[i]),
            Cell::from(curve.counts[i]),
            Cell::from(curve.channel_counts[i].first().copied().unwrap_or(0)),
        ])?;
    }
    Ok(table)
}

pub fn cmd_count_model(config: &RunConfig) -> Result<Report, CliError> {
    let curve = count_n_model(&config.rho_list, config.model)?;
    let summary = slope_summary(&curve, lambda0().half_slope(), config.slope_tolerance)?;
    Ok(Report {
        command: "count-model",
        summary,
        table: Some(curve_table("rho", &config.rho_list, &curve)?),
    })
}

pub fn cmd_slope_sr(config: &RunConfig) -> Result<Report, CliError> {
    let curve = slope_s_r(&config.r_list, config.s_r)?;
    let summary = slope_summary(&curve, lambda0().full_slope(), config.slope_tolerance)?;
    Ok(Report {
        command: "slope-sr",
        summary,
        table: Some(curve_table("r", &config.r_list, &curve)?),
    })
}

pub fn cmd_count_tiny(config: &RunConfig) -> Result<Report, CliError> {
    let c = coupled(config)?;
    let grid = TorusGrid::new(config.tiny_grid_n)?;
    let jobs: Vec<([f64; 3], f64)> = config
        .big_k_list
        .iter()
        .flat_map(|&k| config.z_offsets.iter().map(move |&dz| (k, dz)))
        .collect();
    let thresholds: Vec<f64> = config
        .big_k_list
        .par_iter()
        .map(|&k| discrete_channel_threshold(&c.potential, k, &grid))
        .collect::<Result<_, _>>()?;
    let per_k = config.z_offsets.len();
    let counts: Vec<_> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, &(k, dz))| {
            let z = thresholds[i / per_k] - dz;
            count_three_body_tiny_both(&c.potential, k, z, &grid).map(|count| (z, count))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec![
        "big_k_x",
        "big_k_y",
        "big_k_z",
        "z",
        "channel_threshold",
        "n_direct",
        "n_birman_schwinger",
    ]);
    let mut mismatches = 0;
    for (i, (&(k, _), &(z, count))) in jobs.iter().zip(&counts).enumerate() {
        let mut row = vec3_cells(k);
        row.push(Cell::from(z));
        row.push(Cell::from(thresholds[i / per_k]));
        row.push(Cell::from(count.direct));
        row.push(Cell::from(count.birman_schwinger));
        table.push(row)?;
        if count.direct != count.birman_schwinger {
            mismatches += 1;
        }
    }
    let mut summary = coupling_summary(&c)?;
    summary.insert("tiny_grid_n".into(), Value::from(config.tiny_grid_n));
    summary.insert("rows".into(), Value::from(jobs.len()));
    summary.insert("mismatches".into(), Value::from(mismatches));
    Ok(Report {
        command: "count-tiny",
        summary,
        table: Some(table),
    })
}
