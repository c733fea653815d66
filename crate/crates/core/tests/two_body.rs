mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use efimov_core::greens::lattice_green;
use efimov_core::linalg::{count_below, sym_eigenvalues};
use efimov_core::potential::LatticePotential;
use efimov_core::torus::{twobody_band, twobody_symbol};
use efimov_core::two_body::{
    bound_state_energy, build_g, build_h, calibrate_resonance, count_two_body, count_two_body_both,
    expansion_check_g_energy, resonance_witness_w, site_g,
};
use efimov_core::TorusGrid;
use faer::Mat;
use proptest::prelude::*;

fn mu_star() -> f64 {
    2.0 / common::watson_closed_form()
}

/// h(k) on the grid assembled from the site coefficients alone.
fn dense_h(shape: &BTreeMap<[i32; 3], f64>, mu: f64, k: [f64; 3], grid: &TorusGrid) -> Mat<f64> {
    let nodes = grid.nodes();
    let w = (2.0 * PI / grid.n_per_axis() as f64).powi(3);
    Mat::from_fn(nodes.len(), nodes.len(), |i, j| {
        let mut v = 0.0;
        for (s, c) in shape {
            let phase: f64 = (0..3).map(|d| (nodes[i][d] - nodes[j][d]) * s[d] as f64).sum();
            v += mu * c * phase.cos();
        }
        let kinetic = if i == j { twobody_symbol(k, nodes[i]) } else { 0.0 };
        kinetic - w * v / (2.0 * PI).powi(3)
    })
}

fn nn_shape(a: f64, b: f64) -> BTreeMap<[i32; 3], f64> {
    let mut shape = BTreeMap::from([([0, 0, 0], a)]);
    for d in 0..3 {
        let mut s = [0; 3];
        s[d] = 1;
        shape.insert(s, b);
        s[d] = -1;
        shape.insert(s, b);
    }
    shape
}

#[test]
fn direct_count_matches_independent_assembly() {
    let grid = TorusGrid::new(4).unwrap();
    let shape = nn_shape(1.0, 0.4);
    for (mu, k) in [(8.0, [0.3, 0.0, -1.0]), (20.0, [2.0, 2.0, 2.0]), (3.0, [0.0; 3])] {
        let pot = LatticePotential::new(shape.clone(), mu).unwrap();
        let z = twobody_band(k).min - 0.05;
        let oracle = count_below(&sym_eigenvalues(&dense_h(&shape, mu, k, &grid)).unwrap(), z);
        let count = count_two_body(&pot, k, z, &grid).unwrap();
        assert_eq!(count, oracle, "mu = {mu}, k = {k:?}");
        let h = build_h(&pot, k, &grid).unwrap();
        assert!(h.symmetry_defect() < 1e-14);
    }
}

#[test]
fn grid_and_site_routes_agree_far_below_the_band() {
    let pot = LatticePotential::nearest_neighbor(1.0, 0.3, 6.0).unwrap();
    let grid = TorusGrid::new(16).unwrap();
    let k = [0.4, -0.8, 1.3];
    let z = -6.0;
    let by_grid = build_g(&pot, k, z, &grid).unwrap();
    let by_sites = site_g(&pot, k, z).unwrap().sample(&grid);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            worst = worst.max((by_grid.matrix[(i, j)] - by_sites.matrix[(i, j)]).abs());
            scale = scale.max(by_sites.matrix[(i, j)].abs());
        }
    }
    assert!(worst < 1e-8 * scale, "{worst} vs {scale}");
}

#[test]
fn lattice_green_matches_trapezoid_oracle() {
    for (k, z) in [([0.0; 3], -0.5), ([0.7, -0.2, 1.9], 0.0), ([PI, 0.3, 0.0], -2.0)] {
        let z = f64::min(z, twobody_band(k).min - 0.1);
        let value = lattice_green(k, z, &[[0, 0, 0]]).unwrap()[0];
        let oracle = common::resolvent_trace(k, z);
        assert!((value - oracle).abs() < 1e-11 * oracle, "k = {k:?}: {value} vs {oracle}");
    }
}

#[test]
fn calibration_scales_inversely_with_the_shape() {
    let grid = TorusGrid::new(6).unwrap();
    let shape = LatticePotential::nearest_neighbor(1.0, 0.25, 1.0).unwrap();
    let doubled = LatticePotential::new(shape.shape().map(|(s, c)| (s, 2.0 * c)), 1.0).unwrap();
    let a = calibrate_resonance(&shape, &grid).unwrap();
    let b = calibrate_resonance(&doubled, &grid).unwrap();
    assert!((b.mu_star - a.mu_star / 2.0).abs() < 1e-10 * a.mu_star);
    assert!(a.residual < 1e-10);
    assert!(a.second_eigenvalue < 1.0);
    assert!(a.parity_defect < 1e-12);
    assert!((a.phi0 - a.phi0_grid).abs() < 1e-8 * a.phi0.abs(), "{} vs {}", a.phi0, a.phi0_grid);
    let zero_range = calibrate_resonance(&LatticePotential::zero_range(7.0).unwrap(), &grid).unwrap();
    assert!((zero_range.mu_star - mu_star()).abs() < 1e-10);
}

#[test]
fn calibration_rejects_zero_shape() {
    let grid = TorusGrid::new(4).unwrap();
    let empty = LatticePotential::new([([0, 0, 0], 0.0)], 1.0).unwrap();
    assert!(calibrate_resonance(&empty, &grid).is_err());
}

#[test]
fn bound_states_depend_on_the_coupling() {
    let sub = LatticePotential::zero_range(0.8 * mu_star()).unwrap();
    assert_eq!(bound_state_energy(&sub, [0.0; 3]).unwrap(), None);
    let k = [2.5, 2.5, 2.5];
    let z_sub = bound_state_energy(&sub, k).unwrap().expect("large k binds below the flattened band");
    assert!(z_sub < twobody_band(k).min);
    let strong = LatticePotential::zero_range(1.5 * mu_star()).unwrap();
    let z0 = bound_state_energy(&strong, [0.0; 3]).unwrap().unwrap();
    assert!(z0 < 0.0);
    assert!((z0 - common::contact_bound_state(1.5 * mu_star(), [0.0; 3])).abs() < 1e-9);
    let z_strong = bound_state_energy(&strong, k).unwrap().unwrap();
    assert!(z_strong < z_sub);
}

#[test]
fn dispersion_increases_along_an_axis_at_resonance() {
    let pot = LatticePotential::zero_range(mu_star()).unwrap();
    let mut last = -1.0;
    for i in 0..8 {
        let k = [0.4 * i as f64, 0.0, 0.0];
        let z = bound_state_energy(&pot, k).unwrap().unwrap();
        assert!(z > last, "z not increasing at {k:?}");
        assert!(z <= twobody_band(k).min);
        last = z;
    }
}

#[test]
fn witness_approaches_its_limit() {
    let grid = TorusGrid::new(6).unwrap();
    let cal = calibrate_resonance(&LatticePotential::nearest_neighbor(1.0, 0.3, 1.0).unwrap(), &grid).unwrap();
    let pot = LatticePotential::nearest_neighbor(1.0, 0.3, cal.mu_star).unwrap();
    let limit = cal.witness_limit();
    let errors: Vec<f64> = [4e-2, 2e-2, 1e-2, 5e-3]
        .iter()
        .map(|&t| (resonance_witness_w(&pot, [t, 0.0, 0.0]).unwrap() / limit - 1.0).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[3] < 0.02, "{errors:?}");
    let sub = pot.with_mu(0.5 * cal.mu_star).unwrap();
    assert!(resonance_witness_w(&sub, [1e-4, 0.0, 0.0]).unwrap() < 1e-3);
}

#[test]
fn energy_expansion_is_first_order() {
    let grid = TorusGrid::new(6).unwrap();
    let pot = LatticePotential::zero_range(mu_star()).unwrap();
    let report = expansion_check_g_energy(&pot, &grid, &[1e-2, 5e-3, 2.5e-3]).unwrap();
    for r in &report.ratios {
        assert!((0.4..=0.6).contains(r), "{report:?}");
    }
}

#[test]
fn threshold_violations_are_errors() {
    let pot = LatticePotential::zero_range(1.0).unwrap();
    let grid = TorusGrid::new(4).unwrap();
    let k = [0.5, 0.0, 0.0];
    assert!(build_g(&pot, k, twobody_band(k).min + 0.1, &grid).is_err());
    assert!(site_g(&pot, k, twobody_band(k).min + 0.1).is_err());
}

#[test]
fn h_at_resonance_is_nonnegative_up_to_discretization() {
    let pot = LatticePotential::zero_range(mu_star()).unwrap();
    for k in [[0.5, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, -1.0, 0.5]] {
        let negative: Vec<f64> = [4, 6, 8, 10]
            .iter()
            .map(|&n| {
                let lowest = build_h(&pot, k, &TorusGrid::new(n).unwrap()).unwrap().eigenvalues().unwrap()[0];
                (-lowest).max(0.0)
            })
            .collect();
        assert!(negative.windows(2).all(|w| w[1] <= w[0]), "k = {k:?}: {negative:?}");
        assert_eq!(negative[3], 0.0, "k = {k:?}: {negative:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_is_invariant_under_axis_permutations(mu in 0.0f64..15.0, k in [-PI..PI, -PI..PI, -PI..PI]) {
        let pot = LatticePotential::nearest_neighbor(1.0, 0.5, mu).unwrap();
        let grid = TorusGrid::new(4).unwrap();
        let base = build_h(&pot, k, &grid).unwrap().eigenvalues().unwrap();
        let permuted = build_h(&pot, [k[2], k[0], k[1]], &grid).unwrap().eigenvalues().unwrap();
        for (x, y) in base.iter().zip(&permuted) {
            prop_assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn birman_schwinger_counts_agree(
        a in 0.0f64..2.0, b in 0.0f64..1.0, mu in 0.0f64..30.0,
        k in [-PI..PI, -PI..PI, -PI..PI], dz in 1e-3f64..3.0,
    ) {
        let pot = LatticePotential::nearest_neighbor(a, b, mu).unwrap();
        let grid = TorusGrid::new(4).unwrap();
        let z = twobody_band(k).min - dz;
        let c = count_two_body_both(&pot, k, z, &grid).unwrap();
        prop_assert_eq!(c.direct, c.birman_schwinger);
    }

    #[test]
    fn g_grows_with_energy_and_coupling(mu in 0.5f64..10.0, k in [-PI..PI, -PI..PI, -PI..PI], dz in 0.05f64..2.0) {
        let pot = LatticePotential::nearest_neighbor(1.0, 0.2, mu).unwrap();
        let z = twobody_band(k).min - dz;
        let low = site_g(&pot, k, z - 0.5).unwrap().top_eigenvalue().unwrap();
        let high = site_g(&pot, k, z).unwrap().top_eigenvalue().unwrap();
        prop_assert!(high > low);
        let stronger = site_g(&pot.with_mu(2.0 * mu).unwrap(), k, z).unwrap().top_eigenvalue().unwrap();
        prop_assert!((stronger - 2.0 * high).abs() < 1e-10 * stronger);
    }

    #[test]
    fn spectrum_is_even_in_quasimomentum(mu in 0.0f64..15.0, k in [-PI..PI, -PI..PI, -PI..PI]) {
        let pot = LatticePotential::nearest_neighbor(1.0, 0.5, mu).unwrap();
        let grid = TorusGrid::new(4).unwrap();
        let plus = build_h(&pot, k, &grid).unwrap().eigenvalues().unwrap();
        let minus = build_h(&pot, k.map(|x| -x), &grid).unwrap().eigenvalues().unwrap();
        for (x, y) in plus.iter().zip(&minus) {
            prop_assert!((x - y).abs() < 1e-11);
        }
    }
}
