//! The torus (−π,π]³: uniform quadrature grids and the lattice dispersion
//! functions that every operator is built from.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Tolerance used when deciding whether a point coincides with a grid node.
const NODE_TOL: f64 = 1e-9;

/// Reduces an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

pub fn wrap(k: Vec3) -> Vec3 {
    k.map(wrap_angle)
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(c: f64, a: Vec3) -> Vec3 {
    a.map(|x| c * x)
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// `1 − cos x`, evaluated without cancellation for small `x`.
#[inline]
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Energy and quasimomentum of a point in the spectral plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub energy: f64,
    pub quasimomentum: Vec3,
}

impl SpectralPoint {
    pub fn new(energy: f64, quasimomentum: Vec3) -> Self {
        Self {
            energy,
            quasimomentum: wrap(quasimomentum),
        }
    }
}

/// Uniform tensor grid on (−π,π]³ with equal trapezoidal weights.
///
/// Node `i` has integer coordinates `(m0, m1, m2)` with `i = (m0·n + m1)·n + m2`
/// and sits at `2π·m/n` reduced into (−π,π]. Integer arithmetic on the
/// coordinates is arithmetic on the torus, so sums and differences of nodes
/// stay on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    n: usize,
    nodes: Vec<Vec3>,
    weight: f64,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("at least one node per axis is required".into()));
        }
        if n > 256 {
            return Err(Error::InvalidGrid(format!("{n} nodes per axis is beyond the supported range")));
        }
        let axis: Vec<f64> = (0..n).map(|m| Self::axis_value(n, m)).collect();
        let mut nodes = Vec::with_capacity(n * n * n);
        for a in &axis {
            for b in &axis {
                for c in &axis {
                    nodes.push([*a, *b, *c]);
                }
            }
        }
        let h = 2.0 * PI / n as f64;
        Ok(Self {
            n,
            nodes,
            weight: h * h * h,
        })
    }

    fn axis_value(n: usize, m: usize) -> f64 {
        let m = m as i64;
        let n = n as i64;
        let centered = if 2 * m > n { m - n } else { m };
        2.0 * PI * centered as f64 / n as f64
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Vec3 {
        self.nodes[i]
    }

    /// Quadrature weight of every node, (2π/n)³.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        let n = self.n;
        [i / (n * n), (i / n) % n, i % n]
    }

    pub fn index(&self, m: [i64; 3]) -> usize {
        let n = self.n as i64;
        let r = m.map(|x| x.rem_euclid(n) as usize);
        (r[0] * self.n + r[1]) * self.n + r[2]
    }

    /// Index of the node `p_i + p_j`.
    pub fn add_index(&self, i: usize, j: usize) -> usize {
        let a = self.coords(i);
        let b = self.coords(j);
        self.index([0, 1, 2].map(|d| a[d] as i64 + b[d] as i64))
    }

    /// Index of the node `p_i − p_j`.
    pub fn sub_index(&self, i: usize, j: usize) -> usize {
        let a = self.coords(i);
        let b = self.coords(j);
        self.index([0, 1, 2].map(|d| a[d] as i64 - b[d] as i64))
    }

    pub fn neg_index(&self, i: usize) -> usize {
        let a = self.coords(i);
        self.index(a.map(|x| -(x as i64)))
    }

    /// Index of the node equal to `k` modulo 2π, if there is one.
    pub fn locate(&self, k: Vec3) -> Option<usize> {
        let h = 2.0 * PI / self.n as f64;
        let mut m = [0i64; 3];
        for d in 0..3 {
            let x = k[d] / h;
            let r = x.round();
            if (x - r).abs() > NODE_TOL {
                return None;
            }
            m[d] = r as i64;
        }
        Some(self.index(m))
    }

    /// Trapezoidal integral of `f` over the torus.
    pub fn integrate<F: Fn(Vec3) -> f64>(&self, f: F) -> f64 {
        self.weight * self.nodes.iter().map(|&p| f(p)).sum::<f64>()
    }
}

/// Lattice dispersion ε(k) = Σⱼ(1 − cos kⱼ).
pub fn dispersion(k: Vec3) -> f64 {
    k.iter().map(|&x| one_minus_cos(x)).sum()
}

/// Symbol of the relative kinetic energy at pair quasimomentum `k`:
/// ε(k/2 − q) + ε(k/2 + q).
pub fn twobody_symbol(k: Vec3, q: Vec3) -> f64 {
    let half = scale(0.5, k);
    dispersion(sub(half, q)) + dispersion(add(half, q))
}

/// Bottom and top of the two-body kinetic band at quasimomentum `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

/// Closed-form range of `q ↦ twobody_symbol(k, q)`; the minimum sits at `q = 0`.
pub fn twobody_band(k: Vec3) -> Band {
    let mut min = 0.0;
    let mut max = 0.0;
    for x in wrap(k) {
        // For |x| ≤ π, cos(x/2) ≥ 0 and 1 − cos(x/2) = 2 sin²(x/4).
        min += 2.0 * one_minus_cos(0.5 * x);
        max += 2.0 * (1.0 + (0.5 * x).cos());
    }
    Band { min, max }
}

/// Coefficients |cos(kⱼ/2)| of the cosine terms in the two-body symbol, after
/// reducing `k` into the torus.
pub fn twobody_hopping(k: Vec3) -> Vec3 {
    wrap(k).map(|x| (0.5 * x).cos().abs())
}

/// Three-body kinetic symbol ε(K − p) + ε(p/2 − q) + ε(p/2 + q), where `p` is the
/// momentum of the pair and `q` the relative momentum inside it.
pub fn threebody_symbol(big_k: Vec3, p: Vec3, q: Vec3) -> f64 {
    dispersion(sub(big_k, p)) + twobody_symbol(p, q)
}

/// Closed-form range of `(p, q) ↦ threebody_symbol(K, p, q)`.
///
/// Per axis the three momenta `K − p`, `p/2 − q`, `p/2 + q` sum to `K` and are
/// otherwise free, so the extremes split equally: the minimum puts `K/3` on each,
/// the maximum places each one as close to π as the constraint allows.
pub fn threebody_band(big_k: Vec3) -> Band {
    let mut min = 0.0;
    let mut max = 0.0;
    for x in wrap(big_k) {
        min += 3.0 * one_minus_cos(x / 3.0);
        max += 3.0 * (1.0 + ((PI - x.abs()) / 3.0).cos());
    }
    Band { min, max }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion([0.0; 3]), 0.0);
        assert!((dispersion([PI; 3]) - 6.0).abs() < 1e-15);
        assert!((dispersion([PI / 2.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn twobody_symbol_values() {
        assert_eq!(twobody_symbol([0.0; 3], [0.0; 3]), 0.0);
        assert!((twobody_symbol([0.0; 3], [PI; 3]) - 12.0).abs() < 1e-14);
        let closed = 2.0 * (1.0 - (PI / 2.0).cos());
        assert!((twobody_symbol([PI, 0.0, 0.0], [0.0; 3]) - closed).abs() < 1e-14);
    }

    #[test]
    fn band_at_origin_and_corner() {
        let b = twobody_band([0.0; 3]);
        assert_eq!(b.min, 0.0);
        assert!((b.max - 12.0).abs() < 1e-14);
        let c = twobody_band([PI; 3]);
        assert!((c.min - 6.0).abs() < 1e-14);
        assert!((c.max - 6.0).abs() < 1e-14);
    }

    #[test]
    fn small_k_band_is_quadratic() {
        let k = [6e-4, -5e-4, 6e-4];
        let k2 = dot(k, k);
        assert!(norm(k) < 1e-3 + 1e-12);
        let rel = (twobody_band(k).min - k2 / 4.0).abs() / (k2 / 4.0);
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn threebody_values() {
        assert_eq!(threebody_symbol([0.0; 3], [0.0; 3], [0.0; 3]), 0.0);
        let v = threebody_symbol([PI, 0.0, 0.0], [0.0; 3], [0.0; 3]);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_basics() {
        let g = TorusGrid::new(5).unwrap();
        assert_eq!(g.len(), 125);
        assert_eq!(g.locate([0.0; 3]), Some(0));
        let total = g.integrate(|_| 1.0);
        assert!((total - (2.0 * PI).powi(3)).abs() < 1e-10);
        for i in 0..g.len() {
            let j = g.neg_index(i);
            let s = add(g.node(i), g.node(j));
            assert!(s.iter().all(|x| wrap_angle(*x).abs() < 1e-12));
            assert!(g.node(i).iter().all(|&x| x > -PI && x <= PI));
        }
        assert!(TorusGrid::new(0).is_err());
    }

    #[test]
    fn even_grid_contains_pi() {
        let g = TorusGrid::new(4).unwrap();
        assert!(g.locate([PI, PI, PI]).is_some());
        assert!(g.nodes().iter().any(|p| p[0] == PI));
        assert!(g.locate([0.3, 0.0, 0.0]).is_none());
    }

    #[test]
    fn index_arithmetic_matches_coordinates() {
        let g = TorusGrid::new(6).unwrap();
        for &(i, j) in &[(3usize, 100usize), (17, 215), (0, 42)] {
            let s = g.node(g.add_index(i, j));
            let d = g.node(g.sub_index(i, j));
            for ax in 0..3 {
                assert!(wrap_angle(s[ax] - g.node(i)[ax] - g.node(j)[ax]).abs() < 1e-12);
                assert!(wrap_angle(d[ax] - g.node(i)[ax] + g.node(j)[ax]).abs() < 1e-12);
            }
        }
    }
}
