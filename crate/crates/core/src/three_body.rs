//! Three identical bosons at total quasimomentum K: the bottom of the essential
//! spectrum, exact eigenvalue counting on tiny grids, and the reduced radial
//! operator that carries the logarithmic growth of the count.
//!
//! On a grid the fiber H(K) acts on functions `f(p, k)` where `p` is the total
//! momentum of one pair and `k` the momentum of one of its members; the other
//! member carries `p − k` and the spectator `K − p`. With this labelling all
//! momenta stay on the grid and the particle permutations are index maps:
//!
//! * swap within the pair: `(p, k) ↦ (p, p − k)`;
//! * swap spectator and pair member: `(p, k) ↦ (K − k, K − p)`;
//! * swap spectator and partner: `(p, k) ↦ (K − p + k, k)`.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{count_above, count_below, sym_eigen, sym_eigenvalues, symmetrize, KernelOperator};
use crate::model::CountingCurve;
use crate::potential::LatticePotential;
use crate::quadrature::gauss_legendre;
use crate::special::legendre;
use crate::torus::{dispersion, threebody_band, Band, TorusGrid, Vec3};
use crate::two_body::bound_state_energy;

/// Which part of the spectrum attains τ(K).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "two-body-branch")]
    TwoBody,
    #[serde(rename = "band-bottom")]
    BandBottom,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::TwoBody => "two-body-branch",
            Branch::BandBottom => "band-bottom",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EssentialSpectrumReport {
    pub total_momentum: Vec3,
    pub tau: f64,
    pub branch: Branch,
    pub band: Band,
    /// Smallest z(p) + ε(K − p) over the evaluation grid, if any bound state exists.
    pub two_body_min: Option<f64>,
    /// Grid node attaining `two_body_min`.
    pub argmin: Option<Vec3>,
}

/// τ(K) = min(min_p [z(p) + ε(K − p)], E_min(K)) with `p` over `eval_grid`.
/// Ties go to the two-body branch.
pub fn tau(pot: &LatticePotential, big_k: Vec3, eval_grid: &TorusGrid) -> Result<EssentialSpectrumReport> {
    let energies: Vec<Option<f64>> = eval_grid
        .nodes()
        .par_iter()
        .map(|&p| bound_state_energy(pot, p))
        .collect::<Result<_>>()?;
    tau_from_dispersion(big_k, eval_grid, &energies)
}

/// τ(K) from precomputed bound-state energies z(p) on `eval_grid`, so that a
/// sweep over K reuses one dispersion table.
pub fn tau_from_dispersion(big_k: Vec3, eval_grid: &TorusGrid, energies: &[Option<f64>]) -> Result<EssentialSpectrumReport> {
    if energies.len() != eval_grid.len() {
        return Err(Error::InvalidArgument("one energy per grid node is required".into()));
    }
    let band = threebody_band(big_k);
    let mut best: Option<(f64, Vec3)> = None;
    for (&p, z) in eval_grid.nodes().iter().zip(energies) {
        if let Some(z) = z {
            let v = z + dispersion(crate::torus::sub(big_k, p));
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, p));
            }
        }
    }
    let (tau, branch) = match best {
        Some((v, _)) if v <= band.min => (v, Branch::TwoBody),
        _ => (band.min, Branch::BandBottom),
    };
    Ok(EssentialSpectrumReport {
        total_momentum: big_k,
        tau,
        branch,
        band,
        two_body_min: best.map(|b| b.0),
        argmin: best.map(|b| b.1),
    })
}

/// Index bookkeeping for the fiber H(K) on a grid.
#[derive(Debug, Clone)]
pub struct ThreeBodyFiber {
    grid: TorusGrid,
    k_index: usize,
    /// `w (2π)^{-3/2} v(p_d)` per node `d`.
    v_table: Vec<f64>,
    /// Same for the half-power kernel.
    half_table: Vec<f64>,
    diagonal: Vec<f64>,
    /// `sub[a·n + b]` is the node index of `p_a − p_b`.
    sub: Vec<usize>,
    /// `add[a·n + b]` is the node index of `p_a + p_b`.
    add: Vec<usize>,
}

impl ThreeBodyFiber {
    pub fn new(pot: &LatticePotential, big_k: Vec3, grid: &TorusGrid) -> Result<Self> {
        let k_index = grid.locate(big_k).ok_or(Error::OffGrid(big_k))?;
        let n = grid.len();
        let mut diagonal = Vec::with_capacity(n * n);
        for p in 0..n {
            let spectator = dispersion(grid.node(grid.sub_index(k_index, p)));
            for k in 0..n {
                let partner = grid.sub_index(p, k);
                diagonal.push(spectator + dispersion(grid.node(k)) + dispersion(grid.node(partner)));
            }
        }
        let sub = (0..n * n).map(|i| grid.sub_index(i / n, i % n)).collect();
        let add = (0..n * n).map(|i| grid.add_index(i / n, i % n)).collect();
        Ok(Self {
            grid: grid.clone(),
            k_index,
            sub,
            add,
            v_table: pot.convolution_table(grid, false),
            half_table: pot.convolution_table(grid, true),
            diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Values of the kinetic symbol at every `(p, k)`.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    fn n(&self) -> usize {
        self.grid.len()
    }

    fn idx(&self, p: usize, k: usize) -> usize {
        p * self.n() + k
    }

    #[inline]
    fn sub(&self, a: usize, b: usize) -> usize {
        self.sub[a * self.n() + b]
    }

    #[inline]
    fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.n() + b]
    }

    /// Swap within the pair.
    pub fn swap_pair(&self, i: usize) -> usize {
        let (p, k) = (i / self.n(), i % self.n());
        self.idx(p, self.sub(p, k))
    }

    /// Swap the spectator with the tracked pair member.
    pub fn swap_spectator_member(&self, i: usize) -> usize {
        let (p, k) = (i / self.n(), i % self.n());
        self.idx(self.sub(self.k_index, k), self.sub(self.k_index, p))
    }

    /// Swap the spectator with the untracked pair member.
    pub fn swap_spectator_partner(&self, i: usize) -> usize {
        let (p, k) = (i / self.n(), i % self.n());
        self.idx(self.add(self.sub(self.k_index, p), k), k)
    }

    /// Interaction inside the pair: `(V f)(p, k) = Σ_{k'} t(k − k') f(p, k')`.
    fn pair_interaction(&self, table: &[f64], u: &[f64], out: &mut [f64], sign: f64) {
        let n = self.n();
        for p in 0..n {
            let row = &u[p * n..(p + 1) * n];
            if row.iter().all(|x| *x == 0.0) {
                continue;
            }
            for k in 0..n {
                let mut acc = 0.0;
                for (kp, x) in row.iter().enumerate() {
                    if *x != 0.0 {
                        acc += table[self.sub(k, kp)] * x;
                    }
                }
                out[p * n + k] += sign * acc;
            }
        }
    }

    /// Applies H(K) = H₀(K) − V₁ − V₂ − V₃ to `u`.
    pub fn apply_h(&self, u: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if u.len() != n * n {
            return Err(Error::InvalidArgument(format!("vector length {} != {}", u.len(), n * n)));
        }
        let t = &self.v_table;
        let mut out: Vec<f64> = u.iter().zip(&self.diagonal).map(|(x, d)| d * x).collect();
        self.pair_interaction(t, u, &mut out, -1.0);
        // Pair of spectator and partner: tracked member k fixed, p varies.
        for p in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for pp in 0..n {
                    acc += t[self.sub(p, pp)] * u[pp * n + k];
                }
                out[p * n + k] -= acc;
            }
        }
        // Pair of spectator and tracked member: partner momentum p − k fixed.
        for p in 0..n {
            for k in 0..n {
                let partner = self.sub(p, k);
                let mut acc = 0.0;
                for kp in 0..n {
                    let pp = self.add(partner, kp);
                    acc += t[self.sub(k, kp)] * u[pp * n + kp];
                }
                out[p * n + k] -= acc;
            }
        }
        Ok(out)
    }
}

/// Matrix-free H(K) on `grid`; `K` must be a grid node.
pub fn apply_h(pot: &LatticePotential, big_k: Vec3, grid: &TorusGrid, u: &[f64]) -> Result<Vec<f64>> {
    ThreeBodyFiber::new(pot, big_k, grid)?.apply_h(u)
}

/// Orthonormal basis of a permutation-invariant subspace, one vector per orbit.
struct OrbitBasis {
    /// Orbit members of each basis vector.
    orbits: Vec<Vec<usize>>,
}

impl OrbitBasis {
    fn new(dim: usize, maps: &[&dyn Fn(usize) -> usize]) -> Self {
        let mut owner = vec![usize::MAX; dim];
        let mut orbits = Vec::new();
        for start in 0..dim {
            if owner[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut orbit = vec![start];
            owner[start] = id;
            let mut cursor = 0;
            while cursor < orbit.len() {
                let x = orbit[cursor];
                for m in maps {
                    let y = m(x);
                    if owner[y] == usize::MAX {
                        owner[y] = id;
                        orbit.push(y);
                    }
                }
                cursor += 1;
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        Self { orbits }
    }

    fn len(&self) -> usize {
        self.orbits.len()
    }

    fn embed(&self, b: usize, out: &mut [f64]) {
        let c = 1.0 / (self.orbits[b].len() as f64).sqrt();
        for &i in &self.orbits[b] {
            out[i] = c;
        }
    }

    fn project(&self, y: &[f64]) -> Vec<f64> {
        self.orbits
            .iter()
            .map(|o| o.iter().map(|&i| y[i]).sum::<f64>() / (o.len() as f64).sqrt())
            .collect()
    }
}

/// Counts from the two sides of the three-body Birman–Schwinger identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TinyCount {
    /// Eigenvalues of H(K) on symmetric functions below z.
    pub direct: usize,
    /// Eigenvalues of T(K, z) above 1.
    pub birman_schwinger: usize,
    /// Dimension of the symmetric subspace.
    pub symmetric_dim: usize,
    /// Dimension of the pair-symmetric subspace carrying T(K, z).
    pub pair_symmetric_dim: usize,
}

/// Largest grid accepted by the dense three-body routines.
pub const TINY_GRID_MAX: usize = 4;

struct TinySetup {
    fiber: ThreeBodyFiber,
    symmetric: OrbitBasis,
    pair: OrbitBasis,
}

fn tiny_setup(pot: &LatticePotential, big_k: Vec3, grid: &TorusGrid) -> Result<TinySetup> {
    if grid.n_per_axis() > TINY_GRID_MAX {
        return Err(Error::GridTooLarge {
            n: grid.n_per_axis(),
            max: TINY_GRID_MAX,
        });
    }
    pot.check_resolved(grid)?;
    let fiber = ThreeBodyFiber::new(pot, big_k, grid)?;
    let dim = fiber.dim();
    let swap = |i| fiber.swap_pair(i);
    let sm = |i| fiber.swap_spectator_member(i);
    let sp = |i| fiber.swap_spectator_partner(i);
    let symmetric = OrbitBasis::new(dim, &[&swap, &sm, &sp]);
    let pair = OrbitBasis::new(dim, &[&swap]);
    Ok(TinySetup { fiber, symmetric, pair })
}

/// Pair-symmetric basis indices grouped by fiber `p`; orbits never straddle fibers.
fn fiber_blocks(setup: &TinySetup) -> Vec<Vec<usize>> {
    let n = setup.fiber.n();
    let mut blocks = vec![Vec::new(); n];
    for (b, orbit) in setup.pair.orbits.iter().enumerate() {
        blocks[orbit[0] / n].push(b);
    }
    blocks
}

/// Per-fiber matrix of the in-pair Birman–Schwinger operator
/// `V^{1/2}(H₀ − z)^{-1}V^{1/2}` on the pair-symmetric functions of fiber `p`.
fn fiber_channel_g(setup: &TinySetup, p: usize, block: &[usize], z: f64) -> Mat<f64> {
    let f = &setup.fiber;
    let n = f.n();
    let half = &f.half_table;
    let r0: Vec<f64> = (0..n).map(|k| 1.0 / (f.diagonal[p * n + k] - z)).collect();
    let full = Mat::from_fn(n, n, |a, b| {
        (0..n)
            .map(|t| half[f.sub(a, t)] * r0[t] * half[f.sub(t, b)])
            .sum::<f64>()
    });
    let local = |b: usize| -> Vec<(usize, f64)> {
        let o = &setup.pair.orbits[b];
        let c = 1.0 / (o.len() as f64).sqrt();
        o.iter().map(|&i| (i % n, c)).collect()
    };
    let vecs: Vec<Vec<(usize, f64)>> = block.iter().map(|&b| local(b)).collect();
    let m = block.len();
    let mut out = Mat::from_fn(m, m, |i, j| {
        let mut s = 0.0;
        for &(a, ca) in &vecs[i] {
            for &(b, cb) in &vecs[j] {
                s += ca * full[(a, b)] * cb;
            }
        }
        s
    });
    symmetrize(&mut out);
    out
}

/// Lowest eigenvalue over all fibers of the single-pair channel operator
/// H₀(K) − V restricted to pair-symmetric functions.
///
/// Below this energy every fiber factor (I − G)^{-1/2} of the Birman–Schwinger
/// operator exists.
pub fn discrete_channel_threshold(pot: &LatticePotential, big_k: Vec3, grid: &TorusGrid) -> Result<f64> {
    let setup = tiny_setup(pot, big_k, grid)?;
    let f = &setup.fiber;
    let n = f.n();
    let mut lowest = f64::INFINITY;
    for block in &fiber_blocks(&setup) {
        let vecs: Vec<&Vec<usize>> = block.iter().map(|&b| &setup.pair.orbits[b]).collect();
        let m = block.len();
        let mut h = Mat::from_fn(m, m, |i, j| {
            let mut s = 0.0;
            let ci = 1.0 / (vecs[i].len() as f64).sqrt();
            let cj = 1.0 / (vecs[j].len() as f64).sqrt();
            for &a in vecs[i] {
                for &b in vecs[j] {
                    let (ka, kb) = (a % n, b % n);
                    let mut entry = -f.v_table[f.sub(ka, kb)];
                    if a == b {
                        entry += f.diagonal[a];
                    }
                    s += ci * cj * entry;
                }
            }
            s
        });
        symmetrize(&mut h);
        if let Some(&v) = sym_eigenvalues(&h)?.first() {
            lowest = lowest.min(v);
        }
    }
    Ok(lowest)
}

/// Eigenvalue counts of H(K) below `z` on a grid with n ≤ 4, directly and via
/// the Birman–Schwinger operator `T = W^{1/2} B W^{1/2}`.
///
/// `W` is the fiber-wise `(I − V^{1/2}R₀V^{1/2})^{-1}` of one pair and `B` couples
/// that pair to the other two through the particle exchanges. Returns
/// [`Error::CountMismatch`] if the two counts differ.
pub fn count_three_body_tiny(pot: &LatticePotential, big_k: Vec3, z: f64, grid: &TorusGrid) -> Result<TinyCount> {
    let c = count_three_body_tiny_both(pot, big_k, z, grid)?;
    if c.direct != c.birman_schwinger {
        return Err(Error::CountMismatch {
            direct: c.direct,
            birman_schwinger: c.birman_schwinger,
        });
    }
    Ok(c)
}

/// As [`count_three_body_tiny`] without the equality check.
pub fn count_three_body_tiny_both(pot: &LatticePotential, big_k: Vec3, z: f64, grid: &TorusGrid) -> Result<TinyCount> {
    let setup = tiny_setup(pot, big_k, grid)?;
    let f = &setup.fiber;
    let dim = f.dim();
    let n = f.n();
    let h0_min = f.diagonal.iter().copied().fold(f64::INFINITY, f64::min);
    if !(z < h0_min) {
        return Err(Error::ThresholdViolation { z, threshold: h0_min });
    }

    // Direct side: H(K) on symmetric functions.
    let s_dim = setup.symmetric.len();
    let mut h_s = Mat::<f64>::zeros(s_dim, s_dim);
    let mut e = vec![0.0; dim];
    for b in 0..s_dim {
        e.fill(0.0);
        setup.symmetric.embed(b, &mut e);
        let y = f.apply_h(&e)?;
        for (a, v) in setup.symmetric.project(&y).into_iter().enumerate() {
            h_s[(a, b)] = v;
        }
    }
    symmetrize(&mut h_s);
    let direct = count_below(&sym_eigenvalues(&h_s)?, z);

    if pot.is_zero() {
        return Ok(TinyCount {
            direct,
            birman_schwinger: 0,
            symmetric_dim: s_dim,
            pair_symmetric_dim: setup.pair.len(),
        });
    }

    // Fiber factors W^{1/2} on pair-symmetric functions.
    let blocks = fiber_blocks(&setup);
    let e_dim = setup.pair.len();
    let mut position = vec![0usize; e_dim];
    let mut order = Vec::with_capacity(e_dim);
    for block in &blocks {
        for &b in block {
            position[b] = order.len();
            order.push(b);
        }
    }
    let mut w_half = Vec::with_capacity(n);
    for (p, block) in blocks.iter().enumerate() {
        let g11 = fiber_channel_g(&setup, p, block, z);
        let (values, u) = sym_eigen(&g11)?;
        let min_gap = values.iter().map(|v| 1.0 - v).fold(f64::INFINITY, f64::min);
        if !(min_gap > 1e-12) {
            return Err(Error::AboveChannelThreshold { z, min_eigenvalue: min_gap });
        }
        let m = block.len();
        let scaled = Mat::from_fn(m, m, |i, j| u[(i, j)] / (1.0 - values[j]).sqrt());
        w_half.push(&scaled * u.transpose());
    }

    // B = V^{1/2} R₀ (U₁₂ + U₁₃) V^{1/2} on pair-symmetric functions, with basis
    // vectors ordered fiber by fiber.
    let half = &f.half_table;
    let r0: Vec<f64> = f.diagonal.iter().map(|d| 1.0 / (d - z)).collect();
    let mut b_mat = Mat::<f64>::zeros(e_dim, e_dim);
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    for (col, &b) in order.iter().enumerate() {
        x.fill(0.0);
        y.fill(0.0);
        setup.pair.embed(b, &mut y);
        f.pair_interaction(half, &y, &mut x, 1.0);
        y.fill(0.0);
        for i in 0..dim {
            if x[i] != 0.0 {
                y[f.swap_spectator_member(i)] += x[i];
                y[f.swap_spectator_partner(i)] += x[i];
            }
        }
        for i in 0..dim {
            y[i] *= r0[i];
        }
        v.fill(0.0);
        f.pair_interaction(half, &y, &mut v, 1.0);
        let proj = setup.pair.project(&v);
        for (a, val) in proj.into_iter().enumerate() {
            b_mat[(position[a], col)] = val;
        }
    }
    symmetrize(&mut b_mat);

    // T = W^{1/2} B W^{1/2}, applied block by block.
    let mut starts = Vec::with_capacity(n + 1);
    let mut acc = 0;
    for block in &blocks {
        starts.push(acc);
        acc += block.len();
    }
    starts.push(acc);
    let mut left = Mat::<f64>::zeros(e_dim, e_dim);
    for p in 0..n {
        let (s, m) = (starts[p], starts[p + 1] - starts[p]);
        if m == 0 {
            continue;
        }
        let rows = &w_half[p] * b_mat.as_ref().subrows(s, m);
        left.as_mut().subrows_mut(s, m).copy_from(&rows);
    }
    let mut t = Mat::<f64>::zeros(e_dim, e_dim);
    for p in 0..n {
        let (s, m) = (starts[p], starts[p + 1] - starts[p]);
        if m == 0 {
            continue;
        }
        let cols = left.as_ref().subcols(s, m) * &w_half[p];
        t.as_mut().subcols_mut(s, m).copy_from(&cols);
    }
    symmetrize(&mut t);
    let birman_schwinger = count_above(&sym_eigenvalues(&t)?, 1.0);
    Ok(TinyCount {
        direct,
        birman_schwinger,
        symmetric_dim: s_dim,
        pair_symmetric_dim: e_dim,
    })
}

/// Discretization parameters for the reduced radial operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T1Params {
    /// Outer momentum cutoff δ.
    pub delta: f64,
    /// Highest partial wave built initially; extended while the top channel counts.
    pub l_max: usize,
    /// Radial nodes per decade of momentum.
    pub nodes_per_decade: usize,
    /// Gauss–Legendre nodes for the angular reduction.
    pub angular_n: usize,
    /// Inner radial cutoff as a multiple of √ρ.
    pub inner_factor: f64,
}

impl Default for T1Params {
    fn default() -> Self {
        Self {
            delta: 1.0,
            l_max: 6,
            nodes_per_decade: 20,
            angular_n: 24,
            inner_factor: 0.3,
        }
    }
}

/// Largest partial wave the automatic extension will reach.
pub const L_CAP: usize = 40;

/// The reduced radial operator at a given ρ = K²/6 + |z|, split into partial waves.
#[derive(Debug, Clone)]
pub struct ModelOperatorT1 {
    pub rho: f64,
    pub params: T1Params,
    /// Radial nodes (geometric midpoints).
    pub radii: Vec<f64>,
    /// Step in log-momentum.
    pub log_step: f64,
    /// Channel matrices for l = 0..channels.len().
    pub channels: Vec<KernelOperator>,
}

/// Partial-wave kernel 2π ∫ P_l(t) (1/π²) [(¾a² + ρ)(¾b² + ρ)]^{-1/4} / (a² + abt + b² + ρ) dt.
pub fn t1_channel_kernel(l: usize, a: f64, b: f64, rho: f64, rule: &[(f64, f64)]) -> f64 {
    let weight = ((0.75 * a * a + rho) * (0.75 * b * b + rho)).powf(-0.25) / (std::f64::consts::PI * std::f64::consts::PI);
    let base = a * a + b * b + rho;
    let ab = a * b;
    let s: f64 = rule
        .iter()
        .map(|&(t, w)| w * legendre(l, t) / (base + ab * t))
        .sum();
    2.0 * std::f64::consts::PI * weight * s
}

impl ModelOperatorT1 {
    pub fn build(rho: f64, params: T1Params) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
        }
        if !(params.delta > 0.0) || params.nodes_per_decade == 0 || params.angular_n == 0 {
            return Err(Error::InvalidArgument("delta, nodes_per_decade and angular_n must be positive".into()));
        }
        let lo = (params.inner_factor * rho.sqrt()).ln();
        let hi = params.delta.ln();
        let (radii, log_step) = if hi > lo {
            let decades = (hi - lo) / std::f64::consts::LN_10;
            let count = ((decades * params.nodes_per_decade as f64).ceil() as usize).max(1);
            let h = (hi - lo) / count as f64;
            ((0..count).map(|i| (lo + (i as f64 + 0.5) * h).exp()).collect(), h)
        } else {
            (Vec::new(), 0.0)
        };
        let mut op = Self {
            rho,
            params,
            radii,
            log_step,
            channels: Vec::new(),
        };
        for l in 0..=params.l_max {
            op.push_channel(l)?;
        }
        Ok(op)
    }

    fn push_channel(&mut self, l: usize) -> Result<()> {
        let rule = gauss_legendre(self.params.angular_n)?;
        let r = &self.radii;
        let n = r.len();
        let h = self.log_step;
        let mut m = Mat::from_fn(n, n, |i, j| {
            if j > i {
                return 0.0;
            }
            h * (r[i] * r[j]).powf(1.5) * t1_channel_kernel(l, r[i], r[j], self.rho, &rule)
        });
        for j in 0..n {
            for i in 0..j {
                m[(i, j)] = m[(j, i)];
            }
        }
        self.channels
            .push(KernelOperator::new(format!("T1 channel l={l}, rho={:e}", self.rho), m));
        Ok(())
    }

    /// n(1, ·) per channel, extending the partial-wave range while the highest
    /// channel still contributes.
    pub fn channel_counts(&mut self) -> Result<Vec<usize>> {
        let mut counts: Vec<usize> = self
            .channels
            .iter()
            .map(count_channel)
            .collect::<Result<_>>()?;
        while counts.last().copied().unwrap_or(0) > 0 && self.channels.len() <= L_CAP {
            let l = self.channels.len();
            self.push_channel(l)?;
            counts.push(count_channel(&self.channels[l])?);
        }
        Ok(counts)
    }

    /// Σ_l (2l + 1)·n(1, channel_l).
    pub fn count(&mut self) -> Result<usize> {
        Ok(weighted_total(&self.channel_counts()?))
    }
}

/// Σ_l (2l + 1)·counts[l].
pub fn weighted_total(counts: &[usize]) -> usize {
    counts.iter().enumerate().map(|(l, c)| (2 * l + 1) * c).sum()
}

/// n(1, M), skipping the eigensolver when the Gershgorin bound already stays ≤ 1.
pub fn count_channel(op: &KernelOperator) -> Result<usize> {
    if gershgorin_bound(&op.matrix) <= 1.0 {
        return Ok(0);
    }
    op.count_above(1.0)
}

/// Upper bound on the spectrum: max row sum of absolute values.
pub fn gershgorin_bound(m: &Mat<f64>) -> f64 {
    let mut best = 0.0f64;
    for i in 0..m.nrows() {
        let mut s = 0.0;
        for j in 0..m.ncols() {
            s += m[(i, j)].abs();
        }
        best = best.max(s);
    }
    best
}

/// Builds the reduced operator at `rho`.
pub fn build_t1(rho: f64, params: T1Params) -> Result<ModelOperatorT1> {
    ModelOperatorT1::build(rho, params)
}

/// Counts of the reduced operator over a strictly decreasing ρ sequence, with a
/// least-squares fit of count against |log ρ|.
pub fn count_n_model(rhos: &[f64], params: T1Params) -> Result<CountingCurve> {
    if rhos.len() < 2 {
        return Err(Error::InvalidArgument("at least two rho values are required".into()));
    }
    if rhos.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("rho values must be strictly decreasing".into()));
    }
    let per_rho: Vec<Vec<usize>> = rhos
        .par_iter()
        .map(|&rho| build_t1(rho, params)?.channel_counts())
        .collect::<Result<_>>()?;
    let abscissa: Vec<f64> = rhos.iter().map(|r| r.ln().abs()).collect();
    CountingCurve::from_channel_counts(abscissa, per_rho)
}
