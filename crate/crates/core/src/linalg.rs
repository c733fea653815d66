//! Dense symmetric eigenproblems and eigenvalue counting.

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Conditioning(format!("eigenvalue iteration failed: {e:?}")))
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors as columns.
pub fn sym_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Conditioning(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Number of entries strictly above `threshold`.
pub fn count_above(values: &[f64], threshold: f64) -> usize {
    values.iter().filter(|&&x| x > threshold).count()
}

/// Number of entries strictly below `threshold`.
pub fn count_below(values: &[f64], threshold: f64) -> usize {
    values.iter().filter(|&&x| x < threshold).count()
}

/// Largest |M − Mᵀ| entry.
pub fn symmetry_defect(m: &Mat<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Replaces `m` by (M + Mᵀ)/2.
pub fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

/// Applies `f` to the spectrum of a symmetric matrix: U f(Λ) Uᵀ.
pub fn sym_function<F: Fn(f64) -> f64>(m: &Mat<f64>, f: F) -> Result<Mat<f64>> {
    let (values, u) = sym_eigen(m)?;
    let n = m.nrows();
    let fu = Mat::from_fn(n, n, |i, j| u[(i, j)] * f(values[j]));
    Ok(&fu * u.transpose())
}

/// Eigenvalues of a symmetric centrosymmetric matrix (`M = J M J` with `J` the
/// exchange matrix), computed from its two half-size blocks.
pub fn centrosymmetric_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let h = n / 2;
    let odd = n % 2 == 1;
    // Even sector: basis (e_i + e_{n-1-i})/√2, plus the centre node when n is odd.
    let even_dim = h + usize::from(odd);
    let even = Mat::from_fn(even_dim, even_dim, |i, j| {
        if odd && (i == h || j == h) {
            if i == h && j == h {
                m[(h, h)]
            } else {
                let k = if i == h { j } else { i };
                std::f64::consts::SQRT_2 * m[(h, k)]
            }
        } else {
            m[(i, j)] + m[(i, n - 1 - j)]
        }
    });
    let odd_block = Mat::from_fn(h, h, |i, j| m[(i, j)] - m[(i, n - 1 - j)]);
    let mut values = sym_eigenvalues(&even)?;
    values.extend(sym_eigenvalues(&odd_block)?);
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values)
}

/// A dense symmetric Nyström matrix `M[i,j] = √wᵢ K(xᵢ,xⱼ) √wⱼ` with a label
/// describing what it discretizes.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub label: String,
    pub matrix: Mat<f64>,
}

impl KernelOperator {
    pub fn new(label: impl Into<String>, matrix: Mat<f64>) -> Self {
        Self {
            label: label.into(),
            matrix,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        sym_eigenvalues(&self.matrix)
    }

    pub fn eigen(&self) -> Result<(Vec<f64>, Mat<f64>)> {
        sym_eigen(&self.matrix)
    }

    /// n(λ, M): the number of eigenvalues strictly above `lambda`.
    pub fn count_above(&self, lambda: f64) -> Result<usize> {
        Ok(count_above(&self.eigenvalues()?, lambda))
    }

    pub fn top_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.last().copied().unwrap_or(f64::NEG_INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_counts() {
        let m = Mat::from_fn(4, 4, |i, j| if i == j { i as f64 } else { 0.0 });
        let k = KernelOperator::new("diag", m);
        assert_eq!(k.count_above(1.0).unwrap(), 2);
        assert_eq!(k.top_eigenvalue().unwrap(), 3.0);
    }

    #[test]
    fn centrosymmetric_split_matches_full() {
        for n in [5usize, 6] {
            let m = Mat::from_fn(n, n, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).powi(2)));
            let full = sym_eigenvalues(&m).unwrap();
            let split = centrosymmetric_eigenvalues(&m).unwrap();
            for (a, b) in full.iter().zip(&split) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn square_root_squares_back() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.5 });
        let r = sym_function(&m, f64::sqrt).unwrap();
        let back = &r * &r;
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[(i, j)] - m[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
