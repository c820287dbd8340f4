use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::operator::BlockOperator;
use crate::error::{Error, Result};

/// Full spectrum of a symmetric operator, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

/// Dense symmetric eigendecomposition (Householder tridiagonalization plus
/// implicit QR, via nalgebra).
pub fn eigendecompose(op: &BlockOperator) -> Result<Spectrum> {
    eigendecompose_matrix(&op.matrix)
}

pub fn eigendecompose_matrix(m: &DMatrix<f64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let dim = m.nrows();
    let max_iterations = 100 * dim.max(1);
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iterations).ok_or_else(|| {
        let mut off = m.clone();
        off.fill_diagonal(0.0);
        Error::Convergence {
            iterations: max_iterations,
            off_diagonal_norm: off.norm(),
        }
    })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// Largest `‖M v − λ v‖₂` over all pairs, relative to `‖M‖₂`.
    pub fn max_relative_residual(&self, m: &DMatrix<f64>) -> f64 {
        let norm = self
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.abs()))
            .max(f64::MIN_POSITIVE);
        let mv = m * &self.eigenvectors;
        (0..self.len())
            .map(|k| (mv.column(k) - self.eigenvectors.column(k) * self.eigenvalues[k]).norm())
            .fold(0.0, f64::max)
            / norm
    }

    /// `‖VᵀV − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        (g - DMatrix::identity(self.len(), self.len())).amax()
    }

    /// The `k`-th largest minus the `(k+1)`-th largest eigenvalue.
    pub fn gap_after(&self, k: usize) -> Option<f64> {
        Some(self.eigenvalues.get(k - 1)? - self.eigenvalues.get(k)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;
    use crate::spectral::operator::assemble_geometric;
    use crate::sphere::sample_uniform;

    #[test]
    fn swap_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = eigendecompose_matrix(&m).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-15);
        assert!(s.max_relative_residual(&m) < 1e-14);
    }

    #[test]
    fn rejects_non_square() {
        assert!(eigendecompose_matrix(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn residual_and_orthonormality_invariants() {
        let ds = sample_uniform(60, 2).unwrap();
        for kind in [KernelKind::Common, KernelKind::Transport] {
            let op = assemble_geometric(&ds, kind).unwrap();
            let s = eigendecompose(&op).unwrap();
            assert_eq!(s.len(), 120);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            assert!(s.max_relative_residual(&op.matrix) < 1e-8);
            assert!(s.orthonormality_error() < 1e-8);
        }
    }
}
