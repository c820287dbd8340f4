use nalgebra::{DMatrix, DVector, Vector3};
use tracing::warn;

use super::eigen::Spectrum;
use super::operator::BlockOperator;
use crate::error::{Error, Result};
use crate::sphere::DirectionSet;

/// Eigenvalues above this threshold span the intrinsic model.
pub const INTRINSIC_THRESHOLD: f64 = 1.0 / 3.0;

/// `√(2/3)`, the scale of the intrinsic maps.
pub const PHI_SCALE: f64 = 0.816_496_580_927_726;

/// The intrinsic copy `𝕍_N` of ambient space and the maps `φ_x : P_x → 𝕍_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicModel {
    pub n: usize,
    pub dim: usize,
    /// `2N × dim`, orthonormal columns.
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Per node a `dim × 2` matrix: `√(2/3)` times rows `2x, 2x+1` of the
    /// basis, transposed.
    pub phi_maps: Vec<DMatrix<f64>>,
    /// Set when `dim ≠ 3`.
    pub warning: Option<String>,
}

/// Keeps the eigenpairs above `1/3` and builds the intrinsic maps. A
/// dimension other than three is reported, not rejected.
pub fn extract_intrinsic(spectrum: &Spectrum) -> IntrinsicModel {
    let total = spectrum.len();
    let n = total / 2;
    let dim = spectrum
        .eigenvalues
        .iter()
        .take_while(|&&l| l > INTRINSIC_THRESHOLD)
        .count();
    let basis = spectrum.eigenvectors.columns(0, dim).into_owned();
    let phi_maps = (0..n)
        .map(|x| basis.rows(2 * x, 2).transpose() * PHI_SCALE)
        .collect();
    let warning = (dim != 3).then(|| {
        let lo = dim.saturating_sub(2);
        let hi = (dim + 2).min(total);
        let around: Vec<String> = spectrum.eigenvalues[lo..hi]
            .iter()
            .map(|l| format!("{l:.6}"))
            .collect();
        let msg = format!(
            "intrinsic dimension is {dim}, expected 3; eigenvalues {}..{} around the 1/3 threshold: [{}]",
            lo + 1,
            hi,
            around.join(", ")
        );
        warn!("{msg}");
        msg
    });
    IntrinsicModel {
        n,
        dim,
        basis,
        eigenvalues: spectrum.eigenvalues[..dim].to_vec(),
        phi_maps,
        warning,
    }
}

/// The scaled canonical section `s_v(x) = √(3/2)·Pr_x(v)` in frame
/// coordinates, stacked into a `2N`-vector.
pub fn canonical_section(ds: &DirectionSet, v: &Vector3<f64>) -> DVector<f64> {
    let scale = (1.5f64).sqrt();
    let mut s = DVector::zeros(2 * ds.len());
    for (x, f) in ds.frames.iter().enumerate() {
        let p = f.project(v) * scale;
        s[2 * x] = p.x;
        s[2 * x + 1] = p.y;
    }
    s
}

/// `‖C_N s_v − ½ s_v‖ / ‖s_v‖` for the canonical section of `v`.
pub fn canonical_embedding_residual(
    op: &BlockOperator,
    ds: &DirectionSet,
    v: &Vector3<f64>,
) -> Result<f64> {
    if op.n != ds.len() {
        return Err(Error::DimensionMismatch {
            expected: op.n,
            found: ds.len(),
        });
    }
    let s = canonical_section(ds, v);
    let norm = s.norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero test vector".into()));
    }
    Ok((op.apply(&s) - &s * 0.5).norm() / norm)
}
