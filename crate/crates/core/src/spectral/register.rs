//! Orthogonal Procrustes registration of the intrinsic maps against ground
//! truth.
//!
//! Common lines determine the configuration only up to a global orthogonal
//! map, including reflections, so the fit ranges over all of `O(3)` and the
//! determinant is reported rather than forced.

use nalgebra::{DMatrix, Matrix3, Matrix3x2};

use super::intrinsic::IntrinsicModel;
use crate::error::{Error, Result};
use crate::sphere::{DirectionSet, UnitVector3};

/// Fitted map `Q : V → 𝕍_N` and per-node recovery errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Registration {
    pub matrix: Matrix3<f64>,
    pub determinant: f64,
    /// Normal of the plane spanned by the columns of `Qᵀ Φ_x`, oriented so
    /// that the recovered frame is right-handed.
    pub estimated_directions: Vec<UnitVector3>,
    /// Angle between estimated and true direction, radians.
    pub angular_errors: Vec<f64>,
    /// `‖Q i_x − √N Φ_x‖_F`.
    pub frame_residuals: Vec<f64>,
}

fn phi_3x2(phi: &DMatrix<f64>) -> Matrix3x2<f64> {
    Matrix3x2::from_fn(|r, c| phi[(r, c)])
}

/// Fits `Q ∈ O(3)` minimizing `Σ_x ‖Q i_x − Φ_x‖²_F` and recovers the viewing
/// directions.
///
/// The eigenvectors are unit vectors in plain Euclidean coordinates on
/// `ℝ^{2N}`, so `Φ_x ≈ Q i_x / √N`; frame residuals compare `Q i_x` with
/// `√N Φ_x`. The scale does not affect the fitted `Q`.
pub fn register(model: &IntrinsicModel, truth: &DirectionSet) -> Result<Registration> {
    if model.dim != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: model.dim,
        });
    }
    if model.n != truth.len() || model.phi_maps.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            found: truth.len(),
        });
    }
    let phis: Vec<Matrix3x2<f64>> = model.phi_maps.iter().map(phi_3x2).collect();
    let cross: Matrix3<f64> = phis
        .iter()
        .zip(&truth.frames)
        .map(|(phi, f)| phi * f.embedding().transpose())
        .sum();
    let svd = cross.svd(true, true);
    let (u, v_t) = (
        svd.u.expect("requested U"),
        svd.v_t.expect("requested Vᵀ"),
    );
    let q = u * v_t;
    let scale = (model.n as f64).sqrt();

    let mut estimated_directions = Vec::with_capacity(model.n);
    let mut angular_errors = Vec::with_capacity(model.n);
    let mut frame_residuals = Vec::with_capacity(model.n);
    for (phi, frame) in phis.iter().zip(&truth.frames) {
        let back = q.transpose() * phi;
        let normal = back.column(0).cross(&back.column(1));
        // a rank-deficient Φ_x gives no plane; fall back to the worst case
        let est = UnitVector3::new_normalize(normal).unwrap_or(-frame.normal);
        angular_errors.push(est.angle_to(&frame.normal));
        estimated_directions.push(est);
        frame_residuals.push((q * frame.embedding() - phi * scale).norm());
    }
    Ok(Registration {
        determinant: q.determinant(),
        matrix: q,
        estimated_directions,
        angular_errors,
        frame_residuals,
    })
}

impl Registration {
    pub fn mean_angular_error(&self) -> f64 {
        self.angular_errors.iter().sum::<f64>() / self.angular_errors.len().max(1) as f64
    }

    pub fn median_angular_error(&self) -> f64 {
        median(&self.angular_errors)
    }

    pub fn max_angular_error(&self) -> f64 {
        self.angular_errors.iter().copied().fold(0.0, f64::max)
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
