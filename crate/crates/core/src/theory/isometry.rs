//! Trace normalization of the scaled canonical map `τ = √(3/2)·α_can`.
//!
//! `α_can` sends `v` to the section `x ↦ Pr_x v`, so
//! `Tr(τ τᵀ) = (3/2) ∫ Tr(Pr_x) dx`, and `Tr(Pr_x) = 2` at every `x`.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sphere::{canonical_frame, PlaneBasis, UnitVector3};

/// `Pr_x = i_x i_xᵀ` built from the plane frame.
pub fn frame_projector(frame: &PlaneBasis) -> Matrix3<f64> {
    let e = frame.embedding();
    e * e.transpose()
}

/// Monte-Carlo estimate of `Tr(τ τᵀ)` with the frame projector; equals 3.
pub fn trace_isometry_check(samples: usize, seed: u64) -> Result<f64> {
    trace_isometry_check_with(samples, seed, frame_projector)
}

/// As [`trace_isometry_check`], with the projector supplied by the caller.
pub fn trace_isometry_check_with(
    samples: usize,
    seed: u64,
    projector: impl Fn(&PlaneBasis) -> Matrix3<f64>,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    let mut drawn = 0;
    while drawn < samples {
        let v = Vector3::new(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        );
        let Ok(x) = UnitVector3::new_normalize(v) else {
            continue;
        };
        total += projector(&canonical_frame(&x)).trace();
        drawn += 1;
    }
    Ok(1.5 * total / samples as f64)
}
