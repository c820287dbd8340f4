use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::phantom::Phantom;
use crate::error::{Error, Result};
use crate::sphere::{DirectionSet, PlaneBasis};

/// Polar sampling grid shared by all slices of a run.
///
/// Ray `a` has angle `2πa / n_theta`; sample `b` sits at radius
/// `r_max (b + 1) / n_r`, so the origin is never sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceGrid {
    pub n_theta: usize,
    pub n_r: usize,
    pub r_max: f64,
}

impl Default for SliceGrid {
    fn default() -> Self {
        Self {
            n_theta: 360,
            n_r: 64,
            r_max: 32.0,
        }
    }
}

impl SliceGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 4 || !self.n_theta.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "n_theta must be even and at least 4, got {}",
                self.n_theta
            )));
        }
        if self.n_r < 4 {
            return Err(Error::InvalidArgument(format!("n_r must be at least 4, got {}", self.n_r)));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("r_max must be positive, got {}", self.r_max)));
        }
        Ok(())
    }

    pub fn angle(&self, a: usize) -> f64 {
        std::f64::consts::TAU * a as f64 / self.n_theta as f64
    }

    pub fn radius(&self, b: usize) -> f64 {
        self.r_max * (b + 1) as f64 / self.n_r as f64
    }

    /// Angular bin width in radians.
    pub fn bin_width(&self) -> f64 {
        std::f64::consts::TAU / self.n_theta as f64
    }
}

/// Fourier transform of the density restricted to one viewing plane, sampled
/// on polar rays in the coordinates of `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSlice {
    pub node: usize,
    pub grid: SliceGrid,
    pub frame: PlaneBasis,
    /// Row-major `n_theta × n_r`.
    pub values: Vec<Complex64>,
}

impl PolarSlice {
    pub fn value(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.grid.n_r + b]
    }

    pub fn ray(&self, a: usize) -> &[Complex64] {
        &self.values[a * self.grid.n_r..(a + 1) * self.grid.n_r]
    }

    /// `max |v(θ + π, r) − conj v(θ, r)|`.
    pub fn hermitian_error(&self) -> f64 {
        let half = self.grid.n_theta / 2;
        (0..half)
            .flat_map(|a| (0..self.grid.n_r).map(move |b| (a, b)))
            .map(|(a, b)| (self.value(a + half, b) - self.value(a, b).conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Evaluates `φ̂` along the ray at `angle` in the plane of `frame`.
pub fn evaluate_ray(phantom: &Phantom, frame: &PlaneBasis, grid: &SliceGrid, angle: f64) -> Vec<Complex64> {
    let (s, c) = angle.sin_cos();
    let dir: Vector3<f64> = frame.b1.as_vector() * c + frame.b2.as_vector() * s;
    (0..grid.n_r)
        .map(|b| phantom.fourier_transform(&(dir * grid.radius(b))))
        .collect()
}

/// Samples `φ̂` on the polar grid of one plane.
pub fn fourier_slice(phantom: &Phantom, node: usize, frame: &PlaneBasis, grid: SliceGrid) -> Result<PolarSlice> {
    grid.validate()?;
    let values = (0..grid.n_theta)
        .flat_map(|a| evaluate_ray(phantom, frame, &grid, grid.angle(a)))
        .collect();
    Ok(PolarSlice {
        node,
        grid,
        frame: *frame,
        values,
    })
}

/// One slice per node, computed in parallel.
pub fn fourier_slices(phantom: &Phantom, ds: &DirectionSet, grid: SliceGrid) -> Result<Vec<PolarSlice>> {
    grid.validate()?;
    ds.frames
        .par_iter()
        .enumerate()
        .map(|(node, f)| fourier_slice(phantom, node, f, grid))
        .collect()
}
