use nalgebra::{Matrix3xX, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest Gaussian width accepted by default, in box units.
pub const DEFAULT_MIN_SIGMA: f64 = 0.05;

/// One isotropic Gaussian `a·exp(−‖p − c‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub center: [f64; 3],
    pub amplitude: f64,
    pub sigma: f64,
}

/// A density built from isotropic Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhantomRepr", into = "PhantomRepr")]
pub struct Phantom {
    components: Vec<GaussianComponent>,
}

#[derive(Serialize, Deserialize)]
struct PhantomRepr {
    components: Vec<GaussianComponent>,
}

impl TryFrom<PhantomRepr> for Phantom {
    type Error = Error;

    fn try_from(r: PhantomRepr) -> Result<Self> {
        Phantom::new(r.components, DEFAULT_MIN_SIGMA)
    }
}

impl From<Phantom> for PhantomRepr {
    fn from(p: Phantom) -> Self {
        PhantomRepr {
            components: p.components,
        }
    }
}

impl Phantom {
    /// Validates the components: at least three, widths at least `min_sigma`,
    /// finite values and centers spanning at least a plane.
    pub fn new(components: Vec<GaussianComponent>, min_sigma: f64) -> Result<Self> {
        if components.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "phantom needs at least 3 components, got {}",
                components.len()
            )));
        }
        for (k, c) in components.iter().enumerate() {
            if !c.center.iter().all(|v| v.is_finite()) || !c.amplitude.is_finite() {
                return Err(Error::InvalidArgument(format!("component {k} is not finite")));
            }
            if c.sigma.is_nan() || c.sigma < min_sigma {
                return Err(Error::InvalidArgument(format!(
                    "component {k} has sigma {} below the minimum {min_sigma}",
                    c.sigma
                )));
            }
        }
        if centered_rank(&components) < 2 {
            return Err(Error::InvalidArgument("phantom centers are collinear".into()));
        }
        Ok(Self { components })
    }

    #[cfg(test)]
    pub(crate) fn unchecked(components: Vec<GaussianComponent>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// `φ̂(ξ) = Σ a (2π)^{3/2} σ³ exp(−σ²‖ξ‖²/2) exp(−i c·ξ)`.
    pub fn fourier_transform(&self, xi: &Vector3<f64>) -> Complex64 {
        let r2 = xi.norm_squared();
        self.components
            .iter()
            .map(|g| {
                let s2 = g.sigma * g.sigma;
                let mag = g.amplitude * (std::f64::consts::TAU).powf(1.5) * s2 * g.sigma * (-0.5 * s2 * r2).exp();
                let phase = -Vector3::from(g.center).dot(xi);
                Complex64::from_polar(mag, phase)
            })
            .sum()
    }
}

fn centered_rank(components: &[GaussianComponent]) -> usize {
    let k = components.len();
    let mean: Vector3<f64> = components.iter().map(|c| Vector3::from(c.center)).sum::<Vector3<f64>>() / k as f64;
    let m = Matrix3xX::from_fn(k, |r, c| components[c].center[r] - mean[r]);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

/// Eight Gaussians with centers uniform in the ball of radius 0.6, amplitudes
/// in `[0.5, 2]` and widths in `[0.08, 0.2]`; redrawn until valid. Draws
/// from the last stream of the generator so that it never overlaps direction
/// sampling or noise under the same seed.
pub fn default_phantom(seed: u64) -> Phantom {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    loop {
        let components = (0..8)
            .map(|_| GaussianComponent {
                center: ball_point(&mut rng, 0.6).into(),
                amplitude: rng.random_range(0.5..=2.0),
                sigma: rng.random_range(0.08..=0.2),
            })
            .collect();
        if let Ok(p) = Phantom::new(components, DEFAULT_MIN_SIGMA) {
            return p;
        }
    }
}

fn ball_point(rng: &mut impl Rng, radius: f64) -> Vector3<f64> {
    loop {
        let p = Vector3::from_fn(|_, _| rng.random_range(-1.0..=1.0));
        if p.norm_squared() <= 1.0 {
            return p * radius;
        }
    }
}
