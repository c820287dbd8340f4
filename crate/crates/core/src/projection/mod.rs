//! Synthetic projection data: Gaussian phantoms, analytic Fourier slices,
//! noise, and common-line detection by radial-line correlation.

pub mod detect;
pub mod noise;
pub mod phantom;
pub mod slice;

use rayon::prelude::*;

use crate::error::Result;
use crate::kernels::{CommonLinesDatum, Provenance};
use crate::sphere::DirectionSet;

pub use detect::{
    circular_distance, detect_common_lines, detection_errors, DegenerateDetection, DetectionErrorSummary,
    DetectionResult, PairDetection,
};
pub use noise::{add_noise, mean_power};
pub use phantom::{default_phantom, GaussianComponent, Phantom, DEFAULT_MIN_SIGMA};
pub use slice::{evaluate_ray, fourier_slice, fourier_slices, PolarSlice, SliceGrid};

/// Parameters of one simulated acquisition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub grid: SliceGrid,
    /// `None` for noiseless slices.
    pub snr: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub slices: Vec<PolarSlice>,
    pub datum: CommonLinesDatum,
    pub detection: DetectionResult,
}

/// Slices the phantom along every plane of `ds`, adds noise, detects common
/// lines and scores the detection against `ds`.
pub fn simulate(phantom: &Phantom, ds: &DirectionSet, config: &SimulationConfig) -> Result<Simulation> {
    let mut slices = fourier_slices(phantom, ds, config.grid)?;
    if let Some(snr) = config.snr {
        slices = slices
            .par_iter()
            .map(|s| add_noise(s, snr, config.seed))
            .collect::<Result<_>>()?;
    }
    let (mut datum, mut detection) = detect_common_lines(&slices)?;
    if let Provenance::Detected(meta) = &mut datum.provenance {
        meta.snr = config.snr;
        meta.seed = config.seed;
    }
    detection.summary = Some(detection_errors(&detection, ds)?);
    Ok(Simulation {
        slices,
        datum,
        detection,
    })
}
