//! Block operators, their spectra, the intrinsic model and its registration
//! against ground truth.

pub mod clusters;
pub mod eigen;
pub mod intrinsic;
pub mod operator;
pub mod register;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::CommonLinesDatum;
use crate::sphere::DirectionSet;

pub use clusters::{cluster_spectrum, ClusterMatch};
pub use eigen::{eigendecompose, eigendecompose_matrix, Spectrum};
pub use intrinsic::{
    canonical_embedding_residual, canonical_section, extract_intrinsic, IntrinsicModel,
    INTRINSIC_THRESHOLD, PHI_SCALE,
};
pub use operator::{assemble, assemble_common, assemble_geometric, BlockOperator, OperatorSource};
pub use register::{register, Registration};

/// Number of leading eigenvalues kept in a report.
pub const REPORT_EIGENVALUES: usize = 30;

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub assemble_s: f64,
    pub eigendecompose_s: f64,
    pub extract_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub register_s: Option<f64>,
}

/// Registration fields of a report. Angles in radians unless suffixed `_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationSummary {
    pub registration_matrix: [[f64; 3]; 3],
    pub registration_determinant: f64,
    pub mean_angular_error: f64,
    pub median_angular_error: f64,
    pub max_angular_error: f64,
    pub mean_angular_error_deg: f64,
    pub median_angular_error_deg: f64,
    pub max_angular_error_deg: f64,
    pub angular_errors: Vec<f64>,
    pub frame_residuals: Vec<f64>,
    pub estimated_directions: Vec<[f64; 3]>,
}

impl From<&Registration> for RegistrationSummary {
    fn from(r: &Registration) -> Self {
        let (mean, median, max) = (
            r.mean_angular_error(),
            r.median_angular_error(),
            r.max_angular_error(),
        );
        Self {
            registration_matrix: std::array::from_fn(|i| std::array::from_fn(|j| r.matrix[(i, j)])),
            registration_determinant: r.determinant,
            mean_angular_error: mean,
            median_angular_error: median,
            max_angular_error: max,
            mean_angular_error_deg: mean.to_degrees(),
            median_angular_error_deg: median.to_degrees(),
            max_angular_error_deg: max.to_degrees(),
            angular_errors: r.angular_errors.clone(),
            frame_residuals: r.frame_residuals.clone(),
            estimated_directions: r
                .estimated_directions
                .iter()
                .map(|d| (*d.as_vector()).into())
                .collect(),
        }
    }
}

/// Outcome of one reconstruction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub n: usize,
    pub dim_intrinsic: usize,
    pub top_eigenvalues: Vec<f64>,
    /// Third minus fourth largest eigenvalue.
    pub spectral_gap_empirical: Option<f64>,
    #[serde(default)]
    pub warning: Option<String>,
    #[serde(flatten)]
    pub registration: Option<RegistrationSummary>,
    pub timings: StageTimings,
}

/// Everything a reconstruction produces.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub report: ReconstructionReport,
    pub spectrum: Spectrum,
    pub model: IntrinsicModel,
    pub registration: Option<Registration>,
}

/// Assembles `C_N`, eigendecomposes, extracts the intrinsic model and, given
/// ground truth with a three-dimensional model, registers it.
pub fn reconstruct(datum: &CommonLinesDatum, truth: Option<&DirectionSet>) -> Result<Reconstruction> {
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let op = assemble_common(datum)?;
    timings.assemble_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let spectrum = eigendecompose(&op)?;
    timings.eigendecompose_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let model = extract_intrinsic(&spectrum);
    timings.extract_s = t.elapsed().as_secs_f64();

    let registration = match truth {
        Some(truth) if model.dim == 3 => {
            let t = Instant::now();
            let r = register(&model, truth)?;
            timings.register_s = Some(t.elapsed().as_secs_f64());
            Some(r)
        }
        _ => None,
    };

    let report = ReconstructionReport {
        n: datum.n(),
        dim_intrinsic: model.dim,
        top_eigenvalues: spectrum.eigenvalues.iter().take(REPORT_EIGENVALUES).copied().collect(),
        spectral_gap_empirical: spectrum.gap_after(3),
        warning: model.warning.clone(),
        registration: registration.as_ref().map(RegistrationSummary::from),
        timings,
    };
    Ok(Reconstruction {
        report,
        spectrum,
        model,
        registration,
    })
}
