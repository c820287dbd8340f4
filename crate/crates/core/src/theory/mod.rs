//! Closed-form spectral theory of the common lines operator and its
//! numerical verification: predicted eigenvalues and multiplicities,
//! Legendre generating functions, and quadrature of the integrals that
//! produce the eigenvalues.

pub mod integrals;
pub mod isometry;
pub mod legendre;
pub mod predicted;
pub mod quadrature;

pub use integrals::{
    contour_coefficients, integral_coefficients, integral_generating,
    integral_generating_closed_form, lambda_from_integrals, IntegralCoefficients,
};
pub use isometry::{trace_isometry_check, trace_isometry_check_with};
pub use legendre::{generating_functions, j_profile, legendre_p, GeneratingValues};
pub use predicted::{default_cluster_window, lambda_closed_form, PredictedEigenvalue, PredictedSpectrum};
pub use quadrature::QuadratureConfig;
