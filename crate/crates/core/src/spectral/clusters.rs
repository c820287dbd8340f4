use serde::{Deserialize, Serialize};

use super::eigen::Spectrum;
use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::theory::predicted::{default_cluster_window, PredictedEigenvalue};

/// Empirical eigenvalues found near one predicted eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterMatch {
    pub n: usize,
    pub predicted: f64,
    pub expected_multiplicity: usize,
    pub window: f64,
    pub count: usize,
    /// Mean of `λ − predicted` over the eigenvalues in the window (signed).
    pub mean_deviation: f64,
}

/// Counts eigenvalues within a window of each predicted `λ_n`, `n ≤ n_max`.
///
/// Predictions per kind: `λ_n` with multiplicity `2n+1` for `Common`, `−λ_n`
/// with `2n+1` for `Orthographic`, `λ_n` with `2(2n+1)` for `Transport`.
/// Without an explicit `window`, cluster `n` uses
/// [`default_cluster_window`]`(n)`. Asking for more clusters than the `2N`
/// eigenvalues can hold is an error.
pub fn cluster_spectrum(
    spectrum: &Spectrum,
    kind: KernelKind,
    n_max: usize,
    window: Option<f64>,
) -> Result<Vec<ClusterMatch>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if let Some(w) = window {
        if w.is_nan() || w <= 0.0 {
            return Err(Error::InvalidArgument(format!("window must be positive, got {w}")));
        }
    }
    let predictions: Vec<PredictedEigenvalue> =
        (1..=n_max).map(PredictedEigenvalue::new).collect::<Result<_>>()?;
    let needed: usize = predictions.iter().map(|p| p.for_kind(kind).1).sum();
    if needed > spectrum.len() {
        return Err(Error::InvalidArgument(format!(
            "{n_max} clusters need {needed} eigenvalues but the spectrum has {}",
            spectrum.len()
        )));
    }
    predictions
        .iter()
        .map(|p| {
            let (predicted, expected_multiplicity) = p.for_kind(kind);
            let w = match window {
                Some(w) => w,
                None => default_cluster_window(p.n)?,
            };
            let inside: Vec<f64> = spectrum
                .eigenvalues
                .iter()
                .map(|l| l - predicted)
                .filter(|d| d.abs() <= w)
                .collect();
            let mean_deviation = if inside.is_empty() {
                f64::NAN
            } else {
                inside.iter().sum::<f64>() / inside.len() as f64
            };
            Ok(ClusterMatch {
                n: p.n,
                predicted,
                expected_multiplicity,
                window: w,
                count: inside.len(),
                mean_deviation,
            })
        })
        .collect()
}
