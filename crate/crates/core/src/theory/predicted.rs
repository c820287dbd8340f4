//! Predicted eigenvalues `λ_n = (−1)^{n−1} / (n(n+1))` with multiplicities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;

/// `λ_n = (−1)^{n−1} / (n(n+1))` for `n ≥ 1`.
pub fn lambda_closed_form(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("index n must be at least 1".into()));
    }
    let nf = n as f64;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign / (nf * (nf + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedEigenvalue {
    pub n: usize,
    pub lambda: f64,
    /// `2n + 1`
    pub multiplicity_common: usize,
    /// `2(2n + 1)`: both parity copies of the degree-`n` component
    pub multiplicity_transport: usize,
}

impl PredictedEigenvalue {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            lambda: lambda_closed_form(n)?,
            multiplicity_common: 2 * n + 1,
            multiplicity_transport: 2 * (2 * n + 1),
        })
    }

    /// Predicted value and multiplicity for an operator of the given kind.
    ///
    /// `C` and `O` each see one parity copy of the degree-`n` component, `O`
    /// with the opposite sign; `T = C − O` sees both.
    pub fn for_kind(&self, kind: KernelKind) -> (f64, usize) {
        match kind {
            KernelKind::Common => (self.lambda, self.multiplicity_common),
            KernelKind::Orthographic => (-self.lambda, self.multiplicity_common),
            KernelKind::Transport => (self.lambda, self.multiplicity_transport),
        }
    }
}

/// `λ_1 … λ_{n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedSpectrum {
    pub entries: Vec<PredictedEigenvalue>,
}

impl PredictedSpectrum {
    pub fn up_to(n_max: usize) -> Result<Self> {
        Ok(Self {
            entries: (1..=n_max).map(PredictedEigenvalue::new).collect::<Result<_>>()?,
        })
    }

    /// Total predicted multiplicity of the first `n_max` clusters for `kind`.
    pub fn total_multiplicity(&self, kind: KernelKind) -> usize {
        self.entries.iter().map(|e| e.for_kind(kind).1).sum()
    }
}

/// Half the distance from `λ_n` to the nearest other point of the predicted
/// spectrum, the accumulation point `0` included.
pub fn default_cluster_window(n: usize) -> Result<f64> {
    let center = lambda_closed_form(n)?;
    // λ_m shrinks monotonically in |·|, so neighbours beyond n + 4 are farther
    // than λ_{n+2} or 0.
    let nearest = (1..=n + 4)
        .filter(|&m| m != n)
        .map(|m| (lambda_closed_form(m).expect("m >= 1") - center).abs())
        .fold(center.abs(), f64::min);
    Ok(0.5 * nearest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_values() {
        assert_eq!(lambda_closed_form(1).unwrap(), 0.5);
        assert!((lambda_closed_form(2).unwrap() + 1.0 / 6.0).abs() < 1e-16);
        assert!((lambda_closed_form(3).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        assert!((lambda_closed_form(4).unwrap() + 1.0 / 20.0).abs() < 1e-16);
        let gap = lambda_closed_form(1).unwrap() - lambda_closed_form(3).unwrap();
        assert!((gap - 5.0 / 12.0).abs() < 1e-15);
        assert!(lambda_closed_form(0).is_err());
    }

    #[test]
    fn magnitudes_strictly_decrease() {
        let s = PredictedSpectrum::up_to(200).unwrap();
        for w in s.entries.windows(2) {
            assert!(w[1].lambda.abs() < w[0].lambda.abs());
        }
        assert!(s.entries.last().unwrap().lambda.abs() < 1e-4);
    }

    #[test]
    fn multiplicities() {
        let s = PredictedSpectrum::up_to(3).unwrap();
        assert_eq!(s.total_multiplicity(KernelKind::Common), 3 + 5 + 7);
        assert_eq!(s.total_multiplicity(KernelKind::Transport), 6 + 10 + 14);
        let e = s.entries[1];
        assert_eq!(e.for_kind(KernelKind::Orthographic), (1.0 / 6.0, 5));
    }

    #[test]
    fn windows_separate_neighbours() {
        // λ_1: nearest is λ_3 = 1/12; λ_2: λ_4 = −1/20; λ_3: λ_5 = 1/30
        assert!((default_cluster_window(1).unwrap() - 5.0 / 24.0).abs() < 1e-15);
        assert!((default_cluster_window(2).unwrap() - (1.0 / 6.0 - 1.0 / 20.0) / 2.0).abs() < 1e-15);
        assert!((default_cluster_window(3).unwrap() - (1.0 / 12.0 - 1.0 / 30.0) / 2.0).abs() < 1e-15);
    }
}
