//! The integrals `I_n^k` whose combination gives the eigenvalues `λ_n`.
//!
//! With `μ(θ) = sin θ / 2`,
//!
//! ```text
//! I_n^k  = ½ ∫₀^π μ(θ) E^k P_{n-1}(0, θ) j^k(θ) dθ
//! I^k(t) = Σ_{n≥0} I_{n+1}^k tⁿ = ½ ∫₀^π μ(θ) E^k G(0, θ, t) j^k(θ) dθ
//! λ_n    = I_n⁰ + I_n¹ / n + I_n² / (2n(n+1))
//! ```
//!
//! and in closed form `I⁰(t) = ½(1 + t/3)`, `I¹(t) = −2t/3`,
//! `I²(t) = 2t²/(1+t) = 2 Σ_{n≥2} (−1)ⁿ tⁿ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::legendre::{j_profile, raised_generating, raised_legendre};
use super::quadrature::{QuadratureConfig, QuadratureRule};
use crate::error::{Error, Result};

/// Maximum disagreement tolerated between a rule and its doubled refinement.
pub const SELF_CONSISTENCY_TOL: f64 = 1e-12;

fn check_k(k: u8) -> Result<()> {
    if k > 2 {
        return Err(Error::InvalidArgument(format!(
            "raising order must be 0, 1 or 2, got {k}"
        )));
    }
    Ok(())
}

fn measure(theta: f64) -> f64 {
    0.5 * theta.sin()
}

fn generating_integrand(k: u8, theta: f64, t: Complex64) -> Complex64 {
    // k was validated by the caller, so j_profile cannot fail here
    let j = j_profile(k, theta).expect("valid raising order");
    raised_generating(k, theta, t) * j * (0.5 * measure(theta))
}

fn integrate_generating(k: u8, t: Complex64, rule: &QuadratureRule) -> Complex64 {
    rule.integrate_complex(|theta| generating_integrand(k, theta, t))
}

fn consistent(coarse: Complex64, fine: Complex64) -> bool {
    (coarse - fine).norm() <= SELF_CONSISTENCY_TOL * coarse.norm().max(1.0)
}

/// `I^k(t)` by quadrature, checked against the doubled rule.
pub fn integral_generating(k: u8, t: f64, q: &QuadratureConfig) -> Result<Complex64> {
    check_k(k)?;
    if !(t > -1.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t must lie in (-1, 1), got {t}")));
    }
    let t = Complex64::new(t, 0.0);
    let coarse = integrate_generating(k, t, &q.rule()?);
    let fine = integrate_generating(k, t, &q.refined().rule()?);
    if !consistent(coarse, fine) {
        return Err(Error::Quadrature {
            coarse: format!("{coarse}"),
            fine: format!("{fine}"),
        });
    }
    Ok(coarse)
}

/// Closed form of `I^k(t)`.
pub fn integral_generating_closed_form(k: u8, t: f64) -> Result<f64> {
    check_k(k)?;
    Ok(match k {
        0 => 0.5 * (1.0 + t / 3.0),
        1 => -2.0 * t / 3.0,
        _ => 2.0 * t * t / (1.0 + t),
    })
}

/// `(I_n⁰, I_n¹, I_n²)` for one index `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralCoefficients {
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
}

impl IntegralCoefficients {
    pub fn get(&self, k: u8) -> f64 {
        match k {
            0 => self.i0,
            1 => self.i1,
            _ => self.i2,
        }
    }
}

fn coefficients_with(n: usize, rule: &QuadratureRule) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (k, slot) in (0u8..3).zip(out.iter_mut()) {
        *slot = rule.integrate_complex(|theta| {
            let raised = raised_legendre(k, n - 1, theta).expect("valid raising order");
            let j = j_profile(k, theta).expect("valid raising order");
            raised * j * (0.5 * measure(theta))
        });
    }
    out
}

/// `I_n^k` for `k = 0, 1, 2`, integrating the raised Legendre functions
/// directly.
pub fn integral_coefficients(n: usize, q: &QuadratureConfig) -> Result<IntegralCoefficients> {
    if n < 1 {
        return Err(Error::InvalidArgument("index n must be at least 1".into()));
    }
    let coarse = coefficients_with(n, &q.rule()?);
    let fine = coefficients_with(n, &q.refined().rule()?);
    for (c, f) in coarse.iter().zip(&fine) {
        if !consistent(*c, *f) {
            return Err(Error::Quadrature {
                coarse: format!("{c}"),
                fine: format!("{f}"),
            });
        }
    }
    // All three integrands are real: the factors of i in E P and j¹ pair up.
    Ok(IntegralCoefficients {
        i0: coarse[0].re,
        i1: coarse[1].re,
        i2: coarse[2].re,
    })
}

/// `λ_n` assembled from the three integrals.
pub fn lambda_from_integrals(n: usize, q: &QuadratureConfig) -> Result<f64> {
    let c = integral_coefficients(n, q)?;
    let nf = n as f64;
    Ok(c.i0 + c.i1 / nf + c.i2 / (2.0 * nf * (nf + 1.0)))
}

/// Taylor coefficients `[I_1^k, …, I_{count}^k]` of `I^k(t)` read off by a
/// discrete Cauchy integral.
///
/// `I^k` is sampled on the circle `|t| = radius` at the midpoint angles
/// `θ_m = (2m+1)π/samples` (the Chebyshev–Gauss angles), and coefficient `n`
/// is `(1/M) Σ_m I^k(t_m) e^{−inθ_m} / radiusⁿ`. Aliasing error is of order
/// `radius^samples`.
pub fn contour_coefficients(
    k: u8,
    count: usize,
    radius: f64,
    samples: usize,
    q: &QuadratureConfig,
) -> Result<Vec<f64>> {
    check_k(k)?;
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "contour radius must lie in (0, 1), got {radius}"
        )));
    }
    if samples <= count {
        return Err(Error::InvalidArgument(format!(
            "need more than {count} contour samples, got {samples}"
        )));
    }
    let rule = q.rule()?;
    let m = samples as f64;
    let values: Vec<(f64, Complex64)> = (0..samples)
        .map(|s| {
            let angle = (2.0 * s as f64 + 1.0) * PI / m;
            let t = Complex64::from_polar(radius, angle);
            (angle, integrate_generating(k, t, &rule))
        })
        .collect();
    Ok((0..count)
        .map(|n| {
            let sum: Complex64 = values
                .iter()
                .map(|&(angle, v)| v * Complex64::from_polar(1.0, -(n as f64) * angle))
                .sum();
            (sum / m).re / radius.powi(n as i32)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::predicted::lambda_closed_form;

    #[test]
    fn generating_integrals_at_sample_points() {
        let q = QuadratureConfig::default();
        assert!((integral_generating(0, 0.0, &q).unwrap().re - 0.5).abs() < 1e-14);
        assert!((integral_generating(1, 0.5, &q).unwrap().re + 1.0 / 3.0).abs() < 1e-14);
        assert!(integral_generating(2, 0.0, &q).unwrap().norm() < 1e-15);
    }

    #[test]
    fn generating_integrals_match_closed_forms_on_grid() {
        let q = QuadratureConfig::default();
        for &t in &[-0.9, -0.5, 0.0, 0.3, 0.7, 0.9] {
            for k in 0..3u8 {
                let got = integral_generating(k, t, &q).unwrap();
                let want = integral_generating_closed_form(k, t).unwrap();
                assert!((got.re - want).abs() < 1e-10 && got.im.abs() < 1e-10, "k={k} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn tabulated_integrals() {
        let q = QuadratureConfig::default();
        let c1 = integral_coefficients(1, &q).unwrap();
        // the generating function I⁰(t) = ½(1 + t/3) forces I_1⁰ = ½
        assert!((c1.i0 - 0.5).abs() < 1e-13 && c1.i1.abs() < 1e-13 && c1.i2.abs() < 1e-13);
        let c2 = integral_coefficients(2, &q).unwrap();
        assert!((c2.i0 - 1.0 / 6.0).abs() < 1e-13);
        assert!((c2.i1 + 2.0 / 3.0).abs() < 1e-13);
        assert!(c2.i2.abs() < 1e-13);
        let c3 = integral_coefficients(3, &q).unwrap();
        assert!(c3.i0.abs() < 1e-13 && c3.i1.abs() < 1e-13 && (c3.i2 - 2.0).abs() < 1e-12);
        for n in 3..15 {
            let c = integral_coefficients(n, &q).unwrap();
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!((c.i2 - 2.0 * sign).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn eigenvalues_from_integrals() {
        let q = QuadratureConfig::default();
        assert!((lambda_from_integrals(1, &q).unwrap() - 0.5).abs() < 1e-13);
        assert!((lambda_from_integrals(2, &q).unwrap() + 1.0 / 6.0).abs() < 1e-13);
        assert!((lambda_from_integrals(3, &q).unwrap() - 1.0 / 12.0).abs() < 1e-13);
        for n in 1..=20 {
            let a = lambda_from_integrals(n, &q).unwrap();
            assert!((a - lambda_closed_form(n).unwrap()).abs() < 1e-9, "n={n}");
        }
        assert!(lambda_from_integrals(0, &q).is_err());
    }

    #[test]
    fn contour_extraction_agrees_with_direct_integrals() {
        let q = QuadratureConfig::default();
        for k in 0..3u8 {
            let coeffs = contour_coefficients(k, 12, 0.5, 64, &q).unwrap();
            for (idx, c) in coeffs.iter().enumerate() {
                let direct = integral_coefficients(idx + 1, &q).unwrap().get(k);
                assert!((c - direct).abs() < 1e-8, "k={k} n={}: {c} vs {direct}", idx + 1);
            }
        }
    }

    #[test]
    fn doubling_is_stable_at_default() {
        let q = QuadratureConfig::default();
        let fine = q.refined();
        for k in 0..3u8 {
            for &t in &[-0.9, 0.9] {
                let a = integral_generating(k, t, &q).unwrap();
                let b = integral_generating(k, t, &fine).unwrap();
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coarse_rule_fails_self_consistency() {
        let q = QuadratureConfig {
            points_per_panel: 2,
            panels: 1,
        };
        assert!(matches!(integral_generating(2, 0.9, &q), Err(Error::Quadrature { .. })));
    }

    #[test]
    fn argument_validation() {
        let q = QuadratureConfig::default();
        assert!(integral_generating(3, 0.0, &q).is_err());
        assert!(integral_generating(0, 1.0, &q).is_err());
        assert!(contour_coefficients(0, 4, 1.5, 16, &q).is_err());
        assert!(contour_coefficients(0, 16, 0.5, 16, &q).is_err());
    }
}
