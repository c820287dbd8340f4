//! Legendre polynomials, their generating function and its raised versions.
//!
//! With `c = cos θ` and `D = 1 − 2tc + t²`, the zonal generating function is
//! `G = D^{-1/2} = Σ P_n(c) tⁿ`. Applying the raising operator at `φ = 0`
//! gives `EG = i t sin θ D^{-3/2}` and `E²G = −3 t² sin²θ D^{-5/2}`. Term by
//! term these equal `E P_n = i sin θ P_n'(c)` and `E² P_n = −sin²θ P_n''(c)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `P_n(c)` by the three-term recurrence; `P_n(1) = 1`.
pub fn legendre_p(n: usize, c: f64) -> f64 {
    legendre_with_derivatives(n, c)[0]
}

/// `[P_n(c), P_n'(c), P_n''(c)]`.
///
/// Derivatives use `P'_{m+1} = P'_{m-1} + (2m+1) P_m` (and the same relation
/// one order up), which stays finite at `c = ±1`.
pub fn legendre_with_derivatives(n: usize, c: f64) -> [f64; 3] {
    // (P, P', P'') at orders m-1 and m
    let mut prev = [1.0, 0.0, 0.0];
    if n == 0 {
        return prev;
    }
    let mut cur = [c, 1.0, 0.0];
    for m in 1..n {
        let mf = m as f64;
        let p = ((2.0 * mf + 1.0) * c * cur[0] - mf * prev[0]) / (mf + 1.0);
        let dp = prev[1] + (2.0 * mf + 1.0) * cur[0];
        let ddp = prev[2] + (2.0 * mf + 1.0) * cur[1];
        prev = cur;
        cur = [p, dp, ddp];
    }
    cur
}

/// `E^k P_n` at `(φ = 0, θ)` for `k ∈ {0, 1, 2}`.
pub fn raised_legendre(k: u8, n: usize, theta: f64) -> Result<Complex64> {
    let (s, c) = theta.sin_cos();
    let [p, dp, ddp] = legendre_with_derivatives(n, c);
    match k {
        0 => Ok(Complex64::new(p, 0.0)),
        1 => Ok(Complex64::new(0.0, s * dp)),
        2 => Ok(Complex64::new(-s * s * ddp, 0.0)),
        _ => Err(invalid_k(k)),
    }
}

fn invalid_k(k: u8) -> Error {
    Error::InvalidArgument(format!("raising order must be 0, 1 or 2, got {k}"))
}

/// The values `(G, EG, E²G)` at `φ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratingValues {
    pub g: Complex64,
    pub eg: Complex64,
    pub e2g: Complex64,
}

/// `(G, EG, E²G)(0, θ, t)` for real `t ∈ (−1, 1)`.
pub fn generating_functions(theta: f64, t: f64) -> Result<GeneratingValues> {
    if !(t > -1.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t must lie in (-1, 1), got {t}")));
    }
    let t = Complex64::new(t, 0.0);
    Ok(GeneratingValues {
        g: raised_generating(0, theta, t),
        eg: raised_generating(1, theta, t),
        e2g: raised_generating(2, theta, t),
    })
}

/// `E^k G(0, θ, t)` for complex `|t| < 1`; `k > 2` yields zero.
///
/// For `|t| < 1` both factors of `D = (1 − t e^{iθ})(1 − t e^{−iθ})` have
/// positive real part, so the principal square root is the analytic branch.
pub(crate) fn raised_generating(k: u8, theta: f64, t: Complex64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    let d = Complex64::new(1.0, 0.0) - t * (2.0 * c) + t * t;
    let root = d.sqrt();
    match k {
        0 => root.inv(),
        1 => Complex64::i() * t * s / (d * root),
        2 => t * t * (-3.0 * s * s) / (d * d * root),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// The profiles `j⁰ = cos θ + 1`, `j¹ = 2i sin θ`, `j² = 2 cos θ − 2`.
pub fn j_profile(k: u8, theta: f64) -> Result<Complex64> {
    let (s, c) = theta.sin_cos();
    match k {
        0 => Ok(Complex64::new(c + 1.0, 0.0)),
        1 => Ok(Complex64::new(0.0, 2.0 * s)),
        2 => Ok(Complex64::new(2.0 * c - 2.0, 0.0)),
        _ => Err(invalid_k(k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn base_cases() {
        for c in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert_eq!(legendre_p(0, c), 1.0);
            assert_eq!(legendre_p(1, c), c);
        }
        assert_eq!(legendre_p(2, 0.0), -0.5);
        for n in 0..40 {
            assert!((legendre_p(n, 1.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn derivatives_match_closed_forms() {
        // P3 = (5c³ − 3c)/2
        for c in [-1.0, -0.4, 0.2, 0.9, 1.0] {
            let [p, dp, ddp] = legendre_with_derivatives(3, c);
            assert!((p - (5.0 * c * c * c - 3.0 * c) / 2.0).abs() < 1e-14);
            assert!((dp - (15.0 * c * c - 3.0) / 2.0).abs() < 1e-14);
            assert!((ddp - 15.0 * c).abs() < 1e-14);
        }
        // P_n'(1) = n(n+1)/2
        for n in 0..20 {
            let d = legendre_with_derivatives(n, 1.0)[1];
            assert!((d - (n * (n + 1)) as f64 / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_sums_reproduce_generating_function() {
        let (theta, t) = (1.0_f64, 0.3_f64);
        let sum: f64 = (0..=30).map(|n| legendre_p(n, theta.cos()) * t.powi(n as i32)).sum();
        let g = generating_functions(theta, t).unwrap().g;
        assert!((sum - g.re).abs() < 1e-10 && g.im == 0.0);
    }

    #[test]
    fn raised_series_match_raised_generating_functions() {
        for &theta in &[0.3, 1.2, 2.5] {
            for &t in &[-0.4, 0.25, 0.5] {
                let vals = generating_functions(theta, t).unwrap();
                for (k, target) in [(1u8, vals.eg), (2u8, vals.e2g)] {
                    let sum: Complex64 = (0..=60)
                        .map(|n| raised_legendre(k, n, theta).unwrap() * t.powi(n as i32))
                        .sum();
                    assert!((sum - target).norm() < 1e-10, "k={k} θ={theta} t={t}");
                }
            }
        }
    }

    #[test]
    fn generating_function_limits() {
        let t = 0.4;
        let g = generating_functions(1e-8, t).unwrap().g;
        assert!((g.re - 1.0 / (1.0 - t)).abs() < 1e-6);
        let eg = generating_functions(FRAC_PI_2, 0.5).unwrap().eg;
        assert!((eg - Complex64::new(0.0, 0.5 * 1.25f64.powf(-1.5))).norm() < 1e-15);
        for theta in [0.1, 1.0, 3.0] {
            assert_eq!(generating_functions(theta, 0.0).unwrap().e2g.norm(), 0.0);
        }
        assert!(generating_functions(1.0, 1.0).is_err());
    }

    #[test]
    fn j_profiles() {
        assert_eq!(j_profile(0, 0.0).unwrap(), Complex64::new(2.0, 0.0));
        assert!((j_profile(1, FRAC_PI_2).unwrap() - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(j_profile(2, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!(j_profile(3, 0.0).is_err());
        assert!(raised_legendre(3, 1, 0.0).is_err());
    }
}
