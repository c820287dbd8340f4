//! Composite Gauss–Legendre quadrature on `(0, π)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Composite Gauss–Legendre rule on `(0, π)`: `panels` equal sub-intervals with
/// `points_per_panel` nodes each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub points_per_panel: usize,
    pub panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            points_per_panel: 64,
            panels: 8,
        }
    }
}

impl QuadratureConfig {
    pub fn node_count(&self) -> usize {
        self.points_per_panel * self.panels
    }

    /// The same rule with twice as many panels (and so twice the nodes).
    pub fn refined(&self) -> Self {
        Self {
            points_per_panel: self.points_per_panel,
            panels: self.panels * 2,
        }
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        if self.points_per_panel == 0 || self.panels == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one point and one panel".into(),
            ));
        }
        let (x, w) = gauss_legendre(self.points_per_panel);
        let h = PI / self.panels as f64;
        let mut nodes = Vec::with_capacity(self.node_count());
        let mut weights = Vec::with_capacity(self.node_count());
        for p in 0..self.panels {
            let mid = (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Ok(QuadratureRule { nodes, weights })
    }
}

/// Nodes and weights of a concrete rule.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_symmetric() {
        for n in [1, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(5);
        for deg in 0..10 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn composite_rule_integrates_sine() {
        let rule = QuadratureConfig::default().rule().unwrap();
        assert_eq!(rule.nodes.len(), 512);
        assert!((rule.integrate(f64::sin) - 2.0).abs() < 1e-14);
        assert!(rule.nodes.iter().all(|&x| x > 0.0 && x < PI));
    }

    #[test]
    fn empty_rule_rejected() {
        let q = QuadratureConfig {
            points_per_panel: 0,
            panels: 1,
        };
        assert!(q.rule().is_err());
    }
}
