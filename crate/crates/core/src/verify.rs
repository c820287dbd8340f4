//! Named verification suites comparing computed quantities with closed-form
//! references. Each suite yields a [`Verdict`] listing every check.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::FORMAT_VERSION;
use crate::kernels::{kernel_block, oracle_datum, KernelKind};
use crate::spectral::{
    assemble_common, assemble_geometric, canonical_embedding_residual, cluster_spectrum, eigendecompose,
};
use crate::sphere::{sample_uniform, DirectionSet};
use crate::theory::{
    contour_coefficients, generating_functions, integral_coefficients, integral_generating,
    integral_generating_closed_form, lambda_closed_form, lambda_from_integrals, legendre_p, trace_isometry_check,
    QuadratureConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Eigenvalues,
    Quadrature,
    Clusters,
    Isometry,
    KernelIdentities,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Eigenvalues,
        Suite::Quadrature,
        Suite::Clusters,
        Suite::Isometry,
        Suite::KernelIdentities,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Eigenvalues => "eigenvalues",
            Suite::Quadrature => "quadrature",
            Suite::Clusters => "clusters",
            Suite::Isometry => "isometry",
            Suite::KernelIdentities => "kernel-identities",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

/// Tolerance for each family of checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalue from integrals against the closed form.
    pub eigenvalue: f64,
    /// Quadrature of the generating integrals against their closed forms.
    pub quadrature: f64,
    /// Legendre partial sums against the generating function.
    pub generating: f64,
    /// Contour-extracted coefficients against direct integrals.
    pub coefficients: f64,
    /// Trace identity.
    pub trace: f64,
    /// Relative residual of the canonical sections as eigenvectors.
    pub canonical: f64,
    /// Blockwise kernel identities.
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eigenvalue: 1e-9,
            quadrature: 1e-10,
            generating: 1e-10,
            coefficients: 1e-8,
            trace: 1e-12,
            canonical: 0.05,
            kernel: 1e-10,
        }
    }
}

/// Parameters shared by the suites; each suite reads what it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub suite: Suite,
    /// Node count for the clusters and isometry suites.
    pub n: usize,
    pub seed: u64,
    /// Clusters checked in the clusters suite.
    pub n_max: usize,
    /// Highest index in the eigenvalue suite.
    pub eigenvalue_count: usize,
    /// Samples for the trace identity.
    pub trace_samples: usize,
    /// Random test vectors for the canonical-embedding check.
    pub canonical_vectors: usize,
    /// Random direction pairs for the kernel identities.
    pub kernel_pairs: usize,
    pub quadrature: QuadratureConfig,
    pub tolerances: Tolerances,
}

impl VerifyConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            n: match suite {
                Suite::Isometry => 500,
                _ => 400,
            },
            seed: 1,
            n_max: 3,
            eigenvalue_count: 20,
            trace_samples: 1000,
            canonical_vectors: 10,
            kernel_pairs: 10_000,
            quadrature: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `|computed − reference| ≤ tolerance`.
    pub fn close(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            reference,
            tolerance,
            passed: (computed - reference).abs() <= tolerance,
        }
    }

    /// Passes when `computed < bound`; `reference` records the bound.
    pub fn below(name: impl Into<String>, computed: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            reference: bound,
            tolerance: 0.0,
            passed: computed < bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub format_version: String,
    pub suite: Suite,
    pub config: VerifyConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Runs the suite named in `config`.
pub fn run_suite(config: &VerifyConfig) -> Result<Verdict> {
    let checks = match config.suite {
        Suite::Eigenvalues => eigenvalue_checks(config)?,
        Suite::Quadrature => quadrature_checks(config)?,
        Suite::Clusters => cluster_checks(config)?,
        Suite::Isometry => isometry_checks(config)?,
        Suite::KernelIdentities => kernel_checks(config)?,
    };
    Ok(Verdict {
        format_version: FORMAT_VERSION.into(),
        suite: config.suite,
        config: config.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn eigenvalue_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    (1..=config.eigenvalue_count)
        .map(|n| {
            Ok(Check::close(
                format!("lambda_{n}"),
                lambda_from_integrals(n, &config.quadrature)?,
                lambda_closed_form(n)?,
                config.tolerances.eigenvalue,
            ))
        })
        .collect()
}

/// The `t` grid for the generating integrals.
pub const T_GRID: [f64; 6] = [-0.9, -0.5, 0.0, 0.3, 0.7, 0.9];

/// Coefficients compared between contour extraction and direct integrals.
pub const CONTOUR_COEFFICIENTS: usize = 12;

fn quadrature_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    let q = &config.quadrature;
    let tol = &config.tolerances;
    let mut checks = Vec::new();
    for k in 0..=2u8 {
        for &t in &T_GRID {
            let v = integral_generating(k, t, q)?;
            checks.push(Check::close(
                format!("I{k}({t})"),
                v.re,
                integral_generating_closed_form(k, t)?,
                tol.quadrature,
            ));
            checks.push(Check::close(format!("Im I{k}({t})"), v.im, 0.0, tol.quadrature));
        }
    }
    for (theta, t) in generating_grid() {
        let sum: f64 = (0..=30).map(|n| legendre_p(n, theta.cos()) * t.powi(n as i32)).sum();
        let g = generating_functions(theta, t)?.g;
        checks.push(Check::close(format!("G({theta:.4}, {t:.2})"), sum, g.re, tol.generating));
    }
    for k in 0..=2u8 {
        let contour = contour_coefficients(k, CONTOUR_COEFFICIENTS, 0.5, 64, q)?;
        for (idx, c) in contour.iter().enumerate() {
            let n = idx + 1;
            checks.push(Check::close(
                format!("I{k}_{n} contour"),
                *c,
                integral_coefficients(n, q)?.get(k),
                tol.coefficients,
            ));
        }
    }
    Ok(checks)
}

/// `10 × 10` grid of `(θ, t)` with `θ ∈ (0, π)` and `|t| ≤ 0.3`, where
/// thirty terms of the Legendre series reach `1e−10`.
pub fn generating_grid() -> Vec<(f64, f64)> {
    let thetas = (0..10).map(|a| PI * (a as f64 + 0.5) / 10.0);
    thetas
        .flat_map(|theta| (0..10).map(move |b| (theta, -0.3 + 0.6 * b as f64 / 9.0)))
        .collect()
}

fn cluster_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    let ds = sample_uniform(config.n, config.seed)?;
    let mut checks = Vec::new();
    for kind in [KernelKind::Common, KernelKind::Transport] {
        let op = match kind {
            KernelKind::Common => assemble_common(&oracle_datum(&ds)?)?,
            _ => assemble_geometric(&ds, kind)?,
        };
        let spectrum = eigendecompose(&op)?;
        for m in cluster_spectrum(&spectrum, kind, config.n_max, None)? {
            checks.push(Check::close(
                format!("{kind} count near {:.6}", m.predicted),
                m.count as f64,
                m.expected_multiplicity as f64,
                0.0,
            ));
        }
    }
    Ok(checks)
}

fn isometry_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = vec![Check::close(
        "trace",
        trace_isometry_check(config.trace_samples, config.seed)?,
        3.0,
        config.tolerances.trace,
    )];
    let ds = sample_uniform(config.n, config.seed)?;
    let op = assemble_common(&oracle_datum(&ds)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for k in 0..config.canonical_vectors {
        let v = random_vector(&mut rng);
        checks.push(Check::below(
            format!("canonical residual {k}"),
            canonical_embedding_residual(&op, &ds, &v)?,
            config.tolerances.canonical,
        ));
    }
    Ok(checks)
}

fn random_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..=1.0));
        if v.norm() > 1e-3 {
            return v;
        }
    }
}

/// Largest blockwise deviations over random pairs: `T − (C − O)` and the
/// transpose law `K(y, x) − K(x, y)ᵀ` for each kind.
fn kernel_checks(config: &VerifyConfig) -> Result<Vec<Check>> {
    let ds = sample_uniform(2 * config.kernel_pairs, config.seed)?;
    let deviations = (0..config.kernel_pairs)
        .into_par_iter()
        .map(|p| pair_deviations(&ds, 2 * p, 2 * p + 1))
        .collect::<Result<Vec<[f64; 4]>>>()?;
    let worst = |k: usize| deviations.iter().map(|d| d[k]).fold(0.0, f64::max);
    let tol = config.tolerances.kernel;
    Ok(vec![
        Check::close("T = C - O", worst(0), 0.0, tol),
        Check::close("C(y,x) = C(x,y)^T", worst(1), 0.0, tol),
        Check::close("O(y,x) = O(x,y)^T", worst(2), 0.0, tol),
        Check::close("T(y,x) = T(x,y)^T", worst(3), 0.0, tol),
    ])
}

fn pair_deviations(ds: &DirectionSet, i: usize, j: usize) -> Result<[f64; 4]> {
    let (x, y) = (&ds.frames[i], &ds.frames[j]);
    let block = |kind, a, b| kernel_block(kind, a, b);
    let c = block(KernelKind::Common, x, y)?;
    let o = block(KernelKind::Orthographic, x, y)?;
    let t = block(KernelKind::Transport, x, y)?;
    Ok([
        (t - (c - o)).amax(),
        (block(KernelKind::Common, y, x)? - c.transpose()).amax(),
        (block(KernelKind::Orthographic, y, x)? - o.transpose()).amax(),
        (block(KernelKind::Transport, y, x)? - t.transpose()).amax(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), serde_json::json!(s.name()));
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn eigenvalue_suite_passes() {
        let v = run_suite(&VerifyConfig::new(Suite::Eigenvalues)).unwrap();
        assert_eq!(v.checks.len(), 20);
        assert!(v.passed);
    }

    #[test]
    fn quadrature_suite_passes() {
        let v = run_suite(&VerifyConfig::new(Suite::Quadrature)).unwrap();
        assert_eq!(v.checks.len(), 36 + 100 + 36);
        let failed: Vec<_> = v.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn kernel_suite_passes_and_tightening_fails() {
        let mut cfg = VerifyConfig::new(Suite::KernelIdentities);
        cfg.kernel_pairs = 500;
        assert!(run_suite(&cfg).unwrap().passed);
        cfg.tolerances.kernel = -1.0;
        assert!(!run_suite(&cfg).unwrap().passed);
    }

    #[test]
    fn small_isometry_and_cluster_suites() {
        let mut cfg = VerifyConfig::new(Suite::Isometry);
        cfg.n = 200;
        cfg.canonical_vectors = 3;
        cfg.tolerances.canonical = 0.1;
        let v = run_suite(&cfg).unwrap();
        assert!(v.passed, "{:?}", v.checks);
        assert_eq!(v.checks.len(), 4);

        let mut cfg = VerifyConfig::new(Suite::Clusters);
        cfg.n = 100;
        cfg.n_max = 1;
        let v = run_suite(&cfg).unwrap();
        assert_eq!(v.checks.len(), 2);
        assert!(v.passed, "{:?}", v.checks);
    }

    #[test]
    fn verdict_round_trip() {
        let v = run_suite(&VerifyConfig::new(Suite::Eigenvalues)).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Verdict>(&text).unwrap(), v);
    }
}
