//! Acceptance criteria for the reconstruction, each evaluated end to end at
//! its stated tolerance. [`evaluate_all`] runs them in order and never
//! short-circuits: a criterion that errors is reported as failed.

use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use commonlines::kernels::{kernel_block, oracle_datum, KernelKind};
use commonlines::projection::{default_phantom, simulate, SimulationConfig, SliceGrid};
use commonlines::spectral::{
    assemble_common, assemble_geometric, canonical_embedding_residual, cluster_spectrum, eigendecompose,
    reconstruct, Spectrum,
};
use commonlines::sphere::sample_uniform;
use commonlines::theory::{
    generating_functions, integral_generating, integral_generating_closed_form, lambda_closed_form,
    lambda_from_integrals, legendre_p, trace_isometry_check, QuadratureConfig,
};
use commonlines::verify::{generating_grid, T_GRID};
use commonlines::Result;

/// Seeds every multi-seed criterion runs over.
pub const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
/// Node counts of the oracle convergence study.
pub const STUDY_SIZES: [usize; 4] = [50, 100, 200, 400];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub index: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{:>2}] {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.index,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

/// One reconstruction of an oracle datum registered against its truth.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub n: usize,
    pub seed: u64,
    pub dim: usize,
    pub gap: f64,
    pub mean_error_deg: f64,
    /// Kept for the largest study size only.
    pub spectrum: Option<Spectrum>,
}

/// Oracle reconstructions for every study size and seed.
pub fn oracle_study() -> Result<Vec<OracleRun>> {
    let largest = *STUDY_SIZES.iter().max().expect("non-empty");
    let mut runs = Vec::new();
    for &n in &STUDY_SIZES {
        for &seed in &SEEDS {
            let ds = sample_uniform(n, seed)?;
            let rec = reconstruct(&oracle_datum(&ds)?, Some(&ds))?;
            let reg = rec.report.registration.as_ref().map(|r| r.mean_angular_error_deg);
            runs.push(OracleRun {
                n,
                seed,
                dim: rec.report.dim_intrinsic,
                gap: rec.spectrum.gap_after(3).unwrap_or(f64::NAN),
                mean_error_deg: reg.unwrap_or(f64::NAN),
                spectrum: (n == largest).then_some(rec.spectrum),
            });
        }
    }
    Ok(runs)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

pub fn closed_form_eigenvalues() -> Result<(bool, String)> {
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for n in 1..=20 {
        worst = worst.max((lambda_from_integrals(n, &q)? - lambda_closed_form(n)?).abs());
    }
    Ok((worst <= 1e-9, format!("max |Δλ| = {worst:.2e} over n = 1..20 (tol 1e-9)")))
}

pub fn integral_closed_forms() -> Result<(bool, String)> {
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for k in 0..=2u8 {
        for &t in &T_GRID {
            let v = integral_generating(k, t, &q)?;
            worst = worst.max((v - integral_generating_closed_form(k, t)?).norm());
        }
    }
    Ok((worst <= 1e-10, format!("max |ΔI| = {worst:.2e} on 6 points, k = 0..2 (tol 1e-10)")))
}

pub fn generating_function() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (theta, t) in generating_grid() {
        let sum: f64 = (0..30).map(|n| legendre_p(n, theta.cos()) * t.powi(n as i32)).sum();
        worst = worst.max((sum - generating_functions(theta, t)?.g.re).abs());
    }
    Ok((worst <= 1e-10, format!("max |ΔG| = {worst:.2e} on 10×10 grid, 30 terms (tol 1e-10)")))
}

pub fn kernel_decomposition() -> Result<(bool, String)> {
    const PAIRS: usize = 10_000;
    let ds = sample_uniform(2 * PAIRS, 1)?;
    let mut worst: f64 = 0.0;
    for p in 0..PAIRS {
        let (x, y) = (&ds.frames[2 * p], &ds.frames[2 * p + 1]);
        let c = kernel_block(KernelKind::Common, x, y)?;
        let o = kernel_block(KernelKind::Orthographic, x, y)?;
        let t = kernel_block(KernelKind::Transport, x, y)?;
        worst = worst.max((t - (c - o)).amax());
    }
    Ok((worst <= 1e-10, format!("max |T − (C − O)| = {worst:.2e} over 10⁴ pairs (tol 1e-10)")))
}

pub const CLUSTER_WINDOW: f64 = 0.05;

/// Counts within `±0.05` of the first three predicted eigenvalues at
/// `N = 400`, for the common and transport operators.
pub fn cluster_counts(study: &[OracleRun]) -> Result<(bool, String)> {
    let mut passed = true;
    let mut lines = Vec::new();
    for run in study.iter().filter(|r| r.spectrum.is_some()) {
        let common = run.spectrum.as_ref().expect("filtered");
        let ds = sample_uniform(run.n, run.seed)?;
        let transport = eigendecompose(&assemble_geometric(&ds, KernelKind::Transport)?)?;
        let mut row = Vec::new();
        for (kind, spectrum, expected) in [
            (KernelKind::Common, common, [3, 5, 7]),
            (KernelKind::Transport, &transport, [6, 10, 14]),
        ] {
            let counts: Vec<usize> = cluster_spectrum(spectrum, kind, 3, Some(CLUSTER_WINDOW))?
                .iter()
                .map(|m| m.count)
                .collect();
            passed &= counts == expected;
            row.push(format!("{kind} {counts:?}"));
        }
        lines.push(format!("seed {}: {}", run.seed, row.join(", ")));
    }
    Ok((
        passed,
        format!("N = 400, window 0.05, want common [3, 5, 7] and transport [6, 10, 14]; {}", lines.join("; ")),
    ))
}

pub fn spectral_gap(study: &[OracleRun]) -> (bool, String) {
    let runs: Vec<_> = study.iter().filter(|r| r.n >= 100).collect();
    let min = runs.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    (
        runs.iter().all(|r| r.gap > 0.3),
        format!("min λ₃ − λ₄ = {min:.4} over N ∈ {{100, 200, 400}}, 5 seeds (need > 0.3)"),
    )
}

pub fn intrinsic_dimension(study: &[OracleRun]) -> (bool, String) {
    let off: Vec<String> = study
        .iter()
        .filter(|r| r.dim != 3)
        .map(|r| format!("N = {} seed {} dim {}", r.n, r.seed, r.dim))
        .collect();
    let detail = if off.is_empty() {
        format!("dim = 3 in all {} runs", study.len())
    } else {
        off.join(", ")
    };
    (off.is_empty(), detail)
}

/// Median over seeds of the mean direction error at each study size.
pub fn median_errors(study: &[OracleRun]) -> Vec<(usize, f64)> {
    STUDY_SIZES
        .iter()
        .map(|&n| {
            let mut e: Vec<f64> = study.iter().filter(|r| r.n == n).map(|r| r.mean_error_deg).collect();
            (n, median(&mut e))
        })
        .collect()
}

pub fn reconstruction_fidelity(study: &[OracleRun]) -> (bool, String) {
    let medians = median_errors(study);
    let at_200 = medians.iter().find(|(n, _)| *n == 200).map_or(f64::NAN, |m| m.1);
    let decreasing = medians.windows(2).all(|w| w[1].1 < w[0].1);
    let table: Vec<String> = medians.iter().map(|(n, e)| format!("{n}: {e:.2}°")).collect();
    (
        at_200 < 1.0 && decreasing,
        format!(
            "median mean error {} (need < 1° at N = 200, decreasing: {decreasing})",
            table.join(", ")
        ),
    )
}

pub fn canonical_embedding() -> Result<(bool, String)> {
    let ds = sample_uniform(500, 1)?;
    let op = assemble_common(&oracle_datum(&ds)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let v = loop {
            let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..=1.0));
            if v.norm() > 1e-3 {
                break v;
            }
        };
        worst = worst.max(canonical_embedding_residual(&op, &ds, &v)?);
    }
    Ok((worst < 0.05, format!("max residual {worst:.4} over 10 vectors at N = 500 (need < 0.05)")))
}

pub fn trace_identity() -> Result<(bool, String)> {
    let trace = trace_isometry_check(1000, 1)?;
    let dev = (trace - 3.0).abs();
    Ok((dev <= 1e-12, format!("|Tr − 3| = {dev:.2e} (tol 1e-12)")))
}

/// Noiseless and `snr = 4` detection at `N = 100`, `n_theta = 360`.
pub fn detection_pipeline() -> Result<(bool, String)> {
    let ds = sample_uniform(100, 1)?;
    let phantom = default_phantom(1);
    let grid = SliceGrid::default();
    let clean = simulate(&phantom, &ds, &SimulationConfig { grid, snr: None, seed: 1 })?;
    let within = clean.detection.summary.as_ref().map_or(0.0, |s| s.fraction_within_one_bin);

    let noisy = simulate(&phantom, &ds, &SimulationConfig { grid, snr: Some(4.0), seed: 1 })?;
    let rec = reconstruct(&noisy.datum, Some(&ds))?;
    let dim = rec.report.dim_intrinsic;
    let err = rec.report.registration.as_ref().map(|r| r.mean_angular_error_deg);
    let err_text = err.map_or("not registered".into(), |e| format!("{e:.2}°"));

    Ok((
        within >= 0.99 && dim == 3 && err.is_some_and(|e| e < 5.0),
        format!(
            "noiseless {:.2}% within one bin (need ≥ 99%); snr 4: dim {dim} (need 3), mean error {err_text} (need < 5°)",
            100.0 * within
        ),
    ))
}

fn timed(index: usize, title: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        index,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Evaluates every criterion, printing each outcome as it completes.
pub fn evaluate_all(mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let mut outcomes = Vec::new();
    let mut push = |o: Outcome| {
        report(&o);
        outcomes.push(o);
    };
    push(within_runtime(timed(1, "closed-form eigenvalue law", closed_form_eigenvalues), 1.0));
    push(within_runtime(timed(2, "integral closed forms", integral_closed_forms), 1.0));
    push(within_runtime(timed(3, "generating function", generating_function), 1.0));
    push(within_runtime(timed(4, "kernel decomposition", kernel_decomposition), 5.0));

    let start = Instant::now();
    let study = oracle_study();
    let study_seconds = start.elapsed().as_secs_f64();
    match study {
        Ok(study) => {
            let mut o = timed(5, "spectrum clusters", || cluster_counts(&study));
            o.seconds += study_seconds;
            push(o);
            push(timed(6, "spectral gap", || Ok(spectral_gap(&study))));
            push(timed(7, "intrinsic dimension", || Ok(intrinsic_dimension(&study))));
            push(timed(8, "reconstruction fidelity", || Ok(reconstruction_fidelity(&study))));
        }
        Err(e) => {
            for (index, title) in [
                (5, "spectrum clusters"),
                (6, "spectral gap"),
                (7, "intrinsic dimension"),
                (8, "reconstruction fidelity"),
            ] {
                push(Outcome {
                    index,
                    title,
                    passed: false,
                    detail: format!("oracle study failed: {e}"),
                    seconds: study_seconds,
                });
            }
        }
    }
    push(timed(9, "canonical embedding", canonical_embedding));
    push(timed(10, "trace identity", trace_identity));
    push(timed(11, "detection pipeline", detection_pipeline));
    outcomes
}

fn within_runtime(mut o: Outcome, limit: f64) -> Outcome {
    if o.seconds >= limit {
        o.passed = false;
        o.detail.push_str(&format!("; runtime over {limit} s"));
    }
    o
}
