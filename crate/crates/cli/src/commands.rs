//! One function per subcommand. Every input is read and every result computed
//! before the first artifact is written.

use serde::Serialize;
use serde_json::{json, Value};
use tracing::{info, warn};

use commonlines::formats::{
    read_json, read_truth, write_datum, write_json, write_slices, write_spectrum_csv, write_truth, DatumFile,
    DetectionFile, ReportFile, FORMAT_VERSION,
};
use commonlines::kernels::{oracle_datum as build_oracle_datum, KernelKind};
use commonlines::projection::{default_phantom, simulate as run_simulation, Phantom, SimulationConfig, SliceGrid};
use commonlines::spectral::{
    assemble, assemble_common, cluster_spectrum, eigendecompose, reconstruct as run_reconstruction, ClusterMatch,
    OperatorSource,
};
use commonlines::sphere::sample_uniform;
use commonlines::verify::{run_suite, VerifyConfig};
use commonlines::{Error, Result};

use crate::{Failure, OracleDatumArgs, ReconstructArgs, SimulateArgs, SpectrumArgs, VerifyArgs};

/// Smallest node count for simulated data.
const MIN_NODES: usize = 4;
/// Oracle data only needs three separated directions.
const MIN_ORACLE_NODES: usize = 3;

/// The resolved run configuration: the command, its arguments and the
/// thread hint.
fn run_config<T: Serialize>(command: &str, args: &T, threads: Option<usize>) -> Result<Value> {
    let mut value = serde_json::to_value(args)?;
    if let Value::Object(map) = &mut value {
        map.insert("command".into(), json!(command));
        map.insert("threads".into(), json!(threads));
    }
    Ok(value)
}

fn check_nodes(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!("need n >= {min}, got {n}")));
    }
    Ok(())
}

pub fn oracle_datum(args: &OracleDatumArgs, threads: Option<usize>) -> std::result::Result<(), Failure> {
    check_nodes(args.n, MIN_ORACLE_NODES)?;
    let config = run_config("oracle-datum", args, threads)?;
    let ds = sample_uniform(args.n, args.seed)?;
    let datum = build_oracle_datum(&ds)?;
    write_datum(&args.out_datum, &datum, Some(config.clone()))?;
    write_truth(&args.out_truth, &ds, Some(config))?;
    info!(n = args.n, pairs = datum.pairs().count(), "oracle datum written");
    Ok(())
}

pub fn simulate(args: &SimulateArgs, threads: Option<usize>) -> std::result::Result<(), Failure> {
    check_nodes(args.n, MIN_NODES)?;
    let snr = if args.snr == 0.0 {
        None
    } else if args.snr > 0.0 {
        Some(args.snr)
    } else {
        return Err(Error::InvalidArgument(format!("snr must be positive or 0, got {}", args.snr)).into());
    };
    let grid = SliceGrid {
        n_theta: args.n_theta,
        n_r: args.n_r,
        r_max: args.r_max,
    };
    grid.validate()?;
    let phantom: Phantom = match &args.phantom {
        Some(path) => read_json(path)?,
        None => default_phantom(args.seed),
    };
    let mut config = run_config("simulate", args, threads)?;
    config["phantom_components"] = serde_json::to_value(&phantom).map_err(Error::from)?["components"].take();

    let ds = sample_uniform(args.n, args.seed)?;
    let sim = run_simulation(
        &phantom,
        &ds,
        &SimulationConfig {
            grid,
            snr,
            seed: args.seed,
        },
    )?;
    if !sim.detection.degenerate.is_empty() {
        warn!(count = sim.detection.degenerate.len(), "degenerate pairs excluded from the datum");
    }
    if let Some(s) = &sim.detection.summary {
        info!(
            within_one_bin = s.fraction_within_one_bin,
            mean_error_deg = s.mean_error_deg,
            "detection finished"
        );
    }

    write_datum(&args.out_datum, &sim.datum, Some(config.clone()))?;
    write_truth(&args.out_truth, &ds, Some(config.clone()))?;
    if let (Some(bin), Some(meta)) = (&args.out_slices, &args.out_slices_meta) {
        write_slices(bin, meta, &sim.slices, Some(config.clone()))?;
    }
    write_json(&args.out_detection, &DetectionFile::new(sim.detection, config))?;
    Ok(())
}

pub fn reconstruct(args: &ReconstructArgs, threads: Option<usize>) -> std::result::Result<(), Failure> {
    let file: DatumFile = read_json(&args.datum)?;
    let mut config = run_config("reconstruct", args, threads)?;
    config["datum_config"] = file.config.clone().unwrap_or(Value::Null);
    let datum = file.into_datum()?;
    let truth = args.truth.as_deref().map(read_truth).transpose()?;

    let recon = run_reconstruction(&datum, truth.as_ref())?;
    let report = &recon.report;
    if let Some(w) = &report.warning {
        warn!("{w}");
    }
    info!(
        n = report.n,
        dim = report.dim_intrinsic,
        assemble_s = report.timings.assemble_s,
        eigendecompose_s = report.timings.eigendecompose_s,
        "reconstruction finished"
    );
    if let Some(r) = &report.registration {
        info!(mean_angular_error_deg = r.mean_angular_error_deg, "registered against truth");
    }
    write_json(&args.out_report, &ReportFile::new(recon.report.clone(), config))?;
    write_spectrum_csv(&args.out_spectrum, &recon.spectrum)?;
    Ok(())
}

pub fn verify(args: &VerifyArgs, _threads: Option<usize>) -> std::result::Result<(), Failure> {
    let mut cfg = VerifyConfig::new(args.suite.into());
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n_max) = args.n_max {
        cfg.n_max = n_max;
    }
    if let Some(p) = args.kernel_pairs {
        cfg.kernel_pairs = p;
    }
    if let Some(m) = args.trace_samples {
        cfg.trace_samples = m;
    }
    let tol = &mut cfg.tolerances;
    for (value, slot) in [
        (args.tol_eigenvalue, &mut tol.eigenvalue),
        (args.tol_quadrature, &mut tol.quadrature),
        (args.tol_generating, &mut tol.generating),
        (args.tol_coefficients, &mut tol.coefficients),
        (args.tol_trace, &mut tol.trace),
        (args.tol_canonical, &mut tol.canonical),
        (args.tol_kernel, &mut tol.kernel),
    ] {
        if let Some(v) = value {
            *slot = v;
        }
    }

    let verdict = run_suite(&cfg)?;
    write_json(&args.out, &verdict)?;
    let failed: Vec<_> = verdict.checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        eprintln!(
            "FAIL {}: computed {:e}, reference {:e}, tolerance {:e}",
            c.name, c.computed, c.reference, c.tolerance
        );
    }
    println!(
        "{}: {}/{} checks passed",
        verdict.suite,
        verdict.checks.len() - failed.len(),
        verdict.checks.len()
    );
    if verdict.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[derive(Serialize)]
struct ClusterFile {
    format_version: &'static str,
    config: Value,
    clusters: Vec<ClusterMatch>,
}

pub fn spectrum(args: &SpectrumArgs, threads: Option<usize>) -> std::result::Result<(), Failure> {
    let kind = KernelKind::from(args.kind);
    let op = match (&args.datum, &args.truth, args.n) {
        (Some(path), _, _) => {
            if kind != KernelKind::Common {
                return Err(Error::InvalidArgument(format!("a datum only defines the common operator, not {kind}")).into());
            }
            let datum = read_json::<DatumFile>(path)?.into_datum()?;
            assemble_common(&datum)?
        }
        (None, Some(path), _) => assemble(OperatorSource::Directions(&read_truth(path)?), kind)?,
        (None, None, Some(n)) => {
            check_nodes(n, MIN_NODES)?;
            assemble(OperatorSource::Directions(&sample_uniform(n, args.seed)?), kind)?
        }
        (None, None, None) => return Err(Error::InvalidArgument("no operator source given".into()).into()),
    };
    let spectrum = eigendecompose(&op)?;
    let clusters = args
        .n_max
        .map(|n_max| cluster_spectrum(&spectrum, kind, n_max, args.window))
        .transpose()?;

    write_spectrum_csv(&args.out, &spectrum)?;
    if let (Some(path), Some(clusters)) = (&args.out_clusters, clusters) {
        let file = ClusterFile {
            format_version: FORMAT_VERSION,
            config: run_config("spectrum", args, threads)?,
            clusters,
        };
        write_json(path, &file)?;
    }
    Ok(())
}
