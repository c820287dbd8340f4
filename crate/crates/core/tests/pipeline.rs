use commonlines::formats::{read_datum, read_spectrum_csv, read_truth, write_datum, write_spectrum_csv, write_truth};
use commonlines::kernels::{oracle_datum, Provenance};
use commonlines::projection::{default_phantom, simulate, SimulationConfig, SliceGrid};
use commonlines::spectral::reconstruct;
use commonlines::sphere::{sample_uniform, DirectionSet, PlaneBasis, UnitVector3};
use nalgebra::{Rotation3, Unit, Vector3};

#[test]
fn oracle_reconstruction_at_two_hundred_nodes() {
    let ds = sample_uniform(200, 1).unwrap();
    let rec = reconstruct(&oracle_datum(&ds).unwrap(), Some(&ds)).unwrap();
    assert_eq!(rec.report.dim_intrinsic, 3);
    assert!(rec.report.warning.is_none());
    let reg = rec.report.registration.as_ref().unwrap();
    // Frozen from the finite-N study (3.08° at this seed).
    assert!(reg.mean_angular_error_deg < 5.0, "{}", reg.mean_angular_error_deg);
    assert!((reg.registration_determinant.abs() - 1.0).abs() < 1e-9);
    assert_eq!(reg.angular_errors.len(), 200);
}

#[test]
fn error_shrinks_from_fifty_to_four_hundred_nodes() {
    let err = |n| {
        let ds = sample_uniform(n, 1).unwrap();
        let rec = reconstruct(&oracle_datum(&ds).unwrap(), Some(&ds)).unwrap();
        rec.report.registration.unwrap().mean_angular_error_deg
    };
    assert!(err(400) < err(50));
}

#[test]
fn noiseless_detection_feeds_reconstruction() {
    let ds = sample_uniform(50, 2).unwrap();
    let cfg = SimulationConfig {
        grid: SliceGrid::default(),
        snr: None,
        seed: 2,
    };
    let sim = simulate(&default_phantom(2), &ds, &cfg).unwrap();
    assert!(matches!(sim.datum.provenance, Provenance::Detected(_)));
    let rec = reconstruct(&sim.datum, Some(&ds)).unwrap();
    assert_eq!(rec.report.dim_intrinsic, 3);
    // Frozen from the detection study (7.85° at this seed).
    let err = rec.report.registration.unwrap().mean_angular_error_deg;
    assert!(err < 10.0, "{err}");
}

#[test]
fn files_reproduce_the_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let ds = sample_uniform(60, 5).unwrap();
    let datum = oracle_datum(&ds).unwrap();
    let (d, t, s) = (dir.path().join("d.json"), dir.path().join("t.json"), dir.path().join("s.csv"));
    write_datum(&d, &datum, None).unwrap();
    write_truth(&t, &ds, None).unwrap();

    let direct = reconstruct(&datum, Some(&ds)).unwrap();
    let loaded = reconstruct(&read_datum(&d).unwrap(), Some(&read_truth(&t).unwrap())).unwrap();
    assert_eq!(direct.spectrum.eigenvalues, loaded.spectrum.eigenvalues);
    assert_eq!(direct.report.registration, loaded.report.registration);

    write_spectrum_csv(&s, &direct.spectrum).unwrap();
    let values = read_spectrum_csv(&s).unwrap();
    assert_eq!(values.len(), 120);
    assert_eq!(values, direct.spectrum.eigenvalues.as_slice());
}

#[test]
fn rotated_configuration_has_the_same_spectrum() {
    let ds = sample_uniform(40, 9).unwrap();
    let axis = Unit::new_normalize(Vector3::new(1.0, 2.0, -0.5));
    let r = Rotation3::from_axis_angle(&axis, 0.7).into_inner();
    let frames = ds
        .frames
        .iter()
        .map(|f| {
            let m = |u: &UnitVector3| UnitVector3::new_normalize(r * u.as_vector()).unwrap();
            PlaneBasis::new(m(&f.b1), m(&f.b2), m(&f.normal)).unwrap()
        })
        .collect();
    let rotated = DirectionSet::from_frames(frames, ds.seed).unwrap();
    let a = reconstruct(&oracle_datum(&ds).unwrap(), Some(&ds)).unwrap();
    let b = reconstruct(&oracle_datum(&rotated).unwrap(), Some(&rotated)).unwrap();
    for (x, y) in a.spectrum.eigenvalues.iter().zip(b.spectrum.eigenvalues.iter()) {
        assert!((x - y).abs() < 1e-10);
    }
    let (ea, eb) = (a.report.registration.unwrap(), b.report.registration.unwrap());
    assert!((ea.mean_angular_error - eb.mean_angular_error).abs() < 1e-8);
}
