//! On-disk formats: JSON for datums, ground truth, reports and verdicts, CSV
//! for spectra and a little-endian binary container for polar slices.
//!
//! Every JSON artifact carries `format_version`. Writers go through a
//! temporary sibling file and a rename, so a failed run leaves no partial
//! output behind.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernels::{CommonLinesDatum, Provenance};
use crate::projection::{DetectionResult, PolarSlice, SliceGrid};
use crate::spectral::{ReconstructionReport, Spectrum};
use crate::sphere::{DirectionSet, PlaneBasis, UnitVector3};

pub const FORMAT_VERSION: &str = "1.0";

fn check_version(found: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::MalformedInput(format!(
            "unsupported format_version {found:?}, expected {FORMAT_VERSION:?}"
        )));
    }
    Ok(())
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| with_path(e, path))
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

/// Writes `bytes` to `path` through a temporary sibling file.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let tmp = partial_path(path);
    let result = (|| {
        let mut w = BufWriter::new(fs::File::create(&tmp).map_err(|e| with_path(e, &tmp))?);
        write(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path).map_err(|e| with_path(e, path))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let reader = BufReader::new(open(path)?);
    Ok(serde_json::from_reader(reader)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub c_ij: [f64; 2],
    pub c_ji: [f64; 2],
}

/// `{ format_version, n, provenance, pairs: [{ i, j, c_ij, c_ji }], config? }`
/// with `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumFile {
    pub format_version: String,
    pub n: usize,
    pub provenance: Provenance,
    pub pairs: Vec<PairRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

impl DatumFile {
    pub fn from_datum(datum: &CommonLinesDatum, config: Option<Value>) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            n: datum.n(),
            provenance: datum.provenance.clone(),
            pairs: datum
                .pairs()
                .map(|(i, j, l)| PairRecord {
                    i,
                    j,
                    c_ij: [l.c_ij.x, l.c_ij.y],
                    c_ji: [l.c_ji.x, l.c_ji.y],
                })
                .collect(),
            config,
        }
    }

    /// Rebuilds the datum, validating every pair. Missing pairs are allowed
    /// here and reported when the operator is assembled.
    pub fn into_datum(self) -> Result<CommonLinesDatum> {
        check_version(&self.format_version)?;
        let mut datum = CommonLinesDatum::empty(self.n, self.provenance);
        for p in self.pairs {
            if p.i >= p.j {
                return Err(Error::MalformedDatum {
                    i: p.i,
                    j: p.j,
                    reason: "pairs must be listed with i < j".into(),
                });
            }
            datum.insert(p.i, p.j, Vector2::from(p.c_ij), Vector2::from(p.c_ji))?;
        }
        Ok(datum)
    }
}

pub fn write_datum(path: &Path, datum: &CommonLinesDatum, config: Option<Value>) -> Result<()> {
    write_json(path, &DatumFile::from_datum(datum, config))
}

pub fn read_datum(path: &Path) -> Result<CommonLinesDatum> {
    read_json::<DatumFile>(path)?.into_datum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub x: UnitVector3,
    pub b1: UnitVector3,
    pub b2: UnitVector3,
}

/// `{ format_version, n, seed, nodes: [{ x, b1, b2 }], config? }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub format_version: String,
    pub n: usize,
    pub seed: u64,
    pub nodes: Vec<NodeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

impl TruthFile {
    pub fn from_directions(ds: &DirectionSet, config: Option<Value>) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            n: ds.len(),
            seed: ds.seed,
            nodes: ds
                .frames
                .iter()
                .map(|f| NodeRecord {
                    x: f.normal,
                    b1: f.b1,
                    b2: f.b2,
                })
                .collect(),
            config,
        }
    }

    pub fn into_directions(self) -> Result<DirectionSet> {
        check_version(&self.format_version)?;
        if self.nodes.len() != self.n {
            return Err(Error::MalformedInput(format!(
                "truth file declares n = {} but lists {} nodes",
                self.n,
                self.nodes.len()
            )));
        }
        let frames = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(k, r)| {
                PlaneBasis::new(r.b1, r.b2, r.x).map_err(|e| Error::MalformedInput(format!("node {k}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        DirectionSet::from_frames(frames, self.seed)
    }
}

pub fn write_truth(path: &Path, ds: &DirectionSet, config: Option<Value>) -> Result<()> {
    write_json(path, &TruthFile::from_directions(ds, config))
}

pub fn read_truth(path: &Path) -> Result<DirectionSet> {
    read_json::<TruthFile>(path)?.into_directions()
}

/// A reconstruction report with its run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: String,
    pub config: Value,
    #[serde(flatten)]
    pub report: ReconstructionReport,
}

impl ReportFile {
    pub fn new(report: ReconstructionReport, config: Value) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            config,
            report,
        }
    }
}

/// Common-line detection scores, degenerate pairs and the error summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFile {
    pub format_version: String,
    pub config: Value,
    #[serde(flatten)]
    pub detection: DetectionResult,
}

impl DetectionFile {
    pub fn new(detection: DetectionResult, config: Value) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            config,
            detection,
        }
    }
}

/// `index,eigenvalue` rows, descending, index from 0.
pub fn write_spectrum_csv(path: &Path, spectrum: &Spectrum) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "index,eigenvalue")?;
        for (k, l) in spectrum.eigenvalues.iter().enumerate() {
            writeln!(w, "{k},{l:e}")?;
        }
        Ok(())
    })
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<f64>> {
    let reader = BufReader::new(open(path)?);
    let mut lines = reader.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == "index,eigenvalue" => {}
        other => return Err(Error::MalformedInput(format!("bad spectrum header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let line = line?;
            let (idx, val) = line
                .split_once(',')
                .ok_or_else(|| Error::MalformedInput(format!("spectrum row {k}: {line:?}")))?;
            if idx.trim().parse::<usize>().ok() != Some(k) {
                return Err(Error::MalformedInput(format!("spectrum row {k} has index {idx:?}")));
            }
            val.trim()
                .parse()
                .map_err(|_| Error::MalformedInput(format!("spectrum row {k}: bad value {val:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFrameRecord {
    pub node: usize,
    pub b1: UnitVector3,
    pub b2: UnitVector3,
    pub normal: UnitVector3,
}

/// JSON sidecar of the binary slice container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSidecar {
    pub format_version: String,
    /// Human-readable description of the binary layout.
    pub layout: String,
    pub n_slices: usize,
    pub grid: SliceGrid,
    pub payload_bytes: u64,
    pub frames: Vec<SliceFrameRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

const SLICE_LAYOUT: &str = "little-endian; header: u64 n_slices, u64 n_theta, u64 n_r, f64 r_max; \
payload: for each slice in node order, n_theta x n_r row-major complex values as (f64 re, f64 im)";

const SLICE_HEADER_BYTES: u64 = 32;

/// Writes the binary container and its JSON sidecar.
pub fn write_slices(bin: &Path, sidecar: &Path, slices: &[PolarSlice], config: Option<Value>) -> Result<()> {
    let grid = slices
        .first()
        .map(|s| s.grid)
        .ok_or_else(|| Error::InvalidArgument("no slices to write".into()))?;
    if slices.iter().any(|s| s.grid != grid) {
        return Err(Error::InvalidArgument("slices do not share one grid".into()));
    }
    write_atomic(bin, |w| {
        for v in [slices.len() as u64, grid.n_theta as u64, grid.n_r as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&grid.r_max.to_le_bytes())?;
        for s in slices {
            for v in &s.values {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    })?;
    let meta = SliceSidecar {
        format_version: FORMAT_VERSION.into(),
        layout: SLICE_LAYOUT.into(),
        n_slices: slices.len(),
        grid,
        payload_bytes: (slices.len() * grid.n_theta * grid.n_r * 16) as u64,
        frames: slices
            .iter()
            .map(|s| SliceFrameRecord {
                node: s.node,
                b1: s.frame.b1,
                b2: s.frame.b2,
                normal: s.frame.normal,
            })
            .collect(),
        config,
    };
    write_json(sidecar, &meta)
}

/// Reads slices back, checking the header against the sidecar.
pub fn read_slices(bin: &Path, sidecar: &Path) -> Result<Vec<PolarSlice>> {
    let meta: SliceSidecar = read_json(sidecar)?;
    check_version(&meta.format_version)?;
    let mut bytes = Vec::new();
    open(bin)?.read_to_end(&mut bytes)?;
    if (bytes.len() as u64) < SLICE_HEADER_BYTES {
        return Err(Error::MalformedInput("slice container shorter than its header".into()));
    }
    let word = |k: usize| <[u8; 8]>::try_from(&bytes[8 * k..8 * k + 8]).expect("8-byte slice");
    let (n_slices, n_theta, n_r) = (
        u64::from_le_bytes(word(0)) as usize,
        u64::from_le_bytes(word(1)) as usize,
        u64::from_le_bytes(word(2)) as usize,
    );
    let grid = SliceGrid {
        n_theta,
        n_r,
        r_max: f64::from_le_bytes(word(3)),
    };
    if n_slices != meta.n_slices || grid != meta.grid || meta.frames.len() != n_slices {
        return Err(Error::MalformedInput("slice container header disagrees with its sidecar".into()));
    }
    let per_slice = n_theta * n_r;
    let expected = SLICE_HEADER_BYTES as usize + n_slices * per_slice * 16;
    if bytes.len() != expected {
        return Err(Error::MalformedInput(format!(
            "slice container has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let payload = &bytes[SLICE_HEADER_BYTES as usize..];
    meta.frames
        .into_iter()
        .enumerate()
        .map(|(k, f)| {
            let frame = PlaneBasis::new(f.b1, f.b2, f.normal)?;
            let values = payload[k * per_slice * 16..(k + 1) * per_slice * 16]
                .chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect();
            Ok(PolarSlice {
                node: f.node,
                grid,
                frame,
                values,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::oracle_datum;
    use crate::projection::{default_phantom, simulate, SimulationConfig};
    use crate::spectral::reconstruct;
    use crate::sphere::sample_uniform;
    use serde_json::json;

    #[test]
    fn datum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = sample_uniform(12, 3).unwrap();
        let d = oracle_datum(&ds).unwrap();
        let path = dir.path().join("d.json");
        write_datum(&path, &d, Some(json!({"n": 12}))).unwrap();
        assert_eq!(read_datum(&path).unwrap(), d);
        let file: DatumFile = read_json(&path).unwrap();
        assert_eq!(file.pairs.len(), 66);
        assert!(file.pairs.iter().all(|p| p.i < p.j));
        assert!(!dir.path().join("d.json.partial").exists());
    }

    #[test]
    fn detected_datum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = sample_uniform(5, 2).unwrap();
        let cfg = SimulationConfig {
            grid: SliceGrid {
                n_theta: 72,
                n_r: 8,
                r_max: 16.0,
            },
            snr: Some(4.0),
            seed: 2,
        };
        let sim = simulate(&default_phantom(2), &ds, &cfg).unwrap();
        let path = dir.path().join("d.json");
        write_datum(&path, &sim.datum, None).unwrap();
        assert_eq!(read_datum(&path).unwrap(), sim.datum);

        let det_path = dir.path().join("det.json");
        let det = DetectionFile::new(sim.detection.clone(), serde_json::json!({ "snr": 4.0 }));
        write_json(&det_path, &det).unwrap();
        assert_eq!(read_json::<DetectionFile>(&det_path).unwrap(), det);

        let (bin, side) = (dir.path().join("s.bin"), dir.path().join("s.json"));
        write_slices(&bin, &side, &sim.slices, None).unwrap();
        assert_eq!(read_slices(&bin, &side).unwrap(), sim.slices);
        assert_eq!(fs::metadata(&bin).unwrap().len(), 32 + 5 * 72 * 8 * 16);
        let mut raw = fs::read(&bin).unwrap();
        assert_eq!(u64::from_le_bytes(raw[8..16].try_into().unwrap()), 72);
        raw.pop();
        fs::write(&bin, raw).unwrap();
        assert!(read_slices(&bin, &side).is_err());
    }

    #[test]
    fn truth_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = sample_uniform(9, 17).unwrap();
        let path = dir.path().join("t.json");
        write_truth(&path, &ds, Some(serde_json::json!({ "n": 9 }))).unwrap();
        assert_eq!(read_truth(&path).unwrap(), ds);
    }

    #[test]
    fn report_and_spectrum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = sample_uniform(30, 1).unwrap();
        let rec = reconstruct(&oracle_datum(&ds).unwrap(), Some(&ds)).unwrap();
        let file = ReportFile::new(rec.report.clone(), json!({"command": "reconstruct"}));
        let path = dir.path().join("r.json");
        write_json(&path, &file).unwrap();
        let back: ReportFile = read_json(&path).unwrap();
        assert_eq!(back, file);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"mean_angular_error_deg\""));

        let csv = dir.path().join("s.csv");
        write_spectrum_csv(&csv, &rec.spectrum).unwrap();
        assert_eq!(read_spectrum_csv(&csv).unwrap(), rec.spectrum.eigenvalues);
        assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 61);
    }

    #[test]
    fn malformed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let bad_pair = r#"{"format_version":"1.0","n":3,"provenance":{"kind":"oracle"},
            "pairs":[{"i":0,"j":1,"c_ij":[2.0,0.0],"c_ji":[1.0,0.0]}]}"#;
        fs::write(&path, bad_pair).unwrap();
        assert!(matches!(read_datum(&path), Err(Error::MalformedDatum { i: 0, j: 1, .. })));
        let reversed = r#"{"format_version":"1.0","n":3,"provenance":{"kind":"oracle"},
            "pairs":[{"i":1,"j":0,"c_ij":[1.0,0.0],"c_ji":[1.0,0.0]}]}"#;
        fs::write(&path, reversed).unwrap();
        assert!(matches!(read_datum(&path), Err(Error::MalformedDatum { i: 1, j: 0, .. })));
        let version = r#"{"format_version":"9","n":3,"provenance":{"kind":"oracle"},"pairs":[]}"#;
        fs::write(&path, version).unwrap();
        assert!(matches!(read_datum(&path), Err(Error::MalformedInput(_))));
        fs::write(&path, "not json").unwrap();
        assert!(matches!(read_datum(&path), Err(Error::Json(_))));
        assert!(matches!(read_datum(&dir.path().join("missing.json")), Err(Error::Io(_))));
    }
}
