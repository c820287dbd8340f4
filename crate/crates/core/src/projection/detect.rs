use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::slice::{PolarSlice, SliceGrid};
use crate::error::{Error, Result};
use crate::kernels::{common_line_directions, CommonLinesDatum, DetectionMeta, Provenance};
use crate::sphere::DirectionSet;

/// Rows whose best score lies within this fraction of the spread between the
/// overall best and the median row score count as co-maxima when testing for
/// coincident planes.
const COINCIDENT_SPREAD_FRACTION: f64 = 0.05;

/// Floor on the co-maximum tolerance, for spreads at rounding level.
const COINCIDENT_ABS_TOL: f64 = 1e-9;

/// Number of histogram bins, in units of the angular bin width; the last
/// bin collects everything beyond.
const HISTOGRAM_BINS: usize = 10;

/// Best-matching ray pair for one pair of slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDetection {
    pub i: usize,
    pub j: usize,
    /// Angle of the common line in slice `i`, in `[0, π)`.
    pub alpha_ij: f64,
    /// Angle of the common line in slice `j`, in `[0, 2π)`.
    pub alpha_ji: f64,
    /// Normalized correlation at the maximum, in `[−1, 1]`.
    pub score: f64,
}

/// A pair left out of the datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateDetection {
    pub i: usize,
    pub j: usize,
    pub reason: String,
}

/// Detection accuracy against known geometry. Angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionErrorSummary {
    pub bin_width: f64,
    /// Per detected pair, the larger of its two angle errors after choosing
    /// the better of the two equivalent sign representatives.
    pub pair_errors: Vec<f64>,
    pub fraction_within_one_bin: f64,
    pub mean_error: f64,
    pub max_error: f64,
    pub mean_error_deg: f64,
    /// Counts of pair errors in `[k, k+1)` bin widths; the last entry holds
    /// everything from `HISTOGRAM_BINS` bin widths up.
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub grid: SliceGrid,
    pub pairs: Vec<PairDetection>,
    pub degenerate: Vec<DegenerateDetection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<DetectionErrorSummary>,
}

/// Rows are rays scaled by `√r`, stored as `[Re | Im]` and normalized, so a
/// row product is the `r`-weighted real correlation.
struct RayMatrix {
    rows: DMatrix<f64>,
    zero_rays: usize,
}

fn ray_matrix(slice: &PolarSlice) -> RayMatrix {
    let SliceGrid { n_theta, n_r, .. } = slice.grid;
    let weights: Vec<f64> = (0..n_r).map(|b| slice.grid.radius(b).sqrt()).collect();
    let mut rows = DMatrix::zeros(n_theta, 2 * n_r);
    let mut zero_rays = 0;
    for a in 0..n_theta {
        let ray = slice.ray(a);
        for b in 0..n_r {
            rows[(a, b)] = ray[b].re * weights[b];
            rows[(a, n_r + b)] = ray[b].im * weights[b];
        }
        let norm = rows.row(a).norm();
        if norm > 0.0 && norm.is_finite() {
            rows.row_mut(a).unscale_mut(norm);
        } else {
            rows.row_mut(a).fill(0.0);
            zero_rays += 1;
        }
    }
    RayMatrix { rows, zero_rays }
}

enum PairOutcome {
    Found(PairDetection),
    Degenerate(DegenerateDetection),
}

fn match_pair(i: usize, j: usize, ri: &RayMatrix, rj: &RayMatrix, grid: &SliceGrid) -> PairOutcome {
    if ri.zero_rays > 0 || rj.zero_rays > 0 {
        return PairOutcome::Degenerate(DegenerateDetection {
            i,
            j,
            reason: format!("zero-norm rays ({} in slice {i}, {} in slice {j})", ri.zero_rays, rj.zero_rays),
        });
    }
    let half = grid.n_theta / 2;
    // ray α+π is the conjugate of ray α, so half the rows of slice i suffice
    let corr = ri.rows.rows(0, half) * rj.rows.transpose();
    let row_best: Vec<(usize, f64)> = corr
        .row_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (b, &v)| if v > acc.1 { (b, v) } else { acc })
        })
        .collect();
    let (a, (b, score)) = row_best
        .iter()
        .copied()
        .enumerate()
        .fold((0, (0, f64::NEG_INFINITY)), |acc, (a, rb)| if rb.1 > acc.1 .1 { (a, rb) } else { acc });
    let mut sorted: Vec<f64> = row_best.iter().map(|r| r.1).collect();
    sorted.sort_by(f64::total_cmp);
    let spread = score - sorted[half / 2];
    let co_maxima = row_best
        .iter()
        .filter(|r| r.1 >= score - (COINCIDENT_SPREAD_FRACTION * spread).max(COINCIDENT_ABS_TOL))
        .count();
    if 2 * co_maxima >= half {
        return PairOutcome::Degenerate(DegenerateDetection {
            i,
            j,
            reason: format!("planes appear to coincide ({co_maxima} of {half} rays match equally well)"),
        });
    }
    PairOutcome::Found(PairDetection {
        i,
        j,
        alpha_ij: grid.angle(a),
        alpha_ji: grid.angle(b),
        score: score.clamp(-1.0, 1.0),
    })
}

/// Finds, for every pair of slices, the ray pair with the highest
/// `r`-weighted normalized correlation over the full angular grid.
///
/// Slices must be given in node order and share one grid. Pairs with
/// zero-norm rays or with no distinguished maximum are left out of the
/// datum and listed in the result.
pub fn detect_common_lines(slices: &[PolarSlice]) -> Result<(CommonLinesDatum, DetectionResult)> {
    let n = slices.len();
    let grid = slices
        .first()
        .ok_or_else(|| Error::InvalidArgument("no slices".into()))?
        .grid;
    grid.validate()?;
    for (k, s) in slices.iter().enumerate() {
        if s.node != k {
            return Err(Error::InvalidArgument(format!("slice {k} carries node index {}", s.node)));
        }
        if s.grid != grid || s.values.len() != grid.n_theta * grid.n_r {
            return Err(Error::InvalidArgument(format!("slice {k} does not share the grid of slice 0")));
        }
    }
    let rays: Vec<RayMatrix> = slices.par_iter().map(ray_matrix).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(i, j)| match_pair(i, j, &rays[i], &rays[j], &grid))
        .collect();

    let mut found = Vec::with_capacity(outcomes.len());
    let mut degenerate = Vec::new();
    for o in outcomes {
        match o {
            PairOutcome::Found(p) => found.push(p),
            PairOutcome::Degenerate(d) => degenerate.push(d),
        }
    }
    let meta = DetectionMeta {
        n_theta: grid.n_theta,
        n_r: grid.n_r,
        r_max: grid.r_max,
        snr: None,
        seed: 0,
        excluded_pairs: degenerate.iter().map(|d| [d.i, d.j]).collect(),
    };
    let mut datum = CommonLinesDatum::empty(n, Provenance::Detected(meta));
    for p in &found {
        let dir = |t: f64| Vector2::new(t.cos(), t.sin());
        datum.insert(p.i, p.j, dir(p.alpha_ij), dir(p.alpha_ji))?;
    }
    Ok((
        datum,
        DetectionResult {
            grid,
            pairs: found,
            degenerate,
            summary: None,
        },
    ))
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Compares detected angles with the exact common lines of `truth`.
pub fn detection_errors(result: &DetectionResult, truth: &DirectionSet) -> Result<DetectionErrorSummary> {
    let bin_width = result.grid.bin_width();
    let pair_errors = result
        .pairs
        .iter()
        .map(|p| {
            let (fi, fj) = (
                truth.frames.get(p.i).ok_or(Error::DimensionMismatch {
                    expected: p.i + 1,
                    found: truth.len(),
                })?,
                truth.frames.get(p.j).ok_or(Error::DimensionMismatch {
                    expected: p.j + 1,
                    found: truth.len(),
                })?,
            );
            let (c_ij, c_ji) = common_line_directions(fi, fj)?;
            let (a, b) = (c_ij.y.atan2(c_ij.x), c_ji.y.atan2(c_ji.x));
            let err = |shift: f64| {
                circular_distance(p.alpha_ij, a + shift).max(circular_distance(p.alpha_ji, b + shift))
            };
            Ok(err(0.0).min(err(PI)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let count = pair_errors.len().max(1) as f64;
    let within = pair_errors.iter().filter(|&&e| e <= bin_width * (1.0 + 1e-9)).count();
    let mut histogram = vec![0; HISTOGRAM_BINS + 1];
    for e in &pair_errors {
        histogram[((e / bin_width) as usize).min(HISTOGRAM_BINS)] += 1;
    }
    let mean_error = pair_errors.iter().sum::<f64>() / count;
    Ok(DetectionErrorSummary {
        bin_width,
        fraction_within_one_bin: within as f64 / count,
        max_error: pair_errors.iter().copied().fold(0.0, f64::max),
        mean_error,
        mean_error_deg: mean_error.to_degrees(),
        histogram,
        pair_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::noise::add_noise;
    use crate::projection::phantom::default_phantom;
    use crate::projection::slice::{fourier_slice, fourier_slices};
    use crate::sphere::sample_uniform;

    #[test]
    fn noiseless_detection_is_within_one_bin() {
        let ds = sample_uniform(20, 1).unwrap();
        let slices = fourier_slices(&default_phantom(1), &ds, SliceGrid::default()).unwrap();
        let (datum, result) = detect_common_lines(&slices).unwrap();
        assert!(datum.is_complete());
        assert!(result.degenerate.is_empty());
        let s = detection_errors(&result, &ds).unwrap();
        assert!(s.fraction_within_one_bin >= 0.95, "{}", s.fraction_within_one_bin);
        assert_eq!(s.histogram.iter().sum::<usize>(), 190);
        for p in &result.pairs {
            assert!((0.0..PI).contains(&p.alpha_ij));
            assert!((-1.0..=1.0).contains(&p.score));
        }
    }

    #[test]
    fn error_shrinks_with_angular_resolution() {
        let ds = sample_uniform(12, 3).unwrap();
        let p = default_phantom(2);
        let mut last = f64::INFINITY;
        for n_theta in [90, 180, 360] {
            let grid = SliceGrid {
                n_theta,
                ..SliceGrid::default()
            };
            let (_, result) = detect_common_lines(&fourier_slices(&p, &ds, grid).unwrap()).unwrap();
            let s = detection_errors(&result, &ds).unwrap();
            let median = crate::spectral::register::median(&s.pair_errors);
            assert!(median <= grid.bin_width(), "n_theta {n_theta}");
            assert!(s.mean_error < last, "n_theta {n_theta}");
            last = s.mean_error;
        }
    }

    #[test]
    fn coincident_planes_are_flagged() {
        let ds = sample_uniform(3, 5).unwrap();
        let p = default_phantom(3);
        let grid = SliceGrid::default();
        let slices: Vec<PolarSlice> = [0usize, 0, 1]
            .iter()
            .enumerate()
            .map(|(node, &k)| fourier_slice(&p, node, &ds.frames[k], grid).unwrap())
            .collect();
        let (datum, result) = detect_common_lines(&slices).unwrap();
        assert_eq!(result.degenerate.len(), 1);
        assert_eq!((result.degenerate[0].i, result.degenerate[0].j), (0, 1));
        assert_eq!(datum.missing_pairs(), vec![(0, 1)]);
        match &datum.provenance {
            Provenance::Detected(m) => assert_eq!(m.excluded_pairs, vec![[0, 1]]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn noisy_scores_stay_bounded() {
        let ds = sample_uniform(10, 2).unwrap();
        let slices: Vec<PolarSlice> = fourier_slices(&default_phantom(2), &ds, SliceGrid::default())
            .unwrap()
            .iter()
            .map(|s| add_noise(s, 4.0, 2).unwrap())
            .collect();
        let (datum, result) = detect_common_lines(&slices).unwrap();
        assert!(datum.is_complete());
        assert!(result.pairs.iter().all(|p| p.score.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn bad_inputs() {
        assert!(detect_common_lines(&[]).is_err());
        let ds = sample_uniform(2, 1).unwrap();
        let mut slices = fourier_slices(&default_phantom(1), &ds, SliceGrid::default()).unwrap();
        slices[1].node = 5;
        assert!(detect_common_lines(&slices).is_err());
        slices[1].node = 1;
        slices[1].grid.r_max = 10.0;
        assert!(detect_common_lines(&slices).is_err());
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((circular_distance(0.0, PI) - PI).abs() < 1e-12);
        assert_eq!(circular_distance(1.0, 1.0 + TAU), 0.0);
    }
}
