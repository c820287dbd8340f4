//! Pairwise 2×2 kernels between viewing planes.
//!
//! For directions `x ≠ ±y`, each kernel maps `P_y → P_x` and is written in
//! the frames of the two planes:
//!
//! * common lines `C(x,y) = c_xy c_yxᵀ`, the rank-one map through the
//!   intersection line `x^⊥ ∩ y^⊥`;
//! * orthographic lines `O(x,y) = o_xy o_yxᵀ`, built from the normalized
//!   projections of each direction onto the other's plane;
//! * parallel transport `T(x,y)` along the great circle from `y` to `x`.
//!
//! They satisfy `T = C − O` exactly.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{geodesic_rotation, DirectionSet, PlaneBasis};

const UNIT_INPUT_TOL: f64 = 1e-9;

/// Which pairwise kernel an operator is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Common,
    Orthographic,
    Transport,
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Common => "common",
            KernelKind::Orthographic => "orthographic",
            KernelKind::Transport => "transport",
        })
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common" => Ok(KernelKind::Common),
            "orthographic" => Ok(KernelKind::Orthographic),
            "transport" => Ok(KernelKind::Transport),
            other => Err(Error::InvalidArgument(format!("unknown kernel kind {other:?}"))),
        }
    }
}

/// A kernel block `P_col → P_row` in the frames of the two nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2x2 {
    pub entries: Matrix2<f64>,
    pub row: usize,
    pub col: usize,
}

fn unit_2d(v: Vector2<f64>) -> Result<Vector2<f64>> {
    let norm = v.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonUnit { norm });
    }
    Ok(v / norm)
}

/// In-plane directions of the common line `x^⊥ ∩ y^⊥`, with the sign fixed by
/// `u = x × y / ‖x × y‖`: returns `(u` in `px` coordinates, `u` in `py`
/// coordinates`)`.
pub fn common_line_directions(
    px: &PlaneBasis,
    py: &PlaneBasis,
) -> Result<(Vector2<f64>, Vector2<f64>)> {
    px.normal.check_separated(&py.normal)?;
    let u = px.normal.as_vector().cross(py.normal.as_vector()).normalize();
    Ok((unit_2d(px.project(&u))?, unit_2d(py.project(&u))?))
}

/// The rank-one common-lines block `c_xy c_yxᵀ`.
pub fn common_block(c_xy: &Vector2<f64>, c_yx: &Vector2<f64>) -> Result<Matrix2<f64>> {
    for c in [c_xy, c_yx] {
        let norm = c.norm();
        if (norm - 1.0).abs() > UNIT_INPUT_TOL || !norm.is_finite() {
            return Err(Error::NonUnit { norm });
        }
    }
    Ok(c_xy * c_yx.transpose())
}

/// Normalized projections `(o_xy, o_yx)` of `y` onto `P_x` and of `x` onto `P_y`.
pub fn orthographic_directions(
    px: &PlaneBasis,
    py: &PlaneBasis,
) -> Result<(Vector2<f64>, Vector2<f64>)> {
    px.normal.check_separated(&py.normal)?;
    Ok((
        unit_2d(px.project(py.normal.as_vector()))?,
        unit_2d(py.project(px.normal.as_vector()))?,
    ))
}

/// The rank-one orthographic-lines block `o_xy o_yxᵀ`.
pub fn orthographic_block(px: &PlaneBasis, py: &PlaneBasis) -> Result<Matrix2<f64>> {
    let (o_xy, o_yx) = orthographic_directions(px, py)?;
    Ok(o_xy * o_yx.transpose())
}

/// Parallel transport from `P_y` to `P_x` along the great circle `y → x`.
pub fn transport_block(px: &PlaneBasis, py: &PlaneBasis) -> Result<Matrix2<f64>> {
    let r = geodesic_rotation(&py.normal, &px.normal)?;
    Ok(px.embedding().transpose() * r * py.embedding())
}

/// Kernel block of the given kind for the ordered pair `(px, py)`.
pub fn kernel_block(kind: KernelKind, px: &PlaneBasis, py: &PlaneBasis) -> Result<Matrix2<f64>> {
    match kind {
        KernelKind::Common => {
            let (c_xy, c_yx) = common_line_directions(px, py)?;
            common_block(&c_xy, &c_yx)
        }
        KernelKind::Orthographic => orthographic_block(px, py),
        KernelKind::Transport => transport_block(px, py),
    }
}

/// Extra information recorded with detected datums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMeta {
    pub n_theta: usize,
    pub n_r: usize,
    pub r_max: f64,
    /// `None` means noiseless slices.
    pub snr: Option<f64>,
    pub seed: u64,
    /// Pairs left out of the datum because detection was degenerate.
    #[serde(default)]
    pub excluded_pairs: Vec<[usize; 2]>,
}

/// How the common lines were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Oracle,
    Detected(DetectionMeta),
}

/// The rank-one factors of one common-line block, stored for `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePair {
    pub c_ij: Vector2<f64>,
    pub c_ji: Vector2<f64>,
}

/// Common-line directions for every unordered pair of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonLinesDatum {
    n: usize,
    lines: Vec<Option<LinePair>>,
    pub provenance: Provenance,
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl CommonLinesDatum {
    /// A datum over `n` nodes with no pairs filled in yet.
    pub fn empty(n: usize, provenance: Provenance) -> Self {
        Self {
            n,
            lines: vec![None; pair_count(n)],
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize) -> Result<usize> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::MalformedDatum {
                i,
                j,
                reason: format!("not a pair of distinct nodes below {}", self.n),
            });
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        Ok(a * (2 * self.n - a - 1) / 2 + (b - a - 1))
    }

    /// Stores the line directions of pair `{i, j}` oriented as `(c_ij, c_ji)`.
    pub fn insert(&mut self, i: usize, j: usize, c_ij: Vector2<f64>, c_ji: Vector2<f64>) -> Result<()> {
        let idx = self.index(i, j)?;
        for c in [&c_ij, &c_ji] {
            let norm = c.norm();
            if (norm - 1.0).abs() > UNIT_INPUT_TOL || !norm.is_finite() {
                return Err(Error::MalformedDatum {
                    i,
                    j,
                    reason: format!("line direction has norm {norm}"),
                });
            }
        }
        if self.lines[idx].is_some() {
            return Err(Error::MalformedDatum {
                i,
                j,
                reason: "pair given twice".into(),
            });
        }
        let unit = |c: Vector2<f64>| if (c.norm() - 1.0).abs() <= 1e-12 { c } else { c.normalize() };
        let (c_ij, c_ji) = (unit(c_ij), unit(c_ji));
        self.lines[idx] = Some(if i < j {
            LinePair { c_ij, c_ji }
        } else {
            LinePair { c_ij: c_ji, c_ji: c_ij }
        });
        Ok(())
    }

    /// `(c_ij, c_ji)` oriented for the ordered pair `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> Option<(Vector2<f64>, Vector2<f64>)> {
        let idx = self.index(i, j).ok()?;
        self.lines[idx].map(|p| if i < j { (p.c_ij, p.c_ji) } else { (p.c_ji, p.c_ij) })
    }

    /// Common-lines block `C(i, j)`; errors if the pair is missing.
    pub fn block(&self, i: usize, j: usize) -> Result<Block2x2> {
        let (c_ij, c_ji) = self.get(i, j).ok_or_else(|| Error::MalformedDatum {
            i: i.min(j),
            j: i.max(j),
            reason: "pair missing from datum".into(),
        })?;
        Ok(Block2x2 {
            entries: common_block(&c_ij, &c_ji)?,
            row: i,
            col: j,
        })
    }

    /// Stored pairs as `(i, j, line)` with `i < j`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, LinePair)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
            .zip(self.lines.iter())
            .filter_map(|((i, j), l)| l.map(|l| (i, j, l)))
    }

    pub fn missing_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n)
            .flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
            .zip(self.lines.iter())
            .filter(|(_, l)| l.is_none())
            .map(|(p, _)| p)
            .collect()
    }

    /// Whether detection left `{i, j}` out as degenerate.
    pub fn is_excluded(&self, i: usize, j: usize) -> bool {
        let key = [i.min(j), i.max(j)];
        match &self.provenance {
            Provenance::Detected(meta) => meta.excluded_pairs.contains(&key),
            Provenance::Oracle => false,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.lines.iter().all(Option::is_some)
    }
}

/// Common lines computed from known geometry rather than from images.
pub fn oracle_datum(ds: &DirectionSet) -> Result<CommonLinesDatum> {
    let n = ds.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let lines = pairs
        .par_iter()
        .map(|&(i, j)| {
            common_line_directions(&ds.frames[i], &ds.frames[j])
                .map(|(c_ij, c_ji)| Some(LinePair { c_ij, c_ji }))
                .map_err(|e| Error::DegeneratePair {
                    i,
                    j,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommonLinesDatum {
        n,
        lines,
        provenance: Provenance::Oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{canonical_frame, sample_uniform, UnitVector3};
    use nalgebra::{Matrix3, Vector3};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn e(i: usize) -> UnitVector3 {
        UnitVector3::try_new(Vector3::ith(i, 1.0)).unwrap()
    }

    /// x = e3 with frame (e1, e2); y = e1 with frame (e2, e3).
    fn axis_pair() -> (PlaneBasis, PlaneBasis) {
        (
            PlaneBasis::new(e(0), e(1), e(2)).unwrap(),
            PlaneBasis::new(e(1), e(2), e(0)).unwrap(),
        )
    }

    fn close(a: &Matrix2<f64>, b: &Matrix2<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn axis_common_lines() {
        let (px, py) = axis_pair();
        let (c_xy, c_yx) = common_line_directions(&px, &py).unwrap();
        assert!((c_xy - Vector2::new(0.0, 1.0)).amax() < 1e-15);
        assert!((c_yx - Vector2::new(1.0, 0.0)).amax() < 1e-15);
        let (r_yx, r_xy) = common_line_directions(&py, &px).unwrap();
        assert!((r_yx + c_yx).amax() < 1e-15 && (r_xy + c_xy).amax() < 1e-15);
        let fwd = common_block(&c_xy, &c_yx).unwrap();
        let back = common_block(&r_yx, &r_xy).unwrap();
        assert!(close(&fwd.transpose(), &back, 0.0));
    }

    #[test]
    fn common_block_examples() {
        let a = Vector2::new(0.0, 1.0);
        let b = Vector2::new(1.0, 0.0);
        let m = common_block(&a, &b).unwrap();
        assert_eq!(m, Matrix2::new(0.0, 0.0, 1.0, 0.0));
        assert_eq!(common_block(&-a, &-b).unwrap(), m);
        let p = common_block(&b, &b).unwrap();
        assert_eq!(p, Matrix2::new(1.0, 0.0, 0.0, 0.0));
        assert!(matches!(
            common_block(&Vector2::new(1.0, 1.0), &b),
            Err(Error::NonUnit { .. })
        ));
    }

    #[test]
    fn axis_orthographic_and_transport() {
        let (px, py) = axis_pair();
        assert!(close(
            &orthographic_block(&px, &py).unwrap(),
            &Matrix2::new(0.0, 1.0, 0.0, 0.0),
            1e-15
        ));
        assert!(close(
            &transport_block(&px, &py).unwrap(),
            &Matrix2::new(0.0, -1.0, 1.0, 0.0),
            1e-15
        ));
    }

    #[test]
    fn orthographic_against_direct_projection() {
        let px = PlaneBasis::new(e(0), e(1), e(2)).unwrap();
        let y = UnitVector3::try_new(Vector3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2)).unwrap();
        let py = canonical_frame(&y);
        let (o_xy, o_yx) = orthographic_directions(&px, &py).unwrap();
        // y projected on e3^⊥ is e1; e3 projected on y^⊥ is (e3 − e1)/√2
        assert!((px.lift(&o_xy) - Vector3::x()).amax() < 1e-15);
        let expect = Vector3::new(-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);
        assert!((py.lift(&o_yx) - expect).amax() < 1e-15);
        // brute force: P = I − y yᵀ, normalize, take coordinates
        let p = Matrix3::identity() - y.as_vector() * y.as_vector().transpose();
        let v = (p * Vector3::z()).normalize();
        assert!((py.project(&v) - o_yx).amax() < 1e-15);
    }

    #[test]
    fn orthographic_flips_with_antipode() {
        let ds = sample_uniform(20, 5).unwrap();
        for i in 0..19 {
            let (px, py) = (&ds.frames[i], &ds.frames[i + 1]);
            let neg = canonical_frame(&-py.normal);
            // re-express the block for −y in the original py frame for comparison
            let to_py = py.embedding().transpose() * neg.embedding();
            let o_neg = orthographic_block(px, &neg).unwrap() * to_py.transpose();
            assert!(close(&o_neg, &-orthographic_block(px, py).unwrap(), 1e-12));
            let c_neg = kernel_block(KernelKind::Common, px, &neg).unwrap() * to_py.transpose();
            assert!(close(&c_neg, &kernel_block(KernelKind::Common, px, py).unwrap(), 1e-12));
        }
    }

    #[test]
    fn transport_is_common_minus_orthographic() {
        let ds = sample_uniform(200, 11).unwrap();
        for i in 0..ds.len() {
            for j in 0..ds.len() {
                if i == j {
                    continue;
                }
                let (px, py) = (&ds.frames[i], &ds.frames[j]);
                let t = transport_block(px, py).unwrap();
                let c = kernel_block(KernelKind::Common, px, py).unwrap();
                let o = orthographic_block(px, py).unwrap();
                assert!(close(&t, &(c - o), 1e-10));
                assert!((t.transpose() * t - Matrix2::identity()).amax() < 1e-10);
                assert!(close(&t.transpose(), &transport_block(py, px).unwrap(), 1e-12));
                assert!(close(&o.transpose(), &orthographic_block(py, px).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn orthographic_perpendicular_to_common_line() {
        let ds = sample_uniform(100, 2).unwrap();
        for i in 0..99 {
            let (px, py) = (&ds.frames[i], &ds.frames[i + 1]);
            let (c_xy, c_yx) = common_line_directions(px, py).unwrap();
            let (o_xy, o_yx) = orthographic_directions(px, py).unwrap();
            assert!(px.lift(&c_xy).dot(&px.lift(&o_xy)).abs() < 1e-12);
            assert!(py.lift(&c_yx).dot(&py.lift(&o_yx)).abs() < 1e-12);
        }
    }

    #[test]
    fn transport_continuity() {
        let x = UnitVector3::new_normalize(Vector3::new(0.2, 0.5, -0.3)).unwrap();
        let y = UnitVector3::new_normalize(x.as_vector() + Vector3::new(0.0, 6e-4, 8e-4)).unwrap();
        let t = transport_block(&canonical_frame(&x), &canonical_frame(&y)).unwrap();
        assert!((t - Matrix2::identity()).amax() < 2e-3);
    }

    #[test]
    fn random_common_line_lies_in_both_planes() {
        let ds = sample_uniform(30, 9).unwrap();
        for i in 0..29 {
            let (px, py) = (&ds.frames[i], &ds.frames[i + 1]);
            let (c_xy, c_yx) = common_line_directions(px, py).unwrap();
            let lift = px.lift(&c_xy);
            assert!(lift.dot(px.normal.as_vector()).abs() < 1e-12);
            assert!(lift.dot(py.normal.as_vector()).abs() < 1e-12);
            assert!((py.lift(&c_yx) - lift).amax() < 1e-12);
        }
    }

    #[test]
    fn degenerate_pairs_are_rejected() {
        let f = canonical_frame(&UnitVector3::x_axis());
        let g = canonical_frame(&-UnitVector3::x_axis());
        for kind in [KernelKind::Common, KernelKind::Orthographic, KernelKind::Transport] {
            assert!(matches!(kernel_block(kind, &f, &f), Err(Error::AntipodalOrEqual { .. })));
            assert!(matches!(kernel_block(kind, &f, &g), Err(Error::AntipodalOrEqual { .. })));
        }
    }

    #[test]
    fn oracle_datum_axis_set() {
        let frames = vec![
            PlaneBasis::new(e(0), e(1), e(2)).unwrap(),
            PlaneBasis::new(e(1), e(2), e(0)).unwrap(),
            PlaneBasis::new(e(2), e(0), e(1)).unwrap(),
        ];
        let ds = DirectionSet::from_frames(frames.clone(), 0).unwrap();
        let d = oracle_datum(&ds).unwrap();
        assert!(d.is_complete());
        assert_eq!(d.pairs().count(), 3);
        for (i, j, l) in d.pairs() {
            let (c_ij, c_ji) = common_line_directions(&frames[i], &frames[j]).unwrap();
            assert_eq!((l.c_ij, l.c_ji), (c_ij, c_ji));
        }
        assert_eq!(d.get(0, 1).unwrap(), (Vector2::new(0.0, 1.0), Vector2::new(1.0, 0.0)));
    }

    #[test]
    fn oracle_datum_random_invariants() {
        let ds = sample_uniform(50, 4).unwrap();
        let d = oracle_datum(&ds).unwrap();
        assert_eq!(d.pairs().count(), 50 * 49 / 2);
        for (_, _, l) in d.pairs() {
            assert!((l.c_ij.norm() - 1.0).abs() < 1e-12);
            assert!((l.c_ji.norm() - 1.0).abs() < 1e-12);
        }
        for i in 0..50 {
            for j in 0..50 {
                if i != j {
                    let a = d.block(i, j).unwrap().entries;
                    let b = d.block(j, i).unwrap().entries;
                    assert_eq!(a, b.transpose());
                }
            }
        }
    }

    #[test]
    fn datum_rejects_bad_inserts() {
        let mut d = CommonLinesDatum::empty(3, Provenance::Oracle);
        let u = Vector2::new(1.0, 0.0);
        assert!(d.insert(0, 0, u, u).is_err());
        assert!(d.insert(0, 3, u, u).is_err());
        assert!(d.insert(0, 1, u * 2.0, u).is_err());
        d.insert(2, 1, u, Vector2::new(0.0, 1.0)).unwrap();
        assert_eq!(d.get(1, 2).unwrap(), (Vector2::new(0.0, 1.0), u));
        assert!(d.insert(1, 2, u, u).is_err());
        assert_eq!(d.missing_pairs(), vec![(0, 1), (0, 2)]);
        assert!(matches!(d.block(0, 2), Err(Error::MalformedDatum { i: 0, j: 2, .. })));
    }
}
