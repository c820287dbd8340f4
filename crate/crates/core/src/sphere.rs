//! Points on the unit sphere, frames for their orthogonal planes, and
//! uniform sampling.
//!
//! A viewing direction `x` carries the plane `x^⊥`. Everything downstream
//! expresses vectors of that plane in an ordered right-handed basis
//! `(b1, b2)` with `b1 × b2 = x`, so a 2-vector `(a, b)` stands for
//! `a·b1 + b·b2` in ambient space.

use std::collections::HashMap;

use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairs closer than this (in radians) to equality or antipodality are rejected.
pub const MIN_SEPARATION: f64 = 1e-6;

/// Above this `|x·e_z|` the canonical frame switches to the `e_y` reference.
const POLE_THRESHOLD: f64 = 0.99;

const UNIT_TOL: f64 = 1e-12;

/// A point on the unit sphere `S(V)`; doubles as a viewing direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    /// Normalizes `v`. Fails on zero or non-finite input.
    pub fn new_normalize(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < f64::MIN_POSITIVE.sqrt() {
            return Err(Error::NonUnit { norm });
        }
        Ok(Self(v / norm))
    }

    /// Accepts `v` as-is if its norm is within `1e-12` of one.
    pub fn try_new(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_TOL || !norm.is_finite() {
            return Err(Error::NonUnit { norm });
        }
        Ok(Self(v))
    }

    pub fn x_axis() -> Self {
        Self(Vector3::x())
    }

    pub fn y_axis() -> Self {
        Self(Vector3::y())
    }

    pub fn z_axis() -> Self {
        Self(Vector3::z())
    }

    #[inline]
    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    #[inline]
    pub fn into_inner(self) -> Vector3<f64> {
        self.0
    }

    #[inline]
    pub fn dot(&self, other: &UnitVector3) -> f64 {
        self.0.dot(&other.0)
    }

    /// Angle to `other` in `[0, π]`, stable near both ends of the range.
    pub fn angle_to(&self, other: &UnitVector3) -> f64 {
        self.0.cross(&other.0).norm().atan2(self.0.dot(&other.0))
    }

    /// True when `self` and `other` are neither (nearly) equal nor antipodal.
    pub fn is_separated_from(&self, other: &UnitVector3) -> bool {
        let angle = self.angle_to(other);
        angle > MIN_SEPARATION && std::f64::consts::PI - angle > MIN_SEPARATION
    }

    /// Errors with [`Error::AntipodalOrEqual`] unless the pair is separated.
    pub fn check_separated(&self, other: &UnitVector3) -> Result<()> {
        if self.is_separated_from(other) {
            Ok(())
        } else {
            Err(Error::AntipodalOrEqual {
                separation: self.angle_to(other),
            })
        }
    }
}

impl std::ops::Neg for UnitVector3 {
    type Output = UnitVector3;

    fn neg(self) -> UnitVector3 {
        UnitVector3(-self.0)
    }
}

impl TryFrom<[f64; 3]> for UnitVector3 {
    type Error = Error;

    fn try_from(a: [f64; 3]) -> Result<Self> {
        // Serialized values pass through decimal text, so allow a looser check
        // and renormalize only outside the strict tolerance.
        let v = Vector3::from(a);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-9 || !norm.is_finite() {
            return Err(Error::NonUnit { norm });
        }
        if (norm - 1.0).abs() <= UNIT_TOL {
            return Ok(Self(v));
        }
        Ok(Self(v / norm))
    }
}

impl From<UnitVector3> for [f64; 3] {
    fn from(u: UnitVector3) -> [f64; 3] {
        [u.0.x, u.0.y, u.0.z]
    }
}

/// Ordered orthonormal basis `(b1, b2)` of the plane orthogonal to `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneBasis {
    pub b1: UnitVector3,
    pub b2: UnitVector3,
    pub normal: UnitVector3,
}

impl PlaneBasis {
    /// Builds a basis from explicit vectors, checking orthonormality and
    /// right-handedness to `1e-12`.
    pub fn new(b1: UnitVector3, b2: UnitVector3, normal: UnitVector3) -> Result<Self> {
        let basis = Self { b1, b2, normal };
        basis.check()?;
        Ok(basis)
    }

    fn check(&self) -> Result<()> {
        let (b1, b2, n) = (self.b1.as_vector(), self.b2.as_vector(), self.normal.as_vector());
        let worst = b1.dot(b2).abs().max(b1.dot(n).abs()).max(b2.dot(n).abs());
        if worst > UNIT_TOL {
            return Err(Error::InvalidArgument(format!(
                "plane basis not orthogonal (max |dot| = {worst:.3e})"
            )));
        }
        let handed = (b1.cross(b2) - n).amax();
        if handed > UNIT_TOL {
            return Err(Error::InvalidArgument(format!(
                "plane basis not right-handed (|b1×b2 − n| = {handed:.3e})"
            )));
        }
        Ok(())
    }

    /// The embedding `i_x`: a 3×2 matrix whose columns are `b1`, `b2`.
    pub fn embedding(&self) -> Matrix3x2<f64> {
        Matrix3x2::from_columns(&[*self.b1.as_vector(), *self.b2.as_vector()])
    }

    /// Lifts plane coordinates `(a, b)` to `a·b1 + b·b2`.
    pub fn lift(&self, c: &Vector2<f64>) -> Vector3<f64> {
        self.embedding() * c
    }

    /// Coordinates of the orthogonal projection of `v` onto the plane.
    pub fn project(&self, v: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(self.b1.as_vector().dot(v), self.b2.as_vector().dot(v))
    }

    /// The same plane with its basis turned by `gamma` radians about the normal.
    pub fn rotated_in_plane(&self, gamma: f64) -> PlaneBasis {
        let (s, c) = gamma.sin_cos();
        let (b1, b2) = (self.b1.as_vector(), self.b2.as_vector());
        PlaneBasis {
            b1: UnitVector3(c * b1 + s * b2),
            b2: UnitVector3(-s * b1 + c * b2),
            normal: self.normal,
        }
    }
}

/// Deterministic right-handed frame for `x^⊥`.
///
/// `b1 = normalize(e_z × x)` unless `|x·e_z| > 0.99`, in which case
/// `b1 = normalize(e_y × x)`; then `b2 = x × b1`.
pub fn canonical_frame(x: &UnitVector3) -> PlaneBasis {
    let xv = x.as_vector();
    let reference = if xv.z.abs() <= POLE_THRESHOLD {
        Vector3::z()
    } else {
        Vector3::y()
    };
    let b1 = reference.cross(xv).normalize();
    let b2 = xv.cross(&b1);
    PlaneBasis {
        b1: UnitVector3(b1),
        b2: UnitVector3(b2.normalize()),
        normal: *x,
    }
}

/// Rotation in the plane `span{from, to}` carrying `from` onto `to` and fixing
/// the direction orthogonal to both.
pub fn geodesic_rotation(from: &UnitVector3, to: &UnitVector3) -> Result<Matrix3<f64>> {
    from.check_separated(to)?;
    let cross = from.as_vector().cross(to.as_vector());
    let sin = cross.norm();
    let cos = from.dot(to);
    let axis = cross / sin;
    let k = axis.cross_matrix();
    // Rodrigues with (sin, cos) taken directly from the pair.
    Ok(Matrix3::identity() + k * sin + k * k * (1.0 - cos))
}

/// The sample `X_N`: viewing directions with their plane frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub points: Vec<UnitVector3>,
    pub frames: Vec<PlaneBasis>,
    pub seed: u64,
}

impl DirectionSet {
    /// Builds a set from explicit frames; `points` are the frame normals.
    pub fn from_frames(frames: Vec<PlaneBasis>, seed: u64) -> Result<Self> {
        for (k, f) in frames.iter().enumerate() {
            f.check().map_err(|e| Error::InvalidArgument(format!("frame {k}: {e}")))?;
        }
        for i in 0..frames.len() {
            for j in (i + 1)..frames.len() {
                frames[i]
                    .normal
                    .check_separated(&frames[j].normal)
                    .map_err(|e| Error::DegeneratePair {
                        i,
                        j,
                        source: Box::new(e),
                    })?;
            }
        }
        Ok(Self {
            points: frames.iter().map(|f| f.normal).collect(),
            frames,
            seed,
        })
    }

    /// Builds a set from points, assigning canonical frames.
    pub fn from_points(points: Vec<UnitVector3>, seed: u64) -> Result<Self> {
        Self::from_frames(points.iter().map(canonical_frame).collect(), seed)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Relabels nodes: node `k` of the result is node `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: perm.len(),
            });
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        Ok(Self {
            points: perm.iter().map(|&p| self.points[p]).collect(),
            frames: perm.iter().map(|&p| self.frames[p]).collect(),
            seed: self.seed,
        })
    }
}

/// Hash of accepted points by coordinate cell. Cells are wider than the
/// chord of [`MIN_SEPARATION`], so an offending neighbor of `p` or `−p`
/// lies in one of the 27 cells around it.
#[derive(Default)]
struct SeparationGrid {
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl SeparationGrid {
    const CELL: f64 = 1e-5;

    fn key(v: &Vector3<f64>) -> [i64; 3] {
        [v.x, v.y, v.z].map(|c| (c / Self::CELL).floor() as i64)
    }

    fn is_separated(&self, p: &UnitVector3, points: &[UnitVector3]) -> bool {
        [*p.as_vector(), -p.as_vector()].iter().all(|v| {
            let [a, b, c] = Self::key(v);
            (-1..=1).all(|da| {
                (-1..=1).all(|db| {
                    (-1..=1).all(|dc| {
                        self.cells
                            .get(&[a + da, b + db, c + dc])
                            .is_none_or(|ids| ids.iter().all(|&k| p.is_separated_from(&points[k])))
                    })
                })
            })
        })
    }

    fn insert(&mut self, p: &UnitVector3, index: usize) {
        self.cells.entry(Self::key(p.as_vector())).or_default().push(index);
    }
}

/// `n` i.i.d. uniform directions (normalized standard normals) with canonical
/// frames. A draw within `1e-6` rad of an earlier point or its antipode is
/// redrawn.
pub fn sample_uniform(n: usize, seed: u64) -> Result<DirectionSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 directions, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<UnitVector3> = Vec::with_capacity(n);
    let mut cells = SeparationGrid::default();
    while points.len() < n {
        let v = Vector3::new(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        );
        let Ok(p) = UnitVector3::new_normalize(v) else {
            continue;
        };
        if cells.is_separated(&p, &points) {
            cells.insert(&p, points.len());
            points.push(p);
        }
    }
    let frames = points.iter().map(canonical_frame).collect();
    Ok(DirectionSet {
        points,
        frames,
        seed,
    })
}
