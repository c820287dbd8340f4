use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{kernel_block, CommonLinesDatum, KernelKind};
use crate::sphere::DirectionSet;

/// Symmetric `2N × 2N` operator on `⊕_x P_x`, one 2×2 block per ordered pair.
///
/// Off-diagonal block `(i, j)` is the kernel `K(x_i, x_j)` scaled by `1/N`;
/// diagonal blocks are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub n: usize,
    pub kind: KernelKind,
    pub matrix: DMatrix<f64>,
}

/// What an operator is assembled from.
#[derive(Debug, Clone, Copy)]
pub enum OperatorSource<'a> {
    /// Common lines only; the abstract datum carries no normals.
    Datum(&'a CommonLinesDatum),
    /// Known geometry; supports every kernel kind.
    Directions(&'a DirectionSet),
}

/// Assembles the operator of `kind` from `source`.
pub fn assemble(source: OperatorSource<'_>, kind: KernelKind) -> Result<BlockOperator> {
    match (source, kind) {
        (OperatorSource::Datum(d), KernelKind::Common) => assemble_common(d),
        (OperatorSource::Datum(_), other) => Err(Error::InvalidArgument(format!(
            "the {other} operator needs viewing directions, not just a datum"
        ))),
        (OperatorSource::Directions(ds), kind) => assemble_geometric(ds, kind),
    }
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn fill(n: usize, kind: KernelKind, blocks: &[((usize, usize), Matrix2<f64>)]) -> BlockOperator {
    let scale = 1.0 / n as f64;
    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    for &((i, j), b) in blocks {
        let b = b * scale;
        matrix.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(&b);
        matrix.fixed_view_mut::<2, 2>(2 * j, 2 * i).copy_from(&b.transpose());
    }
    BlockOperator { n, kind, matrix }
}

/// The common lines operator `C_N` from a datum. Pairs the detector excluded
/// as degenerate get zero blocks; any other missing pair is an error.
pub fn assemble_common(datum: &CommonLinesDatum) -> Result<BlockOperator> {
    let n = datum.n();
    let blocks = upper_pairs(n)
        .into_par_iter()
        .filter(|&(i, j)| datum.get(i, j).is_some() || !datum.is_excluded(i, j))
        .map(|(i, j)| datum.block(i, j).map(|b| ((i, j), b.entries)))
        .collect::<Result<Vec<_>>>()?;
    Ok(fill(n, KernelKind::Common, &blocks))
}

/// Operator of any kind computed straight from the geometry.
pub fn assemble_geometric(ds: &DirectionSet, kind: KernelKind) -> Result<BlockOperator> {
    let n = ds.len();
    let blocks = upper_pairs(n)
        .into_par_iter()
        .map(|(i, j)| {
            kernel_block(kind, &ds.frames[i], &ds.frames[j])
                .map(|b| ((i, j), b))
                .map_err(|e| Error::DegeneratePair {
                    i,
                    j,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fill(n, kind, &blocks))
}

impl BlockOperator {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// `‖M − Mᵀ‖_max`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Checks symmetry, zero diagonal blocks and, for `Common`, rank ≤ 1 blocks.
    pub fn check_invariants(&self) -> Result<()> {
        let asym = self.asymmetry();
        if asym > 1e-12 {
            return Err(Error::InvalidArgument(format!("operator asymmetric by {asym:.3e}")));
        }
        for i in 0..self.n {
            if self.block(i, i).amax() != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal block {i} is non-zero")));
            }
        }
        if self.kind == KernelKind::Common {
            let scale = (self.n as f64).powi(-2);
            for i in 0..self.n {
                for j in 0..self.n {
                    let det = self.block(i, j).determinant();
                    if det.abs() > 1e-12 * scale {
                        return Err(Error::InvalidArgument(format!(
                            "block ({i}, {j}) is not rank one (det {det:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
