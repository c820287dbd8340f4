//! Recovery of viewing orientations from common-lines data.
//!
//! The common-lines datum of `N` viewing planes defines a symmetric
//! `2N × 2N` block operator. Its eigenspace for eigenvalues above `1/3` is a
//! three-dimensional intrinsic copy of ambient space, and projecting it onto
//! each plane yields that plane's embedding up to one global orthogonal map.
//!
//! Modules:
//! * [`sphere`]: directions, plane frames, uniform sampling;
//! * [`kernels`]: the common-lines, orthographic and transport kernels and
//!   the [`CommonLinesDatum`](kernels::CommonLinesDatum);
//! * [`spectral`]: operator assembly, eigendecomposition, intrinsic model and
//!   registration against ground truth;
//! * [`theory`]: closed-form predictions and their quadrature checks;
//! * [`projection`]: synthetic Fourier slices and common-line detection;
//! * [`formats`] and [`verify`]: file schemas and verification suites used by
//!   the command-line tool.

pub mod error;
pub mod formats;
pub mod kernels;
pub mod projection;
pub mod spectral;
pub mod sphere;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
