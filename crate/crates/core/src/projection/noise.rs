use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::slice::PolarSlice;
use crate::error::{Error, Result};

/// Mean `|v|²` over all samples of a slice.
pub fn mean_power(slice: &PolarSlice) -> f64 {
    slice.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / slice.values.len().max(1) as f64
}

/// Adds circular complex Gaussian noise of variance `mean_power / snr` to
/// every sample.
///
/// Noise is drawn for the first half of the rays and mirrored as its
/// conjugate onto the opposite rays, so Hermitian ray symmetry survives.
/// Node `k` draws from stream `k + 1` of the ChaCha generator seeded with
/// `seed`; stream 0 is the one direction sampling uses. An infinite `snr`
/// returns the slice unchanged.
pub fn add_noise(slice: &PolarSlice, snr: f64, seed: u64) -> Result<PolarSlice> {
    if snr.is_nan() || snr <= 0.0 {
        return Err(Error::InvalidArgument(format!("snr must be positive, got {snr}")));
    }
    if snr.is_infinite() {
        return Ok(slice.clone());
    }
    let sigma = (mean_power(slice) / snr / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slice.node as u64 + 1);
    let (half, n_r) = (slice.grid.n_theta / 2, slice.grid.n_r);
    let mut out = slice.clone();
    for a in 0..half {
        for b in 0..n_r {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let e = Complex64::new(re, im) * sigma;
            out.values[a * n_r + b] += e;
            out.values[(a + half) * n_r + b] += e.conj();
        }
    }
    Ok(out)
}
