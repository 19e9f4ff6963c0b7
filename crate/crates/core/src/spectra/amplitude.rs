use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::math::{erf, sqrt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeReport {
    /// Kolmogorov-Smirnov distance of the site amplitudes to a zero-mean
    /// Gaussian with the empirical variance.
    pub ks_gaussian: f64,
    /// Inverse participation ratio `Σ ψᵢ⁴`.
    pub participation_ratio: f64,
}

/// Amplitude distribution of one normalized eigenvector, both sublattices
/// pooled.
pub fn amplitude_stats(vector: &[f64], lat: &Lattice) -> Result<AmplitudeReport> {
    if vector.len() != lat.len() {
        return Err(Error::Incompatible(alloc::format!(
            "vector length {} does not match lattice size {}",
            vector.len(),
            lat.len()
        )));
    }
    let n = vector.len();
    let norm2: f64 = vector.iter().map(|x| x * x).sum();
    let participation_ratio = vector.iter().map(|x| x * x * x * x).sum::<f64>() / (norm2 * norm2);
    let sigma = sqrt(norm2 / n as f64);
    let mut sorted: Vec<f64> = vector.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cdf = |x: f64| 0.5 * (1.0 + erf(x / (sigma * core::f64::consts::SQRT_2)));
    let mut ks: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        ks = ks.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
    }
    Ok(AmplitudeReport { ks_gaussian: ks, participation_ratio })
}
