//! Random-matrix and Poisson level sequences used as statistical oracles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::math::{asin, log, sqrt};
use crate::unfold::UnfoldedSequence;

/// Smallest matrix dimension accepted by [`sample_goe`].
pub const MIN_GOE_DIM: usize = 50;

/// Integrated semicircle density for radius `r` and `n` levels.
fn semicircle_count(e: f64, r: f64, n: usize) -> f64 {
    let x = (e / r).clamp(-1.0, 1.0);
    n as f64 * (0.5 + (x * sqrt(1.0 - x * x) + asin(x)) / PI)
}

/// Eigenvalues of one GOE matrix `H = (A + Aᵀ)/2` with standard normal
/// `A`, unfolded with the semicircle law and restricted to the central
/// half of the spectrum. Deterministic per `seed`.
pub fn sample_goe(dim: usize, seed: u64) -> UnfoldedSequence {
    let dim = dim.max(MIN_GOE_DIM);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let v: f64 = rng.sample(StandardNormal);
            // diagonal variance 1, off-diagonal variance 1/2
            let v = if i == j { v } else { v / core::f64::consts::SQRT_2 };
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    let r = sqrt(2.0 * dim as f64);
    let values = e[dim / 4..dim - dim / 4].iter().map(|&x| semicircle_count(x, r, dim)).collect();
    UnfoldedSequence::from_values(values)
}

/// Unit-rate Poisson process of `n` points starting at zero.
pub fn sample_poisson(n: usize, seed: u64) -> UnfoldedSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    let values = (0..n)
        .map(|_| {
            x += -log(1.0 - rng.random::<f64>());
            x
        })
        .collect();
    UnfoldedSequence::from_values(values)
}

/// Superposition of two independent GOE sequences, each stretched to half
/// density and clipped to their common range. Both share the semicircle
/// origin, so no level pair is forced to coincide.
pub fn sample_two_goe(dim: usize, seed: u64) -> UnfoldedSequence {
    let a = sample_goe(dim, seed.wrapping_mul(2));
    let b = sample_goe(dim, seed.wrapping_mul(2).wrapping_add(1));
    let start = a.values[0].max(b.values[0]);
    let end = a.values[a.len() - 1].min(b.values[b.len() - 1]);
    let mut merged: Vec<f64> = a
        .values
        .iter()
        .chain(&b.values)
        .filter(|&&v| v >= start && v <= end)
        .map(|v| 2.0 * (v - start))
        .collect();
    merged.sort_by(f64::total_cmp);
    UnfoldedSequence::from_values(merged)
}
