//! Dirichlet sector billiard: spectrum from Bessel zeros, wavefunctions and
//! pairing with graphene band-edge levels.

pub mod bessel;

use alloc::vec::Vec;
use core::f64::consts::PI;

pub use bessel::{bessel_j, bessel_j_and_derivative, bessel_zeros, MAX_ORDER};

use crate::error::{Error, Result};
use crate::math::{round, sin, sqrt};

/// Bisection tolerance on `k`.
pub const ZERO_TOL: f64 = 1e-11;
/// Relative Weyl-count tolerance.
pub const WEYL_TOL: f64 = 0.02;
/// The Weyl check is skipped when fewer levels are expected.
pub const WEYL_MIN_LEVELS: f64 = 100.0;
/// Band-edge windows must lie within this distance of the edge.
pub const BAND_EDGE_REACH: f64 = 0.05;
/// Relative count mismatch above which a pairing is flagged partial.
pub const PAIRING_TOL: f64 = 0.05;

/// Level of the unit-radius sector with Dirichlet walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilliardLevel {
    pub m: u32,
    pub n: u32,
    pub k: f64,
    /// `ν = mπ/α`
    pub order: f64,
}

fn sector_index(alpha: f64) -> Result<u32> {
    let n = round(PI / alpha);
    if !(alpha > 0.0) || n < 1.0 || (PI / n - alpha).abs() > 1e-12 * alpha.max(1.0) {
        return Err(Error::InvalidSpec(alloc::format!("sector angle must be pi/n, got {alpha}")));
    }
    Ok(n as u32)
}

/// Smooth level count `N(k) ≈ (α/2)k²/(4π) − (2 + α)k/(4π)` (area and
/// perimeter terms of the unit-radius sector).
pub fn weyl_count(alpha: f64, k: f64) -> f64 {
    (0.5 * alpha * k * k - (2.0 + alpha) * k) / (4.0 * PI)
}

/// All levels with `k ≤ k_max`, sorted by `k`.
pub fn sector_spectrum(alpha: f64, k_max: f64) -> Result<Vec<BilliardLevel>> {
    let n_int = sector_index(alpha)?;
    let step = f64::from(n_int);
    let mut out = Vec::new();
    let mut m = 1u32;
    loop {
        let order = f64::from(m) * step;
        if order >= k_max {
            break;
        }
        if order > MAX_ORDER {
            return Err(Error::OutOfRange(alloc::format!("k_max = {k_max} needs Bessel order {order}")));
        }
        for (i, k) in bessel_zeros(order, k_max, ZERO_TOL)?.into_iter().enumerate() {
            out.push(BilliardLevel { m, n: i as u32 + 1, k, order });
        }
        m += 1;
    }
    if out.is_empty() {
        return Err(Error::InvalidSpec(alloc::format!("k_max = {k_max} lies below the ground state")));
    }
    out.sort_by(|a, b| a.k.total_cmp(&b.k));
    let expected = weyl_count(alpha, k_max);
    if expected >= WEYL_MIN_LEVELS && (out.len() as f64 - expected).abs() > WEYL_TOL * expected {
        return Err(Error::WeylMismatch { found: out.len(), expected });
    }
    Ok(out)
}

/// The lowest `count` levels. `k_max` is chosen from the Weyl law with a
/// margin and the list truncated.
pub fn lowest_levels(alpha: f64, count: usize) -> Result<Vec<BilliardLevel>> {
    // invert the Weyl count, then pad
    let a = 0.5 * alpha / (4.0 * PI);
    let b = (2.0 + alpha) / (4.0 * PI);
    let target = count as f64;
    let mut k_max = (b + sqrt(b * b + 4.0 * a * target)) / (2.0 * a);
    loop {
        k_max = k_max * 1.03 + 2.0;
        let levels = sector_spectrum(alpha, k_max)?;
        if levels.len() >= count {
            let mut levels = levels;
            levels.truncate(count);
            return Ok(levels);
        }
    }
}

/// Unnormalized `sin(mπφ/α) J_ν(kρ)` at a point of the unit sector.
pub fn sector_wavefunction(level: &BilliardLevel, rho: f64, phi: f64, alpha: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=1.0 + SLACK).contains(&rho) || !(-SLACK..=alpha + SLACK).contains(&phi) {
        return Err(Error::OutOfRange(alloc::format!("point (rho = {rho}, phi = {phi}) outside the sector")));
    }
    let radial = bessel_j(level.order, (level.k * rho.clamp(0.0, 1.0)).min(bessel::MAX_ARGUMENT))?;
    Ok(sin(f64::from(level.m) * PI * phi / alpha) * radial)
}

/// One graphene level matched to a billiard mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePair {
    pub energy: f64,
    pub level: BilliardLevel,
    /// `(|E − E_edge|/t) / (k²/(4L0²))`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeMatching {
    pub pairs: Vec<EdgePair>,
    pub graphene_count: usize,
    /// Billiard modes in the same energy range.
    pub billiard_count: usize,
    /// Counts differ by more than [`PAIRING_TOL`].
    pub partial: bool,
}

impl EdgeMatching {
    pub fn ratios(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.ratio).collect()
    }
}

/// Pairs graphene levels near the band edge `edge` (in `t`) with billiard
/// modes in order of distance from the edge.
pub fn match_band_edge(levels: &[f64], edge: f64, l0: f64, billiard: &[BilliardLevel]) -> Result<EdgeMatching> {
    if levels.iter().any(|e| (e - edge).abs() > BAND_EDGE_REACH) {
        return Err(Error::RegimeMismatch("band-edge matching needs levels within 0.05 t of the edge"));
    }
    if levels.is_empty() {
        return Ok(EdgeMatching::default());
    }
    let mut depth: Vec<(f64, f64)> = levels.iter().map(|&e| ((e - edge).abs(), e)).collect();
    depth.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut modes = billiard.to_vec();
    modes.sort_by(|a, b| a.k.total_cmp(&b.k));
    let scale = 4.0 * l0 * l0;
    let reach = depth[depth.len() - 1].0;
    let billiard_count = modes.iter().filter(|m| m.k * m.k / scale <= reach).count();
    let graphene_count = depth.len();
    let pairs: Vec<EdgePair> = depth
        .iter()
        .zip(&modes)
        .map(|(&(d, e), &level)| EdgePair { energy: e, level, ratio: d / (level.k * level.k / scale) })
        .collect();
    let big = graphene_count.max(billiard_count) as f64;
    let partial = (graphene_count as f64 - billiard_count as f64).abs() > PAIRING_TOL * big;
    Ok(EdgeMatching { pairs, graphene_count, billiard_count, partial })
}
