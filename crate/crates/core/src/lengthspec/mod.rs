//! Dimensionless wavevectors, length spectra and periodic-orbit lengths.

pub mod orbits;
pub mod raytrace;

use alloc::vec::Vec;
use core::f64::consts::PI;

pub use orbits::{enumerate_orbits, enumerate_orbits_with, family_closure, OrbitFamily};
pub use raytrace::{fold_into_sector, ray_trace, trace_length, ApexRule, Trajectory};

use crate::error::{Error, Result};
use crate::math::{cos, sin, sqrt, SQRT_3};

pub const MIN_WAVEVECTORS: usize = 100;
/// Energy (in `t`) separating the Dirac and band-edge regimes.
pub const VAN_HOVE: f64 = 1.0;
pub const BAND_EDGE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `qL = 2L0·|E|/√3`
    Dirac,
    /// `qL = 2L0·√|E − E_edge|`
    BandEdge,
    /// Billiard wavevectors, passed through.
    QuantumBilliard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavevectorSeq {
    /// Sorted, nonnegative `qL`.
    pub values: Vec<f64>,
    pub regime: Regime,
    pub l0: f64,
    pub source_window: (f64, f64),
}

impl WavevectorSeq {
    pub fn span(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Length resolution `2π / span(qL)`.
    pub fn resolution(&self) -> f64 {
        2.0 * PI / self.span()
    }
}

/// Converts energies (in `t`) to dimensionless wavevectors for `regime`.
pub fn to_wavevectors(levels: &[f64], regime: Regime, l0: f64) -> Result<WavevectorSeq> {
    let window = levels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let mut values: Vec<f64> = match regime {
        Regime::Dirac => {
            if levels.iter().any(|e| e.abs() > VAN_HOVE) {
                return Err(Error::RegimeMismatch("Dirac conversion needs |E| <= t"));
            }
            levels.iter().map(|e| 2.0 * l0 * e.abs() / SQRT_3).collect()
        }
        Regime::BandEdge => {
            let upper = levels.iter().all(|&e| (VAN_HOVE..=BAND_EDGE).contains(&e));
            let lower = levels.iter().all(|&e| (-BAND_EDGE..=-VAN_HOVE).contains(&e));
            if !(upper || lower) {
                return Err(Error::RegimeMismatch("band-edge conversion needs t <= |E| <= 3t on one side of the band"));
            }
            let edge = if upper { BAND_EDGE } else { -BAND_EDGE };
            levels.iter().map(|e| 2.0 * l0 * sqrt((e - edge).abs())).collect()
        }
        Regime::QuantumBilliard => {
            if levels.iter().any(|&k| k < 0.0) {
                return Err(Error::RegimeMismatch("billiard wavevectors must be nonnegative"));
            }
            levels.to_vec()
        }
    };
    values.sort_by(f64::total_cmp);
    Ok(WavevectorSeq { values, regime, l0, source_window: window })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Taper {
    #[default]
    Hann,
    Rectangular,
}

fn taper_weights(values: &[f64], taper: Taper) -> Vec<f64> {
    let (lo, hi) = match (values.first(), values.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Vec::new(),
    };
    let span = hi - lo;
    values
        .iter()
        .map(|&q| match taper {
            Taper::Hann if span > 0.0 => 0.5 * (1.0 - cos(2.0 * PI * (q - lo) / span)),
            _ => 1.0,
        })
        .collect()
}

/// `|Σⱼ w(qⱼ) e^{i qⱼ ℓ}|` on `grid`; `values` must be sorted.
pub fn fourier_modulus(values: &[f64], grid: &[f64], taper: Taper) -> Vec<f64> {
    let w = taper_weights(values, taper);
    grid.iter()
        .map(|&l| {
            let (mut re, mut im) = (0.0, 0.0);
            for (q, wq) in values.iter().zip(&w) {
                re += wq * cos(q * l);
                im += wq * sin(q * l);
            }
            sqrt(re * re + im * im)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthSpectrum {
    pub l: Vec<f64>,
    pub f: Vec<f64>,
    pub resolution: f64,
    /// The grid step exceeds half the resolution; peaks may be missed.
    pub under_resolved: bool,
}

/// Evenly spaced `ℓ` grid on `[0, l_max]`.
pub fn uniform_grid(l_max: f64, step: f64) -> Vec<f64> {
    let n = (l_max / step) as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

pub fn length_spectrum(seq: &WavevectorSeq, grid: &[f64], taper: Taper) -> Result<LengthSpectrum> {
    if seq.values.len() < MIN_WAVEVECTORS {
        return Err(Error::NotEnoughData { what: "wavevectors", have: seq.values.len(), need: MIN_WAVEVECTORS });
    }
    let resolution = seq.resolution();
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(LengthSpectrum { l: grid.to_vec(), f: fourier_modulus(&seq.values, grid, taper), resolution, under_resolved: step > 0.5 * resolution })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined by a parabola through the three top samples.
    pub l: f64,
    pub height: f64,
    pub prominence: f64,
}

impl LengthSpectrum {
    /// Interior local maxima with their topographic prominence.
    pub fn peaks(&self) -> Vec<Peak> {
        let f = &self.f;
        let mut out = Vec::new();
        for i in 1..f.len().saturating_sub(1) {
            if !(f[i] > f[i - 1] && f[i] >= f[i + 1]) {
                continue;
            }
            let mut left = f[i];
            for j in (0..i).rev() {
                if f[j] > f[i] {
                    break;
                }
                left = left.min(f[j]);
            }
            let mut right = f[i];
            for &v in &f[i + 1..] {
                if v > f[i] {
                    break;
                }
                right = right.min(v);
            }
            let (a, b, c) = (f[i - 1], f[i], f[i + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom < 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            let h = self.l[i + 1] - self.l[i];
            out.push(Peak { l: self.l[i] + shift * h, height: b, prominence: b - left.max(right) });
        }
        out
    }

    pub fn median(&self) -> f64 {
        let mut v = self.f.clone();
        v.sort_by(f64::total_cmp);
        match v.len() {
            0 => 0.0,
            n if n % 2 == 1 => v[n / 2],
            n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
        }
    }

    /// Peaks whose prominence exceeds `factor` times the median of `F`,
    /// ignoring `ℓ < min_l`.
    pub fn significant_peaks(&self, factor: f64, min_l: f64) -> Vec<Peak> {
        let cut = factor * self.median();
        self.peaks().into_iter().filter(|p| p.prominence > cut && p.l >= min_l).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        let l0 = 150.0;
        let d = to_wavevectors(&[SQRT_3 / (2.0 * l0)], Regime::Dirac, l0).unwrap();
        assert!((d.values[0] - 1.0).abs() < 1e-12);
        let b = to_wavevectors(&[3.0, 2.99], Regime::BandEdge, l0).unwrap();
        assert_eq!(b.values[0], 0.0);
        assert!((b.values[1] - 2.0 * l0 * 0.1).abs() < 1e-9);
        let lower = to_wavevectors(&[-2.96], Regime::BandEdge, l0).unwrap();
        assert!((lower.values[0] - 2.0 * l0 * 0.2).abs() < 1e-9);
        assert!(to_wavevectors(&[2.0], Regime::Dirac, l0).is_err());
        assert!(to_wavevectors(&[0.1], Regime::BandEdge, l0).is_err());
        assert!(to_wavevectors(&[2.0, -2.0], Regime::BandEdge, l0).is_err());
    }

    #[test]
    fn single_wavevector_is_flat() {
        let f = fourier_modulus(&[3.7], &uniform_grid(10.0, 0.1), Taper::Hann);
        assert!(f.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn picket_fence_comb() {
        let values: Vec<f64> = (1..=400).map(|j| j as f64 * PI / 2.0).collect();
        let seq = to_wavevectors(&values, Regime::QuantumBilliard, 1.0).unwrap();
        let spec = length_spectrum(&seq, &uniform_grid(17.0, 0.005), Taper::Hann).unwrap();
        assert!(!spec.under_resolved);
        let mut peaks = spec.significant_peaks(3.0, 0.5);
        peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
        let mut ls: Vec<f64> = peaks.iter().take(4).map(|p| p.l).collect();
        ls.sort_by(f64::total_cmp);
        assert!(peaks[4].height < 0.05 * peaks[3].height);
        for (m, l) in ls.iter().enumerate() {
            assert!((l - 4.0 * (m + 1) as f64).abs() < 0.005);
        }
    }

    #[test]
    fn modulus_ignores_global_phase_shift() {
        // adding 2π/ℓ₀ to every q multiplies each term by the same phase at ℓ₀
        let values: Vec<f64> = (0..150).map(|j| 10.0 + j as f64 * 0.731).collect();
        let l = 2.5;
        let shifted: Vec<f64> = values.iter().map(|q| q + 1.234).collect();
        let a = fourier_modulus(&values, &[l], Taper::Rectangular)[0];
        let b = fourier_modulus(&shifted, &[l], Taper::Rectangular)[0];
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn needs_enough_wavevectors() {
        let seq = to_wavevectors(&[1.0, 2.0], Regime::QuantumBilliard, 1.0).unwrap();
        assert!(length_spectrum(&seq, &[0.0, 1.0], Taper::Hann).is_err());
    }
}
