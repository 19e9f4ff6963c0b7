//! Density of states of the infinite nearest-neighbour honeycomb lattice by
//! Brillouin-zone histogramming.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{cos, floor, sin, sqrt};

/// Half bandwidth in units of `t`.
pub const BAND_EDGE: f64 = 3.0;

/// Tabulated single-band density `ρ(E)` for `E ∈ [0, 3]`, normalized so
/// that `∫₀³ ρ dE = 1`; the lower band follows from `ρ(−E) = ρ(E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoneycombDos {
    bin_width: f64,
    density: Vec<f64>,
    /// `cumulative[b]` is the integrated density up to the left edge of bin `b`.
    cumulative: Vec<f64>,
}

/// Density value with an out-of-band marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DosPoint {
    pub density: f64,
    pub out_of_band: bool,
}

impl HoneycombDos {
    /// `grid²` k-points and `bins` energy bins on `[0, 3]`.
    pub fn new(grid: usize, bins: usize) -> HoneycombDos {
        let grid = grid.max(8);
        let bins = bins.max(8);
        let bin_width = BAND_EDGE / bins as f64;
        let (c, s): (Vec<f64>, Vec<f64>) = (0..grid)
            .map(|u| {
                let th = 2.0 * PI * (u as f64 + 0.5) / grid as f64;
                (cos(th), sin(th))
            })
            .unzip();
        let mut hist = vec![0u64; bins];
        for a in 0..grid {
            for b in 0..grid {
                // |f|² = 3 + 2cos θ1 + 2cos θ2 + 2cos(θ1 − θ2)
                let f2 = 3.0 + 2.0 * (c[a] + c[b] + c[a] * c[b] + s[a] * s[b]);
                let e = sqrt(f2.max(0.0));
                let k = ((e / bin_width) as usize).min(bins - 1);
                hist[k] += 1;
            }
        }
        let total = (grid * grid) as f64;
        let density: Vec<f64> = hist.iter().map(|&h| h as f64 / (total * bin_width)).collect();
        let mut cumulative = Vec::with_capacity(bins + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for &h in &hist {
            acc += h as f64 / total;
            cumulative.push(acc);
        }
        HoneycombDos { bin_width, density, cumulative }
    }

    /// Default resolution: 4096² k-points, bin width 3/2048.
    pub fn standard() -> HoneycombDos {
        HoneycombDos::new(4096, 2048)
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    /// `ρ(E)` with linear interpolation between bin midpoints.
    pub fn density(&self, e: f64) -> DosPoint {
        let x = e.abs();
        if x > BAND_EDGE {
            return DosPoint { density: 0.0, out_of_band: true };
        }
        let bins = self.density.len();
        let pos = x / self.bin_width - 0.5;
        let density = if pos <= 0.0 {
            // Dirac cone: linear through the origin
            self.density[0] * x / (0.5 * self.bin_width)
        } else if pos >= (bins - 1) as f64 {
            self.density[bins - 1]
        } else {
            let k = floor(pos) as usize;
            let f = pos - k as f64;
            self.density[k] * (1.0 - f) + self.density[k + 1] * f
        };
        DosPoint { density, out_of_band: false }
    }

    /// `∫₀^|E| ρ`, piecewise linear between bin edges; in `[0, 1]`.
    pub fn integrated(&self, e: f64) -> f64 {
        let x = e.abs().min(BAND_EDGE);
        let pos = x / self.bin_width;
        let k = (floor(pos) as usize).min(self.density.len() - 1);
        let f = pos - k as f64;
        self.cumulative[k] + f * (self.cumulative[k + 1] - self.cumulative[k])
    }

    /// Signed integrated density `∫₀^E ρ`, so differences give counts per
    /// band between any two energies.
    pub fn signed_integrated(&self, e: f64) -> f64 {
        if e < 0.0 {
            -self.integrated(e)
        } else {
            self.integrated(e)
        }
    }
}

/// Single-band honeycomb density at `e` (units of `t`) with the standard
/// quadrature resolution.
pub fn analytic_dos_honeycomb(dos: &HoneycombDos, e: f64) -> DosPoint {
    dos.density(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> HoneycombDos {
        HoneycombDos::new(1024, 512)
    }

    #[test]
    fn normalization_and_symmetry() {
        let d = coarse();
        assert!((d.integrated(3.0) - 1.0).abs() < 1e-12);
        for e in [0.1, 0.7, 1.3, 2.9] {
            assert_eq!(d.density(e), d.density(-e));
        }
        assert_eq!(d.density(0.0).density, 0.0);
        assert!(d.density(3.2).out_of_band);
    }

    #[test]
    fn dirac_cone_slope() {
        // ρ(E) ≈ 2E/(√3π) per band near the Dirac point
        let d = HoneycombDos::new(2048, 1024);
        for e in [0.05, 0.1] {
            let want = 2.0 * e / (sqrt(3.0) * PI);
            assert!((d.density(e).density / want - 1.0).abs() < 0.05, "{e}");
        }
    }

    #[test]
    fn van_hove_peak_sharpens_with_resolution() {
        let lo = HoneycombDos::new(1024, 256);
        let hi = HoneycombDos::new(2048, 2048);
        let peak = |d: &HoneycombDos| d.density(1.0 - 0.5 * d.bin_width()).density;
        assert!(hi.density(0.99).density / hi.density(0.5).density > 3.0);
        assert!(peak(&hi) > 1.3 * peak(&lo));
    }
}
