//! Unfolding of level sequences to unit mean spacing.

mod dos;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

pub use dos::{analytic_dos_honeycomb, DosPoint, HoneycombDos, BAND_EDGE};

use crate::error::{Error, Result};

pub const DEFAULT_DEGREE: usize = 6;
pub const MAX_DEGREE: usize = 12;
const MIN_LEVELS: usize = 50;
/// Lower edge of Dirac-point windows; states below are edge states.
pub const EDGE_STATE_CUTOFF: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnfoldMethod {
    Polynomial(usize),
    AnalyticDos,
}

/// Smooth counting function `Ñ(E)`.
#[derive(Debug, Clone, PartialEq)]
pub enum UnfoldMap {
    /// `Ñ(E) = Σ cₖ xᵏ` with `x = (E − center) / half_width`.
    Polynomial { coeffs: Vec<f64>, center: f64, half_width: f64 },
    /// `Ñ(E) = scale · (I(E) − I(lo))` with `I` the integrated bulk density.
    Dos { dos_lo: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedSequence {
    pub values: Vec<f64>,
    pub source_window: (f64, f64),
    pub method: UnfoldMethod,
    pub map: UnfoldMap,
}

impl UnfoldedSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nearest-neighbour spacings.
    pub fn spacings(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return f64::NAN;
        }
        (self.values[n - 1] - self.values[0]) / (n - 1) as f64
    }

    /// Wraps an already unfolded sequence.
    pub fn from_values(mut values: Vec<f64>) -> UnfoldedSequence {
        values.sort_by(f64::total_cmp);
        let window = match (values.first(), values.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        };
        UnfoldedSequence {
            values,
            source_window: window,
            method: UnfoldMethod::Polynomial(1),
            map: UnfoldMap::Polynomial { coeffs: vec![0.0, 1.0], center: 0.0, half_width: 1.0 },
        }
    }
}

impl UnfoldMap {
    pub fn eval(&self, e: f64, dos: Option<&HoneycombDos>) -> f64 {
        match self {
            UnfoldMap::Polynomial { coeffs, center, half_width } => {
                let x = (e - center) / half_width;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            UnfoldMap::Dos { dos_lo, scale } => {
                let d = dos.expect("density table required for a DOS map");
                scale * (d.signed_integrated(e) - dos_lo)
            }
        }
    }
}

fn in_window(levels: &[f64], window: (f64, f64)) -> Vec<f64> {
    let mut v: Vec<f64> = levels.iter().copied().filter(|&e| e >= window.0 && e <= window.1).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn poly_derivative_min(coeffs: &[f64], samples: impl Iterator<Item = f64>) -> f64 {
    samples
        .map(|x| coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * x + k as f64 * c))
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares polynomial fit of the staircase `N(Eᵢ) = i + ½`.
///
/// If the fitted counting function decreases anywhere on the data range
/// the degree is lowered by one and the fit repeated.
pub fn polynomial_unfold(levels: &[f64], window: (f64, f64), degree: usize) -> Result<UnfoldedSequence> {
    if !(window.0 < window.1) {
        return Err(Error::InvalidWindow { lo: window.0, hi: window.1 });
    }
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::InvalidSpec(alloc::format!("polynomial degree must be 1..={MAX_DEGREE}, got {degree}")));
    }
    let e = in_window(levels, window);
    if e.len() < MIN_LEVELS {
        return Err(Error::NotEnoughData { what: "levels in window", have: e.len(), need: MIN_LEVELS });
    }
    let n = e.len();
    let center = 0.5 * (e[0] + e[n - 1]);
    let half_width = (0.5 * (e[n - 1] - e[0])).max(f64::MIN_POSITIVE);
    let xs: Vec<f64> = e.iter().map(|v| (v - center) / half_width).collect();
    let ys = DVector::from_iterator(n, (0..n).map(|i| i as f64 + 0.5));
    let grid = 4 * n.max(256);
    for deg in (1..=degree).rev() {
        let a = DMatrix::from_fn(n, deg + 1, |i, k| crate::math::pow(xs[i], k as f64));
        let svd = a.svd(true, true);
        let Ok(sol) = svd.solve(&ys, 1e-13) else { continue };
        let coeffs: Vec<f64> = sol.iter().copied().collect();
        let samples = (0..=grid).map(|k| -1.0 + 2.0 * k as f64 / grid as f64).chain(xs.iter().copied());
        if poly_derivative_min(&coeffs, samples) <= 0.0 {
            continue;
        }
        let map = UnfoldMap::Polynomial { coeffs, center, half_width };
        let values: Vec<f64> = e.iter().map(|&v| map.eval(v, None)).collect();
        if values.windows(2).any(|w| w[1] < w[0]) {
            continue;
        }
        return Ok(UnfoldedSequence { values, source_window: window, method: UnfoldMethod::Polynomial(deg), map });
    }
    Err(Error::NonMonotoneUnfolding)
}

/// Unfolds with the bulk honeycomb density, rescaled so the window holds
/// exactly as many unfolded units as it holds levels.
pub fn unfold_with_dos(levels: &[f64], window: (f64, f64), dos: &HoneycombDos) -> Result<UnfoldedSequence> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidWindow { lo, hi });
    }
    if hi <= -BAND_EDGE || lo >= BAND_EDGE {
        return Err(Error::OutsideBand { lo, hi });
    }
    let e = in_window(levels, window);
    let dos_lo = dos.signed_integrated(lo);
    let span = dos.signed_integrated(hi) - dos_lo;
    if !(span > 0.0) {
        return Err(Error::OutsideBand { lo, hi });
    }
    let scale = e.len() as f64 / span;
    let map = UnfoldMap::Dos { dos_lo, scale };
    let values = e.iter().map(|&v| map.eval(v, Some(dos))).collect();
    Ok(UnfoldedSequence { values, source_window: window, method: UnfoldMethod::AnalyticDos, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equally_spaced_levels_are_exact() {
        let levels: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let u = polynomial_unfold(&levels, (0.5, 100.5), 1).unwrap();
        for s in u.spacings() {
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_staircase() {
        // N(E) = E² exactly at the levels
        let levels: Vec<f64> = (1..=400).map(|i| libm::sqrt(i as f64)).collect();
        let u = polynomial_unfold(&levels, (0.0, 1e3), 2).unwrap();
        assert!((u.mean_spacing() - 1.0).abs() < 0.02);
    }

    #[test]
    fn too_few_levels() {
        let levels: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(matches!(polynomial_unfold(&levels, (-1.0, 30.0), 3), Err(Error::NotEnoughData { .. })));
        assert!(polynomial_unfold(&levels, (-1.0, 30.0), 0).is_err());
    }

    #[test]
    fn monotone_fallback_lowers_degree() {
        // a staircase with a flat gap tempts high degrees into wiggles
        let mut levels: Vec<f64> = (0..60).map(|i| i as f64 * 0.01).collect();
        levels.extend((0..60).map(|i| 5.0 + i as f64 * 0.01));
        let u = polynomial_unfold(&levels, (-1.0, 10.0), 12).unwrap();
        assert!(u.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn dos_unfolding_basics() {
        let dos = HoneycombDos::new(512, 512);
        assert!(unfold_with_dos(&[], (0.95, 1.05), &dos).unwrap().is_empty());
        assert!(matches!(unfold_with_dos(&[3.5], (3.1, 3.9), &dos), Err(Error::OutsideBand { .. })));
        // levels placed exactly at the quantiles of the bulk density
        let n = 300;
        let (lo, hi) = (0.9, 1.1);
        let (a, b) = (dos.integrated(lo), dos.integrated(hi));
        let levels: Vec<f64> = (0..n)
            .map(|i| {
                let target = a + (b - a) * (i as f64 + 0.5) / n as f64;
                let (mut l, mut r) = (lo, hi);
                for _ in 0..80 {
                    let m = 0.5 * (l + r);
                    if dos.integrated(m) < target { l = m } else { r = m }
                }
                0.5 * (l + r)
            })
            .collect();
        let u = unfold_with_dos(&levels, (lo, hi), &dos).unwrap();
        assert!((u.mean_spacing() - 1.0).abs() < 0.02);
    }

    #[test]
    fn poisson_input_stays_poisson() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut x = 0.0;
        let levels: Vec<f64> = (0..5000)
            .map(|_| {
                x += -libm::log(1.0 - rng.random::<f64>());
                x
            })
            .collect();
        let u = polynomial_unfold(&levels, (0.0, x + 1.0), DEFAULT_DEGREE).unwrap();
        let s = u.spacings();
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let ks = sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = 1.0 - libm::exp(-v);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "{ks}");
        assert!((u.mean_spacing() - 1.0).abs() < 0.02);
    }
}
