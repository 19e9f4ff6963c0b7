use alloc::vec::Vec;

use crate::math::ceil;
use crate::unfold::UnfoldedSequence;

pub const DEFAULT_BIN_WIDTH: f64 = 0.25;
/// Histograms always extend at least this far.
pub const DEFAULT_S_MAX: f64 = 4.0;

/// Density-normalized histogram on equal bins starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.density.len()).map(|k| k as f64 * self.bin_width).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.density.len()).map(|k| (k as f64 + 0.5) * self.bin_width).collect()
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }
}

/// Histogram of nearest-neighbour spacings. Bins cover `[0, 4]` and are
/// extended to include the largest spacing, so the density integrates to 1.
pub fn nnsd(seq: &UnfoldedSequence, bin_width: f64) -> Histogram {
    spacing_histogram(&seq.spacings(), bin_width)
}

pub fn spacing_histogram(spacings: &[f64], bin_width: f64) -> Histogram {
    let bin_width = if bin_width > 0.0 { bin_width } else { DEFAULT_BIN_WIDTH };
    let s_max = spacings.iter().copied().fold(DEFAULT_S_MAX, f64::max);
    let mut bins = ceil(s_max / bin_width - 1e-12) as usize;
    if (bins as f64) * bin_width <= s_max {
        bins += 1;
    }
    let mut counts = alloc::vec![0usize; bins.max(1)];
    for &s in spacings {
        let k = ((s.max(0.0) / bin_width) as usize).min(counts.len() - 1);
        counts[k] += 1;
    }
    let n = spacings.len().max(1) as f64;
    Histogram { bin_width, density: counts.iter().map(|&c| c as f64 / (n * bin_width)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn picket_fence_single_bin() {
        let h = nnsd(&UnfoldedSequence::from_values(vec![0.0, 1.0, 2.0, 3.0]), 0.25);
        let nonzero: Vec<usize> = (0..h.density.len()).filter(|&k| h.density[k] > 0.0).collect();
        assert_eq!(nonzero, vec![4]);
        assert!((h.integral() - 1.0).abs() < 1e-12);
        assert!((h.centers()[4] - 1.125).abs() < 1e-12);
    }

    #[test]
    fn long_spacings_are_kept() {
        let h = nnsd(&UnfoldedSequence::from_values(vec![0.0, 1.0, 7.3]), 0.25);
        assert!((h.integral() - 1.0).abs() < 1e-12);
        assert!(h.edges().last().unwrap() > &6.3);
    }
}
