use alloc::vec::Vec;

use super::WindowSolver;
use crate::error::{Error, Result};

/// Eigenvalue counts in equal bins, from inertia alone.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelHistogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<usize>,
}

impl LevelHistogram {
    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.width
    }
}

pub fn level_histogram(solver: &WindowSolver, lo: f64, hi: f64, bins: usize) -> Result<LevelHistogram> {
    if !(lo < hi) || bins == 0 {
        return Err(Error::InvalidWindow { lo, hi });
    }
    let width = (hi - lo) / bins as f64;
    let mut below = solver.count_below(lo)?;
    let mut counts = Vec::with_capacity(bins);
    for k in 1..=bins {
        let c = solver.count_below(lo + k as f64 * width)?;
        counts.push(c.saturating_sub(below));
        below = c;
    }
    Ok(LevelHistogram { lo, width, counts })
}

/// Side of the density minimum used for the linear fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flank {
    Upper,
    Lower,
}

/// Dirac point as the zero of a straight line fitted to the level density
/// on one flank of its (three-bin smoothed) minimum.
///
/// Edge states pile up on one side of the Dirac point once `t′ ≠ 0`
/// (below it for `t′ > 0`), so the fit uses the opposite flank, over
/// `fit_bins` bins starting at the minimum.
pub fn dirac_point_estimate(hist: &LevelHistogram, flank: Flank, fit_bins: usize) -> Option<f64> {
    let c = &hist.counts;
    let n = c.len();
    if n < 3 || fit_bins < 3 {
        return None;
    }
    let smooth: Vec<f64> = (0..n).map(|k| {
        let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
        c[a..=b].iter().sum::<usize>() as f64 / (b - a + 1) as f64
    }).collect();
    let m = (0..n).min_by(|&a, &b| smooth[a].total_cmp(&smooth[b]))?;
    let idx: Vec<usize> = match flank {
        Flank::Upper => (m..(m + fit_bins).min(n)).collect(),
        Flank::Lower => (m.saturating_sub(fit_bins - 1)..=m).collect(),
    };
    if idx.len() < 3 {
        return None;
    }
    let k = idx.len() as f64;
    let xs: Vec<f64> = idx.iter().map(|&i| hist.center(i)).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| c[i] as f64).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let rising = match flank {
        Flank::Upper => slope > 0.0,
        Flank::Lower => slope < 0.0,
    };
    rising.then(|| mx - my / slope)
}
