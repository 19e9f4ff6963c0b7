//! Reference spacing laws and rigidity curves.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::delta3::delta3;
use super::sampling::{sample_goe, sample_two_goe};
use crate::math::{erf, exp, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnsembleKind {
    Poisson,
    Goe,
    Gue,
    TwoGoe,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 4] = [EnsembleKind::Poisson, EnsembleKind::Goe, EnsembleKind::Gue, EnsembleKind::TwoGoe];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Poisson => "Poisson",
            EnsembleKind::Goe => "GOE",
            EnsembleKind::Gue => "GUE",
            EnsembleKind::TwoGoe => "2GOE",
        }
    }
}

/// Monte Carlo parameters for tabulated references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSampling {
    pub dim: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Largest tabulated `L`.
    pub l_max: f64,
    pub l_step: f64,
    /// Histogram bin width for tabulated spacing laws.
    pub s_step: f64,
}

impl Default for ReferenceSampling {
    fn default() -> Self {
        ReferenceSampling { dim: 400, realizations: 200, seed: 0x5eed, l_max: 60.0, l_step: 0.5, s_step: 0.05 }
    }
}

impl ReferenceSampling {
    pub fn l_grid(&self) -> Vec<f64> {
        let n = (self.l_max / self.l_step + 1e-9) as usize;
        (1..=n).map(|k| k as f64 * self.l_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpacingLaw {
    /// `e^{-s}`
    Exponential,
    /// `(π/2) s e^{-πs²/4}`
    WignerGoe,
    /// `(32/π²) s² e^{-4s²/π}`
    WignerGue,
    /// Piecewise-constant density on bins `[k·w, (k+1)·w)`.
    Tabulated { bin_width: f64, density: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RigidityLaw {
    /// `L/15`
    Linear,
    /// Values at `L = step, 2·step, …`; linear between nodes and towards
    /// `Δ₃(0) = 0`.
    Tabulated { step: f64, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRef {
    pub kind: EnsembleKind,
    pub spacing: SpacingLaw,
    pub rigidity: Option<RigidityLaw>,
    pub sampling: Option<ReferenceSampling>,
}

impl SpacingLaw {
    pub fn pdf(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self {
            SpacingLaw::Exponential => exp(-s),
            SpacingLaw::WignerGoe => 0.5 * PI * s * exp(-0.25 * PI * s * s),
            SpacingLaw::WignerGue => 32.0 / (PI * PI) * s * s * exp(-4.0 * s * s / PI),
            SpacingLaw::Tabulated { bin_width, density } => {
                let k = (s / bin_width) as usize;
                density.get(k).copied().unwrap_or(0.0)
            }
        }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            SpacingLaw::Exponential => 1.0 - exp(-s),
            SpacingLaw::WignerGoe => 1.0 - exp(-0.25 * PI * s * s),
            SpacingLaw::WignerGue => erf(2.0 * s / sqrt(PI)) - 4.0 * s / PI * exp(-4.0 * s * s / PI),
            SpacingLaw::Tabulated { bin_width, density } => {
                let k = (s / bin_width) as usize;
                let full: f64 = density.iter().take(k).sum::<f64>() * bin_width;
                match density.get(k) {
                    Some(d) => full + d * (s - k as f64 * bin_width),
                    None => full,
                }
            }
        }
    }
}

impl RigidityLaw {
    pub fn at(&self, l: f64) -> Option<f64> {
        if !(l >= 0.0) {
            return None;
        }
        match self {
            RigidityLaw::Linear => Some(l / 15.0),
            RigidityLaw::Tabulated { step, values } => {
                let pos = l / step;
                let k = pos as usize;
                if k >= values.len() {
                    // tolerate rounding at the last node
                    return (pos <= values.len() as f64 + 1e-9).then(|| values[values.len() - 1]);
                }
                let left = if k == 0 { 0.0 } else { values[k - 1] };
                Some(left + (pos - k as f64) * (values[k] - left))
            }
        }
    }
}

impl EnsembleRef {
    pub fn pdf(&self, s: f64) -> f64 {
        self.spacing.pdf(s)
    }

    pub fn cdf(&self, s: f64) -> f64 {
        self.spacing.cdf(s)
    }

    /// `None` where no curve is available (GUE, or beyond the table).
    pub fn delta3(&self, l: f64) -> Option<f64> {
        self.rigidity.as_ref().and_then(|r| r.at(l))
    }

    /// Small-`s` limit of the tabulated density by a straight-line fit to
    /// the first four bins; closed forms are evaluated directly.
    pub fn p_zero(&self) -> f64 {
        match &self.spacing {
            SpacingLaw::Tabulated { bin_width, density } => {
                let pts: Vec<(f64, f64)> = density.iter().take(4).enumerate().map(|(k, &d)| ((k as f64 + 0.5) * bin_width, d)).collect();
                let n = pts.len() as f64;
                let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
                let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
                let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
                my - sxy / sxx * mx
            }
            law => law.pdf(0.0),
        }
    }
}

/// Per-realization Monte Carlo output, pooled in realization order.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub spacings: Vec<f64>,
    /// `Δ₃` on [`ReferenceSampling::l_grid`]; `NaN` where the sequence is
    /// too short.
    pub delta3: Vec<f64>,
}

/// One Monte Carlo draw for `kind` (only `Goe` and `TwoGoe` are sampled).
pub fn realization(kind: EnsembleKind, sampling: &ReferenceSampling, k: usize) -> Realization {
    let seed = sampling.seed.wrapping_add(k as u64);
    let seq = match kind {
        EnsembleKind::TwoGoe => sample_two_goe(sampling.dim, seed),
        _ => sample_goe(sampling.dim, seed),
    };
    let delta3 = sampling.l_grid().iter().map(|&l| delta3(&seq, l, None).unwrap_or(f64::NAN)).collect();
    Realization { spacings: seq.spacings(), delta3 }
}

/// Pool-adjacent-violators fit; the rigidity of a stationary sequence
/// cannot decrease with `L`.
fn monotone_fit(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (b, nb) = blocks.pop().unwrap();
            let (a, na) = blocks.pop().unwrap();
            blocks.push(((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb));
        }
    }
    blocks.iter().flat_map(|&(v, n)| core::iter::repeat_n(v, n)).collect()
}

/// Histogram of unit-mean spacings, with the bin width rescaled so the
/// tabulated density has unit mass and exactly unit mean.
fn spacing_table(spacings: &[f64], s_step: f64) -> SpacingLaw {
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let s_max = spacings.iter().fold(0.0f64, |m, &s| m.max(s / mean));
    let bins = (s_max / s_step) as usize + 1;
    let mut counts = alloc::vec![0usize; bins];
    for &s in spacings {
        counts[((s / mean / s_step) as usize).min(bins - 1)] += 1;
    }
    let n = spacings.len() as f64;
    let table_mean: f64 = counts.iter().enumerate().map(|(k, &c)| c as f64 / n * (k as f64 + 0.5) * s_step).sum();
    let bin_width = s_step / table_mean;
    SpacingLaw::Tabulated { bin_width, density: counts.iter().map(|&c| c as f64 / (n * bin_width)).collect() }
}

/// Pools realizations into a tabulated reference. Rigidity nodes where
/// any realization was too short are dropped from the end of the table.
pub fn pool(kind: EnsembleKind, sampling: &ReferenceSampling, draws: &[Realization]) -> EnsembleRef {
    let spacings: Vec<f64> = draws.iter().flat_map(|d| d.spacings.iter().copied()).collect();
    let grid = sampling.l_grid();
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let v = draws.iter().map(|d| d.delta3[j]).sum::<f64>() / draws.len() as f64;
        if !v.is_finite() {
            break;
        }
        values.push(v);
    }
    let spacing = match kind {
        EnsembleKind::Goe => SpacingLaw::WignerGoe,
        _ => spacing_table(&spacings, sampling.s_step),
    };
    EnsembleRef {
        kind,
        spacing,
        rigidity: Some(RigidityLaw::Tabulated { step: sampling.l_step, values: monotone_fit(&values) }),
        sampling: Some(*sampling),
    }
}

pub fn poisson_reference() -> EnsembleRef {
    EnsembleRef { kind: EnsembleKind::Poisson, spacing: SpacingLaw::Exponential, rigidity: Some(RigidityLaw::Linear), sampling: None }
}

pub fn gue_reference() -> EnsembleRef {
    EnsembleRef { kind: EnsembleKind::Gue, spacing: SpacingLaw::WignerGue, rigidity: None, sampling: None }
}

/// Wigner surmise for spacings, Monte Carlo rigidity.
pub fn goe_reference(sampling: &ReferenceSampling) -> EnsembleRef {
    let draws: Vec<Realization> = (0..sampling.realizations).map(|k| realization(EnsembleKind::Goe, sampling, k)).collect();
    pool(EnsembleKind::Goe, sampling, &draws)
}

/// Superposition of two independent equal-density GOE sequences,
/// tabulated by Monte Carlo.
pub fn two_goe_reference(sampling: &ReferenceSampling) -> EnsembleRef {
    let draws: Vec<Realization> = (0..sampling.realizations).map(|k| realization(EnsembleKind::TwoGoe, sampling, k)).collect();
    pool(EnsembleKind::TwoGoe, sampling, &draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn quadrature(law: &SpacingLaw) -> (f64, f64) {
        let (h, n) = (1e-4, 200_000);
        let (mut mass, mut mean) = (0.0, 0.0);
        for k in 0..n {
            let s = (k as f64 + 0.5) * h;
            mass += law.pdf(s) * h;
            mean += s * law.pdf(s) * h;
        }
        (mass, mean)
    }

    fn small() -> ReferenceSampling {
        ReferenceSampling { dim: 200, realizations: 60, l_max: 20.0, ..ReferenceSampling::default() }
    }

    #[test]
    fn closed_forms_are_normalized() {
        for law in [SpacingLaw::Exponential, SpacingLaw::WignerGoe, SpacingLaw::WignerGue] {
            let (mass, mean) = quadrature(&law);
            assert!((mass - 1.0).abs() < 1e-6 && (mean - 1.0).abs() < 1e-6, "{law:?}: {mass} {mean}");
            assert!((law.cdf(60.0) - 1.0).abs() < 1e-12);
            // cdf is the integral of pdf
            let s = 1.3;
            let num: f64 = (0..13_000).map(|k| law.pdf((k as f64 + 0.5) * 1e-4) * 1e-4).sum();
            assert!((law.cdf(s) - num).abs() < 1e-7);
        }
    }

    #[test]
    fn tabulated_law_has_unit_mass_and_mean() {
        let r = two_goe_reference(&small());
        let SpacingLaw::Tabulated { bin_width, density } = &r.spacing else { panic!() };
        let mass: f64 = density.iter().sum::<f64>() * bin_width;
        let mean: f64 = density.iter().enumerate().map(|(k, d)| d * bin_width * (k as f64 + 0.5) * bin_width).sum();
        assert!((mass - 1.0).abs() < 1e-9 && (mean - 1.0).abs() < 1e-9);
        assert!(density.iter().all(|&d| d >= 0.0));
        assert!((r.cdf(1e3) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rigidity_tables_are_monotone() {
        let s = small();
        for r in [goe_reference(&s), two_goe_reference(&s)] {
            let Some(RigidityLaw::Tabulated { values, .. }) = &r.rigidity else { panic!() };
            assert_eq!(values.len(), s.l_grid().len());
            assert!(values.windows(2).all(|w| w[1] >= w[0]));
            assert!(values.iter().all(|&v| v >= 0.0));
        }
        assert_eq!(gue_reference().delta3(5.0), None);
        assert_eq!(poisson_reference().delta3(15.0), Some(1.0));
    }

    #[test]
    fn monotone_fit_pools_violators() {
        assert_eq!(monotone_fit(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(monotone_fit(&[]), Vec::<f64>::new());
    }

    #[test]
    fn rigidity_interpolation() {
        let law = RigidityLaw::Tabulated { step: 0.5, values: vec![0.1, 0.2, 0.4] };
        assert_eq!(law.at(0.0), Some(0.0));
        assert!((law.at(0.25).unwrap() - 0.05).abs() < 1e-12);
        assert!((law.at(1.25).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(law.at(1.5), Some(0.4));
        assert_eq!(law.at(1.6), None);
    }
}
