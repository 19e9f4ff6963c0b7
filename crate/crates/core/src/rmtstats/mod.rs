//! Level statistics and random-matrix references.

pub mod delta3;
pub mod ensemble;
pub mod ks;
pub mod nnsd;
pub mod parity;
pub mod sampling;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

pub use delta3::{delta3, delta3_at, delta3_curve};
pub use ensemble::{
    goe_reference, gue_reference, poisson_reference, pool, realization, two_goe_reference, EnsembleKind, EnsembleRef,
    Realization, ReferenceSampling, RigidityLaw, SpacingLaw,
};
pub use ks::{ks_distance, ks_spacings, MIN_SPACINGS};
pub use nnsd::{nnsd, spacing_histogram, Histogram, DEFAULT_BIN_WIDTH};
pub use parity::{parity_split, ParitySplit};
pub use sampling::{sample_goe, sample_poisson, sample_two_goe};

use crate::error::{Error, Result};
use crate::unfold::UnfoldedSequence;

/// KS distance above which no reference is considered a match.
pub const MIXED_THRESHOLD: f64 = 0.12;

#[derive(Debug, Clone, PartialEq)]
pub struct StatOptions {
    pub bin_width: f64,
    /// Interval lengths for `Δ₃`.
    pub lengths: Vec<f64>,
    pub n_positions: Option<usize>,
}

impl Default for StatOptions {
    fn default() -> Self {
        StatOptions { bin_width: DEFAULT_BIN_WIDTH, lengths: (1..=20).map(f64::from).collect(), n_positions: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatReport {
    pub nnsd: Histogram,
    pub delta3: Vec<(f64, f64)>,
    pub ks: BTreeMap<EnsembleKind, f64>,
    pub n_levels: usize,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PoissonLike,
    GoeLike,
    TwoGoeLike,
    Mixed,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::PoissonLike => "Poisson-like",
            Verdict::GoeLike => "GOE-like",
            Verdict::TwoGoeLike => "2GOE-like",
            Verdict::Mixed => "mixed",
        }
    }
}

impl StatReport {
    /// Nearest of Poisson, GOE and 2GOE by KS distance.
    pub fn verdict(&self) -> Verdict {
        let best = [
            (EnsembleKind::Poisson, Verdict::PoissonLike),
            (EnsembleKind::Goe, Verdict::GoeLike),
            (EnsembleKind::TwoGoe, Verdict::TwoGoeLike),
        ]
        .iter()
        .filter_map(|&(k, v)| self.ks.get(&k).map(|&d| (d, v)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
        match best {
            Some((d, v)) if d <= MIXED_THRESHOLD => v,
            _ => Verdict::Mixed,
        }
    }
}

/// NNSD, `Δ₃` curve and KS distances to every given reference.
pub fn analyze(seq: &UnfoldedSequence, references: &[EnsembleRef], options: &StatOptions) -> Result<StatReport> {
    if seq.len() < 2 {
        return Err(Error::NotEnoughData { what: "levels", have: seq.len(), need: 2 });
    }
    let mut ks = BTreeMap::new();
    for r in references {
        ks.insert(r.kind, ks_distance(seq, r)?);
    }
    Ok(StatReport {
        nnsd: nnsd(seq, options.bin_width),
        delta3: delta3_curve(seq, &options.lengths, options.n_positions),
        ks,
        n_levels: seq.len(),
        window: seq.source_window,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// `(reference, KS of a, KS of b)`
    pub rows: Vec<(EnsembleKind, f64, f64)>,
    pub verdict_a: Verdict,
    pub verdict_b: Verdict,
}

/// Side-by-side KS distances of two reports taken on the same window and
/// binning.
pub fn compare(a: &StatReport, b: &StatReport) -> Result<Comparison> {
    if a.nnsd.bin_width != b.nnsd.bin_width {
        return Err(Error::Incompatible(format!("bin widths {} and {}", a.nnsd.bin_width, b.nnsd.bin_width)));
    }
    if a.window != b.window {
        return Err(Error::Incompatible(format!("windows {:?} and {:?}", a.window, b.window)));
    }
    let rows = a.ks.iter().filter_map(|(k, &da)| b.ks.get(k).map(|&db| (*k, da, db))).collect();
    Ok(Comparison { rows, verdict_a: a.verdict(), verdict_b: b.verdict() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(seq: &UnfoldedSequence) -> StatReport {
        analyze(seq, &[poisson_reference(), gue_reference()], &StatOptions::default()).unwrap()
    }

    #[test]
    fn poisson_report() {
        let seq = sample_poisson(3000, 21);
        let r = report(&seq);
        assert_eq!(r.verdict(), Verdict::PoissonLike);
        assert!((r.nnsd.integral() - 1.0).abs() < 1e-9);
        assert_eq!(r.delta3.len(), 20);
        let same = compare(&r, &r).unwrap();
        assert!(same.rows.iter().all(|row| row.1 == row.2));
        assert_eq!(same.verdict_a, same.verdict_b);
    }

    #[test]
    fn picket_fence_is_mixed() {
        let seq = UnfoldedSequence::from_values((0..500).map(f64::from).collect());
        assert_eq!(report(&seq).verdict(), Verdict::Mixed);
    }

    #[test]
    fn mismatched_bins() {
        let seq = sample_poisson(300, 2);
        let a = report(&seq);
        let opts = StatOptions { bin_width: 0.1, ..StatOptions::default() };
        let b = analyze(&seq, &[poisson_reference()], &opts).unwrap();
        assert!(matches!(compare(&a, &b), Err(Error::Incompatible(_))));
    }
}
