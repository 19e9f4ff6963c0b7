use alloc::vec::Vec;

use super::ensemble::EnsembleRef;
use crate::error::{Error, Result};
use crate::unfold::UnfoldedSequence;

pub const MIN_SPACINGS: usize = 100;

/// Kolmogorov-Smirnov distance between the spacings of `seq`, rescaled to
/// unit mean, and the reference spacing law.
pub fn ks_distance(seq: &UnfoldedSequence, reference: &EnsembleRef) -> Result<f64> {
    ks_spacings(&seq.spacings(), reference)
}

pub fn ks_spacings(spacings: &[f64], reference: &EnsembleRef) -> Result<f64> {
    if spacings.len() < MIN_SPACINGS {
        return Err(Error::NotEnoughData { what: "spacings", have: spacings.len(), need: MIN_SPACINGS });
    }
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let mut s: Vec<f64> = spacings.iter().map(|v| v / mean).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    Ok(s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = reference.cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmtstats::ensemble::{goe_reference, gue_reference, poisson_reference, ReferenceSampling};
    use crate::rmtstats::sampling::sample_poisson;

    #[test]
    fn poisson_sample_against_references() {
        let seq = sample_poisson(10_001, 4);
        let p = ks_distance(&seq, &poisson_reference()).unwrap();
        assert!(p < 0.02, "{p}");
        let goe = goe_reference(&ReferenceSampling { realizations: 2, l_max: 2.0, ..ReferenceSampling::default() });
        let g = ks_distance(&seq, &goe).unwrap();
        assert!(g > 0.15, "{g}");
        assert!(ks_distance(&seq, &gue_reference()).unwrap() > g);
    }

    #[test]
    fn rejects_short_sequences() {
        let seq = sample_poisson(100, 1);
        assert!(matches!(ks_distance(&seq, &poisson_reference()), Err(Error::NotEnoughData { have: 99, .. })));
    }

    #[test]
    fn scale_invariant() {
        let seq = sample_poisson(2000, 5);
        let scaled = UnfoldedSequence::from_values(seq.values.iter().map(|v| 3.0 * v).collect());
        let r = poisson_reference();
        assert!((ks_distance(&seq, &r).unwrap() - ks_distance(&scaled, &r).unwrap()).abs() < 1e-12);
    }
}
