use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectra::SpectrumRecord;

/// Levels closer than this are symmetrized together before classification.
pub const CLUSTER_GAP: f64 = 1e-7;
/// Minimum `|⟨ψ|Rψ⟩|` for a definite parity.
pub const PARITY_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParitySplit {
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
    pub unclassified: Vec<f64>,
}

impl ParitySplit {
    /// Fails if any state was left without a parity.
    pub fn complete(self) -> Result<ParitySplit> {
        if self.unclassified.is_empty() {
            Ok(self)
        } else {
            Err(Error::Unclassified { count: self.unclassified.len() })
        }
    }
}

fn reflected_overlap(a: &[f64], b: &[f64], perm: &[usize]) -> f64 {
    a.iter().zip(perm).map(|(x, &p)| x * b[p]).sum()
}

/// Splits the levels of `record` into mirror-even and mirror-odd sets.
///
/// `reflection[i]` is the image of site `i`. Within each cluster of nearly
/// degenerate levels the reflection is diagonalized, so arbitrary mixtures
/// of degenerate partners are resolved.
pub fn parity_split(record: &SpectrumRecord, reflection: Option<&[usize]>) -> Result<ParitySplit> {
    let perm = reflection.ok_or(Error::NoReflection)?;
    let vectors = record
        .eigenvectors
        .as_ref()
        .ok_or(Error::InvalidSpec("parity split needs eigenvectors".into()))?;
    let e = &record.eigenvalues;
    let mut out = ParitySplit::default();
    let mut start = 0;
    while start < e.len() {
        let mut end = start + 1;
        while end < e.len() && e[end] - e[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        let m = end - start;
        let overlaps = DMatrix::from_fn(m, m, |i, j| reflected_overlap(&vectors[start + i], &vectors[start + j], perm));
        let sym = (&overlaps + overlaps.transpose()) * 0.5;
        let mut parities: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        parities.sort_by(f64::total_cmp);
        for (k, p) in parities.into_iter().enumerate() {
            let level = e[start + k];
            if p > PARITY_THRESHOLD {
                out.even.push(level);
            } else if p < -PARITY_THRESHOLD {
                out.odd.push(level);
            } else {
                out.unclassified.push(level);
            }
        }
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use crate::hamiltonian::{assemble, TBParams};
    use crate::lattice::{build_sector, reflection_map, Orientation, SectorSpec};
    use crate::spectra::full_spectrum_with_vectors;

    #[test]
    fn hexagon_states_all_classified() {
        let lat = build_sector(&SectorSpec::with_radius(3, 1.8, Orientation::ZigzagFirstEdge)).unwrap();
        let rec = full_spectrum_with_vectors(&assemble(&lat, &TBParams::default()).unwrap()).unwrap();
        let perm = reflection_map(&lat).unwrap();
        let split = parity_split(&rec, Some(&perm)).unwrap().complete().unwrap();
        assert_eq!(split.even.len() + split.odd.len(), 6);
        let fixed = perm.iter().enumerate().filter(|&(i, &j)| i == j).count();
        assert_eq!(split.even.len() - split.odd.len(), fixed);
    }

    #[test]
    fn sector_parities_match_trace() {
        let lat = build_sector(&SectorSpec::with_target(3, 600, Orientation::ArmchairFirstEdge)).unwrap();
        let rec = full_spectrum_with_vectors(&assemble(&lat, &TBParams::default()).unwrap()).unwrap();
        let perm = reflection_map(&lat).unwrap();
        let split = parity_split(&rec, Some(&perm)).unwrap().complete().unwrap();
        // tr R = #even − #odd = number of sites on the mirror line
        let fixed = perm.iter().enumerate().filter(|&(i, &j)| i == j).count() as i64;
        assert_eq!(split.even.len() as i64 - split.odd.len() as i64, fixed);
    }

    #[test]
    fn missing_reflection_is_an_error() {
        let rec = SpectrumRecord {
            config_hash: String::new(),
            eigenvalues: alloc::vec![0.0],
            eigenvectors: Some(alloc::vec![alloc::vec![1.0]]),
            window: None,
            method: crate::spectra::Method::Dense,
        };
        assert_eq!(parity_split(&rec, None), Err(Error::NoReflection));
    }
}
