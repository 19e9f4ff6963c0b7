use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::SymmetricEigen;

use super::{Method, SpectrumRecord};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;

/// Largest dimension accepted by the dense path.
pub const DENSE_THRESHOLD: usize = 20_000;

fn check_size(h: &SparseHamiltonian) -> Result<()> {
    if h.dim() > DENSE_THRESHOLD {
        return Err(Error::TooLargeForDense { dim: h.dim(), threshold: DENSE_THRESHOLD });
    }
    Ok(())
}

/// All eigenvalues, ascending.
pub fn full_spectrum(h: &SparseHamiltonian) -> Result<SpectrumRecord> {
    check_size(h)?;
    let mut eigenvalues: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumRecord { config_hash: String::new(), eigenvalues, eigenvectors: None, window: None, method: Method::Dense })
}

/// All eigenpairs, ascending.
pub fn full_spectrum_with_vectors(h: &SparseHamiltonian) -> Result<SpectrumRecord> {
    check_size(h)?;
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    Ok(SpectrumRecord {
        config_hash: String::new(),
        eigenvalues,
        eigenvectors: Some(vectors),
        window: None,
        method: Method::Dense,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble, TBParams};
    use crate::lattice::{build_sector, Orientation, SectorSpec};

    #[test]
    fn dimer_and_hexagon() {
        let dimer = SparseHamiltonian::from_triplets(2, &[(0, 1, -1.0)]).unwrap();
        let e = full_spectrum(&dimer).unwrap().eigenvalues;
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
        let lat = build_sector(&SectorSpec::with_radius(3, 1.8, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        let e = full_spectrum(&h).unwrap().eigenvalues;
        for (a, b) in e.iter().zip([-2.0, -1.0, -1.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_and_chiral_pairing() {
        let lat = build_sector(&SectorSpec::with_target(12, 600, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        let rec = full_spectrum_with_vectors(&h).unwrap();
        let n = h.dim();
        let mut hv = alloc::vec![0.0; n];
        for (lambda, v) in rec.eigenvalues.iter().zip(rec.eigenvectors.as_ref().unwrap()).step_by(17) {
            h.matvec(v, &mut hv);
            let r = hv.iter().zip(v).map(|(a, b)| (a - lambda * b) * (a - lambda * b)).sum::<f64>();
            assert!(crate::math::sqrt(r) <= 1e-10 * h.norm_inf());
        }
        for k in 0..n {
            assert!((rec.eigenvalues[k] + rec.eigenvalues[n - 1 - k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn refuses_large_matrices() {
        let entries: Vec<(usize, usize, f64)> = (0..DENSE_THRESHOLD).map(|i| (i, i + 1, -1.0)).collect();
        let h = SparseHamiltonian::from_triplets(DENSE_THRESHOLD + 1, &entries).unwrap();
        assert!(matches!(full_spectrum(&h), Err(Error::TooLargeForDense { .. })));
    }
}
