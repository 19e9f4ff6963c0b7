//! Real symmetric tight-binding Hamiltonians on honeycomb flakes.
//!
//! Matrix entries are in units of the nearest-neighbour hopping `t`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::Lattice;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TBParams {
    /// Nearest-neighbour hopping in eV; only used as metadata.
    pub t: f64,
    /// Next-nearest-neighbour hopping in eV.
    pub t_prime: f64,
    /// Multiplies every hopping with at least one boundary endpoint.
    pub boundary_t_scale: f64,
}

impl Default for TBParams {
    fn default() -> Self {
        TBParams { t: 2.8, t_prime: 0.0, boundary_t_scale: 1.0 }
    }
}

impl TBParams {
    /// Parameters with `t′ = ratio · t`.
    pub fn with_nnn_ratio(ratio: f64) -> Self {
        let d = TBParams::default();
        TBParams { t_prime: ratio * d.t, ..d }
    }

    pub fn nnn_ratio(&self) -> f64 {
        self.t_prime / self.t
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::InvalidSpec("t must be positive".into()));
        }
        if !(self.t_prime.is_finite() && self.t_prime >= 0.0) {
            return Err(Error::InvalidSpec("t_prime must be non-negative".into()));
        }
        if !(self.boundary_t_scale.is_finite() && self.boundary_t_scale > 0.0) {
            return Err(Error::InvalidSpec("boundary_t_scale must be positive".into()));
        }
        Ok(())
    }

    /// Energy of the Dirac point in units of `t`.
    pub fn dirac_point(&self) -> f64 {
        3.0 * self.nnn_ratio()
    }

    /// Bottom and top of the infinite-lattice band in units of `t`.
    pub fn band_edges(&self) -> (f64, f64) {
        let r = self.nnn_ratio();
        // E = ±|f| − r(|f|² − 3) with |f| ∈ [0, 3]
        (-3.0 - 6.0 * r, 3.0 - 6.0 * r)
    }
}

/// Symmetric sparse matrix stored both as sorted triplets and in CSR form
/// (both triangles present).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    nnn_ratio: f64,
}

impl SparseHamiltonian {
    /// Builds a matrix from upper or lower triangle entries; each `(i, j, v)`
    /// with `i != j` is mirrored. Repeated entries are summed.
    pub fn from_triplets(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut full: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * entries.len());
        for &(i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::OutOfRange(alloc::format!("entry ({i}, {j}) outside dimension {dim}")));
            }
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(full.len());
        let mut vals: Vec<f64> = Vec::with_capacity(full.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in full {
            if last == Some((i, j)) {
                *vals.last_mut().expect("nonempty") += v;
                continue;
            }
            last = Some((i, j));
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseHamiltonian { dim, row_ptr, cols, vals, nnn_ratio: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `t′/t` used at assembly; zero for matrices built from raw triplets.
    pub fn nnn_ratio(&self) -> f64 {
        self.nnn_ratio
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    /// All stored entries `(i, j, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    /// `y = H x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim {
            let (c, v) = self.row(i);
            y[i] = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.triplets().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }
}

/// Assembles `H` for a lattice: `−1` on nearest-neighbour bonds, `−t′/t` on
/// next-nearest-neighbour bonds, each scaled by `boundary_t_scale` when
/// either endpoint is a boundary atom.
pub fn assemble(lat: &Lattice, params: &TBParams) -> Result<SparseHamiltonian> {
    params.validate()?;
    if lat.is_empty() {
        return Err(Error::EmptyLattice);
    }
    let sites = lat.sites();
    let scale = |i: usize, j: usize| if sites[i].boundary || sites[j].boundary { params.boundary_t_scale } else { 1.0 };
    let ratio = params.nnn_ratio();
    let mut entries: Vec<(usize, usize, f64)> = lat.nn_bonds().map(|(i, j)| (i, j, -scale(i, j))).collect();
    if ratio != 0.0 {
        entries.extend(lat.nnn_bonds().map(|(i, j)| (i, j, -ratio * scale(i, j))));
    }
    let mut h = SparseHamiltonian::from_triplets(lat.len(), &entries)?;
    h.nnn_ratio = ratio;
    Ok(h)
}

/// True iff `S H S = −H` entrywise for the sublattice sign operator of
/// `lat`. Only meaningful without next-nearest-neighbour hopping.
pub fn chiral_check(h: &SparseHamiltonian, lat: &Lattice) -> Result<bool> {
    if h.nnn_ratio != 0.0 {
        return Err(Error::ChiralInapplicable(h.nnn_ratio));
    }
    let signs: Vec<f64> = lat.sites().iter().map(|s| s.sublattice.sign()).collect();
    Ok(anticommutes_with(h, &signs))
}

/// True iff `S H S = −H` entrywise for `S = diag(signs)`.
pub fn anticommutes_with(h: &SparseHamiltonian, signs: &[f64]) -> bool {
    signs.len() == h.dim() && h.triplets().all(|(i, j, v)| signs[i] * v * signs[j] == -v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_sector, Orientation, SectorSpec};
    use nalgebra::SymmetricEigen;

    fn sorted_eigs(h: &SparseHamiltonian) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    fn hexagon() -> Lattice {
        build_sector(&SectorSpec::with_radius(3, 1.8, Orientation::ZigzagFirstEdge)).unwrap()
    }

    #[test]
    fn dimer_matrix() {
        let h = SparseHamiltonian::from_triplets(2, &[(0, 1, -1.0)]).unwrap();
        let e = sorted_eigs(&h);
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
        assert!(anticommutes_with(&h, &[1.0, -1.0]));
    }

    #[test]
    fn hexagon_ring_spectrum() {
        let lat = hexagon();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        assert_eq!(h.nnz(), 12);
        let e = sorted_eigs(&h);
        for (a, b) in e.iter().zip([-2.0, -1.0, -1.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(chiral_check(&h, &lat).unwrap());
    }

    #[test]
    fn nnn_bond_breaks_chirality() {
        let lat = hexagon();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        let same = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .find(|&(i, j)| i < j && lat.sites()[i].sublattice == lat.sites()[j].sublattice)
            .unwrap();
        let mut entries: Vec<(usize, usize, f64)> = h.triplets().filter(|t| t.0 < t.1).collect();
        entries.push((same.0, same.1, -0.1));
        let h2 = SparseHamiltonian::from_triplets(6, &entries).unwrap();
        assert!(!chiral_check(&h2, &lat).unwrap());
    }

    #[test]
    fn nnn_assembly() {
        let lat = build_sector(&SectorSpec::with_target(6, 800, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::with_nnn_ratio(0.1)).unwrap();
        assert!(matches!(chiral_check(&h, &lat), Err(Error::ChiralInapplicable(_))));
        let signs: Vec<f64> = lat.sites().iter().map(|s| s.sublattice.sign()).collect();
        assert!(!anticommutes_with(&h, &signs));
        assert_eq!(h.max_asymmetry(), 0.0);
        for i in 0..h.dim() {
            assert!(h.row(i).0.len() <= 9);
            assert_eq!(h.get(i, i), 0.0);
        }
        for (i, j, v) in h.triplets() {
            let same = lat.sites()[i].sublattice == lat.sites()[j].sublattice;
            assert!((v - if same { -0.1 } else { -1.0 }).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_scaling_per_bond() {
        let lat = build_sector(&SectorSpec::with_target(4, 500, Orientation::ZigzagFirstEdge)).unwrap();
        let p = TBParams { boundary_t_scale: 0.5, ..TBParams::default() };
        let h = assemble(&lat, &p).unwrap();
        for (i, j, v) in h.triplets() {
            let b = lat.sites()[i].boundary || lat.sites()[j].boundary;
            assert_eq!(v, if b { -0.5 } else { -1.0 });
        }
        assert!(chiral_check(&h, &lat).unwrap());
    }

    #[test]
    fn dirac_point_and_band() {
        let p = TBParams::with_nnn_ratio(0.1);
        assert!((p.dirac_point() - 0.3).abs() < 1e-15);
        let (lo, hi) = p.band_edges();
        assert!((lo + 3.6).abs() < 1e-12 && (hi - 2.4).abs() < 1e-12);
        assert!(TBParams { t: -1.0, ..p }.validate().is_err());
    }
}
