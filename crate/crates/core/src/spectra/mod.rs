//! Eigenvalues of sparse tight-binding matrices.
//!
//! Small matrices go through a dense symmetric solver. Large ones use
//! spectrum slicing: matrix inertia from sparse `LDLᵀ` factorizations gives
//! exact eigenvalue counts, and shift-invert Lanczos finds the eigenpairs of
//! each slice until those counts are matched.

mod amplitude;
mod dense;
mod density;
mod lanczos;
mod ldl;
mod ordering;

use alloc::string::String;
use alloc::vec::Vec;

pub use amplitude::{amplitude_stats, AmplitudeReport};
pub use density::{dirac_point_estimate, level_histogram, Flank, LevelHistogram};
pub use dense::{full_spectrum, full_spectrum_with_vectors, DENSE_THRESHOLD};
pub use lanczos::{solve_slice, Slice, SlicePart, RESIDUAL_TOL};
pub use ldl::{Factor, Symbolic};
pub use ordering::nested_dissection;

use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;

/// Default upper bound on eigenvalues per slice.
pub const SLICE_TARGET: usize = 48;
/// Hard cap on eigenvalues per slice.
pub const SLICE_CAP: usize = 800;
/// Iterative eigenvalues closer than this are treated as one level.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Dense,
    WindowedIterative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub config_hash: String,
    /// Ascending, in units of `t`.
    pub eigenvalues: Vec<f64>,
    /// One vector per eigenvalue when requested.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub window: Option<(f64, f64)>,
    pub method: Method,
}

impl SpectrumRecord {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues inside `(lo, hi)`.
    pub fn in_window(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.eigenvalues.iter().copied().filter(|&e| e > lo && e < hi).collect()
    }

    pub fn with_hash(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = hash.into();
        self
    }
}

/// Sparse solver state for one matrix: the symbolic factorization is
/// computed once and reused for every shift.
#[derive(Debug, Clone)]
pub struct WindowSolver<'a> {
    h: &'a SparseHamiltonian,
    sym: Symbolic,
}

impl<'a> WindowSolver<'a> {
    pub fn new(h: &'a SparseHamiltonian) -> Self {
        WindowSolver { h, sym: Symbolic::analyze(h) }
    }

    pub fn matrix(&self) -> &SparseHamiltonian {
        self.h
    }

    pub fn symbolic(&self) -> &Symbolic {
        &self.sym
    }

    /// Number of eigenvalues strictly below `e`, from the inertia of
    /// `H − eI`.
    ///
    /// Exact cancellations (typical at shifts equal to small integers) make
    /// an unpivoted factorization break down. The count is then taken from
    /// a pair of shifts `e ± δ` that agree, with δ growing from `1e-9`.
    pub fn count_below(&self, e: f64) -> Result<usize> {
        let mut last = match self.sym.factor(self.h, e) {
            Ok(f) => return Ok(f.negative_count()),
            Err(err) => err,
        };
        for delta in [1e-9, 1e-8, 1e-7, 1e-6] {
            let below = self.sym.factor(self.h, e - delta).map(|f| f.negative_count());
            let above = self.sym.factor(self.h, e + delta).map(|f| f.negative_count());
            match (below, above) {
                (Ok(a), Ok(b)) if a == b => return Ok(a),
                // an eigenvalue within δ of e; the precondition excludes this
                (Ok(a), Ok(_)) => return Ok(a),
                (Err(err), _) | (_, Err(err)) => last = err,
            }
        }
        Err(last)
    }

    /// Splits `(lo, hi)` into slices holding at most `target` eigenvalues
    /// each (bisection on inertia counts).
    pub fn plan(&self, lo: f64, hi: f64, target: usize) -> Result<Vec<Slice>> {
        if !(lo < hi) {
            return Err(Error::InvalidWindow { lo, hi });
        }
        let target = target.clamp(1, SLICE_CAP);
        let c_lo = self.count_below(lo)?;
        let c_hi = self.count_below(hi)?;
        let mut out = Vec::new();
        let mut stack = alloc::vec![(lo, c_lo, hi, c_hi)];
        while let Some((a, ca, b, cb)) = stack.pop() {
            let count = cb.saturating_sub(ca);
            // a slice narrower than the degeneracy tolerance cannot be split further
            if count <= target || b - a < 1e-7 {
                if count > 0 {
                    out.push(Slice { lo: a, hi: b, count });
                }
                continue;
            }
            // off-centre split keeps shifts away from round numbers
            let mid = a + 0.500_381_966 * (b - a);
            let cm = self.count_below(mid)?;
            stack.push((mid, cm, b, cb));
            stack.push((a, ca, mid, cm));
        }
        out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        Ok(out)
    }

    pub fn solve(&self, slice: Slice, want_vectors: bool, seed: u64) -> Result<SlicePart> {
        solve_slice(self.h, &self.sym, slice, want_vectors, seed)
    }

    /// All eigenvalues in `(lo, hi)`, verified against inertia counts.
    pub fn eig_window(&self, lo: f64, hi: f64, want_vectors: bool) -> Result<SpectrumRecord> {
        let slices = self.plan(lo, hi, SLICE_TARGET)?;
        let mut parts = Vec::with_capacity(slices.len());
        for (k, s) in slices.iter().enumerate() {
            parts.push(self.solve(*s, want_vectors, slice_seed(k))?);
        }
        Ok(merge_parts(parts, lo, hi, want_vectors))
    }
}

/// Seed used for the random start vectors of slice `k`.
pub fn slice_seed(k: usize) -> u64 {
    0x5eed_0000_u64 ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Concatenates per-slice results (given in ascending slice order).
pub fn merge_parts(parts: Vec<SlicePart>, lo: f64, hi: f64, want_vectors: bool) -> SpectrumRecord {
    let mut eigenvalues = Vec::new();
    let mut vectors = Vec::new();
    for p in parts {
        eigenvalues.extend(p.values);
        vectors.extend(p.vectors);
    }
    SpectrumRecord {
        config_hash: String::new(),
        eigenvalues,
        eigenvectors: want_vectors.then_some(vectors),
        window: Some((lo, hi)),
        method: Method::WindowedIterative,
    }
}

/// Number of eigenvalues of `h` below `e`.
pub fn count_below(h: &SparseHamiltonian, e: f64) -> Result<usize> {
    WindowSolver::new(h).count_below(e)
}

/// All eigenvalues of `h` in `(lo, hi)`.
pub fn eig_window(h: &SparseHamiltonian, lo: f64, hi: f64, want_vectors: bool) -> Result<SpectrumRecord> {
    WindowSolver::new(h).eig_window(lo, hi, want_vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble, TBParams};
    use crate::lattice::{build_sector, Orientation, SectorSpec};
    use rand::{Rng, SeedableRng};

    fn hexagon() -> SparseHamiltonian {
        let lat = build_sector(&SectorSpec::with_radius(3, 1.8, Orientation::ZigzagFirstEdge)).unwrap();
        assemble(&lat, &TBParams::default()).unwrap()
    }

    #[test]
    fn small_windows() {
        let h = hexagon();
        let w = eig_window(&h, 0.5, 2.5, true).unwrap();
        assert_eq!(w.len(), 3);
        for (a, b) in w.eigenvalues.iter().zip([1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        let v = w.eigenvectors.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
        let dimer = SparseHamiltonian::from_triplets(2, &[(0, 1, -1.0)]).unwrap();
        assert!(eig_window(&dimer, -0.5, 0.5, false).unwrap().is_empty());
        assert_eq!(count_below(&dimer, 0.0).unwrap(), 1);
        assert_eq!(count_below(&h, 0.0).unwrap(), 3);
        assert!(matches!(eig_window(&h, 1.0, 0.0, false), Err(Error::InvalidWindow { .. })));
    }

    #[test]
    fn inertia_matches_dense() {
        let lat = build_sector(&SectorSpec::with_target(6, 900, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::with_nnn_ratio(0.1)).unwrap();
        let dense = full_spectrum(&h).unwrap();
        let solver = WindowSolver::new(&h);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let e: f64 = rng.random_range(-3.7..2.5);
            let want = dense.eigenvalues.iter().filter(|&&x| x < e).count();
            assert_eq!(solver.count_below(e).unwrap(), want, "shift {e}");
        }
    }

    #[test]
    fn window_matches_dense() {
        let lat = build_sector(&SectorSpec::with_target(4, 1200, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        let dense = full_spectrum(&h).unwrap();
        for (lo, hi) in [(0.02, 0.4), (0.9, 1.1), (2.7, 3.0)] {
            let want = dense.in_window(lo, hi);
            let got = eig_window(&h, lo, hi, false).unwrap();
            assert_eq!(got.len(), want.len(), "window ({lo}, {hi})");
            for (a, b) in got.eigenvalues.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
