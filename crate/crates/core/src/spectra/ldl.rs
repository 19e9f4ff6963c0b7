//! Sparse `LDLᵀ` factorization of `H − σI` without pivoting.
//!
//! Up-looking elimination driven by the elimination tree. The symbolic
//! analysis (ordering, tree, column counts) depends only on the sparsity
//! pattern and is shared by all shifts.

use alloc::vec;
use alloc::vec::Vec;

use super::ordering::nested_dissection;
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;

const NONE: usize = usize::MAX;

/// Pattern-only analysis of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Symbolic {
    n: usize,
    /// new position -> original index
    perm: Vec<usize>,
    /// Upper triangle of the permuted matrix by columns, diagonal included.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// Index into the matrix value array, or `NONE` for the diagonal slot.
    src: Vec<usize>,
    diag: Vec<f64>,
    parent: Vec<usize>,
    l_ptr: Vec<usize>,
    scale: f64,
}

impl Symbolic {
    pub fn analyze(h: &SparseHamiltonian) -> Symbolic {
        let n = h.dim();
        let adj: Vec<Vec<usize>> = (0..n).map(|i| h.row(i).0.iter().copied().filter(|&j| j != i).collect()).collect();
        let perm = nested_dissection(&adj);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut src = Vec::new();
        let mut diag = vec![0.0; n];
        col_ptr.push(0);
        for (k, &old) in perm.iter().enumerate() {
            let start = h.row_ptr()[old];
            let (cols, vals) = h.row(old);
            let mut entries: Vec<(usize, usize)> = Vec::with_capacity(cols.len() + 1);
            for (off, (&j, &v)) in cols.iter().zip(vals).enumerate() {
                if j == old {
                    diag[k] = v;
                } else if iperm[j] < k {
                    entries.push((iperm[j], start + off));
                }
            }
            entries.push((k, NONE));
            entries.sort_unstable();
            for (i, s) in entries {
                row_idx.push(i);
                src.push(s);
            }
            col_ptr.push(row_idx.len());
        }
        // elimination tree and column counts of L
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for p in col_ptr[k]..col_ptr[k + 1] {
                let mut i = row_idx[p];
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut l_ptr = vec![0usize; n + 1];
        for k in 0..n {
            l_ptr[k + 1] = l_ptr[k] + lnz[k];
        }
        Symbolic { n, perm, col_ptr, row_idx, src, diag, parent, l_ptr, scale: h.norm_inf().max(1.0) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of strictly lower entries of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.l_ptr[self.n]
    }

    /// Numeric factorization of `H − shift·I`. A pivot that vanishes
    /// relative to `‖H‖` is reported as a breakdown.
    pub fn factor(&self, h: &SparseHamiltonian, shift: f64) -> Result<Factor<'_>> {
        let n = self.n;
        let vals = h.values();
        let lnz_total = self.l_ptr[n];
        let mut li = vec![0usize; lnz_total];
        let mut lx = vec![0.0f64; lnz_total];
        let mut d = vec![0.0f64; n];
        let mut y = vec![0.0f64; n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let tiny = 1e-13 * (self.scale + shift.abs());
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for p in self.col_ptr[k]..self.col_ptr[k + 1] {
                let mut i = self.row_idx[p];
                y[i] += if self.src[p] == NONE { self.diag[k] - shift } else { vals[self.src[p]] };
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = self.parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let start = self.l_ptr[i];
                let end = start + lnz[i];
                for p in start..end {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[end] = k;
                lx[end] = l_ki;
                lnz[i] += 1;
            }
            if !(d[k].abs() > tiny) {
                return Err(Error::FactorizationBreakdown { shift, pivot: k });
            }
        }
        Ok(Factor { sym: self, li, lx, d, shift })
    }
}

/// Numeric `LDLᵀ` factors for one shift.
#[derive(Debug, Clone)]
pub struct Factor<'a> {
    sym: &'a Symbolic,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    shift: f64,
}

impl Factor<'_> {
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Number of negative pivots, i.e. eigenvalues of `H` below the shift.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    /// Overwrites `b` with `(H − σI)⁻¹ b`.
    pub fn solve(&self, b: &mut [f64], work: &mut [f64]) {
        let s = self.sym;
        let n = s.n;
        for k in 0..n {
            work[k] = b[s.perm[k]];
        }
        for j in 0..n {
            let xj = work[j];
            if xj != 0.0 {
                for p in s.l_ptr[j]..s.l_ptr[j + 1] {
                    work[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        for j in 0..n {
            work[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut acc = work[j];
            for p in s.l_ptr[j]..s.l_ptr[j + 1] {
                acc -= self.lx[p] * work[self.li[p]];
            }
            work[j] = acc;
        }
        for k in 0..n {
            b[s.perm[k]] = work[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble, TBParams};
    use crate::lattice::{build_sector, Orientation, SectorSpec};

    #[test]
    fn solve_matches_matvec() {
        let lat = build_sector(&SectorSpec::with_target(4, 1500, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::with_nnn_ratio(0.1)).unwrap();
        let sym = Symbolic::analyze(&h);
        let shift = 0.4321;
        let f = sym.factor(&h, shift).unwrap();
        let n = h.dim();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let mut b = vec![0.0; n];
        h.matvec(&x, &mut b);
        for i in 0..n {
            b[i] -= shift * x[i];
        }
        let mut work = vec![0.0; n];
        f.solve(&mut b, &mut work);
        let err = b.iter().zip(&x).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn hexagon_inertia() {
        let lat = build_sector(&SectorSpec::with_radius(3, 1.8, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        let sym = Symbolic::analyze(&h);
        let counts: Vec<usize> = [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5].iter().map(|&s| sym.factor(&h, s).unwrap().negative_count()).collect();
        assert_eq!(counts, vec![0, 1, 3, 3, 5, 6]);
    }

    #[test]
    fn fill_stays_modest() {
        let lat = build_sector(&SectorSpec::with_target(12, 20_000, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        let sym = Symbolic::analyze(&h);
        assert!(sym.factor_nnz() < 40 * h.dim(), "{}", sym.factor_nnz());
    }
}
