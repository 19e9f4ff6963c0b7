//! Shift-invert Lanczos with full reorthogonalization and locking.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ldl::{Factor, Symbolic};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;
use crate::math::sqrt;

/// Residual bound `‖Hv − λv‖` for accepting an eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_RESTARTS: usize = 12;

/// Energy interval `(lo, hi)` known to hold `count` eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Eigenpairs found inside one slice, ascending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlicePart {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Two passes of classical Gram-Schmidt against every vector in `sets`.
fn orthogonalize(w: &mut [f64], sets: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for set in sets {
            for v in set.iter() {
                let c = dot(v, w);
                axpy(-c, v, w);
            }
        }
    }
}

fn factor_near<'a>(sym: &'a Symbolic, h: &SparseHamiltonian, sigma: f64, width: f64) -> Result<Factor<'a>> {
    let mut last = None;
    for k in 0..6 {
        let offset = if k == 0 { 0.0 } else { width * 1e-6 * (k as f64) * if k % 2 == 0 { 1.0 } else { -1.0 } };
        match sym.factor(h, sigma + offset) {
            Ok(f) => return Ok(f),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Finds all `slice.count` eigenpairs of `H` in `(slice.lo, slice.hi)`.
///
/// Eigenpairs are locked once their explicit residual drops below
/// [`RESIDUAL_TOL`]; the iteration restarts from a fresh random vector,
/// orthogonal to everything locked, until the inertia count is matched.
pub fn solve_slice(h: &SparseHamiltonian, sym: &Symbolic, slice: Slice, want_vectors: bool, seed: u64) -> Result<SlicePart> {
    let n = h.dim();
    let m = slice.count;
    if m == 0 {
        return Ok(SlicePart::default());
    }
    let width = slice.hi - slice.lo;
    let factor = factor_near(sym, h, 0.5 * (slice.lo + slice.hi), width)?;
    let sigma = factor.shift();
    let h_scale = h.norm_inf() + sigma.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut work = vec![0.0; n];
    let mut hv = vec![0.0; n];

    for restart in 0..MAX_RESTARTS {
        let room = n - locked.len();
        if room == 0 {
            break;
        }
        let steps = ((2 * (m - values.len()) + 40) * (2 + restart) / 2).min(room);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
        let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        orthogonalize(&mut start, &[&locked]);
        let s = norm(&start);
        if s == 0.0 {
            continue;
        }
        start.iter_mut().for_each(|x| *x /= s);
        basis.push(start);
        let mut alpha: Vec<f64> = Vec::with_capacity(steps);
        let mut beta: Vec<f64> = Vec::with_capacity(steps);
        for j in 0..steps {
            let mut w = basis[j].clone();
            factor.solve(&mut w, &mut work);
            let a = dot(&basis[j], &w);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            orthogonalize(&mut w, &[&locked, &basis]);
            alpha.push(a);
            let b = norm(&w);
            beta.push(b);
            if b <= 1e-12 * a.abs().max(1.0) || j + 1 == steps {
                break;
            }
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let tail = beta[k - 1];
        for i in 0..k {
            let theta = eig.eigenvalues[i];
            if theta == 0.0 {
                continue;
            }
            let lambda = sigma + 1.0 / theta;
            if !(lambda > slice.lo && lambda < slice.hi) {
                continue;
            }
            let estimate = (tail * eig.eigenvectors[(k - 1, i)]).abs() / theta.abs() * h_scale;
            if estimate > 1e-6 {
                continue;
            }
            let mut y = vec![0.0; n];
            for (c, v) in basis.iter().take(k).enumerate() {
                axpy(eig.eigenvectors[(c, i)], v, &mut y);
            }
            orthogonalize(&mut y, &[&locked]);
            let ny = norm(&y);
            if ny < 0.5 {
                continue;
            }
            y.iter_mut().for_each(|x| *x /= ny);
            h.matvec(&y, &mut hv);
            let rq = dot(&y, &hv);
            axpy(-rq, &y, &mut hv);
            if norm(&hv) <= RESIDUAL_TOL && rq > slice.lo && rq < slice.hi {
                values.push(rq);
                locked.push(y);
            }
        }
        if values.len() >= m {
            break;
        }
    }
    if values.len() > m {
        return Err(Error::Incompatible(format!(
            "found {} eigenvalues in ({}, {}) but inertia counts {}",
            values.len(),
            slice.lo,
            slice.hi,
            m
        )));
    }
    if values.len() < m {
        return Err(Error::IncompleteWindow { lo: slice.lo, hi: slice.hi, expected: m, missing: m - values.len() });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let vectors = if want_vectors { order.iter().map(|&i| core::mem::take(&mut locked[i])).collect() } else { Vec::new() };
    Ok(SlicePart { values: sorted_values, vectors })
}
