//! Dense complex matrix helpers shared by every module.
//!
//! All spectral quantities (entropies, trace norms, PSD checks) go through
//! [`hermitian_eigenvalues`] so they share one numerical kernel.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::layout::SystemLayout;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Eigenpairs of the Hermitian part of `m`; eigenvectors are the columns.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Trace norm `Σ|λ_i|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|ψ><ψ|` for a column vector given as a slice.
pub fn outer(psi: &[Complex64]) -> CMatrix {
    let n = psi.len();
    CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj())
}

/// Max deviation of `u† u` from the identity.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// Lift an operator acting on one factor to the full space, identity elsewhere.
///
/// `op` may be rectangular (`out × in`); the returned matrix maps the layout
/// with `layout[position].dim == in` to the layout with that factor resized
/// to `out`.
pub fn embed_on_factor(layout: &SystemLayout, position: usize, op: &CMatrix) -> Result<CMatrix> {
    let din = layout.factors()[position].dim;
    if op.ncols() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            found: op.ncols(),
        });
    }
    let dout = op.nrows();
    let out_layout = layout.with_dim(position, dout);
    let n_in = layout.total_dim();
    let n_out = out_layout.total_dim();
    let mut big = CMatrix::zeros(n_out, n_in);
    for col in 0..n_in {
        let mut digits = layout.digits(col);
        let a = digits[position];
        for b in 0..dout {
            let v = op[(b, a)];
            if v == ZERO {
                continue;
            }
            digits[position] = b;
            let row = out_layout.flatten(&digits);
            big[(row, col)] = v;
        }
    }
    Ok(big)
}

/// Partial trace of a square matrix, keeping the factors at `keep` (layout order).
pub fn partial_trace_matrix(layout: &SystemLayout, m: &CMatrix, keep: &[usize]) -> CMatrix {
    let kept = layout.select(keep);
    let traced: Vec<usize> = (0..layout.len()).filter(|i| !keep.contains(i)).collect();
    let traced_layout = if traced.is_empty() {
        None
    } else {
        Some(layout.select(&traced))
    };
    let n = layout.total_dim();
    let split: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let d = layout.digits(i);
            let kd: Vec<usize> = keep.iter().map(|&p| d[p]).collect();
            let td: Vec<usize> = traced.iter().map(|&p| d[p]).collect();
            let t = traced_layout.as_ref().map_or(0, |tl| tl.flatten(&td));
            (kept.flatten(&kd), t)
        })
        .collect();
    let nk = kept.total_dim();
    let mut out = CMatrix::zeros(nk, nk);
    for (i, &(ki, ti)) in split.iter().enumerate() {
        for (j, &(kj, tj)) in split.iter().enumerate() {
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    out
}

/// Transpose the factors at `on` (positions) of a square matrix.
pub fn partial_transpose_matrix(layout: &SystemLayout, m: &CMatrix, on: &[usize]) -> CMatrix {
    let n = layout.total_dim();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let di = layout.digits(i);
        for j in 0..n {
            let dj = layout.digits(j);
            let mut ri = di.clone();
            let mut rj = dj.clone();
            for &p in on {
                ri[p] = dj[p];
                rj[p] = di[p];
            }
            out[(layout.flatten(&ri), layout.flatten(&rj))] = m[(i, j)];
        }
    }
    out
}

/// Permute the tensor factors of a square matrix.
///
/// `order[k]` is the old position of the factor that ends up at position `k`.
pub fn permute_matrix(layout: &SystemLayout, m: &CMatrix, order: &[usize]) -> (SystemLayout, CMatrix) {
    let new_layout = layout.select(order);
    let n = layout.total_dim();
    let map: Vec<usize> = (0..n)
        .map(|i| {
            let d = layout.digits(i);
            let nd: Vec<usize> = order.iter().map(|&p| d[p]).collect();
            new_layout.flatten(&nd)
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    (new_layout, out)
}
