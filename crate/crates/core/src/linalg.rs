//! Small dense helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        // fix the sign so the largest component is positive
        let mut best = 0;
        for r in 0..n {
            if col[r].abs() > col[best].abs() + 1e-14 {
                best = r;
            }
        }
        if col[best] < 0.0 {
            col = -col;
        }
        vectors.set_column(k, &col);
    }
    (values, vectors)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    let eig = ((m + m.adjoint()) * Complex64::new(0.5, 0.0)).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `U f(s) U^T` for a symmetric matrix with eigenpairs `(s, U)`.
pub fn matrix_function(values: &[f64], vectors: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let fv = f(v);
        for r in 0..n {
            scaled[(r, k)] *= fv;
        }
    }
    &scaled * vectors.transpose()
}

/// Symmetric inverse square root of a positive definite matrix.
pub fn inv_sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, vectors) = sym_eigen(m);
    let min = values.first().copied().unwrap_or(1.0);
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(matrix_function(&values, &vectors, |v| 1.0 / v.sqrt()))
}

/// Solution of `H c = S c e` by canonical orthogonalization.
///
/// Overlap eigenvalues below `cutoff` are discarded. Returns the ascending
/// eigenvalues, the eigenvectors in the original basis and the overlap
/// eigenvalues that were kept.
pub fn generalized_eigen(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
    cutoff: f64,
) -> Result<(Vec<f64>, DMatrix<f64>, Vec<f64>)> {
    let (eta, u) = sym_eigen(s);
    let keep: Vec<usize> = (0..eta.len()).filter(|&i| eta[i] > cutoff).collect();
    if keep.is_empty() {
        return Err(Error::SingularOverlap { min_eigenvalue: eta.first().copied().unwrap_or(0.0) });
    }
    let n = s.nrows();
    let mut x = DMatrix::zeros(n, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        let col = u.column(i) / eta[i].sqrt();
        x.set_column(k, &col);
    }
    let hp = x.transpose() * h * &x;
    let (values, y) = sym_eigen(&hp);
    Ok((values, x * y, keep.iter().map(|&i| eta[i]).collect()))
}

/// Minimizer of `|M a + b|^2 + reg |a|^2` for symmetric positive semidefinite `M`.
///
/// With `reg == 0` this is the pseudoinverse solution, discarding eigenvalues
/// of `M` below `1e-8` times the largest.
pub fn solve_amplitudes(m: &DMatrix<f64>, b: &DVector<f64>, reg: f64) -> DVector<f64> {
    let (values, vectors) = sym_eigen(m);
    let lmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut a = DVector::zeros(b.len());
    if lmax == 0.0 {
        return a;
    }
    for (k, &l) in values.iter().enumerate() {
        let w = if reg > 0.0 {
            l / (l * l + reg)
        } else if l.abs() > 1e-8 * lmax {
            1.0 / l
        } else {
            continue;
        };
        let v = vectors.column(k);
        let proj = v.dot(b);
        a.axpy(-w * proj, &v, 1.0);
    }
    a
}
