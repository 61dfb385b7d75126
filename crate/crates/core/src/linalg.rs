//! Dense complex helpers shared by the measurement modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues ascending.
pub(crate) fn herm_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn herm_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut values: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Rebuild Σ f(λ_i) v_i v_i† from an eigen-decomposition.
pub(crate) fn spectral_map(values: &[f64], vectors: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        scaled.column_mut(c).scale_mut(f(v));
    }
    &scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix. Eigenvalues down to `-tol`
/// are clipped to zero.
pub(crate) fn psd_sqrt(m: &DMatrix<C64>, tol: f64) -> Result<DMatrix<C64>> {
    let (values, vectors) = herm_eigen(m);
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(Error::NotPositive(min));
        }
    }
    Ok(spectral_map(&values, &vectors, |v| v.max(0.0).sqrt()))
}

/// Inverse square root of a positive definite matrix.
pub(crate) fn pd_inv_sqrt(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (values, vectors) = herm_eigen(m);
    if let Some(&min) = values.first() {
        if min <= 0.0 {
            return Err(Error::NotPositive(min));
        }
    }
    Ok(spectral_map(&values, &vectors, |v| 1.0 / v.sqrt()))
}

pub(crate) fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub(crate) fn kron_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub(crate) fn outer(u: &DVector<C64>, v: &DVector<C64>) -> DMatrix<C64> {
    u * v.adjoint()
}

pub(crate) fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// Plain (unweighted) hermitian form u† M v.
pub(crate) fn sandwich(u: &DVector<C64>, m: &DMatrix<C64>, v: &DVector<C64>) -> C64 {
    u.dotc(&(m * v))
}

/// (I_left ⊗ ⟨e_k|) applied to a matrix whose rows index (left, right) pairs
/// with `right_dim` the dimension of the contracted factor.
pub(crate) fn contract_right_row(m: &DMatrix<C64>, right_dim: usize, k: usize) -> DMatrix<C64> {
    let left = m.nrows() / right_dim;
    DMatrix::from_fn(left, m.ncols(), |r, c| m[(r * right_dim + k, c)])
}
