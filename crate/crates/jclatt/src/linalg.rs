//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending and
/// eigenvectors as matching columns.
pub fn hermitian_eigen(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(h.nrows(), h.ncols());
    for (c, &k) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(k));
    }
    (values, vecs)
}

/// exp(−i H t) for Hermitian H, by diagonalization.
pub fn unitary(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let (e, v) = hermitian_eigen(h);
    let phases = DVector::from_iterator(e.len(), e.iter().map(|&x| C64::from_polar(1.0, -x * t)));
    &v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Largest |A_ij − B_ij|.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// |⟨a|b⟩|² for normalized vectors.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm_sqr()
}
