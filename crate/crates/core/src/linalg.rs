//! Small dense helpers built on nalgebra's Hermitian eigensolver.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DVector;

use crate::hilbert::{CMatrix, C64};

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `½(A + A†)`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(hermitian_part(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_hermitian_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(a: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let diag = CMatrix::from_diagonal(&values.map(f));
    &vectors * diag * vectors.adjoint()
}

/// Principal square root of a positive semidefinite matrix; tiny negative
/// eigenvalues from rounding are clamped to zero.
pub fn sqrt_psd(a: &CMatrix) -> CMatrix {
    hermitian_map(a, |x| C64::new(x.max(0.0).sqrt(), 0.0))
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let sr = sqrt_psd(rho);
    let inner = &sr * sigma * &sr;
    let root_trace: f64 = hermitian_eigenvalues(&inner).iter().map(|x| x.max(0.0).sqrt()).sum();
    root_trace * root_trace
}

/// `½ Σ |λᵢ(ρ - σ)|`.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(rho - sigma))
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

/// `e^{-iHt}` for Hermitian `H`.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_map(h, |e| C64::from_polar(1.0, -e * t))
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
