//! Dense Hermitian helpers over `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// `max |M - M^dagger|` over all entries.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix, tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    let defect = hermitian_defect(m);
    if defect > tol {
        return Err(Error::NonHermitian(defect));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue(m: &CMatrix, tol: f64) -> Result<f64> {
    hermitian_eigen(m, tol).map(|(v, _)| v.first().copied().unwrap_or(f64::INFINITY))
}

/// `exp(c H)` for Hermitian `H` and complex scalar `c`, via eigendecomposition.
pub fn hermitian_exp(h: &CMatrix, c: Complex64, tol: f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h, tol)?;
    let mut scaled = vectors.clone();
    for (j, lam) in values.iter().enumerate() {
        let e = (c * lam).exp();
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= e;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Leading `k x k` block.
pub fn leading_block(m: &CMatrix, k: usize) -> CMatrix {
    m.view((0, 0), (k, k)).into_owned()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
