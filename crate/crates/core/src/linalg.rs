//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Solves `A^T P + P A = -Q` through the Kronecker form. Returns `None` when
/// the operator is singular (A has eigenvalues summing to zero).
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(q.shape(), (n, n));
    let at = a.transpose();
    let mut op = DMatrix::zeros(n * n, n * n);
    // column-major vec: vec(A^T P) = (I kron A^T) vec(P), vec(P A) = (A^T kron I) vec(P)
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            for k in 0..n {
                op[(row, k + j * n)] += at[(i, k)];
                op[(row, i + k * n)] += a[(k, j)];
            }
        }
    }
    let rhs = DMatrix::from_iterator(n * n, 1, q.iter().map(|v| -v));
    let sol = op.lu().solve(&rhs)?;
    let p = DMatrix::from_iterator(n, n, sol.iter().copied());
    Some((&p + p.transpose()) * 0.5)
}

/// Symmetrized copy.
pub fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn sym_eig_range(m: &DMatrix<f64>) -> (f64, f64) {
    let e = sym(m).symmetric_eigenvalues();
    let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Largest real part among the eigenvalues of a general square matrix.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}
