//! Continuous-time LQ regulator through the matrix sign function.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LqError {
    #[error("pair (A, B) is not stabilizable")]
    NotStabilizable,
    #[error("Riccati iteration did not converge after {0} iterations")]
    RiccatiNoConvergence(usize),
    #[error("input weight must be positive definite")]
    BadWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqSolution {
    /// Gain in `u = -K x`.
    pub gain: DMatrix<f64>,
    /// Stabilizing Riccati solution.
    pub riccati: DMatrix<f64>,
}

fn controllability_rank(a: &DMatrix<f64>, b: &DMatrix<f64>) -> usize {
    let n = a.nrows();
    let m = b.ncols();
    let mut ctrb = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        ctrb.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    let scale = ctrb.norm().max(1e-300);
    ctrb.singular_values()
        .iter()
        .filter(|s| **s > 1e-10 * scale)
        .count()
}

/// Solves `A^T P + P A - P B R^-1 B^T P + Q = 0` for the stabilizing `P` and
/// returns `K = R^-1 B^T P`.
pub fn lq_design(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<LqSolution, LqError> {
    let n = a.nrows();
    let r_inv = r.clone().try_inverse().ok_or(LqError::BadWeights)?;
    if r.symmetric_eigenvalues().iter().any(|e| *e <= 0.0) {
        return Err(LqError::BadWeights);
    }
    if controllability_rank(a, b) < n {
        return Err(LqError::NotStabilizable);
    }
    let g = b * &r_inv * b.transpose();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let max_iter = 100;
    let mut z = h;
    let mut converged = false;
    for _ in 0..max_iter {
        let lu = z.clone().lu();
        let det = lu.determinant();
        let z_inv = lu.try_inverse().ok_or(LqError::NotStabilizable)?;
        let c = det.abs().powf(1.0 / (2 * n) as f64);
        let c = if c.is_finite() && c > 0.0 { c } else { 1.0 };
        let next = (&z / c + &z_inv * c) * 0.5;
        let delta = (&next - &z).norm();
        let size = next.norm();
        z = next;
        if delta <= 1e-12 * size {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LqError::RiccatiNoConvergence(max_iter));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let w11 = z.view((0, 0), (n, n)).into_owned();
    let w12 = z.view((0, n), (n, n)).into_owned();
    let w21 = z.view((n, 0), (n, n)).into_owned();
    let w22 = z.view((n, n), (n, n)).into_owned();
    let mut lhs = DMatrix::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&w12);
    lhs.view_mut((n, 0), (n, n)).copy_from(&(w22 + &eye));
    let mut rhs = DMatrix::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n)).copy_from(&(-(w11 + &eye)));
    rhs.view_mut((n, 0), (n, n)).copy_from(&(-w21));
    let p = lhs
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| LqError::NotStabilizable)?;
    let p = (&p + p.transpose()) * 0.5;
    if !p.iter().all(|v| v.is_finite()) {
        return Err(LqError::NotStabilizable);
    }
    let gain = &r_inv * b.transpose() * &p;
    Ok(LqSolution { gain, riccati: p })
}

/// Linearized elevation plant in error coordinates `(e, e_dot)` around a
/// static border position: `A = [[0, 1], [g sin(theta_ref)/r, -2 r_dot/r]]`,
/// `B = [0, -c_gain]`.
pub fn elevation_plant(r: f64, r_dot: f64, c_gain: f64, theta_ref: f64, g: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, g * theta_ref.sin() / r, -2.0 * r_dot / r]);
    let b = DMatrix::from_row_slice(2, 1, &[0.0, -c_gain]);
    (a, b)
}

/// State-feedback gains `[k1, k2]` for the elevation plant with identity
/// state weight scaled by `q` and input weight `r_weight`.
pub fn elevation_lq_gains(
    r: f64,
    r_dot: f64,
    c_gain: f64,
    theta_ref: f64,
    g: f64,
    q: f64,
    r_weight: f64,
) -> Result<[f64; 2], LqError> {
    let (a, b) = elevation_plant(r, r_dot, c_gain, theta_ref, g);
    let sol = lq_design(
        &a,
        &b,
        &(DMatrix::identity(2, 2) * q),
        &DMatrix::from_element(1, 1, r_weight),
    )?;
    Ok([sol.gain[(0, 0)], sol.gain[(0, 1)]])
}
