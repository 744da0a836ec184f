//! Complex dense linear algebra.
//!
//! Matrices are `nalgebra` types. The singular value decomposition is a
//! one-sided (Hestenes) Jacobi iteration: it is accurate on the clustered
//! spectra that show up here (pilot-reduced `V₁` has `T−2` unit singular
//! values), where the bidiagonal QR in `nalgebra` 0.35 does not converge to a
//! valid factorization for complex input.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const JACOBI_EPS: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U·diag(s)·V*` of a tall or square matrix, `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m×n`, orthonormal columns (columns for zero singular values are zero).
    pub u: CMatrix,
    pub s: Vec<f64>,
    /// `n×n` unitary.
    pub v: CMatrix,
}

/// One-sided Jacobi SVD of an `m×n` matrix with `m >= n`.
pub fn jacobi_svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Dimension { expected: n, got: m });
    }
    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                // Rotate the phase of column q so the Gram entry is real, then
                // apply the real symmetric Jacobi rotation.
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
    }
    if !converged {
        return Err(Error::Degenerate { block: None, detail: "Jacobi SVD did not converge".into() });
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = CMatrix::zeros(m, n);
    let mut v_sorted = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        if sigma > 0.0 {
            u.set_column(dst, &(w.column(src) / Complex64::new(sigma, 0.0)));
        }
        v_sorted.set_column(dst, &v.column(src));
    }
    Ok(Svd { u, s, v: v_sorted })
}

fn rotate(mat: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    for i in 0..mat.nrows() {
        let ap = mat[(i, p)];
        let aq = mat[(i, q)] * phase;
        mat[(i, p)] = ap * c - aq * s;
        mat[(i, q)] = ap * s + aq * c;
    }
}

/// Full-row-rank factorization `Q = U·[S₁ | 0]·V` of a wide `m×(m+1)` matrix.
///
/// Singular values are descending and the last row of `V` spans the null
/// space of `Q`.
#[derive(Debug, Clone)]
pub struct WideSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn wide_svd(q: &CMatrix) -> Result<WideSvd> {
    let (m, n) = q.shape();
    if n != m + 1 {
        return Err(Error::Dimension { expected: m + 1, got: n });
    }
    // Q* = W·S·Z*  ⇒  Q = Z·S·W*, so U = Z and V₁ = W*.
    let f = jacobi_svd(&q.adjoint())?;
    let mut v = CMatrix::zeros(n, n);
    let v1 = f.u.adjoint();
    v.rows_mut(0, m).copy_from(&v1);

    // Complete V with the unit vector orthogonal to the rows of V₁: project
    // the least-covered basis vector off the row space, twice for accuracy.
    let col_norms: Vec<f64> = (0..n).map(|j| v1.column(j).norm_squared()).collect();
    let j = (0..n).min_by(|&a, &b| col_norms[a].total_cmp(&col_norms[b])).unwrap_or(0);
    let mut w = CVector::zeros(n);
    w[j] = Complex64::new(1.0, 0.0);
    for _ in 0..2 {
        let coeff = &v1 * &w;
        w -= v1.adjoint() * coeff;
    }
    let norm = w.norm();
    if norm < 1e-8 {
        return Err(Error::Degenerate { block: None, detail: "could not complete the right singular basis".into() });
    }
    w /= Complex64::new(norm, 0.0);
    v.set_row(m, &w.adjoint());

    Ok(WideSvd { u: f.v, singular_values: f.s, v })
}

/// `log₂ det(A)` for a Hermitian positive definite matrix.
pub fn log2_det_hpd(a: &CMatrix) -> Result<f64> {
    let chol = Cholesky::new(a.clone())
        .ok_or_else(|| Error::Degenerate { block: None, detail: "matrix is not positive definite".into() })?;
    let l = chol.l();
    // Complex Cholesky takes complex square roots and never fails on its own.
    let definite = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-12 * d.re
    });
    if !definite {
        return Err(Error::Degenerate { block: None, detail: "matrix is not positive definite".into() });
    }
    Ok(2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.log2()).sum::<f64>())
}

/// `‖A − B‖_F / ‖B‖_F` (absolute when `B = 0`).
pub fn relative_frobenius(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = (a - b).norm();
    let base = b.norm();
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}

/// Condition number `σ_max/σ_min` of a square or tall matrix.
pub fn condition_number(a: &CMatrix) -> Result<f64> {
    let f = jacobi_svd(a)?;
    let (max, min) = (f.s[0], f.s[f.s.len() - 1]);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Least-squares solution of a tall or square full-column-rank system.
pub fn solve_least_squares(a: &CMatrix, b: &CVector) -> Result<CVector> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
    }
    let f = jacobi_svd(a)?;
    let tol = f.s[0] * 1e-14 * a.nrows().max(a.ncols()) as f64;
    let coeff = f.u.adjoint() * b;
    let mut scaled = CVector::zeros(a.ncols());
    for (i, &s) in f.s.iter().enumerate() {
        if s <= tol {
            return Err(Error::Degenerate { block: None, detail: "least-squares system is rank deficient".into() });
        }
        scaled[i] = coeff[i] / s;
    }
    Ok(&f.v * scaled)
}

pub fn cvec(v: &[Complex64]) -> CVector {
    CVector::from_column_slice(v)
}
