//! Blind known-interference cancellation.
//!
//! Per block of `T` symbols:
//!
//! 1. pre-equalize, `r'[k] = r[k] / (√Pz·z[k]) = x'[k] + h + n'[k]`;
//! 2. difference with the `(T-1)×T` matrix `Q`, which annihilates the constant
//!    `h·e` (or, in the generalized form, any multiple of `z` on raw `r`);
//! 3. factor `Q = U·[S₁ | 0]·V` and form `y'' = S₁⁻¹·U*·Q·r' = V₁·x' + ñ'`,
//!    a `(T-1)×T` MIMO channel with orthonormal rows that no longer depends
//!    on `h`.
//!
//! The mapping `x'[k] = √(Px/Pz)·x[k]/z[k]` is recorded in
//! [`Preequalized::scale_map`] so detectors can work on the original symbols.

mod detect;
mod zero_split;

pub use detect::{
    detect_ml, detect_ml_with, detect_zf_pilot, MlDecision, MlOptions, Pilot, ZfDecision, DEFAULT_ENUMERATION_CAP,
    ML_TIE_TOLERANCE,
};
pub use zero_split::{cancel_with_zero_symbols, Segment, ZeroSplit};

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::linalg::{cvec, wide_svd, CMatrix, CVector};
use crate::ZERO_POWER_THRESHOLD;

/// Minimum ratio between the smallest and largest singular value of `Q`.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Output of [`preequalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Preequalized {
    pub r_prime: Vec<Complex64>,
    /// Per-symbol factor with `x'[k] = scale_map[k]·x[k]`.
    pub scale_map: Vec<Complex64>,
}

fn check_nonzero(z: &[Complex64]) -> Result<()> {
    match z.iter().position(|v| v.norm() <= ZERO_POWER_THRESHOLD) {
        Some(index) => Err(Error::ZeroInterference { index, magnitude: z[index].norm() }),
        None => Ok(()),
    }
}

/// Divides out the known interference symbol so the interference becomes the
/// constant `h` across the block.
pub fn preequalize(r_block: &[Complex64], z_block: &[Complex64], p_x: f64, p_z: f64) -> Result<Preequalized> {
    if r_block.len() != z_block.len() {
        return Err(Error::Dimension { expected: r_block.len(), got: z_block.len() });
    }
    if !(p_z > 0.0) {
        return Err(param(format!("pre-equalization needs p_z > 0, got {p_z}")));
    }
    check_nonzero(z_block)?;
    let az = p_z.sqrt();
    let ratio = (p_x / p_z).sqrt();
    let r_prime = r_block.iter().zip(z_block).map(|(r, z)| r / (az * z)).collect();
    let scale_map = z_block.iter().map(|z| ratio / z).collect();
    Ok(Preequalized { r_prime, scale_map })
}

/// Adjacent-difference matrix with rows `(…, 1, −1, …)`.
pub fn build_q(block_len: usize) -> Result<CMatrix> {
    if block_len < 2 {
        return Err(param(format!("BKIC needs a block of at least 2 symbols, got {block_len}")));
    }
    let mut q = CMatrix::zeros(block_len - 1, block_len);
    for k in 0..block_len - 1 {
        q[(k, k)] = Complex64::new(1.0, 0.0);
        q[(k, k + 1)] = Complex64::new(-1.0, 0.0);
    }
    Ok(q)
}

/// Cancellation matrix for raw (not pre-equalized) samples, rows
/// `(…, z[k+1], −z[k], …)`, so that `Q·z = 0`.
pub fn build_q_generalized(z_block: &[Complex64]) -> Result<CMatrix> {
    let t = z_block.len();
    if t < 2 {
        return Err(param(format!("BKIC needs a block of at least 2 symbols, got {t}")));
    }
    check_nonzero(z_block)?;
    let mut q = CMatrix::zeros(t - 1, t);
    for k in 0..t - 1 {
        q[(k, k)] = z_block[k + 1];
        q[(k, k + 1)] = -z_block[k];
    }
    Ok(q)
}

/// Precomputed factors of one cancellation matrix. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct BkicPipeline {
    q: CMatrix,
    u: CMatrix,
    s1: Vec<f64>,
    v: CMatrix,
    v1: CMatrix,
    /// `S₁⁻¹·U*`, applied after differencing.
    whiten: CMatrix,
}

/// Factors `Q`; fails when `Q` is numerically rank deficient.
pub fn factor_pipeline(q: &CMatrix) -> Result<BkicPipeline> {
    factor_pipeline_for_block(q, None)
}

/// Like [`factor_pipeline`], tagging a degeneracy error with the block index.
pub fn factor_pipeline_for_block(q: &CMatrix, block: Option<usize>) -> Result<BkicPipeline> {
    let m = q.nrows();
    if m == 0 {
        return Err(param("cancellation matrix has no rows"));
    }
    let f = wide_svd(q).map_err(|e| match e {
        Error::Degenerate { detail, .. } => Error::Degenerate { block, detail },
        other => other,
    })?;
    let (largest, smallest) = (f.singular_values[0], f.singular_values[m - 1]);
    if !(smallest > RANK_TOLERANCE * largest) {
        return Err(Error::Degenerate {
            block,
            detail: format!("cancellation matrix is rank deficient (σ_min = {smallest:e}, σ_max = {largest:e})"),
        });
    }
    let v1 = f.v.rows(0, m).into_owned();
    let mut whiten = f.u.adjoint();
    for (i, s) in f.singular_values.iter().enumerate() {
        whiten.row_mut(i).scale_mut(s.recip());
    }
    Ok(BkicPipeline { q: q.clone(), u: f.u, s1: f.singular_values, v: f.v, v1, whiten })
}

/// Applies the pipeline to one pre-equalized block, giving `y''`.
pub fn reduce_block(pipe: &BkicPipeline, r_prime: &[Complex64]) -> Result<Vec<Complex64>> {
    pipe.reduce(r_prime)
}

/// Continuous-fading reduction: `y''` plus the diagonal covariance
/// `σ_Δ²·S₁⁻²` of the gain-drift term `S₁⁻¹·U*·Q·h`.
pub fn reduce_block_continuous(
    pipe: &BkicPipeline,
    r_prime: &[Complex64],
    sigma_delta2: f64,
) -> Result<ContinuousReduction> {
    pipe.reduce_continuous(r_prime, sigma_delta2)
}

/// Estimates of `x' + n'` recovered from `y''`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredBlock {
    pub y_pp: Vec<Complex64>,
    /// Minimum-norm solution `V₁*·y''`: the component of `x' + n'`
    /// orthogonal to the null space of `Q`.
    pub x_hat: Vec<Complex64>,
}

impl RecoveredBlock {
    /// Residual `w = x̂ − (x' + n')` against known truth.
    pub fn residual(&self, truth: &[Complex64]) -> Result<Vec<Complex64>> {
        if truth.len() != self.x_hat.len() {
            return Err(Error::Dimension { expected: self.x_hat.len(), got: truth.len() });
        }
        Ok(self.x_hat.iter().zip(truth).map(|(a, b)| a - b).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousReduction {
    pub y_pp: Vec<Complex64>,
    /// Diagonal of the drift-term covariance, one entry per output dimension.
    pub drift_covariance: Vec<f64>,
}

impl BkicPipeline {
    pub fn block_len(&self) -> usize {
        self.q.ncols()
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    /// Diagonal of `S₁`, descending.
    pub fn s1(&self) -> &[f64] {
        &self.s1
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// Effective MIMO channel `V₁` (`V` without its null-space row).
    pub fn v1(&self) -> &CMatrix {
        &self.v1
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.block_len() {
            return Err(Error::Dimension { expected: self.block_len(), got: len });
        }
        Ok(())
    }

    /// `y' = Q·r'` (interference cancelled, noise coloured).
    pub fn difference(&self, r_prime: &[Complex64]) -> Result<CVector> {
        self.check_len(r_prime.len())?;
        Ok(&self.q * cvec(r_prime))
    }

    /// `y'' = S₁⁻¹·U*·Q·r'`.
    pub fn reduce(&self, r_prime: &[Complex64]) -> Result<Vec<Complex64>> {
        let y = self.difference(r_prime)?;
        Ok((&self.whiten * y).iter().copied().collect())
    }

    /// Reduces and forms the minimum-norm estimate of `x' + n'`.
    pub fn recover(&self, r_prime: &[Complex64]) -> Result<RecoveredBlock> {
        let y_pp = self.reduce(r_prime)?;
        let x_hat = (self.v1.adjoint() * cvec(&y_pp)).iter().copied().collect();
        Ok(RecoveredBlock { y_pp, x_hat })
    }

    pub fn reduce_continuous(&self, r_prime: &[Complex64], sigma_delta2: f64) -> Result<ContinuousReduction> {
        if !(sigma_delta2 >= 0.0) {
            return Err(param(format!("delta variance must be >= 0, got {sigma_delta2}")));
        }
        let y_pp = self.reduce(r_prime)?;
        let drift_covariance = self.s1.iter().map(|s| sigma_delta2 / (s * s)).collect();
        Ok(ContinuousReduction { y_pp, drift_covariance })
    }

    /// Channel seen by the original symbols: `V₁·diag(scale)`, so that
    /// `y'' = H·x + noise`. Use the pre-equalization `scale_map` for the
    /// pre-equalized route and `√Px` for the generalized route.
    pub fn effective_channel(&self, scale: &[Complex64]) -> Result<CMatrix> {
        self.check_len(scale.len())?;
        let mut h = self.v1.clone();
        for (j, s) in scale.iter().enumerate() {
            h.column_mut(j).iter_mut().for_each(|v| *v *= *s);
        }
        Ok(h)
    }
}
