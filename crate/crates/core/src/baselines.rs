//! Reference cancellers that BKIC is compared against.
//!
//! * [`traditional_kic`]: estimate `h` by weighted least squares over the
//!   block and subtract `√Pz·ĥ·z[k]` from every symbol.
//! * [`bkic_zf`]: complete `Q` with an averaging row and invert it. This is
//!   the zero-forcing form of BKIC and, for constant-modulus interference, is
//!   the same linear map as the least-squares canceller on pre-equalized
//!   symbols (see [`assert_equivalence`]).
//! * [`orthogonal_training_kic`]: silence the target on one symbol and read
//!   `h` off it.

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::linalg::{cvec, CMatrix};
use crate::ZERO_POWER_THRESHOLD;

/// Per-symbol decomposition of the post-cancellation output power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrBreakdown {
    pub signal: f64,
    /// Leakage of other target symbols (or of pilot noise) through `ĥ`.
    pub residual: f64,
    pub noise: f64,
}

impl SinrBreakdown {
    /// Zero when no signal survives.
    pub fn sinr(&self) -> f64 {
        if self.signal == 0.0 {
            0.0
        } else {
            self.signal / (self.residual + self.noise)
        }
    }
}

/// Least-squares estimate of the interference gain for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct LsEstimate {
    pub h_hat: Complex64,
    /// `r[k] − √Pz·ĥ·z[k]`, an estimate of `√Px·x[k] + n[k]` up to leakage.
    pub post_cancellation: Vec<Complex64>,
    pub sinr: Vec<SinrBreakdown>,
}

/// Output of a baseline canceller on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct CancellerReport {
    /// Block indices the estimates refer to.
    pub positions: Vec<usize>,
    pub estimates: Vec<Complex64>,
    pub channel_estimate: Option<Complex64>,
    /// Analytic SINR per position; empty when the scheme has no closed form.
    pub sinr: Vec<SinrBreakdown>,
    /// Set when cancellation was skipped because the interference was silent.
    pub passthrough: bool,
}

fn check_lengths(r: &[Complex64], z: &[Complex64]) -> Result<()> {
    if r.len() != z.len() {
        return Err(Error::Dimension { expected: r.len(), got: z.len() });
    }
    if r.is_empty() {
        return Err(param("empty block"));
    }
    Ok(())
}

fn check_powers(p_x: f64, p_z: f64, sigma2: f64) -> Result<()> {
    if !(p_x >= 0.0 && p_z > 0.0 && sigma2 > 0.0) || !(p_x.is_finite() && p_z.is_finite() && sigma2.is_finite()) {
        return Err(param(format!("need p_x >= 0, p_z > 0, sigma2 > 0; got {p_x}, {p_z}, {sigma2}")));
    }
    Ok(())
}

/// Analytic SINR of the least-squares canceller at every position of a block
/// with interference `z`.
pub fn ls_sinr(z: &[Complex64], p_x: f64, sigma2: f64) -> Vec<SinrBreakdown> {
    let total: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    z.iter()
        .map(|zk| {
            let own = zk.norm_sqr();
            let others = (total - own).max(0.0);
            if total == 0.0 || others == 0.0 {
                return SinrBreakdown { signal: 0.0, residual: 0.0, noise: sigma2 };
            }
            let keep = others / total;
            SinrBreakdown {
                signal: p_x * keep * keep,
                residual: p_x * own * others / (total * total),
                noise: sigma2 * keep,
            }
        })
        .collect()
}

/// `ĥ = Σ z*[i]·r[i] / (√Pz·Σ|z[i]|²)` and the resulting cancellation.
///
/// Returns `None` when the block carries no interference power.
pub fn ls_estimate(r: &[Complex64], z: &[Complex64], p_x: f64, p_z: f64, sigma2: f64) -> Result<Option<LsEstimate>> {
    check_lengths(r, z)?;
    check_powers(p_x, p_z, sigma2)?;
    let total: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    if total <= ZERO_POWER_THRESHOLD * ZERO_POWER_THRESHOLD {
        return Ok(None);
    }
    let az = p_z.sqrt();
    let corr: Complex64 = z.iter().zip(r).map(|(zi, ri)| zi.conj() * ri).sum();
    let h_hat = corr / (az * total);
    let post_cancellation = r.iter().zip(z).map(|(ri, zi)| ri - az * h_hat * zi).collect();
    Ok(Some(LsEstimate { h_hat, post_cancellation, sinr: ls_sinr(z, p_x, sigma2) }))
}

/// Least-squares known-interference cancellation on raw received symbols.
///
/// Estimates are of `√Px·x[k] + n[k]`. An all-silent `z` block is passed
/// through unchanged.
pub fn traditional_kic(r: &[Complex64], z: &[Complex64], p_x: f64, p_z: f64, sigma2: f64) -> Result<CancellerReport> {
    let positions = (0..r.len()).collect();
    Ok(match ls_estimate(r, z, p_x, p_z, sigma2)? {
        Some(ls) => CancellerReport {
            positions,
            estimates: ls.post_cancellation,
            channel_estimate: Some(ls.h_hat),
            sinr: ls.sinr,
            passthrough: false,
        },
        None => CancellerReport {
            positions,
            estimates: r.to_vec(),
            channel_estimate: None,
            sinr: vec![SinrBreakdown { signal: p_x, residual: 0.0, noise: sigma2 }; r.len()],
            passthrough: true,
        },
    })
}

/// `Q` extended with the averaging row `(1,…,1)/T`, and its inverse.
#[derive(Debug, Clone)]
pub struct Q1System {
    pub q1: CMatrix,
    pub q1_inv: CMatrix,
}

impl Q1System {
    pub fn new(block_len: usize) -> Result<Self> {
        if block_len < 2 {
            return Err(param(format!("BKIC-ZF needs T >= 2, got {block_len}")));
        }
        let t = block_len;
        let tf = t as f64;
        let one = Complex64::new(1.0, 0.0);
        let mut q1 = CMatrix::zeros(t, t);
        for i in 0..t - 1 {
            q1[(i, i)] = one;
            q1[(i, i + 1)] = -one;
        }
        for j in 0..t {
            q1[(t - 1, j)] = Complex64::new(1.0 / tf, 0.0);
        }
        // 1-based column j < T: (T−j)/T on rows i <= j, −j/T below; last column 1.
        let q1_inv = CMatrix::from_fn(t, t, |i, j| {
            if j == t - 1 {
                return one;
            }
            let col = (j + 1) as f64;
            let v = if i <= j { (tf - col) / tf } else { -col / tf };
            Complex64::new(v, 0.0)
        });
        Ok(Self { q1, q1_inv })
    }

    pub fn block_len(&self) -> usize {
        self.q1.nrows()
    }

    /// `Q₁⁻¹·[Q·r'; 0]`: the unresolved mean direction is set to zero.
    pub fn zero_force(&self, r_prime: &[Complex64]) -> Result<Vec<Complex64>> {
        let t = self.block_len();
        if r_prime.len() != t {
            return Err(Error::Dimension { expected: t, got: r_prime.len() });
        }
        let mut stacked: Vec<Complex64> = r_prime.windows(2).map(|w| w[0] - w[1]).collect();
        stacked.push(Complex64::new(0.0, 0.0));
        Ok((&self.q1_inv * cvec(&stacked)).iter().copied().collect())
    }
}

/// BKIC-ZF on a pre-equalized block. Estimates are of `x'[k] + n'[k]`.
pub fn bkic_zf(r_prime: &[Complex64]) -> Result<CancellerReport> {
    let sys = Q1System::new(r_prime.len())?;
    Ok(CancellerReport {
        positions: (0..r_prime.len()).collect(),
        estimates: sys.zero_force(r_prime)?,
        channel_estimate: None,
        sinr: Vec::new(),
        passthrough: false,
    })
}

/// Outcome of [`assert_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub holds: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
}

/// Runs [`traditional_kic`] on raw `(r, z)` and [`bkic_zf`] on the
/// pre-equalized block and compares them in the pre-equalized domain.
///
/// `z` must be constant modulus. The tolerance is `1e-10` relative to the
/// largest `|r'|`, floored at `1e-10`.
pub fn assert_equivalence(r: &[Complex64], z: &[Complex64], p_x: f64, p_z: f64, sigma2: f64) -> Result<Equivalence> {
    check_lengths(r, z)?;
    let m0 = z[0].norm();
    if z.iter().any(|v| (v.norm() - m0).abs() > 1e-9 * m0.max(1.0)) {
        return Err(param("equivalence requires constant-modulus interference"));
    }
    let pre = crate::bkic::preequalize(r, z, p_x, p_z)?;
    let zf = bkic_zf(&pre.r_prime)?;
    let ls = traditional_kic(r, z, p_x, p_z, sigma2)?;
    let az = p_z.sqrt();
    let max_deviation = ls
        .estimates
        .iter()
        .zip(z)
        .zip(&zf.estimates)
        .map(|((e, zk), f)| (e / (az * zk) - f).norm())
        .fold(0.0, f64::max);
    let scale = pre.r_prime.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let tolerance = 1e-10 * scale;
    Ok(Equivalence { holds: max_deviation <= tolerance, max_deviation, tolerance })
}

/// Orthogonal-training canceller: `x[pilot] = 0`, `ĥ = r[pilot]/(√Pz·z[pilot])`.
///
/// Estimates (of `√Px·x[k] + n[k]`) cover every position except the pilot.
/// The residual term of each [`SinrBreakdown`] is the noise inflation
/// `δ_k = σ²·|z[k]|²/|z[pilot]|²` caused by the pilot noise.
pub fn orthogonal_training_kic(
    r: &[Complex64],
    z: &[Complex64],
    pilot: usize,
    p_x: f64,
    p_z: f64,
    sigma2: f64,
) -> Result<CancellerReport> {
    check_lengths(r, z)?;
    check_powers(p_x, p_z, sigma2)?;
    if pilot >= r.len() {
        return Err(param(format!("pilot index {pilot} outside block of {}", r.len())));
    }
    let zp = z[pilot];
    if zp.norm() <= ZERO_POWER_THRESHOLD {
        return Err(Error::ZeroInterference { index: pilot, magnitude: zp.norm() });
    }
    let az = p_z.sqrt();
    let h_hat = r[pilot] / (az * zp);
    let positions: Vec<usize> = (0..r.len()).filter(|&k| k != pilot).collect();
    let estimates = positions.iter().map(|&k| r[k] - az * h_hat * z[k]).collect();
    let sinr = positions
        .iter()
        .map(|&k| SinrBreakdown { signal: p_x, residual: sigma2 * z[k].norm_sqr() / zp.norm_sqr(), noise: sigma2 })
        .collect();
    Ok(CancellerReport { positions, estimates, channel_estimate: Some(h_hat), sinr, passthrough: false })
}

/// Per-realization rate `(1/T)·Σ_k log₂(1 + SINR_k)` of a report over a block
/// of `block_len` channel uses.
pub fn report_rate(report: &CancellerReport, block_len: usize) -> f64 {
    report.sinr.iter().map(|s| s.sinr().ln_1p()).sum::<f64>() / std::f64::consts::LN_2 / block_len as f64
}
