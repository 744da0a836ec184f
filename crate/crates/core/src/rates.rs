//! Closed-form achievable rates and upper bounds.
//!
//! Every function returns bits per channel use. [`LogBase`] converts for
//! display. `γ = Px/σ²` is the target SNR and `ρ = Px/Pz` the
//! signal-to-interference ratio.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{param, Result};

/// Unit used when rates are written out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn from_bits(self, bits: f64) -> f64 {
        match self {
            LogBase::Bits => bits,
            LogBase::Nats => bits * LN_2,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

impl FromStr for LogBase {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "bits" => Ok(LogBase::Bits),
            "e" | "nats" => Ok(LogBase::Nats),
            other => Err(param(format!("log base must be 2 or e, got {other:?}"))),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Bits => "2",
            LogBase::Nats => "e",
        })
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

fn pre_log(t: usize) -> f64 {
    1.0 - 1.0 / t as f64
}

/// `log₂(1+γ)`: the channel with `h` known and the interference removed.
pub fn rate_naive(gamma: f64) -> f64 {
    log2_1p(gamma)
}

/// Upper bound with a flag for the interference-free degenerate case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBound {
    pub bits: f64,
    /// `Pz = 0`: the bound is the naive one.
    pub degenerate: bool,
}

/// `(1−1/T)·log₂(1+γ) + (1/T)·log₂(1 + Px/(σ² + T·Pz))`.
pub fn rate_upper_bound(p_x: f64, p_z: f64, sigma2: f64, block_len: usize) -> Result<UpperBound> {
    check_rate_params(p_x, p_z, sigma2, block_len)?;
    let gamma = p_x / sigma2;
    if p_z == 0.0 {
        return Ok(UpperBound { bits: rate_naive(gamma), degenerate: true });
    }
    let bits = pre_log(block_len) * rate_naive(gamma) + rate_gap_unchecked(p_x, p_z, sigma2, block_len);
    Ok(UpperBound { bits, degenerate: false })
}

/// The same bound written in `γ` and `ρ`: the second term is
/// `(1/T)·log₂(1 + ργ/(ρ + Tγ))`.
pub fn rate_upper_bound_gamma_rho(gamma: f64, rho: f64, block_len: usize) -> Result<f64> {
    if !(gamma >= 0.0 && rho > 0.0) || block_len == 0 {
        return Err(param(format!("need gamma >= 0, rho > 0, T >= 1; got {gamma}, {rho}, {block_len}")));
    }
    let t = block_len as f64;
    let second = if rho.is_infinite() { gamma } else { rho * gamma / (rho + t * gamma) };
    Ok(pre_log(block_len) * rate_naive(gamma) + log2_1p(second) / t)
}

/// `log₂(1 + (T−1)γ/(T+γ))`: least-squares cancellation with the estimation
/// error treated as noise.
pub fn rate_traditional(gamma: f64, block_len: usize) -> f64 {
    let t = block_len as f64;
    if block_len == 0 {
        return 0.0;
    }
    log2_1p((t - 1.0) * gamma / (t + gamma))
}

/// `(1−1/T)·log₂(1+γ)`: BKIC with Gaussian targets.
pub fn rate_bkic(gamma: f64, block_len: usize) -> f64 {
    if block_len == 0 {
        return 0.0;
    }
    pre_log(block_len) * rate_naive(gamma)
}

/// `(1/T)·log₂(1 + Px/(σ² + T·Pz))`, the distance from BKIC to the bound.
pub fn rate_gap(p_x: f64, p_z: f64, sigma2: f64, block_len: usize) -> Result<f64> {
    check_rate_params(p_x, p_z, sigma2, block_len)?;
    Ok(rate_gap_unchecked(p_x, p_z, sigma2, block_len))
}

fn rate_gap_unchecked(p_x: f64, p_z: f64, sigma2: f64, block_len: usize) -> f64 {
    let t = block_len as f64;
    log2_1p(p_x / (sigma2 + t * p_z)) / t
}

/// `(1−1/T)·log₂(1+γ/2)`: orthogonal training with constant-modulus
/// interference, where the pilot noise doubles the effective noise.
pub fn rate_orthogonal(gamma: f64, block_len: usize) -> f64 {
    if block_len == 0 {
        return 0.0;
    }
    pre_log(block_len) * rate_naive(gamma / 2.0)
}

fn check_rate_params(p_x: f64, p_z: f64, sigma2: f64, block_len: usize) -> Result<()> {
    if !(p_x >= 0.0 && p_z >= 0.0 && sigma2 > 0.0) || block_len == 0 {
        return Err(param(format!(
            "need p_x >= 0, p_z >= 0, sigma2 > 0, T >= 1; got {p_x}, {p_z}, {sigma2}, {block_len}"
        )));
    }
    Ok(())
}

/// Tolerance on the mean block power in [`bound_blockwise`], relative to `T`.
pub const BLOCK_POWER_TOLERANCE: f64 = 1e-9;

/// Upper bound for a packet whose blocks carry interference energies
/// `block_powers[i] = ‖z_i‖²`, averaged over the blocks supplied.
///
/// The mean of `block_powers` must equal `T`. With all entries equal to `T`
/// this is [`rate_upper_bound`]; any other split is larger.
pub fn bound_blockwise(p_x: f64, p_z: f64, sigma2: f64, block_len: usize, block_powers: &[f64]) -> Result<f64> {
    check_rate_params(p_x, p_z, sigma2, block_len)?;
    if block_powers.is_empty() {
        return Err(param("no block powers supplied"));
    }
    if let Some(bad) = block_powers.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(param(format!("block powers must be finite and nonnegative, got {bad}")));
    }
    let t = block_len as f64;
    let mean = block_powers.iter().sum::<f64>() / block_powers.len() as f64;
    if (mean - t).abs() > BLOCK_POWER_TOLERANCE * t {
        return Err(param(format!("mean block power {mean} violates the constraint mean = T = {block_len}")));
    }
    let tail =
        block_powers.iter().map(|&p| log2_1p(p_x / (sigma2 + p_z * p)) / t).sum::<f64>() / block_powers.len() as f64;
    Ok(pre_log(block_len) * rate_naive(p_x / sigma2) + tail)
}

/// Per-block mutual information `T·log₂(1+Px/σ²) + log₂(1+T·Pz/(σ²+Px)) − log₂(1+T·Pz/σ²)`,
/// in bits per block.
///
/// Auxiliary only: it is a different quantity from the per-channel-use bound
/// of [`rate_upper_bound`] and is not expected to equal `T` times it.
pub fn per_block_expansion(p_x: f64, p_z: f64, sigma2: f64, block_len: usize) -> Result<f64> {
    check_rate_params(p_x, p_z, sigma2, block_len)?;
    let t = block_len as f64;
    Ok(t * log2_1p(p_x / sigma2) + log2_1p(t * p_z / (sigma2 + p_x)) - log2_1p(t * p_z / sigma2))
}

/// Closed form of `∂(R_t − R_BKIC)/∂γ` in nats.
pub fn alpha_nats(gamma: f64, block_len: usize) -> f64 {
    let t = block_len as f64;
    -(t - 1.0) * gamma / (t * (1.0 + gamma) * (t + gamma))
}

/// One row of [`rate_derivative_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeRow {
    pub gamma: f64,
    /// Central-difference derivative of `R_t − R_BKIC`, in nats.
    pub numeric: f64,
    pub analytic: f64,
    /// Relative error, or absolute when `analytic = 0`.
    pub error: f64,
}

/// Differentiates `R_t` and `R_BKIC` numerically with a five-point stencil of
/// step `1e-3·γ` and compares the difference with [`alpha_nats`].
pub fn rate_derivative_check(gammas: &[f64], block_len: usize) -> Result<Vec<DerivativeRow>> {
    if block_len == 0 {
        return Err(param("T must be at least 1"));
    }
    let diff = |f: &dyn Fn(f64) -> f64, g: f64, h: f64| {
        (-f(g + 2.0 * h) + 8.0 * f(g + h) - 8.0 * f(g - h) + f(g - 2.0 * h)) / (12.0 * h)
    };
    let r_t = |g: f64| rate_traditional(g, block_len) * LN_2;
    let r_b = |g: f64| rate_bkic(g, block_len) * LN_2;
    gammas
        .iter()
        .map(|&gamma| {
            if !(gamma > 0.0) || !gamma.is_finite() {
                return Err(param(format!("derivative grid needs gamma > 0, got {gamma}")));
            }
            let h = 1e-3 * gamma;
            let numeric = diff(&r_t, gamma, h) - diff(&r_b, gamma, h);
            let analytic = alpha_nats(gamma, block_len);
            let error = if analytic == 0.0 { numeric.abs() } else { ((numeric - analytic) / analytic).abs() };
            Ok(DerivativeRow { gamma, numeric, analytic, error })
        })
        .collect()
}

/// All closed-form rates at one operating point, with `σ² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub gamma: f64,
    pub rho: f64,
    pub block_len: usize,
    pub r_naive: f64,
    pub c_u: f64,
    pub r_t: f64,
    pub r_bkic: f64,
    pub r_orth: f64,
    pub gap: f64,
}

impl RatePoint {
    /// `rho = ∞` means no interference and gives the naive bound for `c_u`.
    pub fn new(gamma: f64, rho: f64, block_len: usize) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(param(format!("rho must be positive, got {rho}")));
        }
        let p_z = if rho.is_infinite() { 0.0 } else { gamma / rho };
        Self::from_powers(gamma, p_z, 1.0, block_len)
    }

    pub fn from_powers(p_x: f64, p_z: f64, sigma2: f64, block_len: usize) -> Result<Self> {
        let bound = rate_upper_bound(p_x, p_z, sigma2, block_len)?;
        let gamma = p_x / sigma2;
        let r_bkic = rate_bkic(gamma, block_len);
        Ok(Self {
            gamma,
            rho: if p_z == 0.0 { f64::INFINITY } else { p_x / p_z },
            block_len,
            r_naive: rate_naive(gamma),
            c_u: bound.bits,
            r_t: rate_traditional(gamma, block_len),
            r_bkic,
            r_orth: rate_orthogonal(gamma, block_len),
            gap: bound.bits - r_bkic,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        assert_eq!(rate_naive(0.0), 0.0);
        assert!((rate_naive(1.0) - 1.0).abs() < 1e-15);
        assert!((rate_naive(100.0) - 6.658211482751795).abs() < 1e-12);
        let c_u = rate_upper_bound(100.0, 100.0, 1.0, 100).unwrap();
        assert!(!c_u.degenerate);
        let expected = 0.99 * 101f64.log2() + 0.01 * (1.0 + 100.0 / 10001.0f64).log2();
        assert!((c_u.bits - expected).abs() < 1e-13);
        assert!((c_u.bits - 6.5918).abs() < 1e-4);
        assert!((rate_traditional(100.0, 100) - 50.5f64.log2()).abs() < 1e-13);
        assert!((rate_bkic(100.0, 100) - 0.99 * 101f64.log2()).abs() < 1e-13);
        assert!((rate_gap(100.0, 100.0, 1.0, 100).unwrap() - 1.4355e-4).abs() < 1e-7);
    }

    #[test]
    fn single_symbol_blocks() {
        let bound = rate_upper_bound(10.0, 3.0, 2.0, 1).unwrap().bits;
        assert!((bound - (1.0 + 10.0 / 5.0f64).log2()).abs() < 1e-14);
        assert_eq!(rate_traditional(50.0, 1), 0.0);
        assert_eq!(rate_bkic(50.0, 1), 0.0);
        assert_eq!(rate_derivative_check(&[0.5, 5.0], 1).unwrap().iter().map(|r| r.analytic).sum::<f64>(), 0.0);
    }

    #[test]
    fn degenerate_without_interference() {
        let b = rate_upper_bound(10.0, 0.0, 1.0, 8).unwrap();
        assert!(b.degenerate);
        assert_eq!(b.bits, rate_naive(10.0));
        assert!(rate_upper_bound(10.0, -1.0, 1.0, 8).is_err());
    }

    #[test]
    fn strong_interference_limits() {
        let t = 20;
        let b = rate_upper_bound(10.0, 1e12, 1.0, t).unwrap().bits;
        assert!((b - rate_bkic(10.0, t)).abs() < 1e-10);
        assert!(rate_gap(1.0, 1e9, 1.0, t).unwrap() < 1e-9);
        assert!((rate_traditional(1e12, 64) - 6.0).abs() < 1e-9);
    }

    #[test]
    fn gap_bounded_by_rho_constant() {
        for rho in [0.1, 1.0, 10.0] {
            for t in [2, 10, 100] {
                for gamma in [0.1, 10.0, 1e6] {
                    let gap = rate_gap(gamma, gamma / rho, 1.0, t).unwrap();
                    assert!(gap <= log2_1p(rho / t as f64) / t as f64 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn blockwise_jensen() {
        let t = 10;
        let uniform = vec![10.0; 50];
        let base = rate_upper_bound(100.0, 100.0, 1.0, t).unwrap().bits;
        assert!((bound_blockwise(100.0, 100.0, 1.0, t, &uniform).unwrap() - base).abs() < 1e-13);
        let split = [5.0, 15.0];
        assert!(bound_blockwise(100.0, 100.0, 1.0, t, &split).unwrap() > base);
        assert!(bound_blockwise(100.0, 100.0, 1.0, t, &[5.0, 14.0]).is_err());
        assert!(bound_blockwise(100.0, 100.0, 1.0, t, &[-1.0, 21.0]).is_err());
    }

    #[test]
    fn blockwise_concentration_approaches_naive() {
        let (t, gamma) = (10, 100.0);
        let mut previous = 0.0;
        for n in [2, 10, 100, 1000] {
            let mut powers = vec![0.0; n];
            powers[0] = (t * n) as f64;
            let b = bound_blockwise(gamma, gamma, 1.0, t, &powers).unwrap();
            assert!(b > previous && b < rate_naive(gamma));
            previous = b;
        }
        assert!(rate_naive(gamma) - previous < 1e-3);
    }

    #[test]
    fn derivative_matches_alpha() {
        let grid: Vec<f64> = (-20..=40).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        for t in [2, 10, 100, 1000] {
            for row in rate_derivative_check(&grid, t).unwrap() {
                assert!(row.analytic < 0.0);
                assert!(row.error < 1e-6, "T={t} gamma={}: {}", row.gamma, row.error);
            }
        }
    }

    #[test]
    fn low_snr_ratio_tends_to_one() {
        for t in [2, 100] {
            let ratio = rate_traditional(1e-9, t) / rate_bkic(1e-9, t);
            assert!((ratio - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn per_block_expansion_is_finite_and_below_naive() {
        let v = per_block_expansion(100.0, 100.0, 1.0, 10).unwrap();
        assert!(v > 0.0 && v < 10.0 * rate_naive(100.0));
    }

    #[test]
    fn log_base_parsing() {
        assert_eq!("2".parse::<LogBase>().unwrap(), LogBase::Bits);
        assert_eq!("e".parse::<LogBase>().unwrap(), LogBase::Nats);
        assert!("10".parse::<LogBase>().is_err());
        assert!((LogBase::Nats.from_bits(1.0) - LN_2).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn ordering_and_identities(
            log_gamma in -2.0f64..4.0,
            rho in prop::sample::select(vec![0.01, 1.0, 100.0]),
            t in prop::sample::select(vec![2usize, 10, 100, 1000]),
        ) {
            let gamma = 10f64.powf(log_gamma);
            let p = RatePoint::new(gamma, rho, t).unwrap();
            prop_assert!(p.r_t < p.r_bkic);
            prop_assert!(p.r_bkic < p.c_u);
            prop_assert!(p.c_u < p.r_naive);
            let alt = rate_upper_bound_gamma_rho(gamma, rho, t).unwrap();
            prop_assert!((alt - p.c_u).abs() < 1e-12);
            prop_assert!((p.gap - rate_gap(gamma, gamma / rho, 1.0, t).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn blockwise_never_below_uniform(
            weights in prop::collection::vec(0.0f64..1.0, 2..40),
            t in 2usize..64,
            log_gamma in -1.0f64..3.0,
        ) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-6);
            let n = weights.len() as f64;
            let powers: Vec<f64> = weights.iter().map(|w| w / total * n * t as f64).collect();
            let gamma = 10f64.powf(log_gamma);
            let base = rate_upper_bound(gamma, gamma, 1.0, t).unwrap().bits;
            prop_assert!(bound_blockwise(gamma, gamma, 1.0, t, &powers).unwrap() >= base - 1e-12);
        }
    }
}
