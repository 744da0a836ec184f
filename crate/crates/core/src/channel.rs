//! Known-interference channel: `r[k] = √Px·x[k] + √Pz·h[k]·z[k] + n[k]`.
//!
//! Complex Gaussian `CN(0, v)` always means independent real and imaginary
//! parts of variance `v/2`; `sigma2` is the total complex noise variance.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{param, Result};
use crate::modulation::Constellation;
use crate::rng::{complex_gaussian, stream};

/// Scalar parameters of the channel. Powers are linear and relative to the
/// same reference as `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub p_x: f64,
    pub p_z: f64,
    pub sigma2: f64,
    pub block_len: usize,
    pub packet_len: usize,
}

impl ChannelParams {
    pub fn new(p_x: f64, p_z: f64, sigma2: f64, block_len: usize, packet_len: usize) -> Result<Self> {
        let p = Self { p_x, p_z, sigma2, block_len, packet_len };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from powers in dB (relative to unit noise reference).
    pub fn from_db(px_db: f64, pz_db: f64, sigma2: f64, block_len: usize, packet_len: usize) -> Result<Self> {
        Self::new(crate::db_to_linear(px_db), crate::db_to_linear(pz_db), sigma2, block_len, packet_len)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_x >= 0.0 && self.p_x.is_finite()) {
            return Err(param(format!("p_x must be finite and >= 0, got {}", self.p_x)));
        }
        if !(self.p_z >= 0.0 && self.p_z.is_finite()) {
            return Err(param(format!("p_z must be finite and >= 0, got {}", self.p_z)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(param(format!("sigma2 must be finite and > 0, got {}", self.sigma2)));
        }
        if self.block_len == 0 || self.packet_len == 0 {
            return Err(param("block and packet lengths must be >= 1"));
        }
        if self.packet_len % self.block_len != 0 {
            return Err(param(format!(
                "packet length {} is not a multiple of block length {}",
                self.packet_len, self.block_len
            )));
        }
        Ok(())
    }

    /// SNR `γ = Px/σ²`.
    pub fn gamma(&self) -> f64 {
        self.p_x / self.sigma2
    }

    /// Signal-to-interference power ratio `ρ = Px/Pz`; `None` without interference.
    pub fn rho(&self) -> Option<f64> {
        (self.p_z > 0.0).then(|| self.p_x / self.p_z)
    }

    pub fn num_blocks(&self) -> usize {
        self.packet_len / self.block_len
    }
}

/// Distribution of the target symbols `x[k]`.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSource {
    /// `CN(0, 1)`; the rate-achieving input.
    Gaussian,
    Psk(usize),
    Qam(usize),
    /// Wraps another source and forces `x = 0` at `slot` (0-based) of every
    /// block, reserving it for orthogonal training.
    WithTrainingSlot {
        inner: Box<TargetSource>,
        slot: usize,
    },
}

/// Distribution of the known interference symbols `z[k]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InterferenceSpec {
    /// Constant-power PSK, `|z[k]| = 1` exactly.
    Psk(usize),
    /// `CN(0, 1)`.
    Gaussian,
    Qam(usize),
    /// A fixed sequence, either one full packet or one block repeated.
    Explicit(Vec<Complex64>),
    /// Silences the last `m` symbols of every block of `inner`.
    ZeroTail {
        m: usize,
        inner: Box<InterferenceSpec>,
    },
}

impl InterferenceSpec {
    /// True when every generated symbol has unit modulus.
    pub fn is_constant_power(&self) -> bool {
        matches!(self, InterferenceSpec::Psk(_))
    }
}

/// Time variation of the interference gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingSpec {
    /// i.i.d. `CN(0, 1)` per block, constant inside the block.
    Block,
    /// Random walk `h[k+1] = h[k] + Δ[k]`, `Δ ~ CN(0, delta_var)`, starting
    /// from `h[0] ~ CN(0, 1)`.
    Continuous { delta_var: f64 },
}

/// One simulated packet with every intermediate quantity retained.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub params: ChannelParams,
    pub x: Vec<Complex64>,
    pub z: Vec<Complex64>,
    pub h: Vec<Complex64>,
    pub n: Vec<Complex64>,
    pub r: Vec<Complex64>,
}

/// Borrowed view of one block of a packet.
#[derive(Debug, Clone, Copy)]
pub struct BlockView<'a> {
    pub index: usize,
    pub r: &'a [Complex64],
    pub x: &'a [Complex64],
    pub z: &'a [Complex64],
    pub h: &'a [Complex64],
    pub n: &'a [Complex64],
}

// Stream identifiers under a packet seed.
const STREAM_X: u64 = 0;
const STREAM_Z: u64 = 1;
const STREAM_H: u64 = 2;
const STREAM_N: u64 = 3;

fn draw_target<R: Rng>(src: &TargetSource, pos: usize, rng: &mut R) -> Result<Complex64> {
    Ok(match src {
        TargetSource::Gaussian => complex_gaussian(rng, 1.0),
        TargetSource::Psk(m) => Constellation::psk(*m)?.sample(rng),
        TargetSource::Qam(m) => Constellation::qam(*m)?.sample(rng),
        TargetSource::WithTrainingSlot { inner, slot } => {
            let v = draw_target(inner, pos, rng)?;
            if pos == *slot {
                Complex64::new(0.0, 0.0)
            } else {
                v
            }
        }
    })
}

fn fill_interference<R: Rng>(
    spec: &InterferenceSpec,
    block: usize,
    block_len: usize,
    packet_len: usize,
    rng: &mut R,
    out: &mut [Complex64],
) -> Result<()> {
    match spec {
        InterferenceSpec::Psk(m) => {
            let c = Constellation::psk(*m)?;
            out.iter_mut().for_each(|z| *z = c.sample(rng));
        }
        InterferenceSpec::Qam(m) => {
            let c = Constellation::qam(*m)?;
            out.iter_mut().for_each(|z| *z = c.sample(rng));
        }
        InterferenceSpec::Gaussian => out.iter_mut().for_each(|z| *z = complex_gaussian(rng, 1.0)),
        InterferenceSpec::Explicit(seq) => {
            if seq.len() == packet_len {
                out.copy_from_slice(&seq[block * block_len..(block + 1) * block_len]);
            } else if seq.len() == block_len {
                out.copy_from_slice(seq);
            } else {
                return Err(param(format!(
                    "explicit interference has length {}, expected {} or {}",
                    seq.len(),
                    block_len,
                    packet_len
                )));
            }
        }
        InterferenceSpec::ZeroTail { m, inner } => {
            if *m > block_len {
                return Err(param(format!("zero tail {m} longer than block {block_len}")));
            }
            fill_interference(inner, block, block_len, packet_len, rng, out)?;
            out[block_len - m..].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        }
    }
    Ok(())
}

/// Generates one packet. Identical arguments give bit-identical output.
///
/// Each block draws `x`, `z`, `n` and (in block fading) `h` from its own
/// stream keyed by `(seed, component, block)`. Continuous fading draws the
/// whole gain trajectory from one packet-level stream.
pub fn generate_packet(
    params: &ChannelParams,
    xspec: &TargetSource,
    zspec: &InterferenceSpec,
    fspec: &FadingSpec,
    seed: u64,
) -> Result<PacketRecord> {
    params.validate()?;
    if let FadingSpec::Continuous { delta_var } = fspec {
        if !(*delta_var >= 0.0 && delta_var.is_finite()) {
            return Err(param(format!("delta variance must be >= 0, got {delta_var}")));
        }
    }
    let t = params.block_len;
    let n_sym = params.packet_len;
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n_sym];
    let mut z = vec![zero; n_sym];
    let mut h = vec![zero; n_sym];
    let mut n = vec![zero; n_sym];

    for b in 0..params.num_blocks() {
        let range = b * t..(b + 1) * t;
        let mut rx = stream(seed, &[STREAM_X, b as u64]);
        for (pos, v) in x[range.clone()].iter_mut().enumerate() {
            *v = draw_target(xspec, pos, &mut rx)?;
        }
        let mut rz = stream(seed, &[STREAM_Z, b as u64]);
        fill_interference(zspec, b, t, n_sym, &mut rz, &mut z[range.clone()])?;
        let mut rn = stream(seed, &[STREAM_N, b as u64]);
        n[range.clone()].iter_mut().for_each(|v| *v = complex_gaussian(&mut rn, params.sigma2));
        if let FadingSpec::Block = fspec {
            let mut rh = stream(seed, &[STREAM_H, b as u64]);
            let g = complex_gaussian(&mut rh, 1.0);
            h[range].iter_mut().for_each(|v| *v = g);
        }
    }
    if let FadingSpec::Continuous { delta_var } = fspec {
        let mut rh = stream(seed, &[STREAM_H]);
        let mut g = complex_gaussian(&mut rh, 1.0);
        for v in h.iter_mut() {
            *v = g;
            g += complex_gaussian(&mut rh, *delta_var);
        }
    }

    let (ax, az) = (params.p_x.sqrt(), params.p_z.sqrt());
    let r = (0..n_sym).map(|k| ax * x[k] + az * h[k] * z[k] + n[k]).collect();
    Ok(PacketRecord { params: *params, x, z, h, n, r })
}

impl PacketRecord {
    /// Largest deviation of `r` from its defining sum.
    pub fn reconstruction_error(&self) -> f64 {
        let (ax, az) = (self.params.p_x.sqrt(), self.params.p_z.sqrt());
        (0..self.r.len())
            .map(|k| (self.r[k] - (ax * self.x[k] + az * self.h[k] * self.z[k] + self.n[k])).norm())
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// Splits a packet into consecutive blocks of `block_len` symbols.
pub fn split_blocks(p: &PacketRecord, block_len: usize) -> Result<Vec<BlockView<'_>>> {
    if block_len == 0 || p.len() % block_len != 0 {
        return Err(param(format!("packet length {} is not a multiple of block length {block_len}", p.len())));
    }
    Ok((0..p.len() / block_len)
        .map(|i| {
            let s = i * block_len..(i + 1) * block_len;
            BlockView {
                index: i,
                r: &p.r[s.clone()],
                x: &p.x[s.clone()],
                z: &p.z[s.clone()],
                h: &p.h[s.clone()],
                n: &p.n[s],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p_x: f64, p_z: f64, t: usize, n: usize) -> ChannelParams {
        ChannelParams::new(p_x, p_z, 1.0, t, n).unwrap()
    }

    fn mean_power(v: &[Complex64]) -> f64 {
        v.iter().map(|c| c.norm_sqr()).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ChannelParams::new(1.0, 1.0, 1.0, 3, 8).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 0.0, 4, 8).is_err());
        assert!(ChannelParams::new(-1.0, 1.0, 1.0, 4, 8).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 1.0, 0, 8).is_err());
        let mut p = params(1.0, 1.0, 4, 8);
        p.packet_len = 10;
        let err = generate_packet(&p, &TargetSource::Gaussian, &InterferenceSpec::Gaussian, &FadingSpec::Block, 0);
        assert!(err.is_err());
    }

    #[test]
    fn derived_ratios() {
        let p = ChannelParams::new(100.0, 50.0, 2.0, 4, 8).unwrap();
        assert_eq!(p.gamma(), 50.0);
        assert_eq!(p.rho(), Some(2.0));
        assert_eq!(params(1.0, 0.0, 1, 1).rho(), None);
    }

    #[test]
    fn zero_power_sources_leave_noise() {
        let p = params(0.0, 0.0, 4, 8);
        let pk =
            generate_packet(&p, &TargetSource::Gaussian, &InterferenceSpec::Psk(4), &FadingSpec::Block, 9).unwrap();
        assert_eq!(pk.r, pk.n);
    }

    #[test]
    fn psk_interference_is_unit_modulus() {
        let p = params(1.0, 1.0, 10, 1000);
        for seed in 0..5 {
            let pk = generate_packet(&p, &TargetSource::Gaussian, &InterferenceSpec::Psk(4), &FadingSpec::Block, seed)
                .unwrap();
            assert!(pk.z.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn reconstruction_and_determinism() {
        let p = params(3.0, 7.0, 5, 50);
        let mk = |seed| {
            generate_packet(
                &p,
                &TargetSource::Qam(16),
                &InterferenceSpec::Gaussian,
                &FadingSpec::Continuous { delta_var: 0.01 },
                seed,
            )
            .unwrap()
        };
        let a = mk(11);
        assert!(a.reconstruction_error() < 1e-12);
        assert_eq!(a, mk(11));
        assert_ne!(a.r, mk(12).r);
    }

    #[test]
    fn block_fading_structure_and_variance() {
        let p = params(1.0, 1.0, 10, 100);
        let pk =
            generate_packet(&p, &TargetSource::Gaussian, &InterferenceSpec::Psk(4), &FadingSpec::Block, 3).unwrap();
        let mut distinct: Vec<Complex64> = Vec::new();
        for v in &pk.h {
            if !distinct.contains(v) {
                distinct.push(*v);
            }
        }
        assert_eq!(distinct.len(), 10);
        for b in split_blocks(&pk, 10).unwrap() {
            assert!(b.h.iter().all(|v| *v == b.h[0]));
        }

        // 10^5 blocks against the CN(0,1) oracle.
        let p = params(1.0, 1.0, 10, 1_000_000);
        let pk =
            generate_packet(&p, &TargetSource::Gaussian, &InterferenceSpec::Gaussian, &FadingSpec::Block, 5).unwrap();
        let gains: Vec<Complex64> = pk.h.iter().step_by(10).copied().collect();
        assert_eq!(gains.len(), 100_000);
        let var = mean_power(&gains);
        assert!((var - 1.0).abs() < 0.02, "block gain variance {var}");
        assert!((mean_power(&pk.x) - 1.0).abs() < 0.02);
        assert!((mean_power(&pk.z) - 1.0).abs() < 0.02);
        assert!((mean_power(&pk.n) - 1.0).abs() < 0.02);
    }

    #[test]
    fn noise_variance_follows_sigma2() {
        let p = ChannelParams::new(1.0, 1.0, 0.25, 100, 200_000).unwrap();
        let pk =
            generate_packet(&p, &TargetSource::Gaussian, &InterferenceSpec::Gaussian, &FadingSpec::Block, 8).unwrap();
        assert!((mean_power(&pk.n) / 0.25 - 1.0).abs() < 0.02);
    }

    #[test]
    fn continuous_increment_variance() {
        let dv = 0.05;
        let p = params(1.0, 1.0, 10, 200_000);
        let pk = generate_packet(
            &p,
            &TargetSource::Gaussian,
            &InterferenceSpec::Psk(4),
            &FadingSpec::Continuous { delta_var: dv },
            1,
        )
        .unwrap();
        let incr: Vec<Complex64> = pk.h.windows(2).map(|w| w[1] - w[0]).collect();
        let var = mean_power(&incr);
        assert!((var / dv - 1.0).abs() < 0.02, "increment variance {var}");
    }

    #[test]
    fn split_counts_and_identity() {
        let p = params(1.0, 1.0, 4, 8);
        let pk =
            generate_packet(&p, &TargetSource::Gaussian, &InterferenceSpec::Psk(4), &FadingSpec::Block, 0).unwrap();
        let blocks = split_blocks(&pk, 4).unwrap();
        assert_eq!(blocks.len(), 2);
        let joined: Vec<Complex64> = blocks.iter().flat_map(|b| b.r.iter().copied()).collect();
        assert_eq!(joined, pk.r);
        let whole = split_blocks(&pk, 8).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].r, &pk.r[..]);
        assert!(split_blocks(&pk, 3).is_err());
    }

    #[test]
    fn zero_tail_and_training_slot() {
        let p = params(1.0, 1.0, 5, 20);
        let z = InterferenceSpec::ZeroTail { m: 2, inner: Box::new(InterferenceSpec::Psk(4)) };
        let x = TargetSource::WithTrainingSlot { inner: Box::new(TargetSource::Gaussian), slot: 4 };
        let pk = generate_packet(&p, &x, &z, &FadingSpec::Block, 2).unwrap();
        for b in split_blocks(&pk, 5).unwrap() {
            assert!(b.z[3] == Complex64::new(0.0, 0.0) && b.z[4] == Complex64::new(0.0, 0.0));
            assert!(b.z[..3].iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
            assert_eq!(b.x[4], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn explicit_sequences() {
        let p = params(1.0, 1.0, 2, 4);
        let seq = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let pk = generate_packet(
            &p,
            &TargetSource::Gaussian,
            &InterferenceSpec::Explicit(seq.clone()),
            &FadingSpec::Block,
            0,
        )
        .unwrap();
        assert_eq!(&pk.z[..2], &seq[..]);
        assert_eq!(&pk.z[2..], &seq[..]);
        let bad = InterferenceSpec::Explicit(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(generate_packet(&p, &TargetSource::Gaussian, &bad, &FadingSpec::Block, 0).is_err());
    }
}
