use rayon::prelude::*;

use super::stats::{mean_estimate, ratio_of_means, to_db, McEstimate};
use crate::baselines::{ls_estimate, orthogonal_training_kic, report_rate};
use crate::bkic::{build_q, factor_pipeline, preequalize, BkicPipeline};
use crate::channel::{generate_packet, split_blocks, ChannelParams, FadingSpec, InterferenceSpec, TargetSource};
use crate::error::{param, Result};
use crate::linalg::cvec;
use crate::rng::derive_seed;

/// One Monte Carlo point. Trial `i` simulates one packet seeded by
/// `(seed, point, i)`, so results do not depend on thread scheduling.
#[derive(Debug, Clone)]
pub struct McSetup {
    pub params: ChannelParams,
    pub zspec: InterferenceSpec,
    pub fading: FadingSpec,
    pub trials: usize,
    pub seed: u64,
    pub point: u64,
}

impl McSetup {
    fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, &[self.point, trial as u64])
    }

    fn check(&self) -> Result<()> {
        self.params.validate()?;
        if self.trials == 0 {
            return Err(param("trials must be >= 1"));
        }
        Ok(())
    }

    fn packet(&self, xspec: &TargetSource, seed: u64) -> Result<crate::PacketRecord> {
        generate_packet(&self.params, xspec, &self.zspec, &self.fading, seed)
    }

    /// Runs `trial` in parallel and collects the per-trial pairs in order.
    fn collect<F>(&self, trial: F) -> Result<Vec<(f64, f64)>>
    where
        F: Fn(u64) -> Result<(f64, f64)> + Sync,
    {
        self.check()?;
        (0..self.trials).into_par_iter().map(|i| trial(self.trial_seed(i))).collect()
    }
}

/// Empirical SINR of least-squares cancellation in dB.
///
/// At position `k` the output carries `(A₋ₖ/A)·√Px·x[k]`, with `A = Σ|z|²`
/// over the block and `A₋ₖ = A − |z[k]|²`; everything else counts as
/// interference plus noise. Per trial the signal and remainder energies are
/// summed over the packet; the estimate is their ratio of means.
pub fn mc_traditional_sinr(setup: &McSetup) -> Result<McEstimate> {
    let p = setup.params;
    let ax = p.p_x.sqrt();
    let pairs = setup.collect(|seed| {
        let pkt = setup.packet(&TargetSource::Gaussian, seed)?;
        let (mut sig, mut err) = (0.0, 0.0);
        for b in split_blocks(&pkt, p.block_len)? {
            let Some(ls) = ls_estimate(b.r, b.z, p.p_x, p.p_z, p.sigma2)? else { continue };
            let total: f64 = b.z.iter().map(|v| v.norm_sqr()).sum();
            for k in 0..b.r.len() {
                let keep = (total - b.z[k].norm_sqr()) / total;
                let s = ax * keep * b.x[k];
                sig += s.norm_sqr();
                err += (ls.post_cancellation[k] - s).norm_sqr();
            }
        }
        Ok((sig, err))
    })?;
    Ok(to_db(ratio_of_means(&pairs)))
}

/// Empirical SNR in dB of the reduced output `y''` against its signal part
/// `V₁·x'` on the pre-equalized route. Equals `Px/σ²` for constant-modulus
/// interference under block fading; gain drift under continuous fading shows
/// up as extra residual.
pub fn mc_bkic_residual(setup: &McSetup) -> Result<McEstimate> {
    let p = setup.params;
    let pipe = factor_pipeline(&build_q(p.block_len)?)?;
    let pairs = setup.collect(|seed| {
        let pkt = setup.packet(&TargetSource::Gaussian, seed)?;
        let (mut sig, mut err) = (0.0, 0.0);
        for b in split_blocks(&pkt, p.block_len)? {
            let (s, e) = bkic_block_energies(&pipe, b.r, b.z, b.x, &p)?;
            sig += s;
            err += e;
        }
        Ok((sig, err))
    })?;
    Ok(to_db(ratio_of_means(&pairs)))
}

/// Average over packets of the per-realization orthogonal-training rate
/// `(1/T)·Σ_{k≠T} log₂(1 + Px/(σ² + δ_k))`, in bits, with the last symbol of
/// every block silenced and used as the pilot.
pub fn mc_orthogonal_rate(setup: &McSetup) -> Result<McEstimate> {
    setup.check()?;
    let p = setup.params;
    let pilot = p.block_len - 1;
    let xspec = TargetSource::WithTrainingSlot { inner: Box::new(TargetSource::Gaussian), slot: pilot };
    let values = (0..setup.trials)
        .into_par_iter()
        .map(|i| {
            let pkt = setup.packet(&xspec, setup.trial_seed(i))?;
            let blocks = split_blocks(&pkt, p.block_len)?;
            let mut total = 0.0;
            for b in &blocks {
                let rep = orthogonal_training_kic(b.r, b.z, pilot, p.p_x, p.p_z, p.sigma2)?;
                total += report_rate(&rep, p.block_len);
            }
            Ok(total / blocks.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_estimate(&values))
}

fn bkic_block_energies(
    pipe: &BkicPipeline,
    r: &[num_complex::Complex64],
    z: &[num_complex::Complex64],
    x: &[num_complex::Complex64],
    p: &ChannelParams,
) -> Result<(f64, f64)> {
    let pre = preequalize(r, z, p.p_x, p.p_z)?;
    let y_pp = cvec(&pipe.reduce(&pre.r_prime)?);
    let x_prime: Vec<_> = x.iter().zip(&pre.scale_map).map(|(a, s)| a * s).collect();
    let signal = pipe.v1() * cvec(&x_prime);
    Ok((signal.norm_squared(), (y_pp - &signal).norm_squared()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(trials: usize, fading: FadingSpec) -> McSetup {
        McSetup {
            params: ChannelParams::new(100.0, 100.0, 1.0, 20, 40).unwrap(),
            zspec: InterferenceSpec::Psk(4),
            fading,
            trials,
            seed: 3,
            point: 0,
        }
    }

    #[test]
    fn traditional_sinr_matches_formula() {
        // 19·100/(100 + 20) for CPM at T = 20.
        let expected = crate::linear_to_db(1900.0 / 120.0);
        let e = mc_traditional_sinr(&setup(4000, FadingSpec::Block)).unwrap();
        assert!((e.mean - expected).abs() < 4.0 * e.stderr + 0.02, "{e:?} vs {expected}");
    }

    #[test]
    fn bkic_residual_is_target_snr() {
        let e = mc_bkic_residual(&setup(2000, FadingSpec::Block)).unwrap();
        assert!((e.mean - 20.0).abs() < 4.0 * e.stderr + 0.02, "{e:?}");
    }

    #[test]
    fn drift_lowers_bkic_snr() {
        let calm = mc_bkic_residual(&setup(500, FadingSpec::Block)).unwrap();
        let drift = mc_bkic_residual(&setup(500, FadingSpec::Continuous { delta_var: 0.05 })).unwrap();
        assert!(drift.mean < calm.mean - 1.0);
    }

    #[test]
    fn stderr_halves_when_trials_quadruple() {
        let a = mc_traditional_sinr(&setup(1000, FadingSpec::Block)).unwrap();
        let b = mc_traditional_sinr(&setup(4000, FadingSpec::Block)).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn orthogonal_rate_for_constant_modulus_is_closed_form() {
        let e = mc_orthogonal_rate(&setup(50, FadingSpec::Block)).unwrap();
        assert!((e.mean - crate::rates::rate_orthogonal(100.0, 20)).abs() < 1e-12);
        assert!(e.stderr < 1e-12);
    }

    #[test]
    fn orthogonal_rate_varies_with_gaussian_interference() {
        let mut s = setup(400, FadingSpec::Block);
        s.zspec = InterferenceSpec::Gaussian;
        let e = mc_orthogonal_rate(&s).unwrap();
        assert!(e.stderr > 0.0);
        assert!(e.mean < crate::rates::rate_bkic(100.0, 20));
    }

    #[test]
    fn deterministic_across_runs() {
        let s = setup(64, FadingSpec::Block);
        assert_eq!(mc_traditional_sinr(&s).unwrap(), mc_traditional_sinr(&s).unwrap());
    }
}
