use rand::Rng;
use rayon::prelude::*;

use super::config::Suite;
use super::csv::{format_number, Table};
use super::monte_carlo::{mc_traditional_sinr, McSetup};
use crate::baselines::{assert_equivalence, Q1System};
use crate::bkic::{build_q, factor_pipeline};
use crate::channel::{generate_packet, ChannelParams, FadingSpec, InterferenceSpec, TargetSource};
use crate::error::Result;
use crate::linalg::{cvec, log2_det_hpd, relative_frobenius, CMatrix};
use crate::modulation::Constellation;
use crate::rates::{bound_blockwise, rate_upper_bound};
use crate::rng::{complex_gaussian, derive_seed, stream};
use crate::Complex64;

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub metric: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `metric < threshold`.
    fn below(name: impl Into<String>, metric: f64, threshold: f64) -> Self {
        Self { name: name.into(), metric, threshold, pass: metric < threshold }
    }

    /// Passes when `metric > threshold`.
    fn above(name: impl Into<String>, metric: f64, threshold: f64) -> Self {
        Self { name: name.into(), metric, threshold, pass: metric > threshold }
    }
}

/// Runs `suites` in order. `trials` sizes the randomized suites.
pub fn run_validation(suites: &[Suite], trials: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, suite) in suites.iter().enumerate() {
        let s = derive_seed(seed, &[0x7a11, i as u64]);
        out.extend(match suite {
            Suite::HInvariance => h_invariance(s)?,
            Suite::ZfEquivalence => zf_equivalence(trials, s)?,
            Suite::SinrMatch => sinr_match(trials, s)?,
            Suite::Jensen => jensen(s)?,
            Suite::MimoIdentity => mimo_identity()?,
            Suite::ContinuousFadingCov => continuous_fading_cov(trials, s)?,
        });
    }
    Ok(out)
}

pub fn report_table(checks: &[Check], comments: Vec<String>) -> Table {
    Table {
        comments,
        columns: ["check", "metric", "threshold", "pass"].map(String::from).to_vec(),
        rows: checks
            .iter()
            .map(|c| vec![c.name.clone(), format_number(c.metric), format_number(c.threshold), c.pass.to_string()])
            .collect(),
    }
}

/// Fixed `x' + n'` at `T = 100` under 100 gain draws: `y''` must not move.
pub fn h_invariance(seed: u64) -> Result<Vec<Check>> {
    let t = 100;
    let pipe = factor_pipeline(&build_q(t)?)?;
    let mut rng = stream(seed, &[]);
    let base: Vec<Complex64> = (0..t).map(|_| complex_gaussian(&mut rng, 2.0)).collect();
    let reference = pipe.reduce(&base)?;
    let mut spread: f64 = 0.0;
    for _ in 0..100 {
        let h = complex_gaussian(&mut rng, 1.0);
        let r: Vec<_> = base.iter().map(|v| v + h).collect();
        let y = pipe.reduce(&r)?;
        spread = y.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(spread, f64::max);
    }
    Ok(vec![Check::below("h_invariance_max_spread", spread, 1e-10)])
}

/// Least-squares cancellation against BKIC-ZF on `trials` random CPM blocks
/// per block length, and the closed-form `Q₁⁻¹`.
pub fn zf_equivalence(trials: usize, seed: u64) -> Result<Vec<Check>> {
    let qpsk = Constellation::psk(4)?;
    let mut out = Vec::new();
    for t in [2usize, 5, 100] {
        let worst = (0..trials)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream(seed, &[t as u64, b as u64]);
                let h = complex_gaussian(&mut rng, 1.0);
                let z: Vec<_> = (0..t).map(|_| qpsk.sample(&mut rng)).collect();
                let r: Vec<_> = z
                    .iter()
                    .map(|zk| 10.0 * complex_gaussian(&mut rng, 1.0) + 10.0 * h * zk + complex_gaussian(&mut rng, 1.0))
                    .collect();
                // Deviation in units of the per-block tolerance scale.
                assert_equivalence(&r, &z, 100.0, 100.0, 1.0).map(|e| e.max_deviation / (e.tolerance / 1e-10))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Check::below(format!("zf_equivalence_T{t}"), worst, 1e-10));
        let sys = Q1System::new(t)?;
        let err = relative_frobenius(&(&sys.q1 * &sys.q1_inv), &CMatrix::identity(t, t));
        out.push(Check::below(format!("q1_inverse_T{t}"), err, 1e-10));
    }
    Ok(out)
}

/// Empirical SINR of least-squares cancellation at `T = 100`, 20 dB, QPSK
/// interference, against `99·100/(100 + 100) = 49.5`.
pub fn sinr_match(trials: usize, seed: u64) -> Result<Vec<Check>> {
    let setup = McSetup {
        params: ChannelParams::new(100.0, 100.0, 1.0, 100, 100)?,
        zspec: InterferenceSpec::Psk(4),
        fading: FadingSpec::Block,
        trials,
        seed,
        point: 0,
    };
    let est = mc_traditional_sinr(&setup)?;
    let diff = (est.mean - crate::linear_to_db(49.5)).abs();
    Ok(vec![Check::below("sinr_match_db", diff, 0.2)])
}

/// 1000 random block-power splits: never below the uniform bound, and
/// strictly above it unless uniform.
pub fn jensen(seed: u64) -> Result<Vec<Check>> {
    let (p_x, p_z, sigma2, t) = (100.0, 100.0, 1.0, 10);
    let base = rate_upper_bound(p_x, p_z, sigma2, t)?.bits;
    let mut rng = stream(seed, &[]);
    let mut min_excess = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.random_range(3..=32);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        let powers: Vec<f64> = w.iter().map(|v| v / total * (n * t) as f64).collect();
        min_excess = min_excess.min(bound_blockwise(p_x, p_z, sigma2, t, &powers)? - base);
    }
    let uniform = (bound_blockwise(p_x, p_z, sigma2, t, &[t as f64; 16])? - base).abs();
    Ok(vec![
        Check::above("jensen_min_excess_nonuniform", min_excess, 1e-9),
        Check::below("jensen_uniform_equality", uniform, 1e-9),
    ])
}

/// `log₂det(I + γ·V₁V₁*) = (T−1)·log₂(1+γ)`, worst relative error on the grid.
pub fn mimo_identity() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for t in [2usize, 5, 10, 100] {
        let pipe = factor_pipeline(&build_q(t)?)?;
        let gram = pipe.v1() * pipe.v1().adjoint();
        for gamma in [0.1, 1.0, 10.0, 100.0] {
            let m = CMatrix::identity(t - 1, t - 1) + gram.map(|v| v * gamma);
            let expected = (t - 1) as f64 * (1.0f64 + gamma).log2();
            worst = worst.max(((log2_det_hpd(&m)? - expected) / expected).abs());
        }
    }
    Ok(vec![Check::below("mimo_identity_rel_err", worst, 1e-9)])
}

/// Empirical covariance of the drift term `S₁⁻¹·U*·Q·h` under a random-walk
/// gain against `σ_Δ²·S₁⁻²`, at `T = 10`. Entries are normalized by
/// `√(Cᵢᵢ·Cⱼⱼ)`; the threshold is `max(0.1, 8/√trials)`.
pub fn continuous_fading_cov(trials: usize, seed: u64) -> Result<Vec<Check>> {
    let (t, delta_var) = (10usize, 1e-2);
    let pipe = factor_pipeline(&build_q(t)?)?;
    let params = ChannelParams::new(1.0, 1.0, 1.0, t, t)?;
    let fading = FadingSpec::Continuous { delta_var };
    let m = t - 1;
    let whiten = {
        let mut w = pipe.u().adjoint();
        for (i, s) in pipe.s1().iter().enumerate() {
            w.row_mut(i).iter_mut().for_each(|v| *v /= *s);
        }
        w
    };
    let acc = (0..trials)
        .into_par_iter()
        .map(|i| {
            let pkt = generate_packet(
                &params,
                &TargetSource::Gaussian,
                &InterferenceSpec::Psk(4),
                &fading,
                derive_seed(seed, &[i as u64]),
            )?;
            let d = &whiten * (pipe.q() * cvec(&pkt.h));
            Ok(&d * d.adjoint())
        })
        .collect::<Result<Vec<CMatrix>>>()?
        .into_iter()
        .fold(CMatrix::zeros(m, m), |a, b| a + b)
        / Complex64::new(trials as f64, 0.0);
    let predicted = pipe.reduce_continuous(&vec![Complex64::new(0.0, 0.0); t], delta_var)?.drift_covariance;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { predicted[i] } else { 0.0 };
            worst = worst.max((acc[(i, j)] - target).norm() / (predicted[i] * predicted[j]).sqrt());
        }
    }
    let threshold = (8.0 / (trials as f64).sqrt()).max(0.1);
    Ok(vec![Check::below("continuous_fading_cov_max_norm_err", worst, threshold)])
}
