//! Symbol detectors for the reduced channel `y'' = H·x + ñ`.
//!
//! `H` is `(T-1)×T`, so a block carries one unresolved direction. Exhaustive
//! ML settles it through the finite alphabet (ties go to the lowest
//! lexicographic index); zero forcing needs one known pilot symbol.

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::linalg::{condition_number, cvec, solve_least_squares, CMatrix, CVector};
use crate::modulation::Constellation;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// Two metrics within `ML_TIE_TOLERANCE·(1 + best)` are treated as equal.
pub const ML_TIE_TOLERANCE: f64 = 1e-9;

/// Largest acceptable condition number of the pilot-reduced ZF system.
pub const MAX_ZF_CONDITION: f64 = 1e8;

/// A symbol known to the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pilot {
    pub index: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlOptions {
    pub cap: u64,
    pub pilot: Option<Pilot>,
}

impl Default for MlOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_ENUMERATION_CAP, pilot: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlDecision {
    /// Constellation index per symbol.
    pub indices: Vec<usize>,
    pub symbols: Vec<Complex64>,
    /// `‖y'' − H·x̂‖² / σ²`.
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZfDecision {
    /// Length-`T` estimates with the pilot value in place.
    pub estimates: Vec<Complex64>,
    /// Condition number of the square system that was solved.
    pub condition: f64,
}

/// Exhaustive ML with the default enumeration cap and no pilot.
pub fn detect_ml(
    y_pp: &[Complex64],
    channel: &CMatrix,
    constellation: &Constellation,
    sigma2: f64,
) -> Result<MlDecision> {
    detect_ml_with(y_pp, channel, constellation, sigma2, &MlOptions::default())
}

pub fn detect_ml_with(
    y_pp: &[Complex64],
    channel: &CMatrix,
    constellation: &Constellation,
    sigma2: f64,
    opts: &MlOptions,
) -> Result<MlDecision> {
    let (rows, t) = channel.shape();
    if y_pp.len() != rows {
        return Err(Error::Dimension { expected: rows, got: y_pp.len() });
    }
    if !(sigma2 > 0.0) {
        return Err(param(format!("noise variance must be > 0, got {sigma2}")));
    }
    let m = constellation.len();
    let pinned = match opts.pilot {
        Some(p) => {
            if p.index >= t {
                return Err(param(format!("pilot index {} outside block of {t}", p.index)));
            }
            let idx = constellation
                .points()
                .iter()
                .position(|c| (c - p.value).norm() < 1e-12)
                .ok_or_else(|| param("pilot value is not a constellation point"))?;
            Some((p.index, idx))
        }
        None => None,
    };
    let free = t - usize::from(pinned.is_some());
    let needed = (m as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
    if needed > opts.cap as u128 {
        return Err(Error::EnumerationCap { needed, cap: opts.cap });
    }

    // contrib[k][i] = H[:, k]·c_i
    let contrib: Vec<Vec<CVector>> =
        (0..t).map(|k| constellation.points().iter().map(|c| channel.column(k) * *c).collect()).collect();

    let mut search =
        Search { contrib: &contrib, pinned, current: vec![0; t], best: vec![0; t], best_metric: f64::INFINITY };
    search.descend(0, cvec(y_pp));

    let symbols = search.best.iter().map(|&i| constellation.points()[i]).collect();
    Ok(MlDecision { indices: search.best, symbols, metric: search.best_metric / sigma2 })
}

struct Search<'a> {
    contrib: &'a [Vec<CVector>],
    pinned: Option<(usize, usize)>,
    current: Vec<usize>,
    best: Vec<usize>,
    best_metric: f64,
}

impl Search<'_> {
    // Depth-first over positions in order, points in index order: leaves are
    // visited lexicographically, so keeping the incumbent on near-ties keeps
    // the lowest index.
    fn descend(&mut self, pos: usize, residual: CVector) {
        if pos == self.contrib.len() {
            let d = residual.norm_squared();
            if d < self.best_metric - ML_TIE_TOLERANCE * (1.0 + self.best_metric) || !self.best_metric.is_finite() {
                self.best_metric = d;
                self.best.copy_from_slice(&self.current);
            }
            return;
        }
        let choices: Vec<usize> = match self.pinned {
            Some((p, i)) if p == pos => vec![i],
            _ => (0..self.contrib[pos].len()).collect(),
        };
        for i in choices {
            self.current[pos] = i;
            let next = &residual - &self.contrib[pos][i];
            self.descend(pos + 1, next);
        }
    }
}

/// Removes the pilot column and solves the remaining square system by
/// least squares.
pub fn detect_zf_pilot(y_pp: &[Complex64], channel: &CMatrix, pilot: Pilot) -> Result<ZfDecision> {
    let (rows, t) = channel.shape();
    if y_pp.len() != rows {
        return Err(Error::Dimension { expected: rows, got: y_pp.len() });
    }
    if pilot.index >= t {
        return Err(param(format!("pilot index {} outside block of {t}", pilot.index)));
    }
    let rhs = cvec(y_pp) - channel.column(pilot.index) * pilot.value;
    let reduced = channel.clone().remove_column(pilot.index);
    let condition = condition_number(&reduced)?;
    if !(condition <= MAX_ZF_CONDITION) {
        return Err(Error::Degenerate {
            block: None,
            detail: format!("pilot-reduced system has condition number {condition:e}"),
        });
    }
    let solution = solve_least_squares(&reduced, &rhs)?;
    let mut estimates = Vec::with_capacity(t);
    let mut it = solution.iter();
    for k in 0..t {
        estimates.push(if k == pilot.index { pilot.value } else { *it.next().expect("solution length") });
    }
    Ok(ZfDecision { estimates, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bkic::{build_q, factor_pipeline, preequalize};
    use crate::rng::{complex_gaussian, stream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(t: usize, seed: u64) -> (CMatrix, Vec<Complex64>, Constellation, Vec<usize>) {
        let qpsk = Constellation::psk(4).unwrap();
        let mut rng = stream(seed, &[]);
        let z: Vec<Complex64> = (0..t).map(|_| qpsk.sample(&mut rng)).collect();
        let idx: Vec<usize> = (0..t).map(|k| (seed as usize + 3 * k) % 4).collect();
        let x: Vec<Complex64> = idx.iter().map(|&i| qpsk.points()[i]).collect();
        let r: Vec<Complex64> = (0..t).map(|k| x[k] + c(0.4, -0.9) * z[k]).collect();
        let pe = preequalize(&r, &z, 1.0, 1.0).unwrap();
        let pipe = factor_pipeline(&build_q(t).unwrap()).unwrap();
        let h = pipe.effective_channel(&pe.scale_map).unwrap();
        let y = pipe.reduce(&pe.r_prime).unwrap();
        (h, y, qpsk, idx)
    }

    #[test]
    fn noiseless_ml_with_pilot_recovers_block() {
        for seed in 0..20 {
            let (h, y, qpsk, idx) = setup(4, seed);
            let pilot = Pilot { index: 3, value: qpsk.points()[idx[3]] };
            let d =
                detect_ml_with(&y, &h, &qpsk, 1.0, &MlOptions { pilot: Some(pilot), ..Default::default() }).unwrap();
            assert_eq!(d.indices, idx);
            assert!(d.metric < 1e-20);
        }
    }

    #[test]
    fn noiseless_ml_without_pilot_is_consistent() {
        // Without a pilot the decision may differ from the truth only along
        // the null direction of H, so it must explain y'' exactly.
        for seed in 0..20 {
            let (h, y, qpsk, _) = setup(4, seed);
            let d = detect_ml(&y, &h, &qpsk, 1.0).unwrap();
            assert!(d.metric < 1e-20);
        }
    }

    #[test]
    fn two_symbol_bpsk() {
        // Brute force over the 4 hypotheses of a T=2 BPSK block.
        let bpsk = Constellation::psk(2).unwrap();
        let pipe = factor_pipeline(&build_q(2).unwrap()).unwrap();
        let z = [c(1.0, 0.0), c(0.0, 1.0)];
        let scale: Vec<Complex64> = z.iter().map(|v| v.inv()).collect();
        let h = pipe.effective_channel(&scale).unwrap();
        let x = cvec(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let y: Vec<Complex64> = (&h * &x).iter().map(|v| v + c(1e-3, -2e-3)).collect();
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..2 {
            for b in 0..2 {
                let hyp = cvec(&[bpsk.points()[a], bpsk.points()[b]]);
                let d = (cvec(&y) - &h * hyp).norm_squared();
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        assert_eq!((best.1, best.2), (0, 0));
        let d = detect_ml(&y, &h, &bpsk, 0.01).unwrap();
        assert_eq!(d.indices, vec![0, 0]);
    }

    #[test]
    fn enumeration_cap() {
        let (h, y, qpsk, _) = setup(4, 1);
        let opts = MlOptions { cap: 255, pilot: None };
        assert!(matches!(
            detect_ml_with(&y, &h, &qpsk, 1.0, &opts),
            Err(Error::EnumerationCap { needed: 256, cap: 255 })
        ));
        let pilot = Pilot { index: 0, value: qpsk.points()[0] };
        assert!(detect_ml_with(&y, &h, &qpsk, 1.0, &MlOptions { cap: 64, pilot: Some(pilot) }).is_ok());
    }

    #[test]
    fn ml_rejects_bad_inputs() {
        let (h, y, qpsk, _) = setup(4, 2);
        assert!(detect_ml(&y[..2], &h, &qpsk, 1.0).is_err());
        assert!(detect_ml(&y, &h, &qpsk, 0.0).is_err());
        let off = Pilot { index: 0, value: c(3.0, 0.0) };
        assert!(detect_ml_with(&y, &h, &qpsk, 1.0, &MlOptions { pilot: Some(off), ..Default::default() }).is_err());
    }

    #[test]
    fn zf_pilot_noiseless_recovery() {
        let t = 8;
        let pipe = factor_pipeline(&build_q(t).unwrap()).unwrap();
        let mut rng = stream(3, &[]);
        let x: Vec<Complex64> = (0..t).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let h = pipe.effective_channel(&vec![c(1.0, 0.0); t]).unwrap();
        let y: Vec<Complex64> = (&h * cvec(&x)).iter().copied().collect();
        for p in 0..t {
            let d = detect_zf_pilot(&y, &h, Pilot { index: p, value: x[p] }).unwrap();
            for (a, b) in d.estimates.iter().zip(&x) {
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn zf_pilot_perturbation_is_bounded() {
        let t = 6;
        let pipe = factor_pipeline(&build_q(t).unwrap()).unwrap();
        let mut rng = stream(4, &[]);
        let x: Vec<Complex64> = (0..t).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let h = pipe.effective_channel(&vec![c(1.0, 0.0); t]).unwrap();
        let y: Vec<Complex64> = (&h * cvec(&x)).iter().copied().collect();
        let delta = 1e-3;
        let d = detect_zf_pilot(&y, &h, Pilot { index: 2, value: x[2] + delta }).unwrap();
        let err = d
            .estimates
            .iter()
            .zip(&x)
            .enumerate()
            .filter(|(k, _)| *k != 2)
            .map(|(_, (a, b))| (a - b).norm())
            .fold(0.0, f64::max);
        // ‖Δx‖ ≤ ‖H_r⁻¹‖·‖h_p‖·δ ≤ cond·δ since the columns of V₁ have norm ≤ 1.
        assert!(err <= d.condition * delta * (1.0 + 1e-9), "{err} vs {}", d.condition * delta);
        assert!(err > 0.0);
    }

    #[test]
    fn zf_two_symbol_closed_form() {
        // T=2: y'' = v·(x'₁ − x'₂) with v = V₁[0,0], hence x'₂ = pilot − y''/v.
        let pipe = factor_pipeline(&build_q(2).unwrap()).unwrap();
        let v = pipe.v1()[(0, 0)];
        assert!((v + pipe.v1()[(0, 1)]).norm() < 1e-15);
        assert!((v.norm() - 0.5f64.sqrt()).abs() < 1e-15);
        let h = pipe.effective_channel(&[c(1.0, 0.0); 2]).unwrap();
        let x = [c(0.3, 0.1), c(-1.2, 0.5)];
        let y = pipe.reduce(&x).unwrap();
        let d = detect_zf_pilot(&y, &h, Pilot { index: 0, value: x[0] }).unwrap();
        let closed = x[0] - y[0] / v;
        assert!((d.estimates[1] - closed).norm() < 1e-12);
        assert!((d.estimates[1] - x[1]).norm() < 1e-12);
    }

    #[test]
    fn zf_rejects_degenerate_system() {
        let mut h = CMatrix::zeros(2, 3);
        h[(0, 0)] = c(1.0, 0.0);
        h[(1, 2)] = c(1.0, 0.0);
        let y = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            detect_zf_pilot(&y, &h, Pilot { index: 2, value: c(0.0, 0.0) }),
            Err(Error::Degenerate { .. })
        ));
        assert!(detect_zf_pilot(&y, &h, Pilot { index: 3, value: c(0.0, 0.0) }).is_err());
    }
}
