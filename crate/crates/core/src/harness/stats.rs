/// Monte Carlo estimate with its standard error and sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Ratio of means `Σ num / Σ den` over independent trials, with a
/// delta-method standard error. `NaN` stderr below two trials.
pub fn ratio_of_means(pairs: &[(f64, f64)]) -> McEstimate {
    let n = pairs.len();
    let nf = n as f64;
    let mean_num = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_den = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let ratio = mean_num / mean_den;
    if n < 2 {
        return McEstimate { mean: ratio, stderr: f64::NAN, trials: n };
    }
    // Var of the linearized residual num − R·den.
    let var = pairs.iter().map(|(a, b)| (a - ratio * b).powi(2)).sum::<f64>() / (nf - 1.0);
    McEstimate { mean: ratio, stderr: (var / nf).sqrt() / mean_den, trials: n }
}

/// Sample mean with its standard error. `NaN` stderr below two trials.
pub fn mean_estimate(values: &[f64]) -> McEstimate {
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    if n < 2 {
        return McEstimate { mean, stderr: f64::NAN, trials: n };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    McEstimate { mean, stderr: (var / nf).sqrt(), trials: n }
}

/// Re-expresses a linear-ratio estimate in dB, propagating the stderr to
/// first order.
pub fn to_db(est: McEstimate) -> McEstimate {
    McEstimate {
        mean: crate::linear_to_db(est.mean),
        stderr: 10.0 / std::f64::consts::LN_10 * est.stderr / est.mean,
        trials: est.trials,
    }
}
