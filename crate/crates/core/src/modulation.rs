//! Unit-average-power constellations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{param, Result};

/// A finite symbol alphabet normalized to unit average power.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    /// M-ary PSK. BPSK is `{+1, -1}`; for `M >= 4` the points sit at
    /// `exp(jπ(2m+1)/M)`, so QPSK is `(±1 ± j)/√2`.
    pub fn psk(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(param(format!("PSK order must be >= 2, got {order}")));
        }
        let points = if order == 2 {
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
        } else {
            (0..order).map(|m| Complex64::from_polar(1.0, PI * (2 * m + 1) as f64 / order as f64)).collect()
        };
        Ok(Self { points })
    }

    /// Square M-QAM (M = 4, 16, 64, ...), scaled to unit average power.
    pub fn qam(order: usize) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if side < 2 || side * side != order {
            return Err(param(format!("QAM order must be a square >= 4, got {order}")));
        }
        let levels: Vec<f64> = (0..side).map(|i| 2.0 * i as f64 - (side - 1) as f64).collect();
        let mut points = Vec::with_capacity(order);
        for &re in &levels {
            for &im in &levels {
                points.push(Complex64::new(re, im));
            }
        }
        let avg = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let scale = avg.sqrt().recip();
        points.iter_mut().for_each(|p| *p *= scale);
        Ok(Self { points })
    }

    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(param("constellation must not be empty"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Uniformly random symbol.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        self.points[rng.random_range(0..self.points.len())]
    }

    /// Index of the nearest point (lowest index on ties).
    pub fn slice(&self, s: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (s - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}
