//! Blocks whose interference is silent on some symbols.
//!
//! Silent symbols are interference-free and pass through untouched. Each
//! maximal run of non-silent symbols is cancelled on its own with the
//! generalized matrix built from that run's `z`.

use std::ops::Range;

use num_complex::Complex64;

use super::{build_q_generalized, factor_pipeline, BkicPipeline};
use crate::error::{Error, Result};
use crate::ZERO_POWER_THRESHOLD;

#[derive(Debug, Clone)]
pub enum Segment {
    /// Interference-free symbol, a plain point-to-point observation.
    Clear { index: usize, r: Complex64 },
    /// A run of two or more interfered symbols reduced to `len − 1` outputs.
    Run { range: Range<usize>, y_pp: Vec<Complex64>, pipeline: Box<BkicPipeline> },
    /// A lone interfered symbol: nothing can be recovered without the gain.
    Isolated { index: usize },
}

impl Segment {
    pub fn symbol_count(&self) -> usize {
        match self {
            Segment::Clear { .. } | Segment::Isolated { .. } => 1,
            Segment::Run { range, .. } => range.len(),
        }
    }

    /// Interference-free observations contributed by this segment.
    pub fn output_dims(&self) -> usize {
        match self {
            Segment::Clear { .. } => 1,
            Segment::Isolated { .. } => 0,
            Segment::Run { range, .. } => range.len() - 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroSplit {
    pub segments: Vec<Segment>,
}

impl ZeroSplit {
    pub fn symbol_count(&self) -> usize {
        self.segments.iter().map(Segment::symbol_count).sum()
    }

    pub fn output_dims(&self) -> usize {
        self.segments.iter().map(Segment::output_dims).sum()
    }

    pub fn isolated(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments.iter().filter_map(|s| match s {
            Segment::Isolated { index } => Some(*index),
            _ => None,
        })
    }
}

pub fn cancel_with_zero_symbols(r_block: &[Complex64], z_block: &[Complex64]) -> Result<ZeroSplit> {
    if r_block.len() != z_block.len() {
        return Err(Error::Dimension { expected: r_block.len(), got: z_block.len() });
    }
    let silent: Vec<bool> = z_block.iter().map(|z| z.norm() <= ZERO_POWER_THRESHOLD).collect();
    let mut segments = Vec::new();
    let mut k = 0;
    while k < z_block.len() {
        if silent[k] {
            segments.push(Segment::Clear { index: k, r: r_block[k] });
            k += 1;
            continue;
        }
        let start = k;
        while k < z_block.len() && !silent[k] {
            k += 1;
        }
        if k - start == 1 {
            segments.push(Segment::Isolated { index: start });
        } else {
            let q = build_q_generalized(&z_block[start..k])?;
            let pipeline = factor_pipeline(&q)?;
            let y_pp = pipeline.reduce(&r_block[start..k])?;
            segments.push(Segment::Run { range: start..k, y_pp, pipeline: Box::new(pipeline) });
        }
    }
    Ok(ZeroSplit { segments })
}
