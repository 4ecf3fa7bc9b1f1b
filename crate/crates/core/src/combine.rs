//! Combining the dependent per-observation p-values: their sum, and a
//! bootstrap lower alpha point for that sum.
//!
//! Two resampling schemes are available. [`ResampleScheme::Joint`] pools
//! both samples, draws a whole new two-sample dataset and recomputes every
//! p-value on it, so the bootstrap sums keep the strong dependence between
//! the p-values of one dataset. [`ResampleScheme::PerBlock`] resamples each
//! observation's distance rows on its own; its sums are far less variable
//! than the observed sum under the null, and the resulting test rejects far
//! too often (about 0.4 at nominal 0.05 for two normal samples of 50).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::RngStream;
use crate::error::{invalid, Error, Result};
use crate::stat_tests::{DistanceBlock, TwoSampleData};

pub const MIN_BOOTSTRAP: usize = 100;
pub const DEFAULT_BOOTSTRAP: usize = 500;

pub fn sum_pvalues(p: &[f64]) -> Result<f64> {
    if let Some(pos) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return invalid(format!("p-value {} at position {pos} is outside [0, 1]", p[pos]));
    }
    Ok(p.iter().sum())
}

/// Minimum p-value, reported as a diagnostic only.
pub fn tippett_min_pvalue(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return invalid("cannot take the minimum of no p-values");
    }
    Ok(p.iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScheme {
    #[default]
    Joint,
    PerBlock,
}

impl ResampleScheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "joint" => Some(ResampleScheme::Joint),
            "per_block" => Some(ResampleScheme::PerBlock),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ResampleScheme::Joint => "joint",
            ResampleScheme::PerBlock => "per_block",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub alpha: f64,
    pub stream: RngStream,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, alpha: f64, stream: RngStream) -> Result<Self> {
        let cfg = Self { replicates, alpha, stream };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_BOOTSTRAP {
            return Err(Error::Config(format!(
                "bootstrap needs at least {MIN_BOOTSTRAP} replicates, got {}",
                self.replicates
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    /// One summed p-value per replicate, in replicate order.
    pub sums: Vec<f64>,
    pub alpha_point: f64,
    /// Resampled blocks whose rows were all identical (p-value set to 1).
    pub degenerate_resamples: usize,
}

/// Rank of the lower alpha order statistic among `b` values: `ceil(alpha * b)`.
pub fn alpha_rank(alpha: f64, b: usize) -> usize {
    // the epsilon absorbs representation error such as 0.05 * 500 = 25.000000000000004
    let r = (alpha * b as f64 - 1e-9).ceil() as usize;
    r.clamp(1, b)
}

/// The `ceil(alpha * B)`-th smallest value, without interpolation.
pub fn lower_alpha_point(sums: &[f64], alpha: f64) -> Result<f64> {
    if sums.is_empty() {
        return invalid("no bootstrap sums");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let mut sorted = sums.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[alpha_rank(alpha, sorted.len()) - 1])
}

/// Bootstrap distribution of `sum_i p_i`.
///
/// For every replicate and every block, `N - 1` rows are drawn with
/// replacement from all rows of the block (both groups pooled, components
/// kept together), the first `n_first` form group one and the rest group
/// two, and `pvalue_fn` scores the resampled block. Replicate `b` uses the
/// sub-stream `cfg.stream.child(b)`, so results do not depend on scheduling.
pub fn bootstrap_alpha_point<F>(blocks: &[DistanceBlock], cfg: &BootstrapConfig, pvalue_fn: F) -> Result<BootstrapDistribution>
where
    F: Fn(&DistanceBlock, &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if blocks.is_empty() {
        return invalid("bootstrap needs at least one distance block");
    }
    let per_rep: Vec<(f64, usize)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = cfg.stream.child(b as u64).rng();
            let mut sum = 0.0;
            let mut degenerate = 0;
            let mut idx = Vec::new();
            for block in blocks {
                let rows = block.rows();
                idx.clear();
                idx.extend((0..rows).map(|_| rng.random_range(0..rows)));
                let resampled = block.resample(&idx);
                let p = if resampled.is_degenerate() {
                    degenerate += 1;
                    1.0
                } else {
                    pvalue_fn(&resampled, &mut rng)?
                };
                sum += p;
            }
            Ok((sum, degenerate))
        })
        .collect::<Result<_>>()?;
    let sums: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    let degenerate_resamples = per_rep.iter().map(|r| r.1).sum();
    let alpha_point = lower_alpha_point(&sums, cfg.alpha)?;
    Ok(BootstrapDistribution { sums, alpha_point, degenerate_resamples })
}

/// Bootstrap distribution of `sum_i p_i` from whole resampled datasets.
///
/// Every replicate draws `n1 + n2` rows with replacement from the pooled
/// sample, assigns the first `n1` to the first sample and the rest to the
/// second, and scores the new dataset with `sum_fn`, which returns the
/// summed p-value and the number of degenerate blocks it met.
pub fn joint_bootstrap_alpha_point<F>(data: &TwoSampleData, cfg: &BootstrapConfig, sum_fn: F) -> Result<BootstrapDistribution>
where
    F: Fn(&TwoSampleData, &mut ChaCha8Rng) -> Result<(f64, usize)> + Sync,
{
    cfg.validate()?;
    let pooled = data.pooled_matrix();
    let (n1, n2, p) = (data.n1(), data.n2(), data.p());
    let n = n1 + n2;
    let per_rep: Vec<(f64, usize)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = cfg.stream.child(b as u64).rng();
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let x = nalgebra::DMatrix::from_fn(n1, p, |i, j| pooled[(idx[i], j)]);
            let y = nalgebra::DMatrix::from_fn(n2, p, |i, j| pooled[(idx[n1 + i], j)]);
            sum_fn(&TwoSampleData::new(x, y)?, &mut rng)
        })
        .collect::<Result<_>>()?;
    let sums: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    let degenerate_resamples = per_rep.iter().map(|r| r.1).sum();
    let alpha_point = lower_alpha_point(&sums, cfg.alpha)?;
    Ok(BootstrapDistribution { sums, alpha_point, degenerate_resamples })
}
