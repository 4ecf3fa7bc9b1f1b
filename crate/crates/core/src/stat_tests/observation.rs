//! Per-observation rank statistics on componentwise interpoint distances.

use crate::distributions::CorrelationFactor;
use crate::error::{invalid, Result};
use crate::ranks::{rank_into, spearman_raw, standardize, wilcoxon_moments, CorrelationMatrix, RankMatrix};
use crate::stat_tests::data::DistanceBlock;
use crate::stat_tests::tail::GaussianDraws;
use crate::distributions::RngStream;

/// Rank statistics of one distance block before any tail probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationStatistic {
    /// Rank-sum of the second-group distances, per component.
    pub rank_sums: Vec<f64>,
    /// Standardized rank-sums.
    pub standardized: Vec<f64>,
    /// Grade correlation of the distance ranks.
    pub corr: CorrelationMatrix,
    /// Maximum standardized rank-sum.
    pub statistic: f64,
}

/// Ranks each distance column over all `N - 1` rows, sums the ranks of the
/// second group and standardizes with moments for group sizes
/// `(n_first, n_second)`.
pub fn observation_statistic(block: &DistanceBlock) -> Result<ObservationStatistic> {
    let (rows, p) = (block.rows(), block.p());
    if block.n_first() == 0 || block.n_second() == 0 {
        return invalid("both distance groups must be non-empty");
    }
    if rows < 3 {
        return invalid(format!("need at least 3 distances per component, got {rows}"));
    }
    let moments = wilcoxon_moments(block.n_first(), block.n_second())?;
    let mut ranks = vec![0.0; rows * p];
    let mut order = Vec::with_capacity(rows);
    let dist = block.distances();
    for (j, out) in ranks.chunks_mut(rows).enumerate() {
        rank_into(dist.column(j).as_slice(), &mut order, out);
    }
    let mut rank_sums = Vec::with_capacity(p);
    let mut standardized = Vec::with_capacity(p);
    for col in ranks.chunks(rows) {
        let w: f64 = col[block.n_first()..].iter().sum();
        rank_sums.push(w);
        standardized.push(standardize(w, &moments)?);
    }
    let statistic = standardized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let corr = CorrelationMatrix::new(spearman_raw(&ranks, rows, p))?;
    Ok(ObservationStatistic { rank_sums, standardized, corr, statistic })
}

/// Distance ranks of a block as a [`RankMatrix`].
pub fn distance_ranks(block: &DistanceBlock) -> Result<RankMatrix> {
    RankMatrix::from_data(block.distances())
}

/// Observation statistic together with its conditional tail p-value.
#[derive(Debug, Clone, PartialEq)]
pub struct PerObservationResult {
    pub index: usize,
    pub stats: ObservationStatistic,
    pub p_value: f64,
}

impl PerObservationResult {
    pub fn statistic(&self) -> f64 {
        self.stats.statistic
    }

    pub fn corr(&self) -> &CorrelationMatrix {
        &self.stats.corr
    }
}

/// Computes the statistic and its tail probability under `N_p(0, r(i))`
/// from `n_mc` fresh draws.
pub fn per_observation_statistic(block: &DistanceBlock, n_mc: usize, stream: RngStream) -> Result<PerObservationResult> {
    let draws = GaussianDraws::new(block.p(), n_mc.max(1), &mut stream.rng());
    per_observation_with(block, 0, &draws)
}

pub(crate) fn per_observation_with(block: &DistanceBlock, index: usize, draws: &GaussianDraws) -> Result<PerObservationResult> {
    let stats = observation_statistic(block)?;
    let factor = CorrelationFactor::new(&stats.corr)?;
    let p_value = draws.tail(&factor, stats.statistic);
    Ok(PerObservationResult { index, stats, p_value })
}
