use crate::error::Result;
use crate::ranks::{spearman_matrix, standardize, wilcoxon_moments, CorrelationMatrix, RankMatrix};
use crate::stat_tests::data::TwoSampleData;

/// Componentwise pooled-sample rank-sums and their maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledMaxStatistic {
    pub rank_sums: Vec<f64>,
    pub standardized: Vec<f64>,
    /// `max_j` of the standardized rank-sums.
    pub statistic: f64,
    /// Grade correlation matrix of the pooled ranks.
    pub corr: CorrelationMatrix,
}

pub fn pooled_max_statistic(data: &TwoSampleData) -> Result<PooledMaxStatistic> {
    let ranks = RankMatrix::from_data(&data.pooled_matrix())?;
    let moments = wilcoxon_moments(data.n1(), data.n2())?;
    let n1 = data.n1();
    let mut rank_sums = Vec::with_capacity(data.p());
    let mut standardized = Vec::with_capacity(data.p());
    for j in 0..data.p() {
        let w: f64 = ranks.column(j)[n1..].iter().sum();
        rank_sums.push(w);
        standardized.push(standardize(w, &moments)?);
    }
    let statistic = standardized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let corr = spearman_matrix(&ranks)?;
    Ok(PooledMaxStatistic { rank_sums, standardized, statistic, corr })
}
