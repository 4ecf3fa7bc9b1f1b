//! The two-sample location tests: the distance-based max-Wilcoxon test,
//! the pooled componentwise max statistic, the norm-distance rank-sum tests
//! and Hotelling's T-squared.

mod data;
mod hotelling;
mod jk;
mod observation;
mod pooled;
mod proposed;
mod report;
mod tail;

pub use data::{distance_block, DistanceBlock, TwoSampleData};
pub use hotelling::{hotelling_statistic, hotelling_t2, HotellingMode};
pub use jk::{jk_pvalue, jk_pvalues, jk_randomized_test, jk_test, jk_test_with, norm_distance_block, Norm};
pub use observation::{distance_ranks, observation_statistic, per_observation_statistic, ObservationStatistic, PerObservationResult};
pub use pooled::{pooled_max_statistic, PooledMaxStatistic};
pub use proposed::{
    averaged_tail_critical_value, distance_blocks, ttilde_test, ttilde_test_with, observation_statistics, randomized_ttilde_test, AverageTail,
};
pub use report::{Decision, Diagnostics, ObservationDiagnostic, TestKind, TestReport};
pub use tail::{max_gaussian_tail, GaussianDraws, DEFAULT_MC, MIN_MC};
