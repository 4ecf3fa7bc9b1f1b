//! The distance-based max-Wilcoxon test: the summed-p-value rule with a
//! bootstrap alpha point, and the randomized single-observation rule with
//! its averaged-tail critical value.

use rand::Rng;
use rayon::prelude::*;

use crate::combine::{bootstrap_alpha_point, joint_bootstrap_alpha_point, sum_pvalues, BootstrapConfig, ResampleScheme};
use crate::distributions::{CorrelationFactor, RngStream};
use crate::error::{invalid, Error, Result};
use crate::ranks::CorrelationMatrix;
use crate::stat_tests::data::{distance_block, DistanceBlock, TwoSampleData};
use crate::stat_tests::observation::{observation_statistic, per_observation_with, ObservationStatistic, PerObservationResult};
use crate::stat_tests::report::{Decision, Diagnostics, ObservationDiagnostic, TestKind, TestReport};
use crate::stat_tests::tail::{upper_fraction, GaussianDraws, MIN_MC};

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

pub(crate) fn check_mc(n_mc: usize) -> Result<()> {
    if n_mc < MIN_MC {
        return Err(Error::Config(format!("n_mc must be at least {MIN_MC}, got {n_mc}")));
    }
    Ok(())
}

pub fn distance_blocks(data: &TwoSampleData) -> Result<Vec<DistanceBlock>> {
    (0..data.n1()).map(|i| distance_block(data, i)).collect()
}

/// Observation statistics for every first-sample observation.
pub fn observation_statistics(data: &TwoSampleData) -> Result<Vec<ObservationStatistic>> {
    if data.n1() < 2 {
        return invalid("the first sample needs at least 2 observations");
    }
    (0..data.n1())
        .into_par_iter()
        .map(|i| observation_statistic(&distance_block(data, i)?))
        .collect()
}

/// Summed tail p-values compared with the bootstrap lower alpha point;
/// rejects when the sum falls below the point. Uses the joint resampling
/// scheme.
pub fn ttilde_test(data: &TwoSampleData, alpha: f64, b: usize, n_mc: usize, stream: RngStream) -> Result<TestReport> {
    ttilde_test_with(data, alpha, b, n_mc, ResampleScheme::default(), stream)
}

fn block_tail(block: &DistanceBlock, draws: &GaussianDraws) -> Result<f64> {
    let stats = observation_statistic(block)?;
    let factor = CorrelationFactor::new(&stats.corr)?;
    Ok(draws.tail(&factor, stats.statistic))
}

pub fn ttilde_test_with(
    data: &TwoSampleData,
    alpha: f64,
    b: usize,
    n_mc: usize,
    scheme: ResampleScheme,
    stream: RngStream,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    check_mc(n_mc)?;
    let cfg = BootstrapConfig::new(b, alpha, stream.child(1))?;
    let draws = GaussianDraws::new(data.p(), n_mc, &mut stream.child(0).rng());
    let blocks = distance_blocks(data)?;
    let results: Vec<PerObservationResult> = blocks
        .par_iter()
        .enumerate()
        .map(|(i, block)| per_observation_with(block, i, &draws))
        .collect::<Result<_>>()?;
    let p: Vec<f64> = results.iter().map(|r| r.p_value).collect();
    let total = sum_pvalues(&p)?;

    let boot = match scheme {
        ResampleScheme::Joint => joint_bootstrap_alpha_point(data, &cfg, |resampled, _| {
            let mut sum = 0.0;
            let mut degenerate = 0;
            for i in 0..resampled.n1() {
                let block = distance_block(resampled, i)?;
                if block.is_degenerate() {
                    degenerate += 1;
                    sum += 1.0;
                } else {
                    sum += block_tail(&block, &draws)?;
                }
            }
            Ok((sum, degenerate))
        })?,
        ResampleScheme::PerBlock => bootstrap_alpha_point(&blocks, &cfg, |block, _| block_tail(block, &draws))?,
    };

    let per_observation = results
        .iter()
        .map(|r| ObservationDiagnostic {
            index: r.index,
            statistic: r.statistic(),
            p_value: r.p_value,
            correlation: Some(r.corr().to_rows()),
        })
        .collect();
    Ok(TestReport {
        test: TestKind::Ttilde,
        rule: "sum_bootstrap".into(),
        statistic: total,
        p_value: None,
        p_value_sum: Some(total),
        alpha_point: Some(boot.alpha_point),
        critical_value: None,
        alpha,
        decision: Decision::from_reject(total < boot.alpha_point),
        diagnostics: Diagnostics {
            per_observation,
            resample_scheme: Some(scheme),
            degenerate_resamples: Some(boot.degenerate_resamples),
            ..Default::default()
        },
    })
}

/// Average over observations of `P(max of N_p(0, r(i)) > t)`, estimated with
/// one shared block of standard normal draws.
#[derive(Debug, Clone)]
pub struct AverageTail {
    maxima: Vec<Vec<f64>>,
}

impl AverageTail {
    pub fn new(corrs: &[CorrelationMatrix], n_mc: usize, stream: RngStream) -> Result<Self> {
        let Some(first) = corrs.first() else {
            return invalid("need at least one correlation matrix");
        };
        let p = first.dim();
        if corrs.iter().any(|c| c.dim() != p) {
            return invalid("correlation matrices differ in dimension");
        }
        let draws = GaussianDraws::new(p, n_mc.max(1), &mut stream.rng());
        let maxima = corrs
            .par_iter()
            .map(|c| Ok(draws.sorted_maxima(&CorrelationFactor::new(c)?)))
            .collect::<Result<_>>()?;
        Ok(Self { maxima })
    }

    pub fn at(&self, t: f64) -> f64 {
        self.maxima.iter().map(|m| upper_fraction(m, t)).sum::<f64>() / self.maxima.len() as f64
    }

    /// Per-observation tail at `t`.
    pub fn single(&self, i: usize, t: f64) -> f64 {
        upper_fraction(&self.maxima[i], t)
    }

    /// Smallest `t` with `at(t) <= alpha`. The averaged tail is a step
    /// function with jumps at the simulated maxima, so the answer is one of
    /// them; every matrix carries the same number of draws, so the tail mass
    /// is counted exactly.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let mut pooled: Vec<f64> = self.maxima.iter().flatten().copied().collect();
        pooled.sort_unstable_by(|a, b| b.total_cmp(a));
        let limit = alpha * pooled.len() as f64;
        let mut best = pooled[0];
        let mut s = 0;
        while s < pooled.len() {
            if s as f64 > limit {
                break;
            }
            best = pooled[s];
            while s < pooled.len() && pooled[s] == best {
                s += 1;
            }
        }
        Ok(best)
    }
}

/// Critical value `t` with `(1/n1) sum_i P(T(i) > t | r(i)) = alpha`.
pub fn averaged_tail_critical_value(corrs: &[CorrelationMatrix], alpha: f64, n_mc: usize, stream: RngStream) -> Result<f64> {
    check_alpha(alpha)?;
    check_mc(n_mc)?;
    AverageTail::new(corrs, n_mc, stream)?.critical_value(alpha)
}

/// Picks one first-sample observation uniformly at random and rejects when
/// its statistic exceeds the averaged-tail critical value.
pub fn randomized_ttilde_test(data: &TwoSampleData, alpha: f64, n_mc: usize, stream: RngStream) -> Result<TestReport> {
    check_alpha(alpha)?;
    check_mc(n_mc)?;
    let stats = observation_statistics(data)?;
    let corrs: Vec<CorrelationMatrix> = stats.iter().map(|s| s.corr.clone()).collect();
    let tail = AverageTail::new(&corrs, n_mc, stream.child(0))?;
    let critical = tail.critical_value(alpha)?;
    let chosen = stream.child(1).rng().random_range(0..data.n1());
    let t = stats[chosen].statistic;
    let p_value = tail.at(t);
    Ok(TestReport {
        test: TestKind::Ttilde,
        rule: "randomized".into(),
        statistic: t,
        p_value: Some(p_value),
        p_value_sum: None,
        alpha_point: None,
        critical_value: Some(critical),
        alpha,
        decision: Decision::from_reject(t > critical),
        diagnostics: Diagnostics { selected_index: Some(chosen), ..Default::default() },
    })
}
