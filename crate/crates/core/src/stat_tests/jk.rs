//! Rank-sum tests on scalar interpoint distances (Euclidean or L1 norm).

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combine::{bootstrap_alpha_point, joint_bootstrap_alpha_point, sum_pvalues, BootstrapConfig, ResampleScheme};
use crate::distributions::{normal_sf, RngStream};
use crate::error::{invalid, Result};
use crate::stat_tests::data::{DistanceBlock, TwoSampleData};
use crate::stat_tests::observation::observation_statistic;
use crate::stat_tests::proposed::check_alpha;
use crate::stat_tests::report::{Decision, Diagnostics, ObservationDiagnostic, TestKind, TestReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L2,
    L1,
}

impl Norm {
    pub fn test_kind(&self) -> TestKind {
        match self {
            Norm::L2 => TestKind::Jk,
            Norm::L1 => TestKind::JkA,
        }
    }

    fn distance(&self, a: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::L2 => a.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::L1 => a.map(f64::abs).sum(),
        }
    }
}

/// One-column block of `||X_i - Z_l||` for every pooled `l != i`.
pub fn norm_distance_block(data: &TwoSampleData, i: usize, norm: Norm) -> Result<DistanceBlock> {
    let n1 = data.n1();
    if i >= n1 {
        return invalid(format!("observation index {i} out of range for n1 = {n1}"));
    }
    let rows = data.n() - 1;
    let d = DMatrix::from_fn(rows, 1, |r, _| {
        let l = if r < i { r } else { r + 1 };
        norm.distance((0..data.p()).map(|j| data.x()[(i, j)] - data.pooled(l, j)))
    });
    DistanceBlock::new(d, n1 - 1, data.n2())
}

/// Upper-tail normal-approximation p-value of the standardized rank-sum of
/// the second group.
pub fn jk_pvalue(block: &DistanceBlock) -> Result<f64> {
    if block.p() != 1 {
        return invalid("norm-distance blocks have exactly one column");
    }
    Ok(normal_sf(observation_statistic(block)?.statistic))
}

fn blocks(data: &TwoSampleData, norm: Norm) -> Result<Vec<DistanceBlock>> {
    (0..data.n1()).map(|i| norm_distance_block(data, i, norm)).collect()
}

/// Per-observation p-values for every first-sample observation.
pub fn jk_pvalues(data: &TwoSampleData, norm: Norm) -> Result<Vec<f64>> {
    blocks(data, norm)?.iter().map(jk_pvalue).collect()
}

/// Sum of the per-observation p-values against a bootstrap lower alpha
/// point, with the joint resampling scheme.
pub fn jk_test(data: &TwoSampleData, norm: Norm, alpha: f64, b: usize, stream: RngStream) -> Result<TestReport> {
    jk_test_with(data, norm, alpha, b, ResampleScheme::default(), stream)
}

pub fn jk_test_with(
    data: &TwoSampleData,
    norm: Norm,
    alpha: f64,
    b: usize,
    scheme: ResampleScheme,
    stream: RngStream,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let cfg = BootstrapConfig::new(b, alpha, stream)?;
    let blocks = blocks(data, norm)?;
    let p: Vec<f64> = blocks.iter().map(jk_pvalue).collect::<Result<_>>()?;
    let total = sum_pvalues(&p)?;
    let boot = match scheme {
        ResampleScheme::Joint => joint_bootstrap_alpha_point(data, &cfg, |resampled, _| {
            Ok((jk_pvalues(resampled, norm)?.iter().sum(), 0))
        })?,
        ResampleScheme::PerBlock => bootstrap_alpha_point(&blocks, &cfg, |block, _| jk_pvalue(block))?,
    };
    let per_observation = p
        .iter()
        .enumerate()
        .map(|(index, &p_value)| ObservationDiagnostic {
            index,
            statistic: crate::distributions::normal_quantile(1.0 - p_value),
            p_value,
            correlation: None,
        })
        .collect();
    Ok(TestReport {
        test: norm.test_kind(),
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

/// Single randomly chosen observation tested with its asymptotic normal
/// p-value.
pub fn jk_randomized_test(data: &TwoSampleData, norm: Norm, alpha: f64, stream: RngStream) -> Result<TestReport> {
    check_alpha(alpha)?;
    let chosen = stream.child(1).rng().random_range(0..data.n1());
    let stats = observation_statistic(&norm_distance_block(data, chosen, norm)?)?;
    let p_value = normal_sf(stats.statistic);
    Ok(TestReport {
        test: norm.test_kind(),
        rule: "randomized".into(),
        statistic: stats.statistic,
        p_value: Some(p_value),
        p_value_sum: None,
        alpha_point: None,
        critical_value: Some(crate::distributions::normal_quantile(1.0 - alpha)),
        alpha,
        decision: Decision::from_reject(p_value < alpha),
        diagnostics: Diagnostics { selected_index: Some(chosen), ..Default::default() },
    })
}
