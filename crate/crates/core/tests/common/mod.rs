//! Brute-force reference implementations used by the integration tests.
#![allow(dead_code)]

use maxwil::distributions::{sample_shifted_dataset, CopulaKind, CopulaSpec, Marginal, RngStream};
use maxwil::stat_tests::TwoSampleData;
use nalgebra::DMatrix;

/// Average ranks by counting smaller and equal values.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Mean and variance of the rank sum of the last `n` of `m + n` untied
/// ranks over every assignment of ranks to the second group.
pub fn exhaustive_moments(m: usize, n: usize) -> (f64, f64) {
    let total = m + n;
    let mut sums = Vec::new();
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize == n {
            sums.push((0..total).filter(|k| mask & (1 << k) != 0).map(|k| (k + 1) as f64).sum::<f64>());
        }
    }
    let count = sums.len() as f64;
    let mean = sums.iter().sum::<f64>() / count;
    let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / count;
    (mean, var)
}

/// `12 / (N (N^2 - 1)) sum (R_a - c)(R_b - c)` off the diagonal, clamped,
/// with a unit diagonal.
pub fn spearman(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = cols.len();
    let n = cols[0].len() as f64;
    let c = (n + 1.0) / 2.0;
    let mut h = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in 0..p {
            h[a][b] = if a == b {
                1.0
            } else {
                let mut s = 0.0;
                for k in 0..cols[a].len() {
                    s += (cols[a][k] - c) * (cols[b][k] - c);
                }
                (12.0 * s / (n * (n * n - 1.0))).clamp(-1.0, 1.0)
            };
        }
    }
    h
}

pub struct ObservationOracle {
    pub rank_sums: Vec<f64>,
    pub standardized: Vec<f64>,
    pub corr: Vec<Vec<f64>>,
}

fn pooled_rows(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter().chain(y.iter()).cloned().collect()
}

/// Statistics of first-sample observation `i` straight from the definitions.
pub fn observation_oracle(x: &[Vec<f64>], y: &[Vec<f64>], i: usize) -> ObservationOracle {
    let p = x[0].len();
    let n1 = x.len();
    let n2 = y.len();
    let pooled = pooled_rows(x, y);
    let others: Vec<usize> = (0..pooled.len()).filter(|&l| l != i).collect();
    let (mean, var) = exhaustive_moments(n1 - 1, n2);
    let mut rank_cols = Vec::new();
    let mut rank_sums = Vec::new();
    let mut standardized = Vec::new();
    for j in 0..p {
        let d: Vec<f64> = others.iter().map(|&l| (x[i][j] - pooled[l][j]).abs()).collect();
        let r = ranks(&d);
        let w: f64 = others.iter().zip(&r).filter(|(&l, _)| l >= n1).map(|(_, rk)| rk).sum();
        rank_sums.push(w);
        standardized.push((w - mean) / var.sqrt());
        rank_cols.push(r);
    }
    ObservationOracle { rank_sums, standardized, corr: spearman(&rank_cols) }
}

/// Pooled componentwise rank sums of the second sample and their rank
/// correlation matrix.
pub fn pooled_oracle(x: &[Vec<f64>], y: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let pooled = pooled_rows(x, y);
    let p = x[0].len();
    let mut cols = Vec::new();
    let mut sums = Vec::new();
    for j in 0..p {
        let r = ranks(&pooled.iter().map(|row| row[j]).collect::<Vec<_>>());
        sums.push(r[x.len()..].iter().sum());
        cols.push(r);
    }
    (sums, spearman(&cols))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn normal_data(p: usize, n1: usize, n2: usize, shift: f64, seed: u64) -> TwoSampleData {
    let copula = CopulaSpec::new(CopulaKind::Independence, p).unwrap();
    sample_shifted_dataset(&Marginal::Normal, &copula, n1, n2, &vec![shift; p], &mut RngStream::new(seed, 0).rng()).unwrap()
}
