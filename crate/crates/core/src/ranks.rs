//! Ranking primitives shared by every rank-based statistic in the crate.
//!
//! Ranks are 1-based. Ties receive the average of the ranks they span, which
//! keeps the rank-sum identity `sum = M(M+1)/2` intact. Sorting breaks value
//! ties by original index, so repeated runs are bit-identical.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Ranks of a sequence of `M` values, each in `[1, M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector(Vec<f64>);

impl RankVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Ranks `values` in ascending order, averaging ranks across ties.
pub fn rank_vector(values: &[f64]) -> Result<RankVector> {
    if values.is_empty() {
        return invalid("cannot rank an empty sequence");
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return invalid(format!("non-finite value at position {pos}"));
    }
    let mut order = Vec::with_capacity(values.len());
    let mut out = vec![0.0; values.len()];
    rank_into(values, &mut order, &mut out);
    Ok(RankVector(out))
}

/// Allocation-free ranking used by the hot loops. `values` must be finite.
pub(crate) fn rank_into(values: &[f64], order: &mut Vec<usize>, out: &mut [f64]) {
    debug_assert_eq!(values.len(), out.len());
    order.clear();
    order.extend(0..values.len());
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let m = order.len();
    let mut start = 0;
    while start < m {
        let v = values[order[start]];
        let mut end = start + 1;
        while end < m && values[order[end]] == v {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            out[idx] = avg;
        }
        start = end;
    }
}

/// Column-wise ranks of an `N x p` data matrix, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RankMatrix {
    /// Ranks each column of `data` independently.
    pub fn from_data(data: &DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return invalid("cannot rank an empty matrix");
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("matrix contains non-finite values");
        }
        let (rows, cols) = data.shape();
        let mut out = vec![0.0; rows * cols];
        let mut order = Vec::with_capacity(rows);
        // DMatrix is column-major, so column j is a contiguous slice.
        for (j, chunk) in out.chunks_mut(rows).enumerate() {
            let col = data.column(j);
            rank_into(col.as_slice(), &mut order, chunk);
        }
        Ok(Self { rows, cols, data: out })
    }

    /// Wraps precomputed column-major ranks.
    #[cfg(test)]
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }
}

/// Exact conditional moments of the Wilcoxon rank-sum of the second group
/// (size `n`) when `m + n` ranks are equiprobably assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonMoments {
    pub mean: f64,
    pub variance: f64,
    pub m: usize,
    pub n: usize,
}

pub fn wilcoxon_moments(m: usize, n: usize) -> Result<WilcoxonMoments> {
    if m == 0 || n == 0 {
        return invalid(format!("wilcoxon moments need both group sizes >= 1 (m={m}, n={n})"));
    }
    let (mf, nf) = (m as f64, n as f64);
    let total = mf + nf + 1.0;
    Ok(WilcoxonMoments {
        mean: nf * total / 2.0,
        variance: mf * nf * total / 12.0,
        m,
        n,
    })
}

/// `(w - mean) / sqrt(variance)`.
pub fn standardize(w: f64, moments: &WilcoxonMoments) -> Result<f64> {
    if !(moments.variance > 0.0) {
        return Err(Error::Degenerate("zero rank-sum variance".into()));
    }
    Ok((w - moments.mean) / moments.variance.sqrt())
}

/// Sum of pooled ranks of the last `n2` entries of `pooled_column`.
pub fn pooled_wilcoxon(pooled_column: &[f64], n1: usize, n2: usize) -> Result<f64> {
    if pooled_column.len() != n1 + n2 {
        return invalid(format!(
            "pooled column has length {} but n1 + n2 = {}",
            pooled_column.len(),
            n1 + n2
        ));
    }
    let ranks = rank_vector(pooled_column)?;
    Ok(ranks.as_slice()[n1..].iter().sum())
}

/// Symmetric, unit-diagonal correlation matrix with entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

const STRUCTURE_TOL: f64 = 1e-12;

impl CorrelationMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let p = m.nrows();
        if p == 0 || m.ncols() != p {
            return invalid(format!("correlation matrix must be square, got {}x{}", p, m.ncols()));
        }
        for i in 0..p {
            if (m[(i, i)] - 1.0).abs() > STRUCTURE_TOL {
                return invalid(format!("diagonal entry {i} is {} (expected 1)", m[(i, i)]));
            }
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if !a.is_finite() || (a - b).abs() > STRUCTURE_TOL {
                    return invalid(format!("matrix is not symmetric at ({i}, {j})"));
                }
                if a.abs() > 1.0 + STRUCTURE_TOL {
                    return invalid(format!("entry ({i}, {j}) = {a} lies outside [-1, 1]"));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    /// All off-diagonal entries equal to `rho`.
    pub fn equicorrelation(p: usize, rho: f64) -> Result<Self> {
        let m = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Grade correlation matrix of the rank columns,
/// `h = 12 / (N(N^2-1)) * sum (R_a - (N+1)/2)(R_b - (N+1)/2)`, applied as
/// written even when ties are present.
pub fn spearman_matrix(ranks: &RankMatrix) -> Result<CorrelationMatrix> {
    let n = ranks.nrows();
    if n < 3 {
        return invalid(format!("spearman matrix needs at least 3 rows, got {n}"));
    }
    Ok(CorrelationMatrix(spearman_raw(&ranks.data, n, ranks.ncols())))
}

pub(crate) fn spearman_raw(data: &[f64], n: usize, p: usize) -> DMatrix<f64> {
    let nf = n as f64;
    let center = (nf + 1.0) / 2.0;
    let scale = 12.0 / (nf * (nf * nf - 1.0));
    let mut h = DMatrix::identity(p, p);
    for a in 0..p {
        let ca = &data[a * n..(a + 1) * n];
        for b in 0..a {
            let cb = &data[b * n..(b + 1) * n];
            let s: f64 = ca
                .iter()
                .zip(cb)
                .map(|(x, y)| (x - center) * (y - center))
                .sum();
            let v = (scale * s).clamp(-1.0, 1.0);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    h
}
