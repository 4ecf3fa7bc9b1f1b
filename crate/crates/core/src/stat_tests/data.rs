use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Two independent samples with the same number of components: `x` is
/// `n1 x p`, `y` is `n2 x p`. Rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleData {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl TwoSampleData {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.nrows() < 2 || y.nrows() < 2 {
            return invalid(format!(
                "each sample needs at least 2 observations (n1={}, n2={})",
                x.nrows(),
                y.nrows()
            ));
        }
        if x.ncols() == 0 || x.ncols() != y.ncols() {
            return invalid(format!(
                "samples must share a positive dimension (p1={}, p2={})",
                x.ncols(),
                y.ncols()
            ));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return invalid("samples contain non-finite values");
        }
        Ok(Self { x, y })
    }

    /// Builds from row vectors.
    pub fn from_rows(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_matrix(x)?, rows_to_matrix(y)?)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn n1(&self) -> usize {
        self.x.nrows()
    }

    pub fn n2(&self) -> usize {
        self.y.nrows()
    }

    pub fn n(&self) -> usize {
        self.n1() + self.n2()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Entry `(row, j)` of the pooled sample `Z = (X; Y)`.
    #[inline]
    pub fn pooled(&self, row: usize, j: usize) -> f64 {
        let n1 = self.n1();
        if row < n1 {
            self.x[(row, j)]
        } else {
            self.y[(row - n1, j)]
        }
    }

    pub fn pooled_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.p(), |r, j| self.pooled(r, j))
    }

    /// The same data with the roles of the samples interchanged.
    pub fn swapped(&self) -> Self {
        Self { x: self.y.clone(), y: self.x.clone() }
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let p = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != p) {
        return invalid(format!("row {bad} has {} entries, expected {p}", rows[bad].len()));
    }
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

/// Distances from one first-sample observation to every other pooled
/// observation, one column per component (or a single column of norms).
///
/// The first `n_first` rows are distances to the remaining first-sample
/// observations, the last `n_second` rows distances to the second sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBlock {
    dist: DMatrix<f64>,
    n_first: usize,
    n_second: usize,
}

impl DistanceBlock {
    pub fn new(dist: DMatrix<f64>, n_first: usize, n_second: usize) -> Result<Self> {
        if dist.nrows() != n_first + n_second {
            return invalid(format!(
                "distance block has {} rows, expected {}",
                dist.nrows(),
                n_first + n_second
            ));
        }
        if dist.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return invalid("distances must be finite and non-negative");
        }
        Ok(Self { dist, n_first, n_second })
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn n_first(&self) -> usize {
        self.n_first
    }

    pub fn n_second(&self) -> usize {
        self.n_second
    }

    pub fn rows(&self) -> usize {
        self.dist.nrows()
    }

    pub fn p(&self) -> usize {
        self.dist.ncols()
    }

    /// True when every row is identical, so no ranking carries information.
    pub fn is_degenerate(&self) -> bool {
        let first = self.dist.row(0);
        self.dist.row_iter().all(|r| r == first)
    }

    /// New block built from the given row indices, keeping the group sizes.
    pub fn resample(&self, rows: &[usize]) -> Self {
        debug_assert_eq!(rows.len(), self.rows());
        let dist = DMatrix::from_fn(rows.len(), self.p(), |r, j| self.dist[(rows[r], j)]);
        Self { dist, n_first: self.n_first, n_second: self.n_second }
    }
}

/// Componentwise distances `|X_ij - Z_lj|` for the first-sample observation
/// `i` (0-based) against every pooled row `l != i`.
pub fn distance_block(data: &TwoSampleData, i: usize) -> Result<DistanceBlock> {
    let n1 = data.n1();
    if i >= n1 {
        return invalid(format!("observation index {i} out of range for n1 = {n1}"));
    }
    let rows = data.n() - 1;
    let dist = DMatrix::from_fn(rows, data.p(), |r, j| {
        let l = if r < i { r } else { r + 1 };
        (data.x()[(i, j)] - data.pooled(l, j)).abs()
    });
    Ok(DistanceBlock { dist, n_first: n1 - 1, n_second: data.n2() })
}
