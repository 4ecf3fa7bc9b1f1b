//! Bivariate boxplot from biweight M estimates of location, scale and
//! correlation.
//!
//! The estimates start from the median, the biweight midvariance and the
//! sum/difference correlation of the standardized columns. They are then
//! refined by iteratively reweighting every observation with
//! `w = (1 - E / K)^2` for `E < K`, where `E` is the squared robust distance
//! and `K = (c * 0.6745)^2` expresses the tuning constant `c`, given in MAD
//! units, on the standard-deviation scale.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_TUNING: f64 = 9.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 200;
pub const DEFAULT_INNER_MASS: f64 = 0.5;
pub const MIN_OBSERVATIONS: usize = 10;

/// Normal quartile: MAD of a standard normal.
const MAD_NORMAL: f64 = 0.674_489_750_196_081_7;

/// Ratio of the 0.99 and 0.5 quantiles of the chi-square law with two
/// degrees of freedom, square-rooted: the fence that puts the outer ellipse
/// at 99% coverage when the inner one holds half the data.
pub fn default_inflation() -> f64 {
    (100f64.ln() / 2f64.ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiweightSummary {
    pub location: [f64; 2],
    pub scale: [f64; 2],
    pub correlation: f64,
    pub iterations: usize,
}

impl BiweightSummary {
    /// Squared robust distance of `(x, y)`.
    pub fn squared_distance(&self, x: f64, y: f64) -> f64 {
        let z1 = (x - self.location[0]) / self.scale[0];
        let z2 = (y - self.location[1]) / self.scale[1];
        let r = self.correlation;
        (z1 * z1 + z2 * z2 - 2.0 * r * z1 * z2) / (1.0 - r * r)
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let [s1, s2] = self.scale;
        let c = self.correlation * s1 * s2;
        [[s1 * s1, c], [c, s2 * s2]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotEllipses {
    pub center: [f64; 2],
    /// Direction of the major axis, radians in `(-pi/2, pi/2]`.
    pub angle: f64,
    /// Semi-axes along the major and minor directions.
    pub inner_radii: [f64; 2],
    pub outer_radii: [f64; 2],
    /// Indices of observations beyond the outer ellipse.
    pub outliers: Vec<usize>,
    #[serde(skip)]
    pub flags: Vec<bool>,
    #[serde(skip)]
    pub distances: Vec<f64>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mad(values: &[f64], center: f64) -> f64 {
    let dev: Vec<f64> = values.iter().map(|v| (v - center).abs()).collect();
    median(&dev)
}

/// Biweight midvariance scale about `center`, with `u = (x - center) / (c MAD)`.
fn biweight_scale(values: &[f64], center: f64, c: f64) -> Option<f64> {
    let spread = mad(values, center);
    if spread <= 0.0 {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in values {
        let u = (x - center) / (c * spread);
        if u.abs() < 1.0 {
            let a = 1.0 - u * u;
            num += (x - center).powi(2) * a.powi(4);
            den += a * (1.0 - 5.0 * u * u);
        }
    }
    let s2 = values.len() as f64 * num / (den * den);
    (s2.is_finite() && s2 > 0.0).then(|| s2.sqrt())
}

/// `E[w(E) E / 2] / E[w(E)]` for `E ~ chi-square(2)`: the factor by which the
/// weighted covariance shrinks a unit variance.
fn consistency_factor(cutoff: f64) -> f64 {
    let steps = 2000;
    let h = cutoff / steps as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..=steps {
        let x = k as f64 * h;
        let coef = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let w = (1.0 - x / cutoff).powi(2) * 0.5 * (-x / 2.0).exp();
        num += coef * w * x / 2.0;
        den += coef * w;
    }
    num / den
}

fn columns(data: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    if data.ncols() != 2 {
        return invalid(format!("the boxplot needs exactly 2 columns, got {}", data.ncols()));
    }
    if data.nrows() < MIN_OBSERVATIONS {
        return invalid(format!("need at least {MIN_OBSERVATIONS} observations, got {}", data.nrows()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return invalid("data contain non-finite values");
    }
    Ok((data.column(0).iter().copied().collect(), data.column(1).iter().copied().collect()))
}

pub fn biweight_estimates(data: &DMatrix<f64>, c: f64, tolerance: f64) -> Result<BiweightSummary> {
    if !(c > 0.0 && c.is_finite()) || !(tolerance > 0.0) {
        return invalid(format!("tuning constant and tolerance must be positive, got c = {c}, tolerance = {tolerance}"));
    }
    let (x, y) = columns(data)?;
    let n = x.len();

    let mut loc = [median(&x), median(&y)];
    let mut scale = [0.0; 2];
    for (j, col) in [&x, &y].into_iter().enumerate() {
        scale[j] = biweight_scale(col, loc[j], c)
            .ok_or_else(|| Error::Degenerate(format!("column {j} has zero median absolute deviation")))?;
    }
    let sum: Vec<f64> = (0..n).map(|i| (x[i] - loc[0]) / scale[0] + (y[i] - loc[1]) / scale[1]).collect();
    let diff: Vec<f64> = (0..n).map(|i| (x[i] - loc[0]) / scale[0] - (y[i] - loc[1]) / scale[1]).collect();
    let mut corr = match (biweight_scale(&sum, median(&sum), c), biweight_scale(&diff, median(&diff), c)) {
        (Some(a), Some(b)) => (a * a - b * b) / (a * a + b * b),
        (None, _) => -1.0,
        (_, None) => 1.0,
    };
    corr = corr.clamp(-0.99, 0.99);

    let cutoff = (c * MAD_NORMAL).powi(2);
    let kappa = consistency_factor(cutoff);
    let mut moves = Vec::new();
    for iteration in 1..=MAX_ITERATIONS {
        let current = BiweightSummary { location: loc, scale, correlation: corr, iterations: iteration };
        let mut sw = 0.0;
        let mut m = [0.0; 2];
        let weights: Vec<f64> = (0..n)
            .map(|i| {
                let e = current.squared_distance(x[i], y[i]);
                if e < cutoff {
                    (1.0 - e / cutoff).powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        for i in 0..n {
            sw += weights[i];
            m[0] += weights[i] * x[i];
            m[1] += weights[i] * y[i];
        }
        if sw <= 0.0 {
            return Err(Error::Numerical(format!("all weights vanished at iteration {iteration}")));
        }
        m = [m[0] / sw, m[1] / sw];
        let (mut c11, mut c22, mut c12) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (dx, dy) = (x[i] - m[0], y[i] - m[1]);
            c11 += weights[i] * dx * dx;
            c22 += weights[i] * dy * dy;
            c12 += weights[i] * dx * dy;
        }
        if c11 <= 0.0 || c22 <= 0.0 {
            return Err(Error::Numerical(format!("weighted variance collapsed at iteration {iteration}")));
        }
        let step = ((m[0] - loc[0]) / scale[0]).abs().max(((m[1] - loc[1]) / scale[1]).abs());
        moves.push(step);
        loc = m;
        scale = [(c11 / sw / kappa).sqrt(), (c22 / sw / kappa).sqrt()];
        corr = c12 / (c11 * c22).sqrt();
        if corr.abs() >= 1.0 {
            return Err(Error::Numerical(format!("correlation reached {corr} at iteration {iteration}")));
        }
        if step < tolerance {
            return Ok(BiweightSummary { location: loc, scale, correlation: corr, iterations: iteration });
        }
    }
    let tail: Vec<String> = moves.iter().rev().take(5).rev().map(|v| format!("{v:.3e}")).collect();
    Err(Error::Numerical(format!(
        "biweight iteration did not converge in {MAX_ITERATIONS} steps; last location moves [{}]",
        tail.join(", ")
    )))
}

/// Inner ellipse through the `inner_mass` quantile of the robust distances,
/// outer ellipse `inflation` times larger; points beyond the outer ellipse
/// are flagged.
pub fn bivariate_boxplot(data: &DMatrix<f64>, inner_mass: f64, inflation: f64) -> Result<BoxplotEllipses> {
    if !(inner_mass > 0.0 && inner_mass < 1.0) {
        return invalid(format!("inner mass must lie in (0, 1), got {inner_mass}"));
    }
    if !(inflation >= 1.0 && inflation.is_finite()) {
        return invalid(format!("inflation must be at least 1, got {inflation}"));
    }
    let summary = biweight_estimates(data, DEFAULT_TUNING, DEFAULT_TOLERANCE)?;
    let distances: Vec<f64> = data
        .row_iter()
        .map(|r| summary.squared_distance(r[0], r[1]).sqrt())
        .collect();
    let mut sorted = distances.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let pos = inner_mass * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let inner = sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]);
    let outer = inner * inflation;

    let [[a, b], [_, d]] = summary.covariance();
    let angle = 0.5 * (2.0 * b).atan2(a - d);
    let half_trace = 0.5 * (a + d);
    let gap = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let axes = [(half_trace + gap).sqrt(), (half_trace - gap).max(0.0).sqrt()];

    let flags: Vec<bool> = distances.iter().map(|&e| e > outer).collect();
    let outliers = flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect();
    Ok(BoxplotEllipses {
        center: summary.location,
        angle,
        inner_radii: [inner * axes[0], inner * axes[1]],
        outer_radii: [outer * axes[0], outer * axes[1]],
        outliers,
        flags,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{mvn_sample, RngStream};
    use crate::ranks::CorrelationMatrix;

    fn normal_sample(n: usize, rho: f64, seed: u64) -> DMatrix<f64> {
        let corr = CorrelationMatrix::equicorrelation(2, rho).unwrap();
        mvn_sample(&corr, n, &mut RngStream::new(seed, 0).rng()).unwrap()
    }

    #[test]
    fn inflation_constant() {
        assert!((default_inflation() - 2.5776).abs() < 1e-4);
    }

    #[test]
    fn point_symmetric_data_centered_at_origin() {
        let half = normal_sample(50, 0.3, 1);
        let data = DMatrix::from_fn(100, 2, |i, j| if i < 50 { half[(i, j)] } else { -half[(i - 50, j)] });
        let s = biweight_estimates(&data, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        assert!(s.location[0].abs() < 1e-7 && s.location[1].abs() < 1e-7, "{:?}", s.location);
    }

    #[test]
    fn consistent_on_clean_normal_data() {
        let data = normal_sample(100_000, 0.6, 2);
        let s = biweight_estimates(&data, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        let n = data.nrows() as f64;
        let mean: Vec<f64> = (0..2).map(|j| data.column(j).sum() / n).collect();
        let cov = |a: usize, b: usize| {
            data.row_iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (n - 1.0)
        };
        let sample_r = cov(0, 1) / (cov(0, 0) * cov(1, 1)).sqrt();
        for j in 0..2 {
            assert!((s.location[j] - mean[j]).abs() < 0.02);
            assert!((s.scale[j] - cov(j, j).sqrt()).abs() < 0.03, "{:?}", s.scale);
        }
        assert!((s.correlation - sample_r).abs() < 0.03, "{} vs {}", s.correlation, sample_r);
    }

    #[test]
    fn resists_gross_contamination() {
        let clean = normal_sample(10_000, 0.0, 3);
        let n_out = 100;
        let dirty = DMatrix::from_fn(10_000 + n_out, 2, |i, j| if i < 10_000 { clean[(i, j)] } else { 100.0 });
        let a = biweight_estimates(&clean, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        let b = biweight_estimates(&dirty, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        let mean = |m: &DMatrix<f64>, j: usize| m.column(j).sum() / m.nrows() as f64;
        for j in 0..2 {
            assert!((a.location[j] - b.location[j]).abs() < 0.05);
            assert!((mean(&dirty, j) - mean(&clean, j)).abs() > 0.9);
        }
    }

    #[test]
    fn axis_aligned_for_uncorrelated_data() {
        let base = normal_sample(5000, 0.0, 4);
        let data = DMatrix::from_fn(5000, 2, |i, j| base[(i, j)] * if j == 0 { 3.0 } else { 1.0 });
        let b = bivariate_boxplot(&data, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        assert!(b.angle.abs() < 0.05, "{}", b.angle);
        let data = DMatrix::from_fn(5000, 2, |i, j| base[(i, j)] * if j == 1 { 3.0 } else { 1.0 });
        let b = bivariate_boxplot(&data, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        assert!((b.angle.abs() - std::f64::consts::FRAC_PI_2).abs() < 0.05, "{}", b.angle);
    }

    #[test]
    fn tight_cluster_has_no_flags() {
        let data = DMatrix::from_fn(49, 2, |i, j| if j == 0 { (i % 7) as f64 * 0.01 } else { (i / 7) as f64 * 0.01 });
        let b = bivariate_boxplot(&data, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        assert!(b.outliers.is_empty());
        for k in 0..2 {
            assert!(b.outer_radii[k] >= b.inner_radii[k]);
        }
    }

    #[test]
    fn inner_ellipse_holds_half_the_points() {
        let data = normal_sample(1001, 0.4, 5);
        let b = bivariate_boxplot(&data, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        let mut sorted = b.distances.clone();
        sorted.sort_by(f64::total_cmp);
        let [a0, _] = b.inner_radii;
        let s = biweight_estimates(&data, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        let [[c11, c12], [_, c22]] = s.covariance();
        let major = (0.5 * (c11 + c22) + (0.25 * (c11 - c22).powi(2) + c12 * c12).sqrt()).sqrt();
        assert!((a0 / major - sorted[500]).abs() < 1e-9);
        assert_eq!(b.distances.iter().filter(|&&e| e <= sorted[500]).count(), 501);
    }

    #[test]
    fn planted_outliers_are_flagged() {
        let n = 2000;
        let clean = normal_sample(n, 0.5, 6);
        let s = biweight_estimates(&clean, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        let planted: Vec<[f64; 2]> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.314;
                let dir = [t.cos(), t.sin()];
                let unit = s.squared_distance(s.location[0] + dir[0], s.location[1] + dir[1]).sqrt();
                [s.location[0] + dir[0] * 10.0 / unit, s.location[1] + dir[1] * 10.0 / unit]
            })
            .collect();
        let data = DMatrix::from_fn(n + planted.len(), 2, |i, j| if i < n { clean[(i, j)] } else { planted[i - n][j] });
        let b = bivariate_boxplot(&data, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        assert!(b.flags[n..].iter().all(|&f| f));
        let false_flags = b.flags[..n].iter().filter(|&&f| f).count();
        assert!((false_flags as f64) < 0.02 * n as f64, "{false_flags}");
    }

    #[test]
    fn location_and_scale_equivariance() {
        let data = normal_sample(300, 0.2, 7);
        let base = bivariate_boxplot(&data, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        let s0 = biweight_estimates(&data, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        let shifted = DMatrix::from_fn(300, 2, |i, j| data[(i, j)] + [5.0, -3.0][j]);
        let s1 = biweight_estimates(&shifted, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        assert!((s1.location[0] - s0.location[0] - 5.0).abs() < 1e-9);
        assert!((s1.location[1] - s0.location[1] + 3.0).abs() < 1e-9);
        let scaled = DMatrix::from_fn(300, 2, |i, j| data[(i, j)] * if j == 0 { 4.0 } else { 1.0 });
        let s2 = biweight_estimates(&scaled, DEFAULT_TUNING, DEFAULT_TOLERANCE).unwrap();
        assert!((s2.scale[0] - 4.0 * s0.scale[0]).abs() < 1e-8);
        assert!((s2.scale[1] - s0.scale[1]).abs() < 1e-8);
        assert_eq!(bivariate_boxplot(&scaled, DEFAULT_INNER_MASS, default_inflation()).unwrap().flags, base.flags);
    }

    #[test]
    fn flags_follow_observations_when_reordered() {
        let mut data = normal_sample(200, 0.3, 8);
        data[(5, 0)] = 30.0;
        data[(77, 1)] = -25.0;
        let a = bivariate_boxplot(&data, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        let perm: Vec<usize> = (0..200).rev().collect();
        let reordered = DMatrix::from_fn(200, 2, |i, j| data[(perm[i], j)]);
        let b = bivariate_boxplot(&reordered, DEFAULT_INNER_MASS, default_inflation()).unwrap();
        for i in 0..200 {
            assert_eq!(a.flags[perm[i]], b.flags[i]);
        }
        assert!(a.outliers.contains(&5) && a.outliers.contains(&77));
    }

    #[test]
    fn input_errors() {
        let constant = DMatrix::from_fn(20, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        assert!(matches!(biweight_estimates(&constant, 9.0, 1e-8), Err(Error::Degenerate(_))));
        assert!(biweight_estimates(&DMatrix::zeros(5, 2), 9.0, 1e-8).is_err());
        assert!(biweight_estimates(&DMatrix::zeros(20, 3), 9.0, 1e-8).is_err());
        let data = normal_sample(50, 0.0, 9);
        assert!(bivariate_boxplot(&data, 1.5, 2.0).is_err());
        assert!(bivariate_boxplot(&data, 0.5, 0.5).is_err());
    }
}
