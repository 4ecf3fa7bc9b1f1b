use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{chisq_sf, f_sf};
use crate::error::{invalid, Error, Result};
use crate::stat_tests::data::TwoSampleData;
use crate::stat_tests::proposed::check_alpha;
use crate::stat_tests::report::{Decision, Diagnostics, TestKind, TestReport};

/// Reference distribution for the Hotelling statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HotellingMode {
    /// `T^2 (N-1-p) / ((N-2) p) ~ F(p, N-1-p)`.
    ExactF,
    /// `T^2 ~ chi-square(p)`.
    AsymptoticChisq,
}

fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.mean()))
}

fn scatter(m: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let centered = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] - mean[j]);
    centered.transpose() * centered
}

/// `T^2 = (n1 n2 / N) d' S^{-1} d` with `S` the pooled covariance.
pub fn hotelling_statistic(data: &TwoSampleData) -> Result<f64> {
    let (n1, n2, p) = (data.n1(), data.n2(), data.p());
    let n = n1 + n2;
    if n - 2 < p {
        return Err(Error::Singular(format!(
            "pooled covariance is singular when p = {p} exceeds n1 + n2 - 2 = {}",
            n - 2
        )));
    }
    let (mx, my) = (column_means(data.x()), column_means(data.y()));
    let pooled = (scatter(data.x(), &mx) + scatter(data.y(), &my)) / (n - 2) as f64;
    let chol = pooled
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("pooled covariance is not positive definite".into()))?;
    let d = mx - my;
    let scale = (n1 * n2) as f64 / n as f64;
    let t2 = scale * d.dot(&chol.solve(&d));
    // guard against near-singular factors that survive Cholesky
    let diag_min = chol.l().diagonal().iter().copied().fold(f64::INFINITY, f64::min);
    let diag_max = chol.l().diagonal().iter().copied().fold(0.0, f64::max);
    if !(diag_min > diag_max * 1e-8) || !t2.is_finite() {
        return Err(Error::Singular("pooled covariance is numerically singular".into()));
    }
    Ok(t2)
}

pub fn hotelling_t2(data: &TwoSampleData, mode: HotellingMode, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let (n, p) = (data.n() as f64, data.p() as f64);
    let t2 = hotelling_statistic(data)?;
    let (p_value, dof) = match mode {
        HotellingMode::ExactF => {
            let d2 = n - 1.0 - p;
            if d2 <= 0.0 {
                return invalid(format!("exact F reference needs n1 + n2 - 1 > p (got N = {n}, p = {p})"));
            }
            let f = t2 * d2 / ((n - 2.0) * p);
            (f_sf(p, d2, f)?, (p, d2))
        }
        HotellingMode::AsymptoticChisq => (chisq_sf(p, t2)?, (p, 0.0)),
    };
    Ok(TestReport {
        test: TestKind::Ht,
        rule: match mode {
            HotellingMode::ExactF => "exact_f".into(),
            HotellingMode::AsymptoticChisq => "asymptotic_chisq".into(),
        },
        statistic: t2,
        p_value: Some(p_value),
        p_value_sum: None,
        alpha_point: None,
        critical_value: None,
        alpha,
        decision: Decision::from_reject(p_value < alpha),
        diagnostics: Diagnostics { degrees_of_freedom: Some(dof), ..Default::default() },
    })
}
