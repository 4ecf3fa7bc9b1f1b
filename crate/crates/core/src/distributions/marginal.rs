use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::scalar::normal_quantile;
use crate::error::{invalid, Result};

/// Log-scale standard deviation of the lognormal marginal used in the
/// heavy-skew simulation design.
pub const DEFAULT_SDLOG: f64 = 2.5;

/// Marginal law of each component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    /// N(0, 1)
    Normal,
    /// C(0, 1)
    Cauchy,
    /// exp(N(0, sdlog^2))
    Lognormal { sdlog: f64 },
}

impl Marginal {
    pub fn lognormal() -> Self {
        Marginal::Lognormal { sdlog: DEFAULT_SDLOG }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Lognormal { sdlog } if !(sdlog > 0.0 && sdlog.is_finite()) => {
                invalid(format!("lognormal sdlog must be positive, got {sdlog}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Marginal::Normal => "normal".into(),
            Marginal::Cauchy => "cauchy".into(),
            Marginal::Lognormal { sdlog } => format!("lognormal({sdlog})"),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Normal => rng.sample(StandardNormal),
            Marginal::Cauchy => Cauchy::new(0.0, 1.0).expect("unit cauchy").sample(rng),
            Marginal::Lognormal { sdlog } => {
                let z: f64 = rng.sample(StandardNormal);
                (sdlog * z).exp()
            }
        }
    }

    /// Inverse CDF, for pushing copula uniforms through the marginal.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Marginal::Normal => normal_quantile(u),
            Marginal::Cauchy => (std::f64::consts::PI * (u - 0.5)).tan(),
            Marginal::Lognormal { sdlog } => (sdlog * normal_quantile(u)).exp(),
        }
    }
}

pub fn sample_marginal<R: Rng + ?Sized>(spec: &Marginal, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    Ok((0..n).map(|_| spec.draw(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;

    fn median(v: &mut [f64]) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
    }

    fn mean_sd(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var.sqrt())
    }

    const N: usize = 100_000;

    #[test]
    fn normal_moments() {
        let v = sample_marginal(&Marginal::Normal, N, &mut RngStream::new(1, 1).rng()).unwrap();
        let (m, sd) = mean_sd(&v);
        assert!(m.abs() < 0.02 && (sd - 1.0).abs() < 0.02, "{m} {sd}");
    }

    #[test]
    fn cauchy_median() {
        let mut v = sample_marginal(&Marginal::Cauchy, N, &mut RngStream::new(1, 2).rng()).unwrap();
        assert!(median(&mut v).abs() < 0.02);
    }

    #[test]
    fn lognormal_on_log_scale() {
        let v = sample_marginal(&Marginal::lognormal(), N, &mut RngStream::new(1, 3).rng()).unwrap();
        let mut logs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
        let (_, sd) = mean_sd(&logs);
        assert!(median(&mut logs).abs() < 0.03);
        assert!((sd - 2.5).abs() < 0.03);
    }

    #[test]
    fn quantiles_invert_cdfs() {
        assert!(Marginal::Normal.quantile(0.5).abs() < 1e-15);
        assert!(Marginal::Cauchy.quantile(0.75) - 1.0 < 1e-12);
        assert!((Marginal::lognormal().quantile(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_spec() {
        assert!(sample_marginal(&Marginal::Lognormal { sdlog: 0.0 }, 3, &mut RngStream::new(0, 0).rng()).is_err());
        assert!(sample_marginal(&Marginal::Normal, 0, &mut RngStream::new(0, 0).rng()).is_err());
    }
}
