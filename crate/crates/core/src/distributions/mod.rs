//! Samplers and distribution functions for the simulation designs and the
//! Monte-Carlo null distributions.

pub mod copula;
pub mod marginal;
pub mod mvn;
mod rng;
pub mod scalar;

use rand::Rng;

pub use copula::{sample_copula, CopulaKind, CopulaSpec, DEFAULT_FRANK_BETA, DEFAULT_T_DF, DEFAULT_T_RHO};
pub use marginal::{sample_marginal, Marginal, DEFAULT_SDLOG};
pub use mvn::{mvn_sample, CorrelationFactor};
pub use rng::RngStream;
pub(crate) use rng::splitmix64;
pub use scalar::{chisq_sf, f_sf, normal_cdf, normal_quantile, normal_sf, t_cdf, ScalarDist};

use crate::error::{invalid, Result};
use crate::stat_tests::TwoSampleData;

/// Draws `n1 + n2` rows from the copula pushed through `marginal`, returns the
/// first `n1` as the first sample and the rest, plus `shift`, as the second.
pub fn sample_shifted_dataset<R: Rng + ?Sized>(
    marginal: &Marginal,
    copula: &CopulaSpec,
    n1: usize,
    n2: usize,
    shift: &[f64],
    rng: &mut R,
) -> Result<TwoSampleData> {
    marginal.validate()?;
    copula.validate()?;
    let p = copula.dim;
    if shift.len() != p {
        return invalid(format!("shift has length {} but dimension is {p}", shift.len()));
    }
    let n = n1 + n2;
    let mut z = match copula.kind {
        CopulaKind::Independence => {
            let mut z = nalgebra::DMatrix::zeros(n, p);
            for i in 0..n {
                for j in 0..p {
                    z[(i, j)] = marginal.draw(rng);
                }
            }
            z
        }
        _ => copula.sample(n, rng)?.map(|u| marginal.quantile(u)),
    };
    for i in n1..n {
        for j in 0..p {
            z[(i, j)] += shift[j];
        }
    }
    let x = z.rows(0, n1).into_owned();
    let y = z.rows(n1, n2).into_owned();
    TwoSampleData::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_moves_second_sample() {
        let c = CopulaSpec::new(CopulaKind::Independence, 3).unwrap();
        let d = sample_shifted_dataset(&Marginal::Normal, &c, 20_000, 20_000, &[1.0; 3], &mut RngStream::new(1, 0).rng()).unwrap();
        for j in 0..3 {
            let diff = d.y().column(j).mean() - d.x().column(j).mean();
            assert!((diff - 1.0).abs() < 0.04, "{diff}");
        }
    }

    #[test]
    fn reruns_are_identical() {
        for kind in [CopulaKind::Independence, CopulaKind::t_default(), CopulaKind::frank_default()] {
            let c = CopulaSpec::new(kind, 2).unwrap();
            let a = sample_shifted_dataset(&Marginal::Cauchy, &c, 5, 6, &[0.0, 0.5], &mut RngStream::new(9, 4).rng()).unwrap();
            let b = sample_shifted_dataset(&Marginal::Cauchy, &c, 5, 6, &[0.0, 0.5], &mut RngStream::new(9, 4).rng()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn shift_dimension_checked() {
        let c = CopulaSpec::new(CopulaKind::Independence, 2).unwrap();
        assert!(sample_shifted_dataset(&Marginal::Normal, &c, 5, 5, &[0.0], &mut RngStream::new(0, 0).rng()).is_err());
    }
}
