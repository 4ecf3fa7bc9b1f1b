//! Monte-Carlo tail probabilities of the maximum of a correlated Gaussian
//! vector, the null reference for the max-type statistics.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::{CorrelationFactor, RngStream};
use crate::error::{invalid, Result};
use crate::ranks::CorrelationMatrix;

/// Smallest Monte-Carlo size accepted by [`max_gaussian_tail`].
pub const MIN_MC: usize = 1000;
/// Default Monte-Carlo size for tail probabilities.
pub const DEFAULT_MC: usize = 10_000;

/// A block of `n_mc x p` standard normal draws reused for every correlation
/// matrix it is transformed by.
#[derive(Debug, Clone)]
pub struct GaussianDraws {
    p: usize,
    n_mc: usize,
    z: Vec<f64>,
}

impl GaussianDraws {
    pub fn new<R: Rng + ?Sized>(p: usize, n_mc: usize, rng: &mut R) -> Self {
        let z = (0..p * n_mc).map(|_| rng.sample(StandardNormal)).collect();
        Self { p, n_mc, z }
    }

    pub fn n_mc(&self) -> usize {
        self.n_mc
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Fraction of transformed rows whose maximum exceeds `t`.
    pub fn tail(&self, factor: &CorrelationFactor, t: f64) -> f64 {
        debug_assert_eq!(factor.dim(), self.p);
        if t == f64::NEG_INFINITY {
            return 1.0;
        }
        let p = self.p;
        let a = factor.rows();
        let mut hits = 0usize;
        for z in self.z.chunks_exact(p) {
            for row in a.chunks_exact(p) {
                let x: f64 = row.iter().zip(z).map(|(a, z)| a * z).sum();
                if x > t {
                    hits += 1;
                    break;
                }
            }
        }
        hits as f64 / self.n_mc as f64
    }

    /// Row maxima of the transformed draws, sorted ascending.
    pub fn sorted_maxima(&self, factor: &CorrelationFactor) -> Vec<f64> {
        let p = self.p;
        let a = factor.rows();
        let mut out: Vec<f64> = self
            .z
            .chunks_exact(p)
            .map(|z| {
                a.chunks_exact(p)
                    .map(|row| row.iter().zip(z).map(|(a, z)| a * z).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        out.sort_unstable_by(f64::total_cmp);
        out
    }
}

/// Fraction of values in an ascending slice strictly greater than `t`.
pub(crate) fn upper_fraction(sorted: &[f64], t: f64) -> f64 {
    let le = sorted.partition_point(|&v| v <= t);
    (sorted.len() - le) as f64 / sorted.len() as f64
}

/// `P(max_j V_j > t)` for `V ~ N_p(0, corr)`, estimated from `n_mc` draws.
pub fn max_gaussian_tail(corr: &CorrelationMatrix, t: f64, n_mc: usize, stream: RngStream) -> Result<f64> {
    if n_mc < MIN_MC {
        return invalid(format!("n_mc must be at least {MIN_MC}, got {n_mc}"));
    }
    if t.is_nan() {
        return invalid("threshold is NaN");
    }
    let factor = CorrelationFactor::new(corr)?;
    let draws = GaussianDraws::new(corr.dim(), n_mc, &mut stream.rng());
    Ok(draws.tail(&factor, t))
}
