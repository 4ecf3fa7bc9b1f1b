use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ranks::CorrelationMatrix;

/// Eigenvalues below this are clipped before taking square roots.
pub const EIGEN_CLIP: f64 = 1e-10;
/// Eigenvalues below minus this are treated as a genuinely invalid matrix.
pub const EIGEN_REPAIR_LIMIT: f64 = 1e-6;

/// Symmetric square-root factor `A` with `A A' = corr` (after clipping),
/// stored row-major so that `x_k = sum_l A[k][l] z_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFactor {
    p: usize,
    a: Vec<f64>,
}

impl CorrelationFactor {
    pub fn new(corr: &CorrelationMatrix) -> Result<Self> {
        let p = corr.dim();
        if p == 1 {
            return Ok(Self { p, a: vec![1.0] });
        }
        let eig = SymmetricEigen::new(corr.as_matrix().clone());
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -EIGEN_REPAIR_LIMIT {
            return Err(Error::InvalidCorrelation { min_eigenvalue: min });
        }
        let mut a = vec![0.0; p * p];
        for k in 0..p {
            for l in 0..p {
                let lambda = eig.eigenvalues[l].max(EIGEN_CLIP);
                a[k * p + l] = eig.eigenvectors[(k, l)] * lambda.sqrt();
            }
        }
        // restore exact unit variances after clipping
        for row in a.chunks_mut(p) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            row.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(Self { p, a })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub(crate) fn rows(&self) -> &[f64] {
        &self.a
    }

    /// Writes `A z` into `out`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.a.chunks(self.p)) {
            *o = row.iter().zip(z).map(|(a, z)| a * z).sum();
        }
    }
}

/// `n` i.i.d. rows from `N_p(0, corr)`.
pub fn mvn_sample<R: Rng + ?Sized>(corr: &CorrelationMatrix, n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    let f = CorrelationFactor::new(corr)?;
    let p = f.dim();
    let mut out = DMatrix::zeros(n, p);
    let mut z = vec![0.0; p];
    let mut x = vec![0.0; p];
    for i in 0..n {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        f.apply(&z, &mut x);
        for j in 0..p {
            out[(i, j)] = x[j];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::scalar::normal_cdf;
    use crate::distributions::RngStream;

    fn corr_of(m: &DMatrix<f64>, a: usize, b: usize) -> f64 {
        let n = m.nrows() as f64;
        let (ca, cb) = (m.column(a), m.column(b));
        let (ma, mb) = (ca.sum() / n, cb.sum() / n);
        let sab: f64 = ca.iter().zip(cb.iter()).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let saa: f64 = ca.iter().map(|x| (x - ma).powi(2)).sum();
        let sbb: f64 = cb.iter().map(|y| (y - mb).powi(2)).sum();
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn identity_gives_uncorrelated_columns() {
        let n = 20_000;
        let s = mvn_sample(&CorrelationMatrix::identity(2), n, &mut RngStream::new(1, 0).rng()).unwrap();
        assert!(corr_of(&s, 0, 1).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn recovers_off_diagonal() {
        let corr = CorrelationMatrix::equicorrelation(2, 0.5).unwrap();
        let s = mvn_sample(&corr, 100_000, &mut RngStream::new(2, 0).rng()).unwrap();
        assert!((corr_of(&s, 0, 1) - 0.5).abs() < 0.02);
    }

    #[test]
    fn univariate_is_standard_normal() {
        let n = 20_000;
        let s = mvn_sample(&CorrelationMatrix::identity(1), n, &mut RngStream::new(3, 0).rng()).unwrap();
        let mut v: Vec<f64> = s.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        let ks = v
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = normal_cdf(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 3.0 / (n as f64).sqrt(), "ks = {ks}");
    }

    #[test]
    fn near_psd_is_repaired_and_indefinite_rejected() {
        // rank-deficient: three identical components
        let corr = CorrelationMatrix::equicorrelation(3, 1.0).unwrap();
        let f = CorrelationFactor::new(&corr).unwrap();
        let mut x = [0.0; 3];
        f.apply(&[0.3, -1.2, 0.7], &mut x);
        assert!((x[0] - x[1]).abs() < 1e-4 && (x[1] - x[2]).abs() < 1e-4);

        let bad = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        let bad = CorrelationMatrix::new(bad).unwrap();
        assert!(matches!(CorrelationFactor::new(&bad), Err(Error::InvalidCorrelation { .. })));
    }
}
