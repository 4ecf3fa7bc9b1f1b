//! Copula samplers for the three dependence designs: independence, an
//! equicorrelated t copula, and the Frank copula.

use nalgebra::DMatrix;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::mvn::CorrelationFactor;
use crate::distributions::scalar::t_cdf;
use crate::error::{invalid, Result};
use crate::ranks::CorrelationMatrix;

pub const DEFAULT_T_DF: f64 = 2.0;
pub const DEFAULT_T_RHO: f64 = 0.15;
pub const DEFAULT_FRANK_BETA: f64 = 0.90;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CopulaKind {
    Independence,
    TCopula { df: f64, rho: f64 },
    Frank { beta: f64 },
}

impl CopulaKind {
    pub fn t_default() -> Self {
        CopulaKind::TCopula { df: DEFAULT_T_DF, rho: DEFAULT_T_RHO }
    }

    pub fn frank_default() -> Self {
        CopulaKind::Frank { beta: DEFAULT_FRANK_BETA }
    }

    pub fn name(&self) -> String {
        match self {
            CopulaKind::Independence => "independence".into(),
            CopulaKind::TCopula { df, rho } => format!("t(df={df},rho={rho})"),
            CopulaKind::Frank { beta } => format!("frank(beta={beta})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaSpec {
    pub kind: CopulaKind,
    pub dim: usize,
}

impl CopulaSpec {
    pub fn new(kind: CopulaKind, dim: usize) -> Result<Self> {
        let spec = Self { kind, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return invalid("copula dimension must be at least 1");
        }
        match self.kind {
            CopulaKind::Independence => Ok(()),
            CopulaKind::TCopula { df, rho } => {
                if !(df > 0.0 && df.is_finite()) {
                    return invalid(format!("t copula df must be positive, got {df}"));
                }
                let lower = if self.dim > 1 { -1.0 / (self.dim as f64 - 1.0) } else { -1.0 };
                if !(rho > lower && rho < 1.0) {
                    return invalid(format!(
                        "equicorrelation {rho} is not positive definite in dimension {}",
                        self.dim
                    ));
                }
                Ok(())
            }
            CopulaKind::Frank { beta } => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return invalid(format!("frank beta must be >= 0, got {beta}"));
                }
                Ok(())
            }
        }
    }

    /// `n x dim` matrix of copula draws, every entry strictly inside (0, 1).
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
        self.validate()?;
        let p = self.dim;
        let mut out = DMatrix::zeros(n, p);
        match self.kind {
            CopulaKind::Independence => fill_uniform(&mut out, rng),
            CopulaKind::Frank { beta } if beta == 0.0 => fill_uniform(&mut out, rng),
            CopulaKind::TCopula { df, rho } => {
                let corr = CorrelationMatrix::equicorrelation(p, rho)?;
                let factor = CorrelationFactor::new(&corr)?;
                let chi = ChiSquared::new(df).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
                let mut z = vec![0.0; p];
                let mut v = vec![0.0; p];
                for i in 0..n {
                    z.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                    factor.apply(&z, &mut v);
                    let s: f64 = chi.sample(rng);
                    let scale = (s / df).sqrt();
                    for j in 0..p {
                        out[(i, j)] = open_unit(t_cdf(df, v[j] / scale)?);
                    }
                }
            }
            CopulaKind::Frank { beta } => {
                let theta = -(-beta).exp_m1();
                for i in 0..n {
                    let latent = sample_logarithmic(theta, rng) as f64;
                    for j in 0..p {
                        let e: f64 = rng.sample(Exp1);
                        out[(i, j)] = open_unit(frank_generator_inverse(beta, e / latent));
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn sample_copula<R: Rng + ?Sized>(spec: &CopulaSpec, n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    spec.sample(n, rng)
}

fn fill_uniform<R: Rng + ?Sized>(out: &mut DMatrix<f64>, rng: &mut R) {
    // row by row so the draw order matches the dependent samplers
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] = rng.sample(Open01);
        }
    }
}

fn open_unit(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Frank generator `phi(t) = -ln((e^{-beta t} - 1) / (e^{-beta} - 1))`.
pub fn frank_generator(beta: f64, t: f64) -> f64 {
    -(((-beta * t).exp_m1()) / (-beta).exp_m1()).ln()
}

/// `phi^{-1}(s) = -(1/beta) ln(1 - (1 - e^{-beta}) e^{-s})`.
pub fn frank_generator_inverse(beta: f64, s: f64) -> f64 {
    let theta = -(-beta).exp_m1();
    -(-theta * (-s).exp()).ln_1p() / beta
}

/// Logarithmic-series draw with `P(K = k) = -theta^k / (k ln(1 - theta))`
/// using Kemp's LK algorithm.
pub fn sample_logarithmic<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> u64 {
    debug_assert!(theta > 0.0 && theta < 1.0);
    let v: f64 = rng.sample(Open01);
    if v >= theta {
        return 1;
    }
    let u: f64 = rng.sample(Open01);
    // q = 1 - (1 - theta)^u
    let q = -(u * (-theta).ln_1p()).exp_m1();
    if v <= q * q {
        let k = 1.0 + v.ln() / q.ln();
        return if k.is_finite() && k < u64::MAX as f64 { k.floor() as u64 } else { u64::MAX };
    }
    if v <= q {
        2
    } else {
        1
    }
}
