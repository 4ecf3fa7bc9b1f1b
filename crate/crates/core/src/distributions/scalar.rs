//! Scalar distribution functions used by the competitor tests and samplers.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

use crate::error::{invalid, Result};

/// A scalar CDF or survival function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarDist {
    NormalCdf,
    TCdf { df: f64 },
    ChisqSf { df: f64 },
    FSf { d1: f64, d2: f64 },
}

impl ScalarDist {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match *self {
            ScalarDist::NormalCdf => Ok(normal_cdf(x)),
            ScalarDist::TCdf { df } => t_cdf(df, x),
            ScalarDist::ChisqSf { df } => chisq_sf(df, x),
            ScalarDist::FSf { d1, d2 } => f_sf(d1, d2, x),
        }
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

fn check_df(name: &str, df: f64) -> Result<()> {
    if !(df > 0.0) || !df.is_finite() {
        return invalid(format!("{name} degrees of freedom must be positive and finite, got {df}"));
    }
    Ok(())
}

pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn normal_sf(x: f64) -> f64 {
    std_normal().sf(x)
}

/// Standard normal quantile.
pub fn normal_quantile(u: f64) -> f64 {
    std_normal().inverse_cdf(u)
}

pub fn t_cdf(df: f64, x: f64) -> Result<f64> {
    check_df("t", df)?;
    if x.is_nan() {
        return invalid("t_cdf argument is NaN");
    }
    // closed form for the two-degree-of-freedom case used by the t copula
    if df == 2.0 {
        return Ok(if x.is_infinite() {
            if x > 0.0 { 1.0 } else { 0.0 }
        } else {
            0.5 + x / (2.0 * (2.0 + x * x).sqrt())
        });
    }
    let t = StudentsT::new(0.0, 1.0, df).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(t.cdf(x))
}

pub fn chisq_sf(df: f64, x: f64) -> Result<f64> {
    check_df("chi-square", df)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    let c = ChiSquared::new(df).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(c.sf(x))
}

pub fn f_sf(d1: f64, d2: f64, x: f64) -> Result<f64> {
    check_df("F numerator", d1)?;
    check_df("F denominator", d2)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    let f = FisherSnedecor::new(d1, d2).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(f.sf(x))
}
