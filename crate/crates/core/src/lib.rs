//! Distance-based max-Wilcoxon test for the two-sample multivariate location
//! problem, with its competitors, a bootstrap rule for combining dependent
//! per-observation p-values, copula samplers, a size/power simulation
//! harness, and a robust bivariate boxplot.

pub mod cli;
pub mod combine;
pub mod distributions;
mod error;
pub mod ranks;
pub mod robust;
pub mod sim;
pub mod stat_tests;

pub use error::{Error, Result};
