//! Python bindings: `import maxwil_py`.

use maxwil::cli::{run_tests, Mode, RunConfig};
use maxwil::combine::ResampleScheme;
use maxwil::distributions::RngStream;
use maxwil::ranks::CorrelationMatrix;
use maxwil::robust::{self, BiweightSummary, BoxplotEllipses};
use maxwil::sim::{self, DecisionRule, PowerRow, SimulationConfig};
use maxwil::stat_tests::{self as st, TestKind, TestReport, TwoSampleData};
use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: maxwil::Error) -> PyErr {
    match e {
        maxwil::Error::Numerical(_) | maxwil::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(PyValueError::new_err("expected a non-empty 2-D array"));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn test_list(tests: Option<Vec<String>>) -> PyResult<Vec<TestKind>> {
    match tests {
        None => Ok(TestKind::ALL.to_vec()),
        Some(names) => names
            .iter()
            .map(|n| TestKind::parse(n).ok_or_else(|| PyValueError::new_err(format!("unknown test '{n}'"))))
            .collect(),
    }
}

fn rule(name: &str) -> PyResult<DecisionRule> {
    DecisionRule::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown rule '{name}'")))
}

#[pyclass(name = "TestReport", frozen, module = "maxwil_py")]
struct PyTestReport {
    inner: TestReport,
}

#[pymethods]
impl PyTestReport {
    #[getter]
    fn test(&self) -> &'static str {
        self.inner.test.label()
    }

    #[getter]
    fn rule(&self) -> &str {
        &self.inner.rule
    }

    #[getter]
    fn statistic(&self) -> f64 {
        self.inner.statistic
    }

    #[getter]
    fn p_value(&self) -> Option<f64> {
        self.inner.p_value
    }

    #[getter]
    fn p_value_sum(&self) -> Option<f64> {
        self.inner.p_value_sum
    }

    #[getter]
    fn alpha_point(&self) -> Option<f64> {
        self.inner.alpha_point
    }

    #[getter]
    fn critical_value(&self) -> Option<f64> {
        self.inner.critical_value
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn rejected(&self) -> bool {
        self.inner.decision.is_reject()
    }

    #[getter]
    fn selected_index(&self) -> Option<usize> {
        self.inner.diagnostics.selected_index
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "TestReport(test={}, statistic={:.4}, rejected={})",
            self.inner.test,
            self.inner.statistic,
            self.inner.decision.is_reject()
        )
    }
}

#[pyclass(name = "PowerEstimate", frozen, module = "maxwil_py")]
struct PyPowerEstimate {
    inner: PowerRow,
}

#[pymethods]
impl PyPowerEstimate {
    #[getter]
    fn p(&self) -> usize {
        self.inner.p
    }

    #[getter]
    fn n1(&self) -> usize {
        self.inner.n1
    }

    #[getter]
    fn n2(&self) -> usize {
        self.inner.n2
    }

    #[getter]
    fn rep(&self) -> usize {
        self.inner.rep
    }

    /// Rejection rate per test label.
    fn rates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for r in &self.inner.results {
            d.set_item(r.test.label(), r.rate)?;
        }
        Ok(d)
    }

    /// Monte Carlo standard error per test label.
    fn errors<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for r in &self.inner.results {
            d.set_item(r.test.label(), r.er)?;
        }
        Ok(d)
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.inner)
    }

    fn __repr__(&self) -> String {
        let parts: Vec<String> = self.inner.results.iter().map(|r| format!("{}={:.3}", r.test, r.rate)).collect();
        format!("PowerEstimate(p={}, n1={}, n2={}, {})", self.inner.p, self.inner.n1, self.inner.n2, parts.join(", "))
    }
}

#[pyclass(name = "Biweight", frozen, module = "maxwil_py")]
struct PyBiweight {
    inner: BiweightSummary,
}

#[pymethods]
impl PyBiweight {
    #[getter]
    fn location(&self) -> (f64, f64) {
        (self.inner.location[0], self.inner.location[1])
    }

    #[getter]
    fn scale(&self) -> (f64, f64) {
        (self.inner.scale[0], self.inner.scale[1])
    }

    #[getter]
    fn correlation(&self) -> f64 {
        self.inner.correlation
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    fn squared_distance(&self, x: f64, y: f64) -> f64 {
        self.inner.squared_distance(x, y)
    }

    fn __repr__(&self) -> String {
        format!(
            "Biweight(location={:?}, scale={:?}, correlation={:.4})",
            self.inner.location, self.inner.scale, self.inner.correlation
        )
    }
}

#[pyclass(name = "Boxplot", frozen, module = "maxwil_py")]
struct PyBoxplot {
    inner: BoxplotEllipses,
}

#[pymethods]
impl PyBoxplot {
    #[getter]
    fn center(&self) -> (f64, f64) {
        (self.inner.center[0], self.inner.center[1])
    }

    #[getter]
    fn angle(&self) -> f64 {
        self.inner.angle
    }

    #[getter]
    fn inner_radii(&self) -> (f64, f64) {
        (self.inner.inner_radii[0], self.inner.inner_radii[1])
    }

    #[getter]
    fn outer_radii(&self) -> (f64, f64) {
        (self.inner.outer_radii[0], self.inner.outer_radii[1])
    }

    #[getter]
    fn outliers(&self) -> Vec<usize> {
        self.inner.outliers.clone()
    }

    #[getter]
    fn distances(&self) -> Vec<f64> {
        self.inner.distances.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Boxplot(center={:?}, outliers={})", self.inner.center, self.inner.outliers.len())
    }
}

/// Runs the selected tests on two samples given as lists of rows.
#[pyfunction]
#[pyo3(signature = (x, y, tests=None, alpha=0.05, bootstrap=500, n_mc=10_000, seed=0, rule="sum_bootstrap", scheme="joint"))]
#[allow(clippy::too_many_arguments)]
fn two_sample_test(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    tests: Option<Vec<String>>,
    alpha: f64,
    bootstrap: usize,
    n_mc: usize,
    seed: u64,
    rule: &str,
    scheme: &str,
) -> PyResult<Vec<PyTestReport>> {
    let data = TwoSampleData::new(matrix(&x)?, matrix(&y)?).map_err(err)?;
    let mut cfg = RunConfig::default_for(Mode::Test);
    cfg.tests = test_list(tests)?;
    cfg.alpha = alpha;
    cfg.bootstrap = bootstrap;
    cfg.n_mc = n_mc;
    cfg.seed = seed;
    cfg.rule = self::rule(rule)?;
    cfg.scheme = ResampleScheme::parse(scheme).ok_or_else(|| PyValueError::new_err(format!("unknown scheme '{scheme}'")))?;
    let results = py.detach(|| run_tests(&data, &cfg)).map_err(err)?;
    Ok(results.reports.into_iter().map(|inner| PyTestReport { inner }).collect())
}

/// Pooled max-Wilcoxon statistic: `(statistic, rank_sums, standardized)`.
#[pyfunction]
fn pooled_statistic(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let data = TwoSampleData::new(matrix(&x)?, matrix(&y)?).map_err(err)?;
    let s = st::pooled_max_statistic(&data).map_err(err)?;
    Ok((s.statistic, s.rank_sums, s.standardized))
}

/// Null mean and variance of the rank sum of `m` observations among `m + n`.
#[pyfunction]
fn wilcoxon_moments(m: usize, n: usize) -> PyResult<(f64, f64)> {
    let w = maxwil::ranks::wilcoxon_moments(m, n).map_err(err)?;
    Ok((w.mean, w.variance))
}

/// Monte Carlo estimate of `P(max_j Z_j > t)` for `Z ~ N(0, corr)`.
#[pyfunction]
#[pyo3(signature = (corr, t, n_mc=10_000, seed=0))]
fn max_gaussian_tail(corr: Vec<Vec<f64>>, t: f64, n_mc: usize, seed: u64) -> PyResult<f64> {
    let c = CorrelationMatrix::new(matrix(&corr)?).map_err(err)?;
    st::max_gaussian_tail(&c, t, n_mc, RngStream::new(seed, 0)).map_err(err)
}

#[pyfunction]
fn simulation_error(rate: f64, rep: usize) -> f64 {
    sim::simulation_error(rate, rep)
}

/// Rejection rates of the selected tests over `rep` simulated datasets.
///
/// `shift` is either a scalar applied to every component or one value per
/// component. `marginal` is `normal`, `cauchy` or `lognormal`; `copula` is
/// `independence`, `t` or `frank` with their default parameters.
#[pyfunction]
#[pyo3(signature = (p, n1, n2, shift, marginal="normal", copula="independence", rep=500, alpha=0.05, tests=None, bootstrap=500, n_mc=10_000, rule="randomized", seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_power(
    py: Python<'_>,
    p: usize,
    n1: usize,
    n2: usize,
    shift: &Bound<'_, PyAny>,
    marginal: &str,
    copula: &str,
    rep: usize,
    alpha: f64,
    tests: Option<Vec<String>>,
    bootstrap: usize,
    n_mc: usize,
    rule: &str,
    seed: u64,
) -> PyResult<PyPowerEstimate> {
    let shift: Vec<f64> = match shift.extract::<f64>() {
        Ok(v) => vec![v; p],
        Err(_) => shift.extract()?,
    };
    let mut parsed = RunConfig::default_for(Mode::Simulate);
    parsed.apply("marginal", marginal).map_err(err)?;
    parsed.apply("copulas", copula).map_err(err)?;
    let cfg = SimulationConfig {
        marginal: parsed.marginal,
        copula: parsed.copula_kinds()[0],
        shift,
        rep,
        alpha,
        tests: test_list(tests)?,
        bootstrap,
        n_mc,
        rule: self::rule(rule)?,
        seed,
        ..SimulationConfig::new(p, n1, n2, 0.0)
    };
    let inner = py.detach(|| sim::estimate_power(&cfg)).map_err(err)?;
    Ok(PyPowerEstimate { inner })
}

/// Biweight location, scale and correlation of a bivariate sample.
#[pyfunction]
#[pyo3(signature = (data, c=robust::DEFAULT_TUNING, tolerance=robust::DEFAULT_TOLERANCE))]
fn biweight(data: Vec<Vec<f64>>, c: f64, tolerance: f64) -> PyResult<PyBiweight> {
    let inner = robust::biweight_estimates(&matrix(&data)?, c, tolerance).map_err(err)?;
    Ok(PyBiweight { inner })
}

/// Inner and outer ellipses of the robust bivariate boxplot.
#[pyfunction]
#[pyo3(signature = (data, inner_mass=robust::DEFAULT_INNER_MASS, inflation=None))]
fn bivariate_boxplot(data: Vec<Vec<f64>>, inner_mass: f64, inflation: Option<f64>) -> PyResult<PyBoxplot> {
    let inflation = inflation.unwrap_or_else(robust::default_inflation);
    let inner = robust::bivariate_boxplot(&matrix(&data)?, inner_mass, inflation).map_err(err)?;
    Ok(PyBoxplot { inner })
}

#[pymodule]
fn maxwil_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTestReport>()?;
    m.add_class::<PyPowerEstimate>()?;
    m.add_class::<PyBiweight>()?;
    m.add_class::<PyBoxplot>()?;
    m.add_function(wrap_pyfunction!(two_sample_test, m)?)?;
    m.add_function(wrap_pyfunction!(pooled_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_moments, m)?)?;
    m.add_function(wrap_pyfunction!(max_gaussian_tail, m)?)?;
    m.add_function(wrap_pyfunction!(simulation_error, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_power, m)?)?;
    m.add_function(wrap_pyfunction!(biweight, m)?)?;
    m.add_function(wrap_pyfunction!(bivariate_boxplot, m)?)?;
    Ok(())
}
