//! Command-line plumbing: CSV ingestion, run configuration (flags plus a
//! flat `key=value` file), and the JSON/CSV report.
//!
//! Exit codes: 0 when every selected test accepts or the run completes, 2
//! when any selected test rejects, 1 on any error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combine::{ResampleScheme, DEFAULT_BOOTSTRAP, MIN_BOOTSTRAP};
use crate::distributions::{CopulaKind, Marginal, RngStream, DEFAULT_FRANK_BETA, DEFAULT_SDLOG, DEFAULT_T_DF, DEFAULT_T_RHO};
use crate::error::{Error, Result};
use crate::robust::{bivariate_boxplot, default_inflation, BoxplotEllipses, DEFAULT_INNER_MASS};
use crate::sim::{self, DecisionRule, PowerRow, SimulationConfig};
use crate::stat_tests::{
    hotelling_t2, jk_randomized_test, jk_test_with, ttilde_test_with, randomized_ttilde_test, HotellingMode, Norm,
    TestKind, TestReport, TwoSampleData, DEFAULT_MC, MIN_MC,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Test,
    Simulate,
    Boxplot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One rate column per (sample sizes, test).
    Wide,
    /// One line per simulated configuration.
    Long,
}

/// Reads a rectangular numeric CSV: rows are observations, columns are
/// components. Errors carry 1-based line and column numbers of the file.
pub fn ingest_csv(path: &Path, has_header: bool) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text, has_header)
}

pub fn parse_csv(text: &str, has_header: bool) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (k, record) in reader.records().enumerate() {
        let line = k + 1;
        let record = record.map_err(|e| Error::Parse { row: line, column: 0, message: e.to_string() })?;
        if has_header && k == 0 {
            continue;
        }
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row: line,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} columns, found {}", record.len()),
                })
            }
            Some(_) => {}
        }
        let mut row = Vec::with_capacity(record.len());
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                column: j + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { row: line, column: j + 1, message: format!("'{cell}' is not finite") });
            }
            row.push(v);
        }
        rows.push(row);
    }
    let Some(p) = width else {
        return Err(Error::Parse { row: 1, column: 1, message: "no data rows".into() });
    };
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

#[derive(Parser, Debug, Clone, Default)]
#[command(name = "maxwil", version, about = "Distance-based max-Wilcoxon two-sample location tests")]
pub struct CliArgs {
    /// test | simulate | boxplot
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// First sample, one observation per row
    #[arg(long)]
    pub x: Option<PathBuf>,
    /// Second sample
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Comma-separated subset of Ttilde, JK, JK_a, HT
    #[arg(long)]
    pub tests: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bootstrap replicates of the summed-p-value rule
    #[arg(long = "B")]
    pub b: Option<usize>,
    /// Monte-Carlo draws for the max-Gaussian tail
    #[arg(long)]
    pub n_mc: Option<usize>,
    /// Simulation replicates
    #[arg(long)]
    pub rep: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Interchange the two samples
    #[arg(long)]
    pub swap: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat key=value file; its entries override the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSVs start with a header line
    #[arg(long)]
    pub header: bool,
    /// randomized | sum_bootstrap
    #[arg(long)]
    pub rule: Option<String>,
}

/// Fully resolved settings of one run. Its JSON form is hashed into the
/// report fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub x: Option<PathBuf>,
    pub y: Option<PathBuf>,
    pub header: bool,
    pub tests: Vec<TestKind>,
    pub alpha: f64,
    pub bootstrap: usize,
    pub n_mc: usize,
    pub rep: usize,
    pub seed: u64,
    pub swap: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub rule: DecisionRule,
    pub scheme: ResampleScheme,
    pub ht_mode: HotellingMode,
    pub marginal: Marginal,
    pub copulas: Vec<String>,
    pub t_df: f64,
    pub t_rho: f64,
    pub frank_beta: f64,
    pub dims: Vec<usize>,
    pub sizes: Vec<(usize, usize)>,
    pub shifts: Vec<String>,
    pub layout: Layout,
    pub inner_mass: f64,
    pub inflation: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Test,
            x: None,
            y: None,
            header: false,
            tests: vec![TestKind::Ttilde, TestKind::Jk, TestKind::JkA, TestKind::Ht],
            alpha: 0.05,
            bootstrap: DEFAULT_BOOTSTRAP,
            n_mc: DEFAULT_MC,
            rep: sim::DEFAULT_REP,
            seed: 0,
            swap: false,
            out: None,
            format: Format::Json,
            rule: DecisionRule::SumBootstrap,
            scheme: ResampleScheme::Joint,
            ht_mode: HotellingMode::ExactF,
            marginal: Marginal::Normal,
            copulas: vec!["independence".into()],
            t_df: DEFAULT_T_DF,
            t_rho: DEFAULT_T_RHO,
            frank_beta: DEFAULT_FRANK_BETA,
            dims: vec![2],
            sizes: vec![(50, 50), (100, 100)],
            shifts: ["0", "0.2", "0.5", "1"].iter().map(|s| s.to_string()).collect(),
            layout: Layout::Wide,
            inner_mass: DEFAULT_INNER_MASS,
            inflation: default_inflation(),
        }
    }
}

fn cfg_err(key: &str, value: &str) -> Error {
    Error::Config(format!("bad value '{value}' for '{key}'"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| cfg_err(key, value))
}

fn list<T>(key: &str, value: &str, sep: char, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value.split(sep).map(|s| f(s.trim()).ok_or_else(|| cfg_err(key, value))).collect()
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(cfg_err(key, value)),
    }
}

pub fn parse_tests(value: &str) -> Result<Vec<TestKind>> {
    let tests = list("tests", value, ',', TestKind::parse)?;
    if tests.is_empty() {
        return Err(Error::Config("no tests selected".into()));
    }
    Ok(tests)
}

impl RunConfig {
    /// The rule a mode uses when none is given: the summed-p-value rule for
    /// a single dataset, the randomized rule inside simulations.
    pub fn default_for(mode: Mode) -> Self {
        let rule = match mode {
            Mode::Simulate => DecisionRule::Randomized,
            _ => DecisionRule::SumBootstrap,
        };
        Self { mode, rule, ..Self::default() }
    }

    /// Sets one `key=value` entry.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "mode" => self.mode = Mode::from_str(v, true).map_err(|_| cfg_err(key, v))?,
            "x" => self.x = Some(PathBuf::from(v)),
            "y" => self.y = Some(PathBuf::from(v)),
            "header" => self.header = flag(key, v)?,
            "tests" => self.tests = parse_tests(v)?,
            "alpha" => self.alpha = num(key, v)?,
            "B" | "b" | "bootstrap" => self.bootstrap = num(key, v)?,
            "n_mc" | "n-mc" => self.n_mc = num(key, v)?,
            "rep" => self.rep = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "swap" => self.swap = flag(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = Format::from_str(v, true).map_err(|_| cfg_err(key, v))?,
            "rule" => self.rule = DecisionRule::parse(v).ok_or_else(|| cfg_err(key, v))?,
            "scheme" => self.scheme = ResampleScheme::parse(v).ok_or_else(|| cfg_err(key, v))?,
            "ht_mode" => {
                self.ht_mode = match v {
                    "exact_f" => HotellingMode::ExactF,
                    "asymptotic_chisq" => HotellingMode::AsymptoticChisq,
                    _ => return Err(cfg_err(key, v)),
                }
            }
            "marginal" => {
                self.marginal = match v {
                    "normal" => Marginal::Normal,
                    "cauchy" => Marginal::Cauchy,
                    "lognormal" => Marginal::Lognormal { sdlog: DEFAULT_SDLOG },
                    _ => return Err(cfg_err(key, v)),
                }
            }
            "sdlog" => match self.marginal {
                Marginal::Lognormal { .. } => self.marginal = Marginal::Lognormal { sdlog: num(key, v)? },
                _ => return Err(Error::Config("'sdlog' needs marginal=lognormal set before it".into())),
            },
            "copula" | "copulas" => {
                self.copulas = list(key, v, ',', |s| {
                    matches!(s, "independence" | "t" | "frank").then(|| s.to_string())
                })?
            }
            "t_df" => self.t_df = num(key, v)?,
            "t_rho" => self.t_rho = num(key, v)?,
            "frank_beta" => self.frank_beta = num(key, v)?,
            "dims" | "p" => self.dims = list(key, v, ',', |s| s.parse().ok())?,
            "sizes" => {
                self.sizes = list(key, v, ',', |s| {
                    let (a, b) = s.split_once(':')?;
                    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
                })?
            }
            "shifts" | "shift" => self.shifts = v.split(';').map(|s| s.trim().to_string()).collect(),
            "layout" => {
                self.layout = match v {
                    "wide" => Layout::Wide,
                    "long" => Layout::Long,
                    _ => return Err(cfg_err(key, v)),
                }
            }
            "inner_mass" => self.inner_mass = num(key, v)?,
            "inflation" => self.inflation = num(key, v)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key=value` line; blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", k + 1)))?;
            self.apply(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", k + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Defaults of the selected mode, then the flags, then the config file.
    pub fn resolve(args: &CliArgs) -> Result<Self> {
        let file_text = match &args.config {
            Some(path) => Some(std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?),
            None => None,
        };
        let mut mode = args.mode;
        if let Some(text) = &file_text {
            let mut probe = RunConfig::default();
            for line in text.lines() {
                if let Some((k, v)) = line.split_once('=') {
                    if k.trim() == "mode" {
                        probe.apply(k, v)?;
                        mode = Some(probe.mode);
                    }
                }
            }
        }
        let mut cfg = Self::default_for(mode.unwrap_or(Mode::Test));
        cfg.x = args.x.clone();
        cfg.y = args.y.clone();
        cfg.header = args.header;
        if let Some(t) = &args.tests {
            cfg.tests = parse_tests(t)?;
        }
        if let Some(v) = args.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = args.b {
            cfg.bootstrap = v;
        }
        if let Some(v) = args.n_mc {
            cfg.n_mc = v;
        }
        if let Some(v) = args.rep {
            cfg.rep = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        cfg.swap = args.swap;
        cfg.out = args.out.clone();
        if let Some(v) = args.format {
            cfg.format = v;
        }
        if let Some(r) = &args.rule {
            cfg.apply("rule", r)?;
        }
        if let Some(text) = &file_text {
            cfg.apply_file_text(text)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        let sum_rule = self.rule == DecisionRule::SumBootstrap;
        if sum_rule && self.tests.iter().any(|t| *t != TestKind::Ht) && self.bootstrap < MIN_BOOTSTRAP {
            return Err(Error::Config(format!("B must be at least {MIN_BOOTSTRAP}, got {}", self.bootstrap)));
        }
        if self.tests.contains(&TestKind::Ttilde) && self.n_mc < MIN_MC {
            return Err(Error::Config(format!("n_mc must be at least {MIN_MC}, got {}", self.n_mc)));
        }
        let require = |p: &Option<PathBuf>, name: &str| -> Result<()> {
            match p {
                None => Err(Error::Config(format!("mode {:?} needs --{name}", self.mode).to_lowercase())),
                Some(path) if !path.is_file() => Err(Error::Config(format!("input file {} does not exist", path.display()))),
                Some(_) => Ok(()),
            }
        };
        match self.mode {
            Mode::Test => {
                require(&self.x, "x")?;
                require(&self.y, "y")?;
            }
            Mode::Boxplot => {
                require(&self.x, "x")?;
                if self.y.is_some() {
                    require(&self.y, "y")?;
                }
            }
            Mode::Simulate => {
                if self.rep == 0 {
                    return Err(Error::Config("rep must be at least 1".into()));
                }
                if self.dims.is_empty() || self.sizes.is_empty() || self.shifts.is_empty() || self.copulas.is_empty() {
                    return Err(Error::Config("simulation grid has an empty axis".into()));
                }
            }
        }
        Ok(())
    }

    pub fn copula_kinds(&self) -> Vec<CopulaKind> {
        self.copulas
            .iter()
            .map(|c| match c.as_str() {
                "t" => CopulaKind::TCopula { df: self.t_df, rho: self.t_rho },
                "frank" => CopulaKind::Frank { beta: self.frank_beta },
                _ => CopulaKind::Independence,
            })
            .collect()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn simulation_grid(&self) -> Result<Vec<SimulationConfig>> {
        let base = SimulationConfig {
            marginal: self.marginal,
            alpha: self.alpha,
            rep: self.rep,
            tests: self.tests.clone(),
            bootstrap: self.bootstrap,
            n_mc: self.n_mc,
            rule: self.rule,
            scheme: self.scheme,
            seed: self.seed,
            ..SimulationConfig::new(1, 2, 2, 0.0)
        };
        sim::build_grid(&base, &self.copula_kinds(), &self.dims, &self.sizes, &self.shifts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResults {
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    pub reports: Vec<TestReport>,
    /// `(test, sum of p-values, alpha point)` for the summed-p-value rule.
    pub triples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotOutput {
    pub file: PathBuf,
    pub ellipses: BoxplotEllipses,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Results {
    Tests(TestResults),
    Power(Vec<PowerRow>),
    Boxplot(Vec<BoxplotOutput>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub fingerprint: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub results: Results,
    pub timings: Timings,
}

impl Report {
    /// [`EXIT_REJECT`] when any test rejects, otherwise [`EXIT_OK`].
    pub fn exit_code(&self) -> i32 {
        match &self.results {
            Results::Tests(t) if t.reports.iter().any(|r| r.decision.is_reject()) => EXIT_REJECT,
            _ => EXIT_OK,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// The report without its timings: identical across reruns of the same
    /// configuration.
    pub fn payload(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        v
    }

    pub fn to_csv(&self) -> Result<String> {
        match &self.results {
            Results::Power(rows) => match self.config.layout {
                Layout::Wide => sim::rows_to_table_csv(rows, &self.fingerprint),
                Layout::Long => sim::rows_to_csv(rows, &self.fingerprint),
            },
            Results::Tests(t) => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Io(e.to_string());
                w.write_record([
                    "test", "rule", "statistic", "p_value", "p_value_sum", "alpha_point", "critical_value", "decision",
                ])
                .map_err(io)?;
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                for r in &t.reports {
                    w.write_record([
                        r.test.to_string(),
                        r.rule.clone(),
                        r.statistic.to_string(),
                        opt(r.p_value),
                        opt(r.p_value_sum),
                        opt(r.alpha_point),
                        opt(r.critical_value),
                        if r.decision.is_reject() { "reject" } else { "accept" }.to_string(),
                    ])
                    .map_err(io)?;
                }
                finish(w, &self.fingerprint)
            }
            Results::Boxplot(outputs) => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Io(e.to_string());
                w.write_record([
                    "file", "center_x", "center_y", "angle", "inner_major", "inner_minor", "outer_major", "outer_minor",
                    "outliers",
                ])
                .map_err(io)?;
                for o in outputs {
                    let e = &o.ellipses;
                    let outliers: Vec<String> = e.outliers.iter().map(|i| i.to_string()).collect();
                    w.write_record([
                        o.file.display().to_string(),
                        e.center[0].to_string(),
                        e.center[1].to_string(),
                        e.angle.to_string(),
                        e.inner_radii[0].to_string(),
                        e.inner_radii[1].to_string(),
                        e.outer_radii[0].to_string(),
                        e.outer_radii[1].to_string(),
                        outliers.join(" "),
                    ])
                    .map_err(io)?;
                }
                finish(w, &self.fingerprint)
            }
        }
    }

    pub fn render(&self) -> Result<String> {
        match self.config.format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn finish(w: csv::Writer<Vec<u8>>, fingerprint: &str) -> Result<String> {
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(format!("# config {fingerprint}\n{}", String::from_utf8_lossy(&body)))
}

fn test_stream(seed: u64, kind: TestKind) -> RngStream {
    let id = match kind {
        TestKind::Ht => 1,
        TestKind::Jk => 2,
        TestKind::JkA => 3,
        TestKind::Ttilde => 4,
    };
    RngStream::new(seed, id)
}

/// Runs every selected test on one dataset.
pub fn run_tests(data: &TwoSampleData, cfg: &RunConfig) -> Result<TestResults> {
    let mut reports = Vec::with_capacity(cfg.tests.len());
    for &kind in &cfg.tests {
        let stream = test_stream(cfg.seed, kind);
        let report = match kind {
            TestKind::Ht => hotelling_t2(data, cfg.ht_mode, cfg.alpha)?,
            TestKind::Ttilde => match cfg.rule {
                DecisionRule::SumBootstrap => ttilde_test_with(data, cfg.alpha, cfg.bootstrap, cfg.n_mc, cfg.scheme, stream)?,
                DecisionRule::Randomized => randomized_ttilde_test(data, cfg.alpha, cfg.n_mc, stream)?,
            },
            TestKind::Jk | TestKind::JkA => {
                let norm = if kind == TestKind::Jk { Norm::L2 } else { Norm::L1 };
                match cfg.rule {
                    DecisionRule::SumBootstrap => jk_test_with(data, norm, cfg.alpha, cfg.bootstrap, cfg.scheme, stream)?,
                    DecisionRule::Randomized => jk_randomized_test(data, norm, cfg.alpha, stream)?,
                }
            }
        };
        reports.push(report);
    }
    let triples = reports.iter().filter_map(TestReport::triple).collect();
    Ok(TestResults { n1: data.n1(), n2: data.n2(), p: data.p(), reports, triples })
}

fn load_pair(cfg: &RunConfig) -> Result<TwoSampleData> {
    let (Some(xp), Some(yp)) = (&cfg.x, &cfg.y) else {
        return Err(Error::Config("mode test needs both --x and --y".into()));
    };
    let data = TwoSampleData::new(ingest_csv(xp, cfg.header)?, ingest_csv(yp, cfg.header)?)?;
    Ok(if cfg.swap { data.swapped() } else { data })
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    cfg.validate()?;
    let results = match cfg.mode {
        Mode::Test => Results::Tests(run_tests(&load_pair(cfg)?, cfg)?),
        Mode::Simulate => Results::Power(sim::table_sweep(&cfg.simulation_grid()?)?),
        Mode::Boxplot => {
            let mut outputs = Vec::new();
            for path in [&cfg.x, &cfg.y].into_iter().flatten() {
                let ellipses = bivariate_boxplot(&ingest_csv(path, cfg.header)?, cfg.inner_mass, cfg.inflation)?;
                outputs.push(BoxplotOutput { file: path.clone(), ellipses });
            }
            Results::Boxplot(outputs)
        }
    };
    Ok(Report {
        fingerprint: cfg.fingerprint(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        results,
        timings: Timings { total_seconds: start.elapsed().as_secs_f64() },
    })
}

/// Resolves, runs, writes the report, and returns the process exit code.
pub fn main_with(args: &CliArgs) -> i32 {
    let outcome = RunConfig::resolve(args).and_then(|cfg| {
        let report = run(&cfg)?;
        let text = report.render()?;
        match &cfg.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
            None => println!("{text}"),
        }
        Ok(report.exit_code())
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let msg = serde_json::json!({ "error": e.to_string() });
            eprintln!("{msg}");
            EXIT_ERROR
        }
    }
}
