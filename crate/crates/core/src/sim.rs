//! Size and power simulation: data under a marginal/copula design with a
//! location shift on the second sample, any subset of the tests, and the
//! binomial simulation error of each estimated rejection rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combine::ResampleScheme;
use crate::distributions::{sample_shifted_dataset, splitmix64, CopulaKind, CopulaSpec, Marginal, RngStream};
use crate::error::{invalid, Error, Result};
use crate::stat_tests::{
    hotelling_t2, jk_randomized_test, jk_test_with, ttilde_test_with, randomized_ttilde_test, HotellingMode, Norm, TestKind,
    TwoSampleData, DEFAULT_MC,
};

/// How the per-observation statistics are turned into one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionRule {
    /// One uniformly chosen observation against the averaged-tail critical
    /// value (normal quantile for the norm-distance tests).
    Randomized,
    /// Sum of all per-observation p-values against a bootstrap alpha point.
    SumBootstrap,
}

impl DecisionRule {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "randomized" => Some(DecisionRule::Randomized),
            "sum_bootstrap" | "sum" => Some(DecisionRule::SumBootstrap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub marginal: Marginal,
    pub copula: CopulaKind,
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    pub shift: Vec<f64>,
    pub rep: usize,
    pub alpha: f64,
    pub tests: Vec<TestKind>,
    /// Bootstrap replicates for the sum rule.
    pub bootstrap: usize,
    pub n_mc: usize,
    pub rule: DecisionRule,
    /// Resampling scheme of the sum rule.
    #[serde(default)]
    pub scheme: ResampleScheme,
    pub seed: u64,
}

pub const DEFAULT_REP: usize = 500;

impl SimulationConfig {
    /// Normal marginal, independent components, equal shift `mu` on every
    /// component, all four tests.
    pub fn new(p: usize, n1: usize, n2: usize, mu: f64) -> Self {
        Self {
            marginal: Marginal::Normal,
            copula: CopulaKind::Independence,
            n1,
            n2,
            p,
            shift: vec![mu; p],
            rep: DEFAULT_REP,
            alpha: 0.05,
            tests: TestKind::ALL.to_vec(),
            bootstrap: crate::combine::DEFAULT_BOOTSTRAP,
            n_mc: DEFAULT_MC,
            rule: DecisionRule::Randomized,
            scheme: ResampleScheme::Joint,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rep == 0 {
            return Err(Error::Config("rep must be at least 1".into()));
        }
        if self.shift.len() != self.p {
            return Err(Error::Config(format!("shift has length {} but p = {}", self.shift.len(), self.p)));
        }
        if self.n1 < 2 || self.n2 < 2 {
            return Err(Error::Config("both sample sizes must be at least 2".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::Config("no tests selected".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        self.marginal.validate()?;
        CopulaSpec::new(self.copula, self.p)?;
        Ok(())
    }

    /// Exact F only for the normal marginal.
    pub fn hotelling_mode(&self) -> HotellingMode {
        match self.marginal {
            Marginal::Normal => HotellingMode::ExactF,
            _ => HotellingMode::AsymptoticChisq,
        }
    }
}

fn test_tag(kind: TestKind) -> u64 {
    match kind {
        TestKind::Ht => 1,
        TestKind::Jk => 2,
        TestKind::JkA => 3,
        TestKind::Ttilde => 4,
    }
}

/// Stream id for replicate `b` and purpose `tag` (0 = data, 1.. = tests).
pub fn derive_stream(b: u64, tag: u64) -> u64 {
    debug_assert!(tag < 256);
    splitmix64((b << 8) | tag)
}

pub fn replicate_data(cfg: &SimulationConfig, b: usize) -> Result<TwoSampleData> {
    let copula = CopulaSpec::new(cfg.copula, cfg.p)?;
    let mut rng = RngStream::new(cfg.seed, derive_stream(b as u64, 0)).rng();
    sample_shifted_dataset(&cfg.marginal, &copula, cfg.n1, cfg.n2, &cfg.shift, &mut rng)
}

fn run_test(cfg: &SimulationConfig, data: &TwoSampleData, kind: TestKind, b: usize) -> Result<bool> {
    let stream = RngStream::new(cfg.seed, derive_stream(b as u64, test_tag(kind)));
    let report = match (kind, cfg.rule) {
        (TestKind::Ht, _) => hotelling_t2(data, cfg.hotelling_mode(), cfg.alpha)?,
        (TestKind::Ttilde, DecisionRule::Randomized) => randomized_ttilde_test(data, cfg.alpha, cfg.n_mc, stream)?,
        (TestKind::Ttilde, DecisionRule::SumBootstrap) => {
            ttilde_test_with(data, cfg.alpha, cfg.bootstrap, cfg.n_mc, cfg.scheme, stream)?
        }
        (TestKind::Jk | TestKind::JkA, rule) => {
            let norm = if kind == TestKind::Jk { Norm::L2 } else { Norm::L1 };
            match rule {
                DecisionRule::Randomized => jk_randomized_test(data, norm, cfg.alpha, stream)?,
                DecisionRule::SumBootstrap => jk_test_with(data, norm, cfg.alpha, cfg.bootstrap, cfg.scheme, stream)?,
            }
        }
    };
    Ok(report.decision.is_reject())
}

/// Rejection indicators of replicate `b`, in `cfg.tests` order.
pub fn run_replication(cfg: &SimulationConfig, b: usize) -> Result<Vec<bool>> {
    let data = replicate_data(cfg, b)?;
    cfg.tests.iter().map(|&kind| run_test(cfg, &data, kind, b)).collect()
}

/// `sqrt(rate (1 - rate) / rep)`.
pub fn simulation_error(rate: f64, rep: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&rate) && rep >= 1);
    (rate * (1.0 - rate) / rep as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPower {
    pub test: TestKind,
    pub rejections: usize,
    pub rate: f64,
    pub er: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub marginal: String,
    pub copula: String,
    pub p: usize,
    pub n1: usize,
    pub n2: usize,
    pub shift: Vec<f64>,
    pub rep: usize,
    pub alpha: f64,
    pub rule: DecisionRule,
    pub results: Vec<TestPower>,
}

impl PowerRow {
    pub fn rate(&self, kind: TestKind) -> Option<f64> {
        self.results.iter().find(|r| r.test == kind).map(|r| r.rate)
    }

    pub fn er(&self, kind: TestKind) -> Option<f64> {
        self.results.iter().find(|r| r.test == kind).map(|r| r.er)
    }
}

pub fn estimate_power(cfg: &SimulationConfig) -> Result<PowerRow> {
    estimate_power_with(cfg, true)
}

/// Replicates run in parallel or serially with identical results; each
/// replicate draws from its own derived streams.
pub fn estimate_power_with(cfg: &SimulationConfig, parallel: bool) -> Result<PowerRow> {
    cfg.validate()?;
    let indicators: Vec<Vec<bool>> = if parallel {
        (0..cfg.rep).into_par_iter().map(|b| run_replication(cfg, b)).collect::<Result<_>>()?
    } else {
        (0..cfg.rep).map(|b| run_replication(cfg, b)).collect::<Result<_>>()?
    };
    let results = cfg
        .tests
        .iter()
        .enumerate()
        .map(|(k, &test)| {
            let rejections = indicators.iter().filter(|v| v[k]).count();
            let rate = rejections as f64 / cfg.rep as f64;
            TestPower { test, rejections, rate, er: simulation_error(rate, cfg.rep) }
        })
        .collect();
    Ok(PowerRow {
        marginal: cfg.marginal.name(),
        copula: cfg.copula.name(),
        p: cfg.p,
        n1: cfg.n1,
        n2: cfg.n2,
        shift: cfg.shift.clone(),
        rep: cfg.rep,
        alpha: cfg.alpha,
        rule: cfg.rule,
        results,
    })
}

pub fn table_sweep(grid: &[SimulationConfig]) -> Result<Vec<PowerRow>> {
    if grid.is_empty() {
        return invalid("simulation grid is empty");
    }
    grid.iter().map(estimate_power).collect()
}

/// Parses a shift vector of dimension `p`.
///
/// A bare number `m` means `m` on every component. Otherwise the entries are
/// comma-separated, and `vxk` repeats `v` `k` times, so `0.2x2,1x2` is
/// `(0.2, 0.2, 1, 1)`.
pub fn parse_shift(spec: &str, p: usize) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad shift entry '{s}'")))
    };
    if !spec.contains(',') && !spec.contains('x') {
        return Ok(vec![num(spec)?; p]);
    }
    let mut out = Vec::with_capacity(p);
    for part in spec.split(',') {
        match part.split_once('x') {
            Some((v, k)) => {
                let k: usize = k.trim().parse().map_err(|_| Error::Config(format!("bad repeat count in '{part}'")))?;
                out.extend(std::iter::repeat_n(num(v)?, k));
            }
            None => out.push(num(part)?),
        }
    }
    if out.len() != p {
        return Err(Error::Config(format!("shift '{spec}' has {} entries but p = {p}", out.len())));
    }
    Ok(out)
}

/// Cartesian grid over copulas, dimensions, sample sizes and shifts, in
/// that nesting order, with the remaining fields taken from `base`.
pub fn build_grid(
    base: &SimulationConfig,
    copulas: &[CopulaKind],
    dims: &[usize],
    sizes: &[(usize, usize)],
    shifts: &[String],
) -> Result<Vec<SimulationConfig>> {
    let mut grid = Vec::new();
    for &copula in copulas {
        for &p in dims {
            for &(n1, n2) in sizes {
                for s in shifts {
                    let shift = parse_shift(s, p)?;
                    grid.push(SimulationConfig { copula, p, n1, n2, shift, ..base.clone() });
                }
            }
        }
    }
    Ok(grid)
}

fn shift_label(shift: &[f64]) -> String {
    let parts: Vec<String> = shift.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(" "))
}

fn rule_label(rule: DecisionRule) -> &'static str {
    match rule {
        DecisionRule::Randomized => "randomized",
        DecisionRule::SumBootstrap => "sum_bootstrap",
    }
}

fn finish_csv(fingerprint: &str, records: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(&r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(format!("# config {fingerprint}\n{}", String::from_utf8_lossy(&body)))
}

/// One line per row: configuration columns followed by a rate and an ER
/// column per test, under a `# config <fingerprint>` line.
pub fn rows_to_csv(rows: &[PowerRow], fingerprint: &str) -> Result<String> {
    let tests: Vec<TestKind> = rows.first().map(|r| r.results.iter().map(|t| t.test).collect()).unwrap_or_default();
    let mut header: Vec<String> =
        ["marginal", "copula", "p", "n1", "n2", "shift", "rep", "alpha", "rule"].iter().map(|s| s.to_string()).collect();
    for t in &tests {
        header.push(t.to_string());
        header.push(format!("{t}_er"));
    }
    let mut records = vec![header];
    for r in rows {
        let mut rec = vec![
            r.marginal.clone(),
            r.copula.clone(),
            r.p.to_string(),
            r.n1.to_string(),
            r.n2.to_string(),
            shift_label(&r.shift),
            r.rep.to_string(),
            r.alpha.to_string(),
            rule_label(r.rule).to_string(),
        ];
        for t in &tests {
            rec.push(r.rate(*t).map(|v| format!("{v:.5}")).unwrap_or_default());
            rec.push(r.er(*t).map(|v| format!("{v:.5}")).unwrap_or_default());
        }
        records.push(rec);
    }
    finish_csv(fingerprint, records)
}

/// Table layout: one line per (marginal, copula, p, shift) and one rate
/// column per (sample sizes, test), like a printed power table.
pub fn rows_to_table_csv(rows: &[PowerRow], fingerprint: &str) -> Result<String> {
    let mut sizes: Vec<(usize, usize)> = Vec::new();
    let mut tests: Vec<TestKind> = Vec::new();
    let mut keys: Vec<(String, String, usize, String)> = Vec::new();
    for r in rows {
        if !sizes.contains(&(r.n1, r.n2)) {
            sizes.push((r.n1, r.n2));
        }
        for t in &r.results {
            if !tests.contains(&t.test) {
                tests.push(t.test);
            }
        }
        let key = (r.marginal.clone(), r.copula.clone(), r.p, shift_label(&r.shift));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut header: Vec<String> = ["marginal", "copula", "p", "shift"].iter().map(|s| s.to_string()).collect();
    for (n1, n2) in &sizes {
        for t in &tests {
            header.push(format!("{t}@{n1}x{n2}"));
        }
    }
    let mut records = vec![header];
    for key in &keys {
        let mut rec = vec![key.0.clone(), key.1.clone(), key.2.to_string(), key.3.clone()];
        for &(n1, n2) in &sizes {
            let row = rows.iter().find(|r| {
                r.n1 == n1
                    && r.n2 == n2
                    && r.marginal == key.0
                    && r.copula == key.1
                    && r.p == key.2
                    && shift_label(&r.shift) == key.3
            });
            for t in &tests {
                rec.push(row.and_then(|r| r.rate(*t)).map(|v| format!("{v:.5}")).unwrap_or_default());
            }
        }
        records.push(rec);
    }
    finish_csv(fingerprint, records)
}
