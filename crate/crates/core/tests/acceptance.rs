//! Acceptance criteria 1-10. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero when any criterion fails.

mod common;

use std::process::Command;
use std::time::Instant;

use maxwil::distributions::{CopulaKind, CopulaSpec, Marginal, RngStream};
use maxwil::ranks::{wilcoxon_moments, CorrelationMatrix};
use maxwil::sim::{estimate_power, estimate_power_with, simulation_error, PowerRow, SimulationConfig};
use maxwil::stat_tests::{
    distance_block, max_gaussian_tail, observation_statistic, pooled_max_statistic, TestKind, TwoSampleData,
};

type Outcome = Result<String, String>;

const SEED: u64 = 20_240_611;

fn power(marginal: Marginal, p: usize, n: usize, mu: f64, rep: usize, tests: &[TestKind], n_mc: usize) -> PowerRow {
    let cfg = SimulationConfig {
        marginal,
        copula: CopulaKind::Independence,
        rep,
        n_mc,
        tests: tests.to_vec(),
        seed: SEED,
        ..SimulationConfig::new(p, n, n, mu)
    };
    estimate_power(&cfg).expect("simulation runs")
}

fn within(name: &str, value: f64, target: f64, tol: f64) -> Outcome {
    let line = format!("{name} = {value:.4} (target {target} +/- {tol})");
    if (value - target).abs() <= tol + 1e-12 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(|p| p.is_ok());
    let text: Vec<String> = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect();
    if ok {
        Ok(text.join("; "))
    } else {
        Err(text.join("; "))
    }
}

fn rate(row: &PowerRow, t: TestKind) -> f64 {
    row.rate(t).expect("test was run")
}

fn size_control() -> Outcome {
    let mut parts = Vec::new();
    for p in [2, 4, 10] {
        let row = power(Marginal::Normal, p, 50, 0.0, 2000, &TestKind::ALL, 2000);
        for t in TestKind::ALL {
            parts.push(within(&format!("size {t} p={p}"), rate(&row, t), 0.05, 0.015));
        }
    }
    all(parts)
}

fn normal_power() -> Outcome {
    let row = power(Marginal::Normal, 2, 50, 1.0, 500, &[TestKind::Ttilde, TestKind::Ht], 10_000);
    all(vec![
        within("Ttilde", rate(&row, TestKind::Ttilde), 0.778, 0.06),
        within("HT", rate(&row, TestKind::Ht), 1.0, 0.0),
    ])
}

fn heavy_tails() -> Outcome {
    let row = power(Marginal::Cauchy, 10, 50, 1.0, 500, &[TestKind::Ttilde, TestKind::Jk], 10_000);
    let (t, jk) = (rate(&row, TestKind::Ttilde), rate(&row, TestKind::Jk));
    let gap = if t - jk >= 0.5 { Ok(format!("gap {:.3} >= 0.5", t - jk)) } else { Err(format!("gap {:.3} < 0.5", t - jk)) };
    all(vec![within("Ttilde", t, 0.876, 0.06), within("JK", jk, 0.131, 0.05), gap])
}

fn lognormal() -> Outcome {
    let row = power(Marginal::lognormal(), 10, 50, 1.0, 500, &[TestKind::Ttilde, TestKind::Jk], 10_000);
    let (t, jk) = (rate(&row, TestKind::Ttilde), rate(&row, TestKind::Jk));
    all(vec![
        if jk < 0.06 { Ok(format!("JK = {jk:.4} < 0.06")) } else { Err(format!("JK = {jk:.4} >= 0.06")) },
        if t >= 0.88 { Ok(format!("Ttilde = {t:.4} >= 0.88")) } else { Err(format!("Ttilde = {t:.4} < 0.88")) },
    ])
}

fn er_formula() -> Outcome {
    let er = simulation_error(0.05, 10_000);
    let three_sig = format!("{er:.2e}");
    let max = (0..=1000).map(|k| simulation_error(k as f64 / 1000.0, 10_000)).fold(0.0, f64::max);
    let line = format!("ER(0.05) = {three_sig}, max ER = {max}");
    if three_sig == "2.18e-3" && max == 0.005 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0usize;
    for n1 in 2..=6 {
        for n2 in 2..=(8 - n1) {
            for p in 1..=2 {
                for k in 0..200u64 {
                    let mut rng = RngStream::new(SEED ^ k, (n1 * 100 + n2 * 10 + p) as u64).rng();
                    let tied = k % 2 == 0;
                    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                        use rand::Rng;
                        if tied {
                            rng.random_range(0..4) as f64
                        } else {
                            rng.random::<f64>() * 10.0 - 5.0
                        }
                    };
                    let x: Vec<Vec<f64>> = (0..n1).map(|_| (0..p).map(|_| draw(&mut rng)).collect()).collect();
                    let y: Vec<Vec<f64>> = (0..n2).map(|_| (0..p).map(|_| draw(&mut rng)).collect()).collect();
                    let data = TwoSampleData::from_rows(&x, &y).map_err(|e| e.to_string())?;
                    let ctx = format!("n1={n1} n2={n2} p={p} dataset {k}");

                    let pooled = pooled_max_statistic(&data).map_err(|e| e.to_string())?;
                    let (w, h) = common::pooled_oracle(&x, &y);
                    let (mean, var) = common::exhaustive_moments(n1, n2);
                    if pooled.rank_sums != w {
                        return Err(format!("{ctx}: W_j {:?} vs {:?}", pooled.rank_sums, w));
                    }
                    for j in 0..p {
                        if (pooled.standardized[j] - (w[j] - mean) / var.sqrt()).abs() > 1e-12 {
                            return Err(format!("{ctx}: standardized W_j"));
                        }
                        for l in 0..p {
                            if (pooled.corr.get(j, l) - h[j][l]).abs() > 1e-12 {
                                return Err(format!("{ctx}: H[{j},{l}]"));
                            }
                        }
                    }
                    for i in 0..n1 {
                        let s = observation_statistic(&distance_block(&data, i).map_err(|e| e.to_string())?)
                            .map_err(|e| e.to_string())?;
                        let o = common::observation_oracle(&x, &y, i);
                        if s.rank_sums != o.rank_sums {
                            return Err(format!("{ctx}: W_j({i}) {:?} vs {:?}", s.rank_sums, o.rank_sums));
                        }
                        for j in 0..p {
                            if (s.standardized[j] - o.standardized[j]).abs() > 1e-12 {
                                return Err(format!("{ctx}: W_j^o({i})"));
                            }
                            for l in 0..p {
                                if (s.corr.get(j, l) - o.corr[j][l]).abs() > 1e-12 {
                                    return Err(format!("{ctx}: r({i})[{j},{l}]"));
                                }
                            }
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} datasets match the brute-force oracle"))
}

fn exhaustive_moments() -> Outcome {
    let mut sums = Vec::new();
    for a in 1..=4u32 {
        for b in (a + 1)..=4 {
            sums.push((a + b) as f64);
        }
    }
    let mean = sums.iter().sum::<f64>() / 6.0;
    let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 6.0;
    let w = wilcoxon_moments(2, 2).map_err(|e| e.to_string())?;
    let line = format!("mean {} vs {mean}, variance {} vs {var} over {} assignments", w.mean, w.variance, sums.len());
    if w.mean == mean && w.variance == var && sums.len() == 6 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn tail_calibration() -> Outcome {
    let one = max_gaussian_tail(&CorrelationMatrix::identity(1), 1.6449, 100_000, RngStream::new(SEED, 1))
        .map_err(|e| e.to_string())?;
    let two = max_gaussian_tail(&CorrelationMatrix::identity(2), 1.0, 100_000, RngStream::new(SEED, 2))
        .map_err(|e| e.to_string())?;
    all(vec![within("p=1 tail", one, 0.05, 0.002), within("p=2 tail", two, 0.29098, 0.004)])
}

fn monotonicity() -> Outcome {
    let mut parts = Vec::new();
    let t = [TestKind::Ttilde];
    let mut by_n = Vec::new();
    for n in [50, 100] {
        let rows: Vec<PowerRow> = [2, 4, 10].iter().map(|&p| power(Marginal::Normal, p, n, 0.5, 500, &t, 10_000)).collect();
        for w in rows.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let slack = 3.0 * a.er(TestKind::Ttilde).unwrap().max(b.er(TestKind::Ttilde).unwrap());
            let (ra, rb) = (rate(a, TestKind::Ttilde), rate(b, TestKind::Ttilde));
            let line = format!("n={n}: p={} {ra:.3} -> p={} {rb:.3}", a.p, b.p);
            parts.push(if rb >= ra - slack { Ok(line) } else { Err(line) });
        }
        by_n.push(rows);
    }
    for k in 0..3 {
        let (a, b) = (&by_n[0][k], &by_n[1][k]);
        let slack = 3.0 * a.er(TestKind::Ttilde).unwrap().max(b.er(TestKind::Ttilde).unwrap());
        let (ra, rb) = (rate(a, TestKind::Ttilde), rate(b, TestKind::Ttilde));
        let line = format!("p={}: n=50 {ra:.3} -> n=100 {rb:.3}", a.p);
        parts.push(if rb >= ra - slack { Ok(line) } else { Err(line) });
    }
    all(parts)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let copula = CopulaSpec::new(CopulaKind::frank_default(), 3).map_err(|e| e.to_string())?;
    let data = maxwil::distributions::sample_shifted_dataset(
        &Marginal::Cauchy,
        &copula,
        30,
        25,
        &[0.3, 0.0, 0.3],
        &mut RngStream::new(SEED, 0).rng(),
    )
    .map_err(|e| e.to_string())?;
    let write = |name: &str, m: &nalgebra::DMatrix<f64>| {
        let path = dir.path().join(name);
        let text: Vec<String> = m.row_iter().map(|r| r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")).collect();
        std::fs::write(&path, text.join("\n")).map(|_| path)
    };
    let x = write("x.csv", data.x()).map_err(|e| e.to_string())?;
    let y = write("y.csv", data.y()).map_err(|e| e.to_string())?;
    let payload = || -> Result<String, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_maxwil"))
            .args(["--mode", "test", "--seed", "17", "--B", "200", "--n-mc", "2000"])
            .arg("--x")
            .arg(&x)
            .arg("--y")
            .arg(&y)
            .output()
            .map_err(|e| e.to_string())?;
        if !matches!(out.status.code(), Some(0) | Some(2)) {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        v.as_object_mut().ok_or("report is not an object")?.remove("timings");
        serde_json::to_string(&v).map_err(|e| e.to_string())
    };
    let (a, b) = (payload()?, payload()?);
    let cli = if a == b { Ok(format!("CLI payloads identical ({} bytes)", a.len())) } else { Err("CLI payloads differ".into()) };

    let cfg = SimulationConfig { rep: 60, n_mc: 1000, seed: SEED, copula: CopulaKind::t_default(), ..SimulationConfig::new(3, 20, 20, 0.4) };
    let par = estimate_power_with(&cfg, true).map_err(|e| e.to_string())?;
    let ser = estimate_power_with(&cfg, false).map_err(|e| e.to_string())?;
    let sim = if par == ser { Ok("parallel == serial".to_string()) } else { Err("parallel != serial".into()) };
    all(vec![cli, sim])
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("size control", size_control),
        ("normal power band", normal_power),
        ("heavy-tail dominance", heavy_tails),
        ("lognormal pathology", lognormal),
        ("ER formula", er_formula),
        ("oracle equivalence", oracle_equivalence),
        ("exhaustive moments", exhaustive_moments),
        ("tail calibration", tail_calibration),
        ("monotonicity", monotonicity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.1}s]: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.1}s]: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
