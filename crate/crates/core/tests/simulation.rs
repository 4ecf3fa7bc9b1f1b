use maxwil::distributions::{CopulaKind, Marginal};
use maxwil::sim::{estimate_power, PowerRow, SimulationConfig};
use maxwil::stat_tests::TestKind;

fn run(marginal: Marginal, p: usize, n1: usize, n2: usize, mu: f64, tests: &[TestKind]) -> PowerRow {
    let cfg = SimulationConfig {
        marginal,
        copula: CopulaKind::Independence,
        rep: 500,
        n_mc: 2000,
        tests: tests.to_vec(),
        seed: 31,
        ..SimulationConfig::new(p, n1, n2, mu)
    };
    estimate_power(&cfg).unwrap()
}

#[test]
fn lognormal_power_falls_below_size_for_jk() {
    let row = run(Marginal::lognormal(), 10, 50, 50, 1.0, &[TestKind::Ttilde, TestKind::Jk]);
    let t = row.rate(TestKind::Ttilde).unwrap();
    let jk = row.rate(TestKind::Jk).unwrap();
    assert!((t - 0.93581).abs() <= 0.04, "Ttilde {t}");
    assert!((jk - 0.03328).abs() <= 0.02, "JK {jk}");
}

#[test]
fn rank_tests_hold_size_under_heavy_tails_and_skew() {
    let tests = [TestKind::Ttilde, TestKind::Jk, TestKind::JkA];
    for marginal in [Marginal::Cauchy, Marginal::lognormal()] {
        let row = run(marginal, 2, 50, 50, 0.0, &tests);
        let slack = 3.0 * (0.05f64 * 0.95 / 500.0).sqrt();
        for t in tests {
            let rate = row.rate(t).unwrap();
            assert!((rate - 0.05).abs() <= slack, "{} {t}: {rate}", marginal.name());
        }
    }
}

#[test]
fn unequal_sizes_sit_between_balanced_runs() {
    let t = [TestKind::Ttilde];
    let small = run(Marginal::Normal, 2, 50, 50, 0.5, &t);
    let mixed = run(Marginal::Normal, 2, 50, 100, 0.5, &t);
    let large = run(Marginal::Normal, 2, 100, 100, 0.5, &t);
    let er = [&small, &mixed, &large].iter().map(|r| r.er(TestKind::Ttilde).unwrap()).fold(0.0, f64::max);
    let (lo, mid, hi) = (
        small.rate(TestKind::Ttilde).unwrap(),
        mixed.rate(TestKind::Ttilde).unwrap(),
        large.rate(TestKind::Ttilde).unwrap(),
    );
    assert!(mid >= lo - 3.0 * er && mid <= hi + 3.0 * er, "{lo} {mid} {hi}");
}
