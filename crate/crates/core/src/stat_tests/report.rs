use std::fmt;

use serde::{Deserialize, Serialize};

/// The tests implemented by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Distance-based max-Wilcoxon test.
    Ttilde,
    /// Rank-sum test on Euclidean interpoint distances.
    Jk,
    /// Rank-sum test on L1 interpoint distances.
    JkA,
    /// Hotelling T-squared.
    Ht,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [TestKind::Ht, TestKind::Jk, TestKind::JkA, TestKind::Ttilde];

    pub fn label(&self) -> &'static str {
        match self {
            TestKind::Ttilde => "Ttilde",
            TestKind::Jk => "JK",
            TestKind::JkA => "JK_a",
            TestKind::Ht => "HT",
        }
    }

    /// Accepts the labels above, case-insensitively, plus `T~` and `t`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ttilde" | "t~" | "t" => Some(TestKind::Ttilde),
            "jk" => Some(TestKind::Jk),
            "jk_a" | "jka" | "jk-a" => Some(TestKind::JkA),
            "ht" | "hotelling" => Some(TestKind::Ht),
            _ => None,
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    Accept,
}

impl Decision {
    pub fn from_reject(reject: bool) -> Self {
        if reject {
            Decision::Reject
        } else {
            Decision::Accept
        }
    }

    pub fn is_reject(&self) -> bool {
        matches!(self, Decision::Reject)
    }
}

/// Per-observation entry of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationDiagnostic {
    pub index: usize,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_observation: Vec<ObservationDiagnostic>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selected_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub resample_scheme: Option<crate::combine::ResampleScheme>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub degenerate_resamples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub degrees_of_freedom: Option<(f64, f64)>,
}

/// Outcome of one test on one dataset.
///
/// Sum-combined tests fill `p_value_sum` and `alpha_point` and reject when
/// the sum falls below the point. Single-statistic tests fill `p_value` and,
/// where a threshold exists, `critical_value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub rule: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub p_value_sum: Option<f64>,
    pub alpha_point: Option<f64>,
    pub critical_value: Option<f64>,
    pub alpha: f64,
    pub decision: Decision,
    pub diagnostics: Diagnostics,
}

impl TestReport {
    /// `(test, sum of p-values, alpha point)` for sum-combined tests.
    pub fn triple(&self) -> Option<String> {
        match (self.p_value_sum, self.alpha_point) {
            (Some(s), Some(a)) => Some(format!("({}, {:.2}, {:.2})", self.test, s, a)),
            _ => None,
        }
    }
}
