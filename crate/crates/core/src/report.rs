//! Run reports shared by the command-line tool and the Python bindings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::estimate::MCEstimate;
use crate::functionals::QuotientResult;
use crate::optimize::{KResult, MinimizeResult, SharpnessPoint};

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    /// Observed value: a residual, an estimate, or a count of failures.
    pub value: f64,
    /// What `value` is compared with.
    pub target: f64,
    /// Tolerance of the comparison, in the units given by `detail`.
    pub tolerance: f64,
    pub stderr: Option<f64>,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(suite: &str, name: impl Into<String>, pass: bool, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            suite: suite.into(),
            name: name.into(),
            pass,
            value,
            target,
            tolerance,
            stderr: None,
            detail: String::new(),
        }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Parameters identifying a Monte Carlo quantity in tabular output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub alpha: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResultItem {
    Bound(BoundReport),
    Quotient { name: String, labels: Labels, result: QuotientResult },
    Estimate { name: String, labels: Labels, estimate: MCEstimate },
    Value { name: String, labels: Labels, value: f64 },
    Check(CheckOutcome),
    Sharpness(SharpnessPoint),
    CurvatureSearch(KResult),
    QuotientSearch(MinimizeResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub results: Vec<ResultItem>,
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
    pub suite_pass: Option<bool>,
    pub version: String,
}

/// One CSV line: `name, value, stderr, kind, d, N, alpha, seed, samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub name: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub kind: String,
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub alpha: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
}

pub const CSV_COLUMNS: [&str; 9] = ["name", "value", "stderr", "kind", "d", "N", "alpha", "seed", "samples"];

impl RunReport {
    pub fn new(command: impl Into<String>, version: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            params: BTreeMap::new(),
            results: Vec::new(),
            seed: None,
            wall_time_ms: 0,
            suite_pass: None,
            version: version.into(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Flattens the results to CSV rows.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        let est_row = |name: String, kind: &str, l: &Labels, e: &MCEstimate| CsvRow {
            name,
            value: Some(e.mean),
            stderr: Some(e.stderr),
            kind: kind.into(),
            d: l.d,
            n: l.n,
            alpha: l.alpha.clone(),
            seed: Some(e.seed),
            samples: Some(e.n_samples),
        };
        let plain = |name: String, kind: &str, value: Option<f64>, l: &Labels| CsvRow {
            name,
            value,
            stderr: None,
            kind: kind.into(),
            d: l.d,
            n: l.n,
            alpha: l.alpha.clone(),
            seed: None,
            samples: None,
        };
        let none = Labels::default();
        for item in &self.results {
            match item {
                ResultItem::Bound(b) => rows.push(CsvRow {
                    name: b.name.clone(),
                    value: b.value,
                    stderr: None,
                    kind: b.kind.to_string(),
                    d: b.params.d,
                    n: b.params.n,
                    alpha: b.params.alpha.clone(),
                    seed: None,
                    samples: None,
                }),
                ResultItem::Quotient { name, labels, result } => {
                    for (part, q) in [("T", Some(&result.t)), ("X", Some(&result.x)), ("Z", result.z.as_ref()), ("quotient", Some(&result.quotient))] {
                        let Some(q) = q else { continue };
                        let full = format!("{name}.{part}");
                        rows.push(match q.estimate() {
                            Some(e) => est_row(full, "estimate", labels, e),
                            None => plain(full, "exact", Some(q.value()), labels),
                        });
                    }
                    if let Some(b) = &result.bound_checked {
                        let kind = if b.pass { "pass" } else { "fail" };
                        rows.push(plain(format!("{name}.{}_bound", b.name), kind, Some(b.bound), labels));
                    }
                }
                ResultItem::Estimate { name, labels, estimate } => rows.push(est_row(name.clone(), "estimate", labels, estimate)),
                ResultItem::Value { name, labels, value } => rows.push(plain(name.clone(), "value", Some(*value), labels)),
                ResultItem::Check(c) => {
                    let mut r = plain(format!("{}.{}", c.suite, c.name), if c.pass { "pass" } else { "fail" }, Some(c.value), &none);
                    r.stderr = c.stderr;
                    rows.push(r);
                }
                ResultItem::Sharpness(p) => {
                    let l = Labels { d: Some(1), n: Some(p.n), alpha: Some(p.alpha.to_string()) };
                    rows.push(est_row(format!("sharpness[delta={}].quotient", p.delta), "estimate", &l, &p.quotient));
                    rows.push(est_row(format!("sharpness[delta={}].beta", p.delta), "estimate", &l, &p.beta));
                    rows.push(est_row(format!("sharpness[delta={}].upper", p.delta), "estimate", &l, &p.upper));
                }
                ResultItem::CurvatureSearch(k) => {
                    let l = Labels { d: Some(k.measure.atoms.dim()), n: Some(k.measure.atoms.count()), alpha: None };
                    rows.push(plain("K_lower_bound".into(), "lower", Some(k.value), &l));
                }
                ResultItem::QuotientSearch(m) => {
                    if let Some(e) = m.result.quotient.estimate() {
                        let l = Labels { d: Some(m.d), n: Some(m.n), alpha: None };
                        rows.push(est_row("quotient_search.best".into(), "upper", &l, e));
                    }
                }
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bound_table;
    use crate::functionals::{BoundCheck, Quantity};

    #[test]
    fn json_round_trip_is_lossless() {
        let mut r = RunReport::new("bounds", "0.1.0").param("d", 3).param("N", 3);
        r.results.extend(bound_table(2, 3, None, None).unwrap().into_iter().map(ResultItem::Bound));
        let est = MCEstimate { mean: 0.1 + 0.2, stderr: 1.0 / 3.0, n_samples: 10, seed: u64::MAX, n_rejected: 0 };
        r.results.push(ResultItem::Quotient {
            name: "q".into(),
            labels: Labels { d: Some(3), n: Some(3), alpha: None },
            result: QuotientResult {
                t: Quantity::MonteCarlo(est),
                x: Quantity::Exact { value: std::f64::consts::PI },
                z: None,
                quotient: Quantity::MonteCarlo(est),
                bound_checked: Some(BoundCheck::new("b", 1.0, 0.5, 0.0)),
                method: "importance".into(),
            },
        });
        r.results.push(ResultItem::Check(CheckOutcome::new("s", "c", true, 1e-300, 0.0, 1e-12).with_stderr(2.5e-17)));
        r.seed = Some(42);
        r.suite_pass = Some(true);
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_rows_cover_results() {
        let mut r = RunReport::new("bounds", "0.1.0");
        r.results.extend(bound_table(3, 3, None, None).unwrap().into_iter().map(ResultItem::Bound));
        let rows = r.csv_rows();
        assert_eq!(rows.len(), r.results.len());
        assert!(rows.iter().all(|row| row.d == Some(3)));
    }
}
