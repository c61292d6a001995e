use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

/// One checked quantity. `pass` is `abs_err ≤ tol`; a NaN error fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub id: String,
    pub params: Value,
    pub expected: f64,
    pub computed: f64,
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Case {
    pub fn new(id: impl Into<String>, params: Value, expected: f64, computed: f64, tol: f64) -> Self {
        Case::with_error(id, params, expected, computed, (computed - expected).abs(), tol)
    }

    /// A case whose error metric is supplied directly, e.g. the size of a
    /// residual chain or a relative error.
    pub fn with_error(id: impl Into<String>, params: Value, expected: f64, computed: f64, abs_err: f64, tol: f64) -> Self {
        Case { id: id.into(), params, expected, computed, abs_err, tol, pass: abs_err <= tol }
    }

    /// Passes when `computed ≤ bound`; the error is the excess.
    pub fn upper_bound(id: impl Into<String>, params: Value, bound: f64, computed: f64) -> Self {
        Case::with_error(id, params, bound, computed, (computed - bound).max(0.0), 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timestamp {
    pub unix: u64,
    pub wall_s: f64,
}

/// A suite result as written by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub cases: Vec<Case>,
    pub seed: Option<u64>,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    pub timestamp: Timestamp,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn case(&self, id: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Collects cases and stamps the report when done.
pub struct ReportBuilder {
    suite: String,
    seed: Option<u64>,
    config: Value,
    details: Option<Value>,
    cases: Vec<Case>,
    start: Instant,
}

impl ReportBuilder {
    pub fn new(suite: impl Into<String>, seed: Option<u64>, config: Value) -> Self {
        ReportBuilder { suite: suite.into(), seed, config, details: None, cases: Vec::new(), start: Instant::now() }
    }

    pub fn push(&mut self, c: Case) {
        self.cases.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Case>) {
        self.cases.extend(cs);
    }

    pub fn details(&mut self, v: Value) {
        self.details = Some(v);
    }

    /// Cases are sorted by id so output order never depends on scheduling.
    pub fn finish(mut self) -> Report {
        self.cases.sort_by(|a, b| a.id.cmp(&b.id));
        let unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Report {
            schema: SCHEMA,
            suite: self.suite,
            cases: self.cases,
            seed: self.seed,
            config: self.config,
            details: self.details,
            timestamp: Timestamp { unix, wall_s: self.start.elapsed().as_secs_f64() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn pass_flag_follows_tolerance() {
        assert!(Case::new("a", json!({}), 1.0, 1.0 + 1e-13, 1e-12).pass);
        assert!(!Case::new("a", json!({}), 1.0, 1.1, 1e-12).pass);
        assert!(!Case::with_error("a", json!({}), 0.0, f64::NAN, f64::NAN, 1.0).pass);
        assert!(Case::upper_bound("b", json!({}), 0.5, 0.25).pass);
        assert!(!Case::upper_bound("b", json!({}), 0.5, 0.75).pass);
    }

    #[test]
    fn cases_sorted_and_schema_present() {
        let mut b = ReportBuilder::new("s", Some(3), json!({"tol": 1.0}));
        b.push(Case::new("z", json!({}), 0.0, 0.0, 0.0));
        b.push(Case::new("a", json!({}), 0.0, 1.0, 0.0));
        let r = b.finish();
        assert_eq!(r.cases[0].id, "a");
        assert!(!r.passed());
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert!(v["timestamp"]["unix"].is_u64());
    }
}
