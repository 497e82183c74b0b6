//! Report documents rendered as text or JSON.

use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResultEntry {
    pub name: String,
    pub value: Value,
    pub tolerance: Option<f64>,
    pub provenance: String,
    pub route: String,
    /// Text rendering of `value`.
    #[serde(skip)]
    pub display: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CaseOutcome {
    pub name: String,
    pub detail: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<CaseOutcome>,
    pub checks: Vec<CaseOutcome>,
}

impl SuiteResult {
    pub fn from_checks(name: &str, checks: Vec<CaseOutcome>) -> Self {
        let passed = checks.iter().filter(|c| c.passed).count();
        Self {
            name: name.into(),
            cases: checks.len(),
            passed,
            failed: checks.len() - passed,
            failures: checks.iter().filter(|c| !c.passed).cloned().collect(),
            checks,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub header: Header,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub results: Vec<ResultEntry>,
    pub diagnostics: Vec<String>,
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            header: Header { tool: "starq", version: env!("CARGO_PKG_VERSION") },
            command: command.into(),
            params: BTreeMap::new(),
            results: Vec::new(),
            diagnostics: Vec::new(),
            suites: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.insert(key.into(), v.into());
    }

    pub fn result(
        &mut self,
        name: &str,
        value: Value,
        display: String,
        tolerance: Option<f64>,
        provenance: &str,
        route: &str,
    ) {
        self.results.push(ResultEntry {
            name: name.into(),
            value,
            tolerance,
            provenance: provenance.into(),
            route: route.into(),
            display,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            out.push_str(&format!("{} = {}\n", r.name, r.display));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("# {d}\n"));
        }
        for s in &self.suites {
            out.push_str(&format!("[{}] {}/{} passed\n", s.name, s.passed, s.cases));
            for c in &s.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                out.push_str(&format!("  {}: {} {}\n", c.name, c.detail, mark));
            }
        }
        if !self.suites.is_empty() {
            let verdict = if self.all_passed() { "all suites passed" } else { "FAILURES" };
            out.push_str(&format!("{verdict}\n"));
        }
        out
    }
}

/// Complex number as `{"re": .., "im": ..}`.
pub fn complex_value(c: num_complex::Complex64) -> Value {
    serde_json::json!({ "re": c.re, "im": c.im })
}

/// Fixed decimals matching `tol`, trailing zeros trimmed.
pub fn fmt_to_tol(v: f64, tol: f64) -> String {
    let places = (-tol.log10()).ceil().clamp(1.0, 15.0) as usize;
    let s = format!("{v:.places$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
