//! Machine-readable reports and their text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Invalid,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive | Status::Invalid => 2,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
            Status::Invalid => "invalid",
        }
    }
}

/// Everything needed to rerun a command: the global settings plus every
/// command parameter after defaults were applied.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub parameters: BTreeMap<String, Value>,
}

/// One measured quantity. `value` is a number for numerical checks and a
/// boolean or string for structural ones.
#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

impl Measurement {
    fn base(name: &str, value: Value, pass: bool) -> Self {
        Measurement {
            name: name.to_string(),
            value,
            expected: None,
            deviation: None,
            tolerance: None,
            pass,
            claim: None,
            params: Value::Null,
        }
    }

    /// A reported quantity with no pass criterion of its own.
    pub fn info(name: &str, value: impl Into<Value>) -> Self {
        Self::base(name, value.into(), true)
    }

    /// |value - target| <= tol.
    pub fn near(name: &str, value: f64, target: f64, target_label: &str, tol: f64) -> Self {
        let dev = (value - target).abs();
        let mut m = Self::base(name, num(value), dev <= tol);
        m.expected = Some(target_label.to_string());
        m.deviation = Some(dev);
        m.tolerance = Some(tol);
        m
    }

    /// A deviation that must not exceed tol.
    pub fn deviation(name: &str, dev: f64, tol: f64) -> Self {
        let mut m = Self::base(name, num(dev), dev <= tol);
        m.expected = Some("0".into());
        m.deviation = Some(dev);
        m.tolerance = Some(tol);
        m
    }

    /// value >= bound, with the slack already folded into bound.
    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        let mut m = Self::base(name, num(value), value >= bound);
        m.expected = Some(format!(">= {bound}"));
        m
    }

    /// value <= bound, with the slack already folded into bound.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        let mut m = Self::base(name, num(value), value <= bound);
        m.expected = Some(format!("<= {bound}"));
        m
    }

    pub fn flag(name: &str, value: bool, expected: bool) -> Self {
        let mut m = Self::base(name, Value::Bool(value), value == expected);
        m.expected = Some(expected.to_string());
        m
    }

    pub fn equals(name: &str, value: impl Into<Value>, expected: impl Into<Value>) -> Self {
        let (v, e) = (value.into(), expected.into());
        let mut m = Self::base(name, v.clone(), v == e);
        m.expected = Some(e.to_string());
        m
    }

    pub fn claim(mut self, text: &str) -> Self {
        self.claim = Some(text.to_string());
        self
    }

    pub fn params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub header: Header,
    pub status: Status,
    pub exit_code: i32,
    pub measurements: Vec<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Report {
    pub fn new(
        header: Header,
        status: Status,
        measurements: Vec<Measurement>,
        details: Value,
    ) -> Self {
        Report {
            header,
            status,
            exit_code: status.exit_code(),
            measurements,
            error: None,
            details,
        }
    }

    /// Pass iff every measurement passes.
    pub fn from_measurements(
        header: Header,
        measurements: Vec<Measurement>,
        details: Value,
    ) -> Self {
        let pass = measurements.iter().all(|m| m.pass);
        Self::new(header, Status::from_pass(pass), measurements, details)
    }

    pub fn failed(header: Header, status: Status, error: String) -> Self {
        let mut r = Self::new(header, status, Vec::new(), Value::Null);
        r.error = Some(error);
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {}  seed=0x{:X} threads={}",
            h.tool, h.version, h.command, h.seed, h.threads
        );
        for (k, v) in &h.parameters {
            let _ = writeln!(s, "  {k} = {v}");
        }
        for m in &self.measurements {
            let mark = if m.pass { "PASS" } else { "FAIL" };
            let _ = write!(s, "[{mark}] {} = {}", m.name, m.value);
            if let Some(e) = &m.expected {
                let _ = write!(s, "  expected {e}");
            }
            if let Some(d) = m.deviation {
                let _ = write!(s, "  deviation {d:e}");
            }
            if let Some(t) = m.tolerance {
                let _ = write!(s, "  tol {t:e}");
            }
            if !m.params.is_null() {
                let _ = write!(s, "  {}", m.params);
            }
            if let Some(c) = &m.claim {
                let _ = write!(s, "  ({c})");
            }
            s.push('\n');
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error: {e}");
        }
        if !self.details.is_null() {
            let _ = writeln!(
                s,
                "details:\n{}",
                serde_json::to_string_pretty(&self.details).expect("details serialize")
            );
        }
        let _ = writeln!(
            s,
            "status: {} (exit {})",
            self.status.label(),
            self.exit_code
        );
        s
    }
}
