//! Checks, suites and module reports serialized to JSON.

use serde::Serialize;

/// Comparison a check value must satisfy against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bound {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
}

/// One named residual compared with a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub tol: f64,
    /// Whether the global tolerance scale applies to this check.
    #[serde(skip)]
    pub scalable: bool,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, bound: Bound, tol: f64, scalable: bool) -> Self {
        let mut c = Self { name: name.into(), value, bound, tol, scalable, pass: false };
        c.evaluate();
        c
    }

    /// `value ≤ tol`, scaled by the tolerance factor.
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, Bound::AtMost, tol, true)
    }

    /// `value ≥ tol`, divided by the tolerance factor.
    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, Bound::AtLeast, tol, true)
    }

    /// Strict `value < tol`, never scaled.
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, Bound::Below, tol, false)
    }

    /// Strict `value > tol`, never scaled.
    pub fn above(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, Bound::Above, tol, false)
    }

    /// Range check `lo ≤ value ≤ hi` as two unscaled checks.
    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> [Self; 2] {
        [
            Self::new(format!("{name}_lower"), value, Bound::AtLeast, lo, false),
            Self::new(format!("{name}_upper"), value, Bound::AtMost, hi, false),
        ]
    }

    /// Check that a count of failures is zero.
    pub fn zero_count(name: impl Into<String>, count: usize) -> Self {
        Self::new(name, count as f64, Bound::AtMost, 0.0, false)
    }

    fn evaluate(&mut self) {
        let v = self.value;
        self.pass = !v.is_nan()
            && match self.bound {
                Bound::AtMost => v <= self.tol,
                Bound::AtLeast => v >= self.tol,
                Bound::Below => v < self.tol,
                Bound::Above => v > self.tol,
            };
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        if self.scalable {
            match self.bound {
                Bound::AtMost => self.tol *= factor,
                Bound::AtLeast => self.tol /= factor,
                Bound::Below | Bound::Above => {}
            }
            self.evaluate();
        }
        self
    }
}

/// Checks belonging to one acceptance criterion or scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suite {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Suite {
    pub fn new(name: impl Into<String>, criterion: Option<u8>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { name: name.into(), criterion, checks, pass }
    }

    pub fn scaled(self, factor: f64) -> Self {
        let checks = self.checks.into_iter().map(|c| c.scaled(factor)).collect();
        Self::new(self.name, self.criterion, checks)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Largest value among checks bounded from above.
    pub fn worst_upper(&self) -> f64 {
        self.checks.iter().filter(|c| matches!(c.bound, Bound::AtMost | Bound::Below)).fold(0.0, |a, c| a.max(c.value))
    }
}

/// Everything one subcommand writes to `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ModuleReport {
    pub module: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    pub suites: Vec<Suite>,
    pub outputs: Vec<String>,
    pub pass: bool,
}

impl ModuleReport {
    pub fn new(module: &str, params: serde_json::Value, suites: Vec<Suite>, outputs: Vec<String>) -> Self {
        let pass = suites.iter().all(|s| s.pass);
        Self { module: module.into(), params, convention: None, suites, outputs, pass }
    }
}
