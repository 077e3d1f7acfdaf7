//! Named pass/fail checks with the residual that decided them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `residual` is finite and strictly below `threshold`.
    pub fn below(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Check { check: name.into(), residual, pass: residual.is_finite() && residual < threshold }
    }

    /// A check whose verdict is decided elsewhere (rank or dimension tests).
    pub fn with_verdict(name: impl Into<String>, residual: f64, pass: bool) -> Self {
        Check { check: name.into(), residual, pass }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    /// Errors with the first failing check named.
    pub fn ensure_pass(&self) -> Result<()> {
        match self.failures().next() {
            None => Ok(()),
            Some(c) => Err(Error::Verification(format!("{} (residual {:.3e})", c.check, c.residual))),
        }
    }
}

pub type ValidationReport = Report;
