//! Pass/fail record of named identities, with the first witness of each failure.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Ledger {
    pub entries: Vec<Entry>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records an identity; `failure` carries the first witness when it does not hold.
    pub fn record(&mut self, name: impl Into<String>, failure: Option<String>) {
        self.entries.push(Entry { name: name.into(), passed: failure.is_none(), witness: failure });
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.record(name, None);
    }

    /// Records the outcome of a fallible check; errors become failures with their message as witness.
    pub fn record_result(&mut self, name: impl Into<String>, r: Result<()>) {
        self.record(name, r.err().map(|e| e.to_string()));
    }

    pub fn extend(&mut self, other: Ledger) {
        self.entries.extend(other.entries);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Turns the first failure into an [`Error::Identity`].
    pub fn into_result(self) -> Result<Ledger> {
        if let Some(e) = self.failures().next() {
            return Err(Error::identity(e.name.clone(), e.witness.clone().unwrap_or_default()));
        }
        Ok(self)
    }

    /// Plain-text table, one identity per line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let status = if e.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{status}  {}", e.name));
            if let Some(w) = &e.witness {
                s.push_str(&format!("  [{w}]"));
            }
            s.push('\n');
        }
        s
    }
}

/// Collects the first failure witness of a family of checks.
#[derive(Default)]
pub struct FirstFailure(pub Option<String>);

impl FirstFailure {
    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        if !ok && self.0.is_none() {
            self.0 = Some(witness());
        }
    }

    pub fn fail(&mut self, witness: impl FnOnce() -> String) {
        self.check(false, witness);
    }

    pub fn is_clean(&self) -> bool {
        self.0.is_none()
    }
}
