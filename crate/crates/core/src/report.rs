use serde::{Deserialize, Serialize};

/// One named invariant check: passes iff `deviation <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Outcome of a validator. Failures are data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Informational findings that do not affect the verdict.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self, name: impl Into<String>, deviation: f64, threshold: f64) -> &mut Check {
        // NaN deviations must fail.
        let passed = deviation <= threshold;
        self.checks.push(Check {
            name: name.into(),
            deviation,
            threshold,
            passed,
            detail: None,
        });
        self.checks.last_mut().unwrap()
    }

    pub fn check_with(
        &mut self,
        name: impl Into<String>,
        deviation: f64,
        threshold: f64,
        detail: Option<String>,
    ) {
        self.check(name, deviation, threshold).detail = detail;
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails() {
        let mut r = ValidationReport::new();
        r.check("a", 0.0, 0.0);
        assert!(r.passed());
        r.check("b", f64::NAN, 1.0);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }
}
