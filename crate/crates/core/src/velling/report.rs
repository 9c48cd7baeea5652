use serde::{Deserialize, Serialize};

/// A named measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub uncertainty: f64,
}

/// One inequality `margin ≥ -tolerance` that a check requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub margin: f64,
    pub tolerance: f64,
}

impl Condition {
    pub fn new(name: &str, margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            margin,
            tolerance,
        }
    }

    pub fn holds(&self) -> bool {
        self.margin >= -self.tolerance
    }
}

/// Outcome of one check. `margin`/`tolerance` are those of the first
/// (primary) condition; `passed` requires every condition to hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// The main measured value (e.g. the walk-on-spheres estimate).
    pub value: f64,
    pub std_error: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: u64,
    pub quantities: Vec<Quantity>,
    pub conditions: Vec<Condition>,
    /// Wall time; excluded from reproducibility comparisons.
    pub runtime_s: f64,
    /// Hash of the numerical options the check ran with.
    pub fingerprint: String,
}

impl CheckReport {
    pub(crate) fn new(name: &str, value: f64, std_error: f64, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            value,
            std_error,
            margin: 0.0,
            tolerance: 0.0,
            passed: true,
            seed,
            quantities: Vec::new(),
            conditions: Vec::new(),
            runtime_s: 0.0,
            fingerprint: String::new(),
        }
    }

    pub(crate) fn quantity(mut self, name: &str, value: f64, uncertainty: f64) -> Self {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value,
            uncertainty,
        });
        self
    }

    pub(crate) fn condition(mut self, c: Condition) -> Self {
        if self.conditions.is_empty() {
            self.margin = c.margin;
            self.tolerance = c.tolerance;
        }
        self.passed &= c.holds();
        self.conditions.push(c);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).map(|q| q.value)
    }

    pub fn condition_named(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Copy with the wall time zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self {
            runtime_s: 0.0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_needs_all_conditions() {
        let r = CheckReport::new("x", 1.0, 0.0, 0)
            .condition(Condition::new("a", 0.1, 0.0))
            .condition(Condition::new("b", -0.2, 0.1));
        assert!(!r.passed);
        assert_eq!(r.margin, 0.1);
        let r = CheckReport::new("x", 1.0, 0.0, 0).condition(Condition::new("a", -0.01, 0.02));
        assert!(r.passed);
    }
}
