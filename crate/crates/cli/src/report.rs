//! JSON verification report.
//!
//! Schema: `{command, config_echo, checks, details, wall_ms}` where `checks`
//! maps a check name to `{max, mean, threshold, pass}` and `pass ⇔ max < threshold`.
//! Everything except `wall_ms` is a deterministic function of the configuration.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub max: f64,
    pub mean: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Summary of per-sample residuals; failed samples count as non-finite.
    pub fn from_values(values: &[f64], threshold: f64) -> Self {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
            return Self {
                max: f64::INFINITY,
                mean: mean(&finite),
                threshold,
                pass: false,
            };
        }
        let max = values.iter().copied().fold(0.0, f64::max);
        Self {
            max,
            mean: mean(values),
            threshold,
            pass: max < threshold,
        }
    }

    pub fn single(value: f64, threshold: f64) -> Self {
        Self::from_values(&[value], threshold)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config_echo: BTreeMap<String, String>,
    pub checks: BTreeMap<String, Check>,
    pub details: BTreeMap<String, Value>,
    pub wall_ms: f64,
}

impl Report {
    pub fn new(command: &str, config_echo: BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_string(),
            config_echo,
            checks: BTreeMap::new(),
            details: BTreeMap::new(),
            wall_ms: 0.0,
        }
    }

    pub fn check(&mut self, name: &str, check: Check) {
        self.checks.insert(name.to_string(), check);
    }

    pub fn detail(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(name.to_string(), v);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    /// Pretty JSON; infinite values are written as `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_below_threshold() {
        let c = Check::from_values(&[1e-8, 3e-7, 2e-7], 1e-6);
        assert!(c.pass);
        assert_eq!(c.max, 3e-7);
        assert!((c.mean - 1.7e-7).abs() < 1e-20);
        assert!(!Check::single(1e-6, 1e-6).pass);
        assert!(!Check::from_values(&[], 1.0).pass);
        assert!(!Check::from_values(&[0.0, f64::NAN], 1.0).pass);
    }

    #[test]
    fn schema_keys() {
        let mut r = Report::new(
            "generate",
            BTreeMap::from([("psi".to_string(), "z".to_string())]),
        );
        r.check("hyperboloid", Check::single(1e-9, 1e-6));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(
            keys,
            ["checks", "command", "config_echo", "details", "wall_ms"]
        );
        let c = &v["checks"]["hyperboloid"];
        for k in ["max", "mean", "threshold", "pass"] {
            assert!(c.get(k).is_some());
        }
    }
}
