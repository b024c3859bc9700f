//! `verify <suite>`: run a property suite and report it as JSON.

use carnot_core::suites::{run_suite, SuiteReport, SUITE_NAMES};
use serde_json::{json, Value};

use crate::ConfigError;

pub fn report_json(report: &SuiteReport, seed: u64) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "passed": c.passed,
                "samples": c.samples,
                "violations": c.violations,
                "max_error": finite(c.max_error),
                "tolerance": finite(c.tolerance),
                "note": c.note,
            })
        })
        .collect();
    json!({
        "suite": report.suite,
        "seed": seed,
        "passed": report.passed(),
        "checks": checks,
    })
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

pub fn run_verify(suite: &str, seed: u64) -> Result<SuiteReport, ConfigError> {
    run_suite(suite, seed)
        .ok_or_else(|| ConfigError(format!("unknown suite `{suite}` (expected one of {})", SUITE_NAMES.join(", "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(run_verify("bogus", 0).is_err());
    }

    #[test]
    fn json_shape() {
        let r = carnot_core::suites::algebra_suite(5, 1);
        let v = report_json(&r, 1);
        assert_eq!(v["suite"], "algebra");
        assert_eq!(v["passed"], true);
        assert!(!v["checks"].as_array().unwrap().is_empty());
    }
}
