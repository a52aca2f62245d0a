use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
}

impl Cmp {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Cmp::Le => value <= threshold,
            Cmp::Ge => value >= threshold,
            Cmp::Lt => value < threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Lt => "<",
        }
    }
}

/// One measured quantity against its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub cmp: Cmp,
    pub threshold: f64,
    pub pass: bool,
    /// Why the condition passed although the comparison itself failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waiver: Option<String>,
}

impl Condition {
    pub fn new(name: impl Into<String>, value: f64, cmp: Cmp, threshold: f64) -> Self {
        Condition { name: name.into(), value, cmp, threshold, pass: cmp.holds(value, threshold), waiver: None }
    }

    /// Passes when the comparison holds or, failing that, when `alternative`
    /// does; the latter case is recorded as a waiver with `reason`. Used for
    /// order requirements that are moot once errors sit at rounding level.
    pub fn either(name: impl Into<String>, value: f64, cmp: Cmp, threshold: f64, alternative: bool, reason: &str) -> Self {
        let mut c = Condition::new(name, value, cmp, threshold);
        if !c.pass && alternative {
            c.pass = true;
            c.waiver = Some(reason.to_string());
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub conditions: Vec<Condition>,
    /// Free-form measured values that are reported but not thresholded.
    pub notes: Vec<(String, f64)>,
}

impl CheckResult {
    pub fn new(id: &str, title: &str, conditions: Vec<Condition>) -> Self {
        let pass = !conditions.is_empty() && conditions.iter().all(|c| c.pass);
        CheckResult { id: id.into(), title: title.into(), pass, conditions, notes: Vec::new() }
    }

    pub fn with_notes(mut self, notes: Vec<(String, f64)>) -> Self {
        self.notes = notes;
        self
    }

    /// A check that could not run counts as a failure.
    pub fn errored(id: &str, title: &str, err: &crate::Error) -> Self {
        CheckResult {
            id: id.into(),
            title: title.into(),
            pass: false,
            conditions: vec![Condition {
                name: format!("error: {err}"),
                value: f64::NAN,
                cmp: Cmp::Le,
                threshold: 0.0,
                pass: false,
                waiver: None,
            }],
            notes: Vec::new(),
        }
    }

    /// `PASS C01 title | cond=value (<= thr) ...`
    pub fn line(&self) -> String {
        let conds: Vec<String> = self
            .conditions
            .iter()
            .map(|c| {
                let flag = match (&c.waiver, c.pass) {
                    (Some(w), _) => format!(" [waived: {w}]"),
                    (None, true) => String::new(),
                    (None, false) => " !".into(),
                };
                format!("{}={:.3e} ({} {:.3e}){flag}", c.name, c.value, c.cmp.symbol(), c.threshold)
            })
            .collect();
        format!("{} {} {} | {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.title, conds.join("; "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    pub grid: Option<String>,
    pub dt: Option<f64>,
    pub epsilon: Option<f64>,
}

impl Environment {
    pub fn new(seed: u64) -> Self {
        Environment { version: env!("CARGO_PKG_VERSION").into(), seed, grid: None, dt: None, epsilon: None }
    }
}

/// Outcome of one experiment. Serialization omits the wall-clock so that
/// repeated runs produce identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: String,
    pub config: serde_json::Value,
    pub environment: Environment,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub wall_clock_s: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditions_and_lines() {
        let ok = Condition::new("x", 1.0, Cmp::Le, 2.0);
        let bad = Condition::new("y", 3.0, Cmp::Ge, 4.0);
        assert!(ok.pass && !bad.pass);
        let w = Condition::either("z", -1.0, Cmp::Ge, 1.9, true, "floor");
        assert!(w.pass && w.waiver.as_deref() == Some("floor"));
        assert!(Condition::either("z", 2.0, Cmp::Ge, 1.9, true, "floor").waiver.is_none());
        let r = CheckResult::new("C99", "demo", vec![ok.clone(), bad]);
        assert!(!r.pass && r.line().starts_with("FAIL C99 demo") && r.line().contains(" !"));
        assert!(CheckResult::new("C98", "w", vec![w]).line().contains("[waived: floor]"));
        assert!(!CheckResult::new("C97", "empty", vec![]).pass);
    }

    #[test]
    fn report_roundtrip_omits_wall_clock() {
        let rep = RunReport {
            kind: "evolve".into(),
            config: serde_json::json!({ "a": 1 }),
            environment: Environment::new(3),
            checks: vec![CheckResult::new("c", "t", vec![Condition::new("x", 0.1, Cmp::Lt, 1.0)])],
            artifacts: vec!["trace.csv".into()],
            wall_clock_s: 12.5,
        };
        let json = rep.to_json().unwrap();
        assert!(!json.contains("wall_clock"));
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, RunReport { wall_clock_s: 0.0, ..rep });
    }
}
