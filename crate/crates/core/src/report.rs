//! Pipeline reports: a JSON form with full doubles and a human form with
//! six significant digits. Both carry the same entries.

use std::fmt::{self, Write as _};

use serde::Serialize;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub problem: String,
    pub command: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
    pub stages: Vec<Stage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Ranks>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<String>>>,
    /// Printed prolonged or added fields, depending on the command.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reduced: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reconstruction: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<ConstantRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub endpoint: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ranks {
    pub r0: usize,
    pub r: usize,
    pub delta: usize,
    pub theta: usize,
    pub kappa0: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantRow {
    pub expr: String,
    pub conserved: f64,
    pub invariant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    pub passed: bool,
}

impl Report {
    pub fn new(problem: &str, command: &str) -> Self {
        Report {
            problem: problem.to_string(),
            command: command.to_string(),
            passed: true,
            ..Default::default()
        }
    }

    pub fn stage(&mut self, name: &str, passed: bool, residual: Option<f64>, detail: impl Into<String>) {
        self.passed &= passed;
        self.stages.push(Stage {
            name: name.to_string(),
            passed,
            residual,
            detail: detail.into(),
        });
    }

    pub fn find(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Six significant digits.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_finite() && (1e-3..1e6).contains(&v.abs()) {
        let digits = 5 - v.abs().log10().floor() as i32;
        format!("{:.*}", digits.max(0) as usize, v)
    } else {
        format!("{v:.5e}")
    }
}

fn mark(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.command, self.problem)?;
        for n in &self.notices {
            writeln!(f, "  note: {n}")?;
        }
        for s in &self.stages {
            let mut line = format!("  [{}] {:<18}", mark(s.passed), s.name);
            if let Some(r) = s.residual {
                let _ = write!(line, " residual {:<12}", num(r));
            }
            if !s.detail.is_empty() {
                let _ = write!(line, " {}", s.detail);
            }
            writeln!(f, "{}", line.trim_end())?;
        }
        if let Some(r) = &self.ranks {
            writeln!(
                f,
                "  ranks: r0 = {}, r = {}, delta = {}, theta = {}, kappa0 = {}",
                r.r0, r.r, r.delta, r.theta, r.kappa0
            )?;
        }
        if let Some(sigma) = &self.sigma {
            writeln!(f, "  sigma:")?;
            for row in sigma {
                writeln!(f, "    [{}]", row.join(", "))?;
            }
        }
        for (title, list) in [
            ("fields", &self.fields),
            ("reduced", &self.reduced),
            ("reconstruction", &self.reconstruction),
        ] {
            if !list.is_empty() {
                writeln!(f, "  {title}:")?;
                for l in list {
                    writeln!(f, "    {l}")?;
                }
            }
        }
        if !self.constants.is_empty() {
            writeln!(f, "  constants:")?;
            for c in &self.constants {
                let mut line = format!(
                    "    [{}] {}  conserved {}  invariant {}",
                    mark(c.passed),
                    c.expr,
                    num(c.conserved),
                    num(c.invariant)
                );
                if let Some(d) = c.drift {
                    let _ = write!(line, "  drift {}", num(d));
                }
                writeln!(f, "{line}")?;
            }
        }
        if !self.endpoint.is_empty() {
            let parts: Vec<String> = self.endpoint.iter().map(|(s, v)| format!("{s} = {}", num(*v))).collect();
            writeln!(f, "  endpoint: {}", parts.join(", "))?;
        }
        write!(f, "  result: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1.00000");
        assert_eq!(num(-2.5), "-2.50000");
        assert_eq!(num(123456.7), "123457");
        assert_eq!(num(1.234567e-10), "1.23457e-10");
    }

    #[test]
    fn failed_stage_fails_report() {
        let mut r = Report::new("p", "check");
        r.stage("a", true, Some(0.0), "");
        assert!(r.passed);
        r.stage("b", false, None, "broken");
        assert!(!r.passed);
        let text = r.to_string();
        assert!(text.contains("[FAIL] b") && text.ends_with("result: FAIL"));
        assert!(r.to_json().contains("\"passed\": false"));
    }
}
