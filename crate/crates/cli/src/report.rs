//! Verification report: one entry per check, rendered as text or JSON.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    /// Offending expression or value when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub details: Vec<String>,
}

impl CheckEntry {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(CheckEntry::passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            s.push_str(&format!("[{tag}] {:<16} {}\n", c.id, c.anchor));
            for d in &c.details {
                s.push_str(&format!("       {d}\n"));
            }
            if let Some(w) = &c.witness {
                s.push_str(&format!("       witness: {w}\n"));
            }
        }
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        s.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, status: Status) -> CheckEntry {
        CheckEntry { id: id.into(), anchor: "a".into(), status, witness: None, details: vec![] }
    }

    #[test]
    fn status_and_rendering() {
        let mut r = VerificationReport { checks: vec![entry("x", Status::Pass)] };
        assert!(r.all_pass());
        assert!(r.to_text().contains("1/1 checks passed"));
        r.checks.push(CheckEntry { witness: Some("v1".into()), ..entry("y", Status::Fail) });
        assert!(!r.all_pass());
        let j: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(j["checks"][1]["status"], "fail");
        assert_eq!(j["checks"][1]["witness"], "v1");
        assert!(j["checks"][0].get("witness").is_none());
    }
}
