//! Structured verification reports.
//!
//! A report is a flat list of claims. Each claim is either computed here or
//! quoted from a named classical rule; rule claims must carry their source.
//! Output is deterministic for fixed input: timing lives in the metadata
//! block and is the only nondeterministic field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TOOL_NAME: &str = "higgsflow";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("rule claim {0:?} has an empty source")]
    MissingSource(String),
    #[error("pass flag disagrees with the claims")]
    InconsistentPass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClaimKind {
    /// Derived inside this tool by exact arithmetic.
    Computed,
    /// Quoted from the literature; source names the result.
    Rule { source: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub label: String,
    #[serde(flatten)]
    pub kind: ClaimKind,
    pub values: BTreeMap<String, String>,
    pub ok: bool,
}

impl Claim {
    pub fn computed(label: &str) -> Self {
        Claim {
            label: label.to_string(),
            kind: ClaimKind::Computed,
            values: BTreeMap::new(),
            ok: true,
        }
    }

    pub fn rule(label: &str, source: &str) -> Self {
        Claim {
            label: label.to_string(),
            kind: ClaimKind::Rule {
                source: source.to_string(),
            },
            values: BTreeMap::new(),
            ok: true,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn check(mut self, ok: bool) -> Self {
        self.ok = ok;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tool: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub config: serde_json::Value,
    pub claims: Vec<Claim>,
    pub pass: bool,
}

impl Report {
    pub fn new(config: serde_json::Value) -> Self {
        Report {
            meta: ReportMeta {
                tool: TOOL_NAME.to_string(),
                version: TOOL_VERSION.to_string(),
                timing_ms: None,
            },
            config,
            claims: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, claim: Claim) {
        self.pass &= claim.ok;
        self.claims.push(claim);
    }

    pub fn extend(&mut self, claims: impl IntoIterator<Item = Claim>) {
        for c in claims {
            self.push(c);
        }
    }
}

/// Structural checks callers run before trusting a report.
pub fn validate_report(r: &Report) -> Result<(), ReportError> {
    for c in &r.claims {
        if let ClaimKind::Rule { source } = &c.kind {
            if source.trim().is_empty() {
                return Err(ReportError::MissingSource(c.label.clone()));
            }
        }
    }
    if r.pass != r.claims.iter().all(|c| c.ok) {
        return Err(ReportError::InconsistentPass);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claims_serialize_flat() {
        let c = Claim::rule("pushforward stable", "Sun").with("rank", 3);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["kind"], "rule");
        assert_eq!(v["source"], "Sun");
        assert_eq!(v["values"]["rank"], "3");
        let c = Claim::computed("degree").with("value", "4/1");
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["kind"], "computed");
        assert!(v.get("source").is_none());
    }

    #[test]
    fn pass_tracks_claims() {
        let mut r = Report::new(serde_json::json!({"p": 2}));
        r.push(Claim::computed("a").check(true));
        assert!(r.pass);
        r.push(Claim::computed("b").check(false));
        assert!(!r.pass);
        assert!(validate_report(&r).is_ok());
    }

    #[test]
    fn validation_rejects_empty_sources() {
        let mut r = Report::new(serde_json::Value::Null);
        r.push(Claim::rule("quoted", " "));
        assert_eq!(
            validate_report(&r),
            Err(ReportError::MissingSource("quoted".into()))
        );
        let mut r = Report::new(serde_json::Value::Null);
        r.push(Claim::computed("x").check(false));
        r.pass = true;
        assert_eq!(validate_report(&r), Err(ReportError::InconsistentPass));
    }

    #[test]
    fn reports_round_trip() {
        let mut r = Report::new(serde_json::json!({"g": 3}));
        r.push(Claim::computed("slope").with("mu", "2/3"));
        let s = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
