//! Check records and reports shared by every verifier.
//!
//! A report is a list of records — one per executed check — plus a summary.
//! Records carry a stable dotted id (reports are sorted by it), a short
//! mathematical anchor naming the fact being checked (`"G3"`, `"S1"`,
//! `"neighborhood axiom (5)"`), a status, and on failure a counterexample
//! payload together with a CLI command that reproduces it. A skipped check
//! is never a pass.
//!
//! Determinism contract: for a fixed config and seed two runs emit
//! byte-identical JSON except for the timing fields; `canonical_json` zeroes
//! those out so byte comparison is one call away.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Stable dotted id, e.g. `"matrix.G3"`.
    pub id: String,
    /// Mathematical fact being checked, e.g. `"G3"` or `"S2"`.
    pub anchor: String,
    pub status: Status,
    /// One-line human note (what was sampled, why skipped, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Structured counterexample; present exactly when `status` is `Fail`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
    /// CLI command reproducing the failure; present when `status` is `Fail`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<String>,
    /// Wall-clock milliseconds; excluded from determinism comparisons.
    pub millis: u64,
}

impl CheckRecord {
    pub fn pass(id: &str, anchor: &str, detail: impl Into<String>) -> Self {
        CheckRecord {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Pass,
            detail: Some(detail.into()),
            counterexample: None,
            replay: None,
            millis: 0,
        }
    }

    pub fn fail(
        id: &str,
        anchor: &str,
        detail: impl Into<String>,
        counterexample: serde_json::Value,
        replay: impl Into<String>,
    ) -> Self {
        CheckRecord {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Fail,
            detail: Some(detail.into()),
            counterexample: Some(counterexample),
            replay: Some(replay.into()),
            millis: 0,
        }
    }

    pub fn skipped(id: &str, anchor: &str, why: impl Into<String>) -> Self {
        CheckRecord {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Skipped,
            detail: Some(why.into()),
            counterexample: None,
            replay: None,
            millis: 0,
        }
    }

    pub fn undecided(id: &str, anchor: &str, why: impl Into<String>) -> Self {
        CheckRecord {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Undecided,
            detail: Some(why.into()),
            counterexample: None,
            replay: None,
            millis: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub undecided: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Report schema version.
    pub version: u32,
    /// Echo of the configuration that produced the report (includes seeds).
    pub config: serde_json::Value,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

pub const REPORT_VERSION: u32 = 1;

impl Report {
    pub fn new(config: serde_json::Value, mut records: Vec<CheckRecord>) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let mut summary = Summary::default();
        for r in &records {
            match r.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Skipped => summary.skipped += 1,
                Status::Undecided => summary.undecided += 1,
            }
        }
        Report { version: REPORT_VERSION, config, records, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0 && self.summary.undecided == 0 && self.summary.skipped == 0
    }

    pub fn has_failures(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn record(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn status_of(&self, id: &str) -> Option<Status> {
        self.record(id).map(|r| r.status)
    }

    /// Merge reports (e.g. per-module sections of a suite); records are
    /// re-sorted and the summary recomputed.
    pub fn merged(config: serde_json::Value, parts: Vec<Report>) -> Report {
        let records = parts.into_iter().flat_map(|p| p.records).collect();
        Report::new(config, records)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// JSON with all timing fields zeroed; two runs of the same seeded config
    /// must agree byte-for-byte on this form.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        for r in &mut clone.records {
            r.millis = 0;
        }
        clone.to_json()
    }

    pub fn from_json(s: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Flat CSV: one row per record (`id,anchor,status,detail,replay,millis`).
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(["id", "anchor", "status", "detail", "counterexample", "replay", "millis"])
            .expect("csv header");
        for r in &self.records {
            w.write_record([
                r.id.as_str(),
                r.anchor.as_str(),
                status_str(r.status),
                r.detail.as_deref().unwrap_or(""),
                &r.counterexample.as_ref().map(|v| v.to_string()).unwrap_or_default(),
                r.replay.as_deref().unwrap_or(""),
                &r.millis.to_string(),
            ])
            .expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }

    /// Human-readable text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "{:<9} {:<28} {}{}\n",
                status_str(r.status).to_uppercase(),
                r.id,
                r.detail.clone().unwrap_or_default(),
                r.replay
                    .as_ref()
                    .map(|c| format!("  [replay: {c}]"))
                    .unwrap_or_default()
            ));
        }
        out.push_str(&format!(
            "summary: {} pass, {} fail, {} skipped, {} undecided\n",
            self.summary.pass, self.summary.fail, self.summary.skipped, self.summary.undecided
        ));
        out
    }

    /// Exit code convention: 0 all good, 1 failures/undecided findings.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else {
            0
        }
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skipped => "skipped",
        Status::Undecided => "undecided",
    }
}

/// Convenience used by verifiers to echo their options into `Report::config`.
pub fn config_value(pairs: &[(&str, serde_json::Value)]) -> serde_json::Value {
    let map: BTreeMap<String, serde_json::Value> =
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    serde_json::to_value(map).expect("config map")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_sorted_and_summarized() {
        let r = Report::new(
            serde_json::json!({}),
            vec![
                CheckRecord::pass("b.two", "X", ""),
                CheckRecord::fail("a.one", "Y", "", serde_json::json!({"x": 1}), "ordlab --help"),
            ],
        );
        assert_eq!(r.records[0].id, "a.one");
        assert_eq!(r.summary.pass, 1);
        assert_eq!(r.summary.fail, 1);
        assert!(r.has_failures());
        assert!(!r.all_pass());
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn json_round_trip() {
        let r = Report::new(
            serde_json::json!({"seed": 7}),
            vec![CheckRecord::pass("walk.S1", "S1", "10000 triples")],
        );
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn canonical_json_drops_timing() {
        let mut rec = CheckRecord::pass("a", "A", "");
        rec.millis = 55;
        let r1 = Report::new(serde_json::json!({}), vec![rec.clone()]);
        rec.millis = 99;
        let r2 = Report::new(serde_json::json!({}), vec![rec]);
        assert_ne!(r1.to_json(), r2.to_json());
        assert_eq!(r1.canonical_json(), r2.canonical_json());
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let r = Report::new(serde_json::json!({}), vec![CheckRecord::pass("a", "A", "d")]);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("id,anchor,status"));
    }

    #[test]
    fn skipped_is_not_pass() {
        let r = Report::new(serde_json::json!({}), vec![CheckRecord::skipped("a", "A", "n/a")]);
        assert!(!r.all_pass());
        assert!(!r.has_failures());
        assert_eq!(r.exit_code(), 0);
    }
}
