//! Reports: JSON serialization, atomic writes and the summary table.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::checks::Status;
use super::config::{CheckId, CheckSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub check: CheckId,
    pub point: String,
    pub status: Status,
    pub detail: String,
    pub values: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: CheckSpec,
    pub entries: Vec<Entry>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: CheckSpec, entries: Vec<Entry>) -> Self {
        let mut summary = Summary::default();
        for e in &entries {
            match e.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Inconclusive => summary.inconclusive += 1,
            }
        }
        Report { tool: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into(), config, entries, summary }
    }

    /// 0 when nothing failed and nothing is inconclusive (unless allowed), else 1.
    pub fn exit_code(&self, allow_inconclusive: bool) -> i32 {
        let bad = self.summary.fail > 0 || (!allow_inconclusive && self.summary.inconclusive > 0);
        i32::from(bad)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes to a sibling temporary file, then renames it over `path`.
    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = path.file_name().ok_or_else(|| std::io::Error::other("report path has no file name"))?;
        let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(self.to_json().as_bytes())?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)
    }

    pub fn table(&self) -> String {
        let status = |s: Status| match s {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Inconclusive => "inconclusive",
        };
        let w_check = self.entries.iter().map(|e| e.check.name().len()).max().unwrap_or(5).max(5);
        let w_point = self.entries.iter().map(|e| e.point.chars().count()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<w_check$}  {:<w_point$}  {:<12}  detail\n", "check", "point", "status");
        for e in &self.entries {
            out.push_str(&format!("{:<w_check$}  {:<w_point$}  {:<12}  {}", e.check.name(), e.point, status(e.status), e.detail));
            if let Some(s) = e.seconds {
                out.push_str(&format!("  ({s:.2} s)"));
            }
            out.push('\n');
        }
        let s = self.summary;
        out.push_str(&format!("{} pass, {} fail, {} inconclusive\n", s.pass, s.fail, s.inconclusive));
        out
    }
}
