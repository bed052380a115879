//! Sweep reports and their CSV/JSON serialisations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "manifold,n,d,t,delta,lower,reference,upper,margin_lower,margin_upper,pass";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Evaluated outside the hypotheses of the statement: reported only.
    Informative,
}

/// One evaluated grid point. Margins are signed; negative means violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// what was checked at this point; JSON only
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub d: f64,
    pub t: f64,
    pub delta: Option<f64>,
    pub lower: Option<f64>,
    pub reference: f64,
    pub upper: Option<f64>,
    pub margin_lower: Option<f64>,
    pub margin_upper: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worst {
    pub margin: f64,
    pub d: f64,
    pub t: f64,
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub d: Vec<f64>,
    pub t: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub suite: String,
    pub manifold: String,
    pub n: usize,
    pub grid: GridSummary,
    pub records: Vec<SweepRecord>,
    /// worst margin per checked quantity
    pub worst: BTreeMap<String, Worst>,
    /// points the kernels refused for precision reasons
    pub skipped: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl SweepReport {
    pub fn new(suite: &str, manifold: String, n: usize, grid: GridSummary) -> Self {
        Self {
            suite: suite.to_string(),
            manifold,
            n,
            grid,
            records: Vec::new(),
            worst: BTreeMap::new(),
            skipped: 0,
            verdict: Verdict::Pass,
            notes: Vec::new(),
        }
    }

    /// Keep the smaller of the stored and the new margin under `key`; ties
    /// keep the earlier point so the result is independent of scheduling.
    pub fn note_margin(&mut self, key: &str, margin: f64, d: f64, t: f64, delta: Option<f64>, label: Option<&str>) {
        let candidate = Worst { margin, d, t, delta, label: label.map(str::to_string) };
        match self.worst.get(key) {
            Some(w) if !(margin < w.margin) && !margin.is_nan() => {}
            _ => {
                self.worst.insert(key.to_string(), candidate);
            }
        }
    }

    /// Set the verdict from the records: fail if any hard record fails.
    pub fn finalize(&mut self, informative: bool) {
        let failed = self.records.iter().any(|r| !r.pass);
        self.verdict = if informative {
            Verdict::Informative
        } else if failed {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// CSV with the fixed header and one row per record, reports in order.
pub fn to_csv(reports: &[SweepReport]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for rep in reports {
        for r in &rep.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                rep.manifold,
                rep.n,
                fmt_f64(r.d),
                fmt_f64(r.t),
                fmt_opt(r.delta),
                fmt_opt(r.lower),
                fmt_f64(r.reference),
                fmt_opt(r.upper),
                fmt_opt(r.margin_lower),
                fmt_opt(r.margin_upper),
                r.pass
            );
        }
    }
    out
}

/// A single report as an object, several as an array.
pub fn to_json(reports: &[SweepReport]) -> Result<String> {
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])
    } else {
        serde_json::to_string_pretty(reports)
    };
    text.map(|mut s| {
        s.push('\n');
        s
    })
    .map_err(|e| Error::usage(format!("cannot serialise report: {e}")))
}

/// Write `contents` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::usage(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Error::usage(format!("cannot write {}: {e}", path.display()));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepReport {
        let mut r = SweepReport::new(
            "sandwich",
            "rn:n=2".into(),
            2,
            GridSummary { d: vec![0.0], t: vec![1.0], delta: vec![1.0] },
        );
        r.records.push(SweepRecord {
            label: Some("sandwich".into()),
            d: 0.0,
            t: 1.0,
            delta: Some(1.0),
            lower: Some(0.25),
            reference: 0.5,
            upper: None,
            margin_lower: Some(std::f64::consts::LN_2),
            margin_upper: None,
            pass: true,
        });
        r.note_margin("lower", 0.7, 0.0, 1.0, Some(1.0), None);
        r.note_margin("lower", 0.7, 5.0, 1.0, Some(1.0), None);
        r.finalize(false);
        r
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&[sample()]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "rn:n=2,2,0e0,1e0,1e0,2.5e-1,5e-1,,6.931471805599453e-1,,true"
        );
    }

    #[test]
    fn ties_keep_first_point() {
        let r = sample();
        assert_eq!(r.worst["lower"].d, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = to_json(&[r.clone()]).unwrap();
        let back: SweepReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
