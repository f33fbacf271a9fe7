use crate::error::{Result, RrwError};
use crate::stats::RateFit;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One summary line. `pass` is `None` for informational rows; gated rows name
/// the acceptance criterion they test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub lambda: Option<f64>,
    pub quantity: String,
    pub estimate: f64,
    pub sd: Option<f64>,
    pub target: Option<f64>,
    pub tol: Option<f64>,
    pub pass: Option<bool>,
    pub criterion: Option<String>,
}

impl ReportRow {
    pub fn info(lambda: Option<f64>, quantity: &str, estimate: f64, sd: Option<f64>) -> Self {
        Self {
            lambda,
            quantity: quantity.into(),
            estimate,
            sd,
            target: None,
            tol: None,
            pass: None,
            criterion: None,
        }
    }

    /// Gated on `|estimate − target| ≤ tol`.
    pub fn within(lambda: Option<f64>, quantity: &str, estimate: f64, sd: Option<f64>, target: f64, tol: f64, criterion: &str) -> Self {
        Self {
            lambda,
            quantity: quantity.into(),
            estimate,
            sd,
            target: Some(target),
            tol: Some(tol),
            pass: Some((estimate - target).abs() <= tol),
            criterion: Some(criterion.into()),
        }
    }

    /// Gated on `lo ≤ estimate ≤ hi`; reported as centre and half-width.
    pub fn window(lambda: Option<f64>, quantity: &str, estimate: f64, lo: f64, hi: f64, criterion: &str) -> Self {
        Self {
            lambda,
            quantity: quantity.into(),
            estimate,
            sd: None,
            target: Some(0.5 * (lo + hi)),
            tol: Some(0.5 * (hi - lo)),
            pass: Some(estimate >= lo && estimate <= hi),
            criterion: Some(criterion.into()),
        }
    }

    /// Gated on an explicit predicate.
    pub fn check(lambda: Option<f64>, quantity: &str, estimate: f64, target: Option<f64>, pass: bool, criterion: &str) -> Self {
        Self {
            lambda,
            quantity: quantity.into(),
            estimate,
            sd: None,
            target,
            tol: None,
            pass: Some(pass),
            criterion: Some(criterion.into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub slope: f64,
    pub r2: f64,
}

impl From<&RateFit> for RateSummary {
    fn from(f: &RateFit) -> Self {
        Self { slope: f.slope, r2: f.r2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config_hash: String,
    pub rows: Vec<ReportRow>,
    pub rate: Option<RateSummary>,
    pub wall_clock_s: f64,
}

impl ExperimentReport {
    /// True unless some gated row failed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn failures(&self) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.pass == Some(false)).collect()
    }
}

/// CSV table with the provenance comment `# seed=S config_hash=H` on top.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn render(&self, seed: u64, config_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# seed={seed} config_hash={config_hash}");
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// Writes tables, the report JSON and the canonical config into `dir`.
pub fn write_outputs(
    dir: &Path,
    seed: u64,
    canonical: &str,
    report: &ExperimentReport,
    tables: &[CsvTable],
    extra_json: &[(String, serde_json::Value)],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        let p = dir.join(format!("{}.csv", t.name));
        std::fs::write(&p, t.render(seed, &report.config_hash))?;
        written.push(p);
    }
    let p = dir.join(format!("{}_report.json", report.experiment));
    std::fs::write(&p, serde_json::to_string_pretty(report)?)?;
    written.push(p);
    for (name, value) in extra_json {
        let p = dir.join(format!("{name}.json"));
        std::fs::write(&p, serde_json::to_string_pretty(value)?)?;
        written.push(p);
    }
    let p = dir.join(format!("{}_config.txt", report.experiment));
    std::fs::write(&p, canonical)?;
    written.push(p);
    Ok(written)
}

fn csv_hash(text: &str) -> Option<String> {
    let first = text.lines().next()?;
    let rest = first.strip_prefix("# ")?;
    rest.split_whitespace()
        .find_map(|kv| kv.strip_prefix("config_hash="))
        .map(str::to_string)
}

/// Checks that every CSV in `dir` carries the hash recorded in the report of
/// `experiment`; a mismatch or a missing header is an error.
pub fn verify_outputs(dir: &Path, experiment: &str) -> Result<String> {
    let report: ExperimentReport =
        serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{experiment}_report.json")))?)?;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with(&format!("{experiment}_"))))
        .collect();
    entries.sort();
    for p in entries {
        let text = std::fs::read_to_string(&p)?;
        let found = csv_hash(&text).unwrap_or_default();
        if found != report.config_hash {
            return Err(RrwError::HashMismatch { expected: report.config_hash.clone(), found });
        }
    }
    Ok(report.config_hash)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_gate_correctly() {
        assert_eq!(ReportRow::within(None, "x", 1.02, None, 1.0, 0.03, "c").pass, Some(true));
        assert_eq!(ReportRow::within(None, "x", 1.04, None, 1.0, 0.03, "c").pass, Some(false));
        assert_eq!(ReportRow::window(None, "s", -1.0, -1.3, -0.7, "c").pass, Some(true));
        assert_eq!(ReportRow::window(None, "s", -2.0, -1.3, -0.7, "c").pass, Some(false));
        assert_eq!(ReportRow::info(None, "i", 3.0, None).pass, None);
    }

    #[test]
    fn csv_header_carries_provenance() {
        let mut t = CsvTable::new("demo", &["a", "b"]);
        t.push(["1".to_string(), "2".to_string()]);
        let s = t.render(9, "abc");
        assert!(s.starts_with("# seed=9 config_hash=abc\na,b\n1,2\n"));
        assert_eq!(csv_hash(&s).as_deref(), Some("abc"));
    }

    #[test]
    fn hash_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let report = ExperimentReport {
            experiment: "weyl".into(),
            config_hash: "aaaa".into(),
            rows: vec![],
            rate: None,
            wall_clock_s: 0.0,
        };
        let t = CsvTable::new("weyl_counts", &["x"]);
        write_outputs(dir.path(), 0, "experiment=weyl\n", &report, std::slice::from_ref(&t), &[]).unwrap();
        assert_eq!(verify_outputs(dir.path(), "weyl").unwrap(), "aaaa");
        std::fs::write(dir.path().join("weyl_counts.csv"), t.render(0, "bbbb")).unwrap();
        assert!(matches!(verify_outputs(dir.path(), "weyl"), Err(RrwError::HashMismatch { .. })));
    }
}
