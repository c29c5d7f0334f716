use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{LineFit, McSummary};

use super::config::{ExperimentConfig, OnExisting};

pub const SCHEMA: u32 = 1;

/// One scalar output, also one row of the CSV detail file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    /// Diagonal size or first coordinate of the vertex; 0 when not tied to one.
    #[serde(rename = "N")]
    pub size: usize,
    pub param: String,
    pub statistic: String,
    #[serde(with = "crate::serde_float")]
    pub value: f64,
    #[serde(with = "crate::serde_float::option")]
    pub lo: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub hi: Option<f64>,
    pub replicas: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    #[serde(rename = "N")]
    pub size: usize,
    pub param: String,
    pub summary: McSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub name: String,
    pub fit: LineFit,
}

/// `margin` is nonnegative exactly when the check passes; it is the slack of
/// the tightest sub-condition in that condition's own units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub pass: bool,
    #[serde(with = "crate::serde_float")]
    pub margin: f64,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl Verdict {
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        // Adding 0.0 turns -0.0 into 0.0.
        let margin = self.margin + 0.0;
        match &self.skipped {
            Some(reason) => format!("CRITERION {} {tag} margin={margin:.6} skipped: {reason}", self.id),
            None => format!("CRITERION {} {tag} margin={margin:.6}", self.id),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_s: f64,
    pub replicas: u64,
    pub replicas_per_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub points: Vec<PointRecord>,
    pub statistics: Vec<Statistic>,
    pub slopes: Vec<SlopeRecord>,
    pub verdicts: Vec<Verdict>,
    /// Kept out of the JSON file so reruns can be compared byte for byte.
    #[serde(skip)]
    pub timing: Option<Timing>,
}

impl ExperimentResult {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, id: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }

    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.statistic == name)
    }
}

/// Accumulates the outputs of one evaluator.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub points: Vec<PointRecord>,
    pub statistics: Vec<Statistic>,
    pub slopes: Vec<SlopeRecord>,
    pub verdicts: Vec<Verdict>,
    pub replicas: u64,
}

impl Report {
    pub fn stat(&mut self, size: usize, param: impl Into<String>, name: impl Into<String>, value: f64, replicas: u64) {
        self.statistics.push(Statistic {
            size,
            param: param.into(),
            statistic: name.into(),
            value,
            lo: None,
            hi: None,
            replicas,
        });
    }

    /// Statistic with a symmetric `value +- half_width` interval.
    pub fn stat_se(
        &mut self,
        size: usize,
        param: impl Into<String>,
        name: impl Into<String>,
        value: f64,
        se: f64,
        replicas: u64,
    ) {
        self.statistics.push(Statistic {
            size,
            param: param.into(),
            statistic: name.into(),
            value,
            lo: Some(value - se),
            hi: Some(value + se),
            replicas,
        });
    }

    pub fn point(&mut self, size: usize, param: impl Into<String>, summary: McSummary) {
        self.points.push(PointRecord { size, param: param.into(), summary });
    }

    pub fn slope(&mut self, name: impl Into<String>, fit: LineFit) {
        self.slopes.push(SlopeRecord { name: name.into(), fit });
    }

    pub fn verdict(&mut self, id: impl Into<String>, margin: f64, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            id: id.into(),
            pass: margin >= 0.0,
            margin,
            detail: detail.into(),
            skipped: None,
        });
    }

    /// A verdict that could not be evaluated; it counts as a failure.
    pub fn skipped(&mut self, id: impl Into<String>, reason: impl Into<String>) {
        self.verdicts.push(Verdict {
            id: id.into(),
            pass: false,
            margin: f64::NAN,
            detail: String::new(),
            skipped: Some(reason.into()),
        });
    }

    pub fn merge(&mut self, other: Report) {
        self.points.extend(other.points);
        self.statistics.extend(other.statistics);
        self.slopes.extend(other.slopes);
        self.verdicts.extend(other.verdicts);
        self.replicas += other.replicas;
    }

    pub fn into_result(self, config: ExperimentConfig, elapsed_s: f64) -> ExperimentResult {
        ExperimentResult {
            schema: SCHEMA,
            experiment: config.name.clone(),
            config,
            points: self.points,
            statistics: self.statistics,
            slopes: self.slopes,
            verdicts: self.verdicts,
            timing: Some(Timing {
                wall_clock_s: elapsed_s,
                replicas: self.replicas,
                replicas_per_s: if elapsed_s > 0.0 { self.replicas as f64 / elapsed_s } else { 0.0 },
            }),
        }
    }
}

/// `min` that propagates NaN, so a broken sub-check cannot look like slack.
pub fn min_margin(margins: &[f64]) -> f64 {
    margins.iter().fold(f64::INFINITY, |acc, &m| if m.is_nan() || acc.is_nan() { f64::NAN } else { acc.min(m) })
}

pub fn json_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.json"))
}

pub fn csv_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.csv"))
}

pub fn timing_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.timing.json"))
}

pub fn render_json(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(result)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub const CSV_HEADER: [&str; 9] = ["experiment", "N", "param", "statistic", "value", "lo", "hi", "replicas", "seed"];

pub fn render_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for s in &result.statistics {
        w.write_record([
            result.experiment.clone(),
            s.size.to_string(),
            s.param.clone(),
            s.statistic.clone(),
            s.value.to_string(),
            opt(s.lo),
            opt(s.hi),
            s.replicas.to_string(),
            result.config.master_seed.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `<name>.json`, `<name>.csv` and `<name>.timing.json` into `dir`.
///
/// With existing files, `OnExisting::Error` refuses and
/// `OnExisting::Verify` demands byte-identical JSON and CSV.
pub fn persist(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let name = &result.experiment;
    let files = [(json_path(dir, name), render_json(result)?), (csv_path(dir, name), render_csv(result)?)];
    let existing: Vec<&PathBuf> = files.iter().map(|(p, _)| p).filter(|p| p.exists()).collect();
    if !existing.is_empty() {
        match result.config.on_existing {
            OnExisting::Error => {
                return Err(Error::ResumeMismatch(format!(
                    "{} exists; set on_existing = \"verify\" to check a rerun",
                    existing[0].display()
                )))
            }
            OnExisting::Verify => {
                for (path, bytes) in &files {
                    let old = fs::read(path)?;
                    if &old != bytes {
                        return Err(Error::ResumeMismatch(format!("{} differs from the recomputed output", path.display())));
                    }
                }
            }
        }
    } else {
        for (path, bytes) in &files {
            fs::write(path, bytes)?;
        }
    }
    if let Some(t) = &result.timing {
        fs::write(timing_path(dir, name), serde_json::to_vec_pretty(t)?)?;
    }
    Ok(())
}

pub fn load_result(path: &Path) -> Result<ExperimentResult> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

pub const LONG_HEADER: [&str; 7] = ["experiment", "N", "param", "statistic", "value", "lo", "hi"];

/// Long-format plot data from a result JSON or a detail CSV. Slopes are
/// appended as `slope`/`slope_se`/`r2` rows from JSON input.
pub fn export_long_csv<W: std::io::Write>(input: &Path, out: W) -> Result<usize> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LONG_HEADER)?;
    let mut rows = 0;
    let is_json = input.extension().is_some_and(|e| e == "json");
    if is_json {
        let r = load_result(input)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for s in &r.statistics {
            w.write_record([
                r.experiment.clone(),
                s.size.to_string(),
                s.param.clone(),
                s.statistic.clone(),
                s.value.to_string(),
                opt(s.lo),
                opt(s.hi),
            ])?;
            rows += 1;
        }
        for s in &r.slopes {
            for (stat, value) in [("slope", s.fit.slope), ("slope_se", s.fit.slope_se), ("r2", s.fit.r2)] {
                w.write_record([&r.experiment, "0", &s.name, stat, &value.to_string(), "", ""])?;
                rows += 1;
            }
        }
    } else {
        let mut reader = csv::Reader::from_path(input)?;
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::Config {
                path: input.display().to_string(),
                msg: format!("missing column `{name}`"),
            })
        };
        let idx: Vec<usize> = LONG_HEADER.iter().map(|h| col(h)).collect::<Result<_>>()?;
        for record in reader.records() {
            let record = record?;
            w.write_record(idx.iter().map(|&k| &record[k]))?;
            rows += 1;
        }
    }
    w.flush()?;
    Ok(rows)
}
