//! Report assembly and output. Floats are written with 17 significant digits
//! so identical runs give byte-identical files.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::PathBuf;

use hardyops::two_proj::DaReport;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig, Suite};
use crate::CliError;

/// CSV header, fixed.
pub const CSV_HEADER: [&str; 10] = [
    "suite", "check", "a_re", "a_im", "N", "value", "target", "residual", "tol", "pass",
];

/// One asserted check at one `(a, N)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub check: String,
    pub a_re: f64,
    pub a_im: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub target: f64,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub pass: usize,
    pub fail: usize,
    /// Non-finite when some cell failed to evaluate.
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub summary: Vec<SuiteSummary>,
    pub checks: Vec<Check>,
    pub twoproj: Vec<DaReport>,
}

impl Report {
    pub fn new(config: RunConfig, checks: Vec<Check>, twoproj: Vec<DaReport>) -> Self {
        let summary = config
            .suites
            .iter()
            .map(|&suite| {
                let rows: Vec<&Check> = checks.iter().filter(|c| c.suite == suite).collect();
                let pass = rows.iter().filter(|c| c.pass).count();
                let worst_residual = rows
                    .iter()
                    .map(|c| {
                        if c.residual.is_nan() {
                            f64::INFINITY
                        } else {
                            c.residual
                        }
                    })
                    .fold(0.0, f64::max);
                SuiteSummary {
                    suite,
                    pass,
                    fail: rows.len() - pass,
                    worst_residual,
                }
            })
            .collect();
        Self {
            config,
            summary,
            checks,
            twoproj,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Fixed-width table: suite, #pass, #fail, worst residual.
    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<12} {:>6} {:>6} {:>14}\n",
            "suite", "pass", "fail", "worst"
        );
        for row in &self.summary {
            s += &format!(
                "{:<12} {:>6} {:>6} {:>14.3e}\n",
                row.suite.name(),
                row.pass,
                row.fail,
                row.worst_residual
            );
        }
        s
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits::default());
        self.serialize(&mut ser)
            .map_err(|e| CliError::Serialize(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Serialize(e.to_string());
        w.write_record(CSV_HEADER).map_err(err)?;
        for c in &self.checks {
            w.write_record([
                c.suite.name().to_string(),
                c.check.clone(),
                sig(c.a_re),
                sig(c.a_im),
                c.n.to_string(),
                sig(c.value),
                sig(c.target),
                sig(c.residual),
                sig(c.tol),
                c.pass.to_string(),
            ])
            .map_err(err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Serialize(e.to_string()))
    }
}

/// 17 significant digits.
pub fn sig(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON with every float in [`sig`] form. Non-finite floats become
/// `null` before reaching the formatter.
#[derive(Default)]
struct SigDigits(PrettyFormatter<'static>);

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(sig(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// First 16 hex digits of the SHA-256 of the serialized config, without the
/// output directory.
pub fn config_hash(cfg: &RunConfig) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(cfg).map_err(|e| CliError::Serialize(e.to_string()))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// Writes the report into `cfg.out_path` as `report-<hash>.<ext>`. Existing
/// files are never replaced; a numeric suffix is added instead.
pub fn write_report(report: &Report, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let bytes = match cfg.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    let dir = &cfg.out_path;
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.clone(),
        source: e,
    })?;
    let stem = format!("report-{}", config_hash(cfg)?);
    let ext = cfg.format.extension();
    for k in 0usize.. {
        let name = if k == 0 {
            format!("{stem}.{ext}")
        } else {
            format!("{stem}-{k}.{ext}")
        };
        let path = dir.join(name);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                f.write_all(&bytes).map_err(|e| CliError::Io {
                    path: path.clone(),
                    source: e,
                })?;
                return Ok(path);
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::Io { path, source: e }),
        }
    }
    unreachable!("unbounded suffix search")
}
