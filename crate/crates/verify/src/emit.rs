//! Report serialization.
//!
//! JSON is pretty-printed with every float written as `{:.16e}` (17
//! significant digits, exact round trip). CSV carries one row per
//! (check, sample) with columns
//! `check,sample,u,theta,residual,residual_fd,mu,mu_target,verdict,note`;
//! `u` and `theta` are space-separated lists and missing values are empty.

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Result, VerifyError};
use crate::runner::{Outcome, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?} (json or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with 17-significant-digit floats.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(float(v).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
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

pub fn to_json(report: &RunReport) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    report
        .serialize(&mut ser)
        .map_err(|e| VerifyError::Emit(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn to_csv(report: &RunReport) -> Result<Vec<u8>> {
    let err = |e: csv::Error| VerifyError::Emit(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "check",
        "sample",
        "u",
        "theta",
        "residual",
        "residual_fd",
        "mu",
        "mu_target",
        "verdict",
        "note",
    ])
    .map_err(err)?;
    let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
    let list = |v: &[f64]| v.iter().map(|&x| float(x)).collect::<Vec<_>>().join(" ");
    for c in &report.checks {
        for s in &c.samples {
            w.write_record([
                c.name.as_str().to_string(),
                s.index.to_string(),
                list(&s.u),
                list(&s.theta),
                opt(s.residual),
                opt(s.residual_fd),
                opt(s.mu),
                opt(s.mu_target),
                outcome_str(s.verdict).to_string(),
                s.note.clone().unwrap_or_default(),
            ])
            .map_err(err)?;
        }
    }
    w.into_inner().map_err(|e| VerifyError::Emit(e.to_string()))
}

fn outcome_str(o: Outcome) -> &'static str {
    match o {
        Outcome::Hopf => "HOPF",
        Outcome::NotHopf => "NOT_HOPF",
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
        Outcome::Degenerate => "DEGENERATE",
    }
}

/// Writes `<dir>/<stem>.<ext>` and returns its path.
pub fn emit(report: &RunReport, format: Format, dir: &Path, stem: &str) -> Result<PathBuf> {
    let bytes = match format {
        Format::Json => to_json(report)?,
        Format::Csv => to_csv(report)?,
    };
    let io_err = |p: &Path, e: io::Error| VerifyError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
