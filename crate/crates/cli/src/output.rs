use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use exclusion_core::Rational;
use exclusion_integrable::verifier::{CheckReport, SkipReason, Status};
use exclusion_integrable::Model;
use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// Float formatting used for every inexact cell: 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A numeric cell: exact rational string under `--exact`, otherwise a float.
pub fn cell(q: &Rational, exact: bool) -> String {
    if exact {
        q.to_string()
    } else {
        float(exclusion_core::to_f64(q))
    }
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: String,
}

pub fn params(model: &Model) -> Vec<Param> {
    model.params().into_iter().map(|(n, v)| Param { name: n.to_string(), value: v.to_string() }).collect()
}

#[derive(Serialize, Debug)]
pub struct WitnessOut {
    pub row: usize,
    pub col: usize,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Serialize, Debug)]
pub struct ReportOut {
    pub model: String,
    pub check: String,
    pub params: Vec<Param>,
    pub points: Vec<String>,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ReportOut {
    pub fn new(r: &CheckReport, params: &[Param]) -> Self {
        let (witness, message) = match &r.status {
            Status::Pass => (None, None),
            Status::Fail { witness, message } => (
                witness.as_ref().map(|w| WitnessOut { row: w.row, col: w.col, lhs: w.lhs.clone(), rhs: w.rhs.clone() }),
                Some(message.clone()),
            ),
            Status::Skipped(reason) => (None, Some(reason.to_string())),
        };
        ReportOut {
            model: r.model.clone(),
            check: r.check.clone(),
            params: params.to_vec(),
            points: r.points.clone(),
            status: r.status.label(),
            witness,
            message,
            detail: r.detail.clone(),
        }
    }
}

#[derive(Serialize, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    /// Skips caused by a vanishing denominator rather than an unsupported identity.
    pub poles: usize,
}

impl Summary {
    pub fn of(reports: &[CheckReport]) -> Self {
        let mut s = Summary::default();
        for r in reports {
            match &r.status {
                Status::Pass => s.pass += 1,
                Status::Fail { .. } => s.fail += 1,
                Status::Skipped(reason) => {
                    s.skipped += 1;
                    if matches!(reason, SkipReason::Pole(_)) {
                        s.poles += 1;
                    }
                }
            }
        }
        s
    }
}

#[derive(Serialize, Debug)]
pub struct ReportDocument {
    pub schema: u32,
    pub command: &'static str,
    pub model: String,
    pub params: Vec<Param>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub summary: Summary,
    pub reports: Vec<ReportOut>,
}

pub fn report_document(command: &'static str, model: &Model, seed: Option<u64>, reports: &[CheckReport]) -> ReportDocument {
    let params = params(model);
    ReportDocument {
        schema: SCHEMA,
        command,
        model: model.name().to_string(),
        params: params.clone(),
        seed,
        summary: Summary::of(reports),
        reports: reports.iter().map(|r| ReportOut::new(r, &params)).collect(),
    }
}

pub fn reports_csv(reports: &[CheckReport]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "check", "points", "status", "message", "detail"])?;
    for r in reports {
        let message = match &r.status {
            Status::Pass => String::new(),
            Status::Fail { message, .. } => message.clone(),
            Status::Skipped(reason) => reason.to_string(),
        };
        w.write_record([
            r.model.as_str(),
            r.check.as_str(),
            r.points.join(" ").as_str(),
            r.status.label(),
            message.as_str(),
            r.detail.as_deref().unwrap_or(""),
        ])?;
    }
    w.into_inner().map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))
}

pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))
}

pub fn json<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => File::create(p)?.write_all(bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}
