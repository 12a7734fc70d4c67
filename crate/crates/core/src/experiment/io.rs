//! CSV and JSON interchange for [`MeasurementTrace`].
//!
//! CSV: header `time,p_estimate,shots`, one row per delay. JSON:
//! `{"schema_version": 1, "meta": {...}, "points": [{"t", "p", "shots"}]}`.
//! Floats are written in shortest round-trip form, so both formats are
//! lossless for the point data; only JSON carries the metadata.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MeasurementTrace, TraceMeta};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

const CSV_FIELDS: [&str; 3] = ["time", "p_estimate", "shots"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl TraceFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(TraceFormat::Csv),
            Some("json") => Ok(TraceFormat::Json),
            _ => Err(Error::UnknownFormat(path.to_path_buf())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    time: f64,
    p_estimate: f64,
    shots: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPoint {
    t: f64,
    p: f64,
    shots: u64,
}

#[derive(Serialize, Deserialize)]
struct JsonTrace {
    schema_version: u32,
    #[serde(default)]
    meta: TraceMeta,
    points: Vec<JsonPoint>,
}

pub fn write_csv<W: Write>(trace: &MeasurementTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::InvalidTrace(format!("CSV write failed: {e}"));
    for ((&time, &p_estimate), &shots) in trace.times().iter().zip(trace.estimates()).zip(trace.shots()) {
        w.serialize(CsvRow {
            time,
            p_estimate,
            shots,
        })
        .map_err(io_err)?;
    }
    if trace.is_empty() {
        w.write_record(CSV_FIELDS).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidTrace(format!("CSV write failed: {e}")))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<MeasurementTrace> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != CSV_FIELDS {
        return Err(Error::Parse {
            line: 1,
            field: "header".into(),
            message: format!("expected `{}`, found `{}`", CSV_FIELDS.join(","), got.join(",")),
        });
    }
    let (mut times, mut estimates, mut shots) = (Vec::new(), Vec::new(), Vec::new());
    let mut lines = Vec::new();
    for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| csv_error(e, i as u64 + 2))?;
        times.push(row.time);
        estimates.push(row.p_estimate);
        shots.push(row.shots);
        lines.push(i as u64 + 2);
    }
    MeasurementTrace::new(times, estimates, shots, None).map_err(|e| with_line(e, &lines))
}

pub fn write_json<W: Write>(trace: &MeasurementTrace, out: W) -> Result<()> {
    let doc = JsonTrace {
        schema_version: SCHEMA_VERSION,
        meta: trace.meta().cloned().unwrap_or_default(),
        points: trace
            .times()
            .iter()
            .zip(trace.estimates())
            .zip(trace.shots())
            .map(|((&t, &p), &shots)| JsonPoint { t, p, shots })
            .collect(),
    };
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")
        .map_err(|e| Error::InvalidTrace(format!("JSON write failed: {e}")))?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<MeasurementTrace> {
    let doc: JsonTrace = serde_json::from_reader(input).map_err(|e| Error::Parse {
        line: e.line() as u64,
        field: json_field_hint(&e),
        message: e.to_string(),
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse {
            line: 0,
            field: "schema_version".into(),
            message: format!("unsupported schema version {} (expected {SCHEMA_VERSION})", doc.schema_version),
        });
    }
    let meta = (doc.meta != TraceMeta::default()).then_some(doc.meta);
    let (mut times, mut estimates, mut shots) = (Vec::new(), Vec::new(), Vec::new());
    for pt in doc.points {
        times.push(pt.t);
        estimates.push(pt.p);
        shots.push(pt.shots);
    }
    MeasurementTrace::new(times, estimates, shots, meta)
}

/// Writes `trace` to `path`, choosing the format from the extension.
pub fn export_trace(trace: &MeasurementTrace, path: &Path) -> Result<()> {
    let format = TraceFormat::from_path(path)?;
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let w = BufWriter::new(file);
    match format {
        TraceFormat::Csv => write_csv(trace, w),
        TraceFormat::Json => write_json(trace, w),
    }
}

/// Reads a trace from `path`, choosing the format from the extension.
pub fn import_trace(path: &Path) -> Result<MeasurementTrace> {
    let format = TraceFormat::from_path(path)?;
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let r = BufReader::new(file);
    match format {
        TraceFormat::Csv => read_csv(r),
        TraceFormat::Json => read_json(r),
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    let field = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err
            .field()
            .and_then(|i| CSV_FIELDS.get(i as usize))
            .map(|s| s.to_string())
            .unwrap_or_else(|| "row".into()),
        csv::ErrorKind::UnequalLengths { .. } => "row".into(),
        _ => "row".into(),
    };
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.kind().to_string(),
        _ => e.to_string(),
    };
    Error::Parse { line, field, message }
}

fn json_field_hint(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    msg.split('`').nth(1).unwrap_or("document").to_string()
}

/// Attaches the source line to a validation error raised on point `i`.
fn with_line(e: Error, lines: &[u64]) -> Error {
    match e {
        Error::InvalidTrace(msg) => {
            let line = msg
                .strip_prefix("point ")
                .and_then(|rest| rest.split(':').next())
                .and_then(|i| i.parse::<usize>().ok())
                .and_then(|i| lines.get(i));
            match line {
                Some(l) => Error::InvalidTrace(format!("line {l}: {msg}")),
                None => Error::InvalidTrace(msg),
            }
        }
        other => other,
    }
}
