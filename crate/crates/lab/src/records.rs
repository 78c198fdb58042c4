//! Per-trial record files: CSV and JSON lines with the columns
//! `trial,observer,theta,phi,outcome` (angles in radians).

use std::io::{self, Write};

use epr_core::measurement::MeasurementRecord;
use epr_core::Outcome;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

impl RecordFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            RecordFormat::Csv => "records.csv",
            RecordFormat::Jsonl => "records.jsonl",
        }
    }
}

#[derive(Serialize)]
struct Row<'a> {
    trial: u64,
    observer: &'a str,
    theta: f64,
    phi: f64,
    outcome: Outcome,
}

impl<'a> From<&'a MeasurementRecord> for Row<'a> {
    fn from(r: &'a MeasurementRecord) -> Self {
        Row {
            trial: r.trial,
            observer: &r.observer,
            theta: r.axis.theta(),
            phi: r.axis.phi(),
            outcome: r.outcome,
        }
    }
}

pub fn write_csv<W: Write>(out: W, records: &[MeasurementRecord]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row::from(r))?;
    }
    w.flush()
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[MeasurementRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &Row::from(r))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write<W: Write>(
    format: RecordFormat,
    out: W,
    records: &[MeasurementRecord],
) -> io::Result<()> {
    match format {
        RecordFormat::Csv => write_csv(out, records),
        RecordFormat::Jsonl => write_jsonl(out, records),
    }
}
