use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LearningCurve, TimingRow, TimingTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

pub enum Results<'a> {
    Curve(&'a LearningCurve),
    Table(&'a TimingTable),
}

pub const CURVE_HEADER: [&str; 2] = ["iteration", "accuracy"];
pub const TABLE_HEADER: [&str; 5] = ["pipeline", "n", "mean_s", "std_s", "repeats"];

/// Writes a learning curve or timing table. Floats are written in their
/// shortest round-tripping form so a read returns the exact values.
pub fn export_results(results: Results<'_>, path: impl AsRef<Path>, format: ExportFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match (results, format) {
        (Results::Curve(c), ExportFormat::Json) => serde_json::to_writer_pretty(&mut w, c)?,
        (Results::Table(t), ExportFormat::Json) => serde_json::to_writer_pretty(&mut w, t)?,
        (Results::Curve(c), ExportFormat::Csv) => write_curve_csv(c, &mut w)?,
        (Results::Table(t), ExportFormat::Csv) => write_table_csv(t, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn write_curve_csv(curve: &LearningCurve, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CURVE_HEADER)?;
    for (i, a) in curve.accuracies.iter().enumerate() {
        wtr.write_record([i.to_string(), a.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_table_csv(table: &TimingTable, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(TABLE_HEADER)?;
    for r in &table.rows {
        wtr.write_record([
            r.pipeline.name().to_string(),
            r.n.to_string(),
            r.mean_s.to_string(),
            r.std_s.to_string(),
            r.repeats.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?;
    if !headers.iter().eq(expected.iter().copied()) {
        return Err(Error::InvalidCorpus(format!(
            "unexpected csv header {:?}, expected {expected:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(row: usize, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field.parse().map_err(|e: T::Err| Error::InvalidRow { row, message: format!("{field:?}: {e}") })
}

/// Reads the accuracies back from a curve CSV.
pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    check_header(&mut rdr, &CURVE_HEADER)?;
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let iteration: usize = parse(row, &rec[0])?;
        if iteration != row {
            return Err(Error::InvalidRow { row, message: format!("iteration {iteration} out of order") });
        }
        out.push(parse(row, &rec[1])?);
    }
    Ok(out)
}

pub fn read_curve_json(path: impl AsRef<Path>) -> Result<LearningCurve> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn read_table_csv(path: impl AsRef<Path>) -> Result<TimingTable> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    check_header(&mut rdr, &TABLE_HEADER)?;
    let mut rows = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        rows.push(TimingRow {
            pipeline: parse(row, &rec[0])?,
            n: parse(row, &rec[1])?,
            mean_s: parse(row, &rec[2])?,
            std_s: parse(row, &rec[3])?,
            repeats: parse(row, &rec[4])?,
        });
    }
    Ok(TimingTable { rows })
}

pub fn read_table_json(path: impl AsRef<Path>) -> Result<TimingTable> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
