//! CSV and JSON artifacts.

use std::fs::File;
use std::path::Path;

use nalgebra::{DMatrix, Matrix6, Vector6};
use serde::Serialize;

use crate::coords::Domain;
use crate::error::{Error, Result};

/// Which curve a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveLabel {
    Mode(usize),
    Sum,
}

impl std::fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveLabel::Mode(k) => write!(f, "{k}"),
            CurveLabel::Sum => f.write_str("sum"),
        }
    }
}

/// One row of a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub theta: f64,
    pub t_s: f64,
    pub state: Vector6<f64>,
    pub label: CurveLabel,
}

pub fn trajectory_header(domain: Domain) -> Vec<String> {
    let mut h = vec!["theta".to_string(), "t_s".to_string()];
    h.extend(domain.column_names().iter().map(|s| s.to_string()));
    h.push("mode_index".into());
    h
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

pub fn write_trajectory_csv(path: &Path, domain: Domain, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(trajectory_header(domain)).map_err(csv_err)?;
    for r in rows {
        let mut rec: Vec<String> = vec![format!("{:.17e}", r.theta), format!("{:.17e}", r.t_s)];
        rec.extend(r.state.iter().map(|x| format!("{x:.17e}")));
        rec.push(r.label.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_trajectory_csv`]; the representation is
/// recognized from the header.
pub fn read_trajectory_csv(path: &Path) -> Result<(Domain, Vec<TrajectoryRow>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let domain = [Domain::Qns, Domain::Cartesian, Domain::Spherical]
        .into_iter()
        .find(|d| header == trajectory_header(*d))
        .ok_or_else(|| Error::InvalidArgument(format!("unrecognized trajectory header {header:?}")))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{}' in column {i}", &rec[i])))
        };
        let mut state = Vector6::zeros();
        for k in 0..6 {
            state[k] = num(2 + k)?;
        }
        let label = match rec[8].trim() {
            "sum" => CurveLabel::Sum,
            s => CurveLabel::Mode(
                s.parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad mode index '{s}'")))?,
            ),
        };
        rows.push(TrajectoryRow {
            theta: num(0)?,
            t_s: num(1)?,
            state,
            label,
        });
    }
    Ok((domain, rows))
}

/// One row per sample: t_s followed by the matrix entries row-major
/// (p11, p12, …).
pub fn write_matrix_samples_csv(path: &Path, times: &[f64], mats: &[DMatrix<f64>]) -> Result<()> {
    let (rows, cols) = mats.first().map_or((0, 0), |m| m.shape());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["t_s".to_string()];
    for i in 1..=rows {
        for j in 1..=cols {
            header.push(format!("p{i}{j}"));
        }
    }
    w.write_record(&header).map_err(csv_err)?;
    for (t, m) in times.iter().zip(mats) {
        let mut rec = vec![format!("{t:.17e}")];
        for i in 0..rows {
            for j in 0..cols {
                rec.push(format!("{:.17e}", m[(i, j)]));
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path)?;
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

/// Row-major nested vectors.
pub fn matrix_rows(m: &Matrix6<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn dmatrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
