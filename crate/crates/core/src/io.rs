//! CSV datasets, ground-truth sidecars and per-row influence reports.
//!
//! Dataset files have a header row, comma separators and `.` decimals. The
//! response defaults to the column named `y`; every other column is a
//! predictor. Ground-truth sidecars list one 1-based row index per line.

use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{HidetifyError, Result};
use crate::influence::ScoreKind;
use crate::ramm::DetectionResult;
use crate::simgen::ContaminatedSample;
use crate::stats::asymmetric_variance;

pub const DEFAULT_RESPONSE: &str = "y";

/// Which column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseSelector {
    Name(String),
    Index(usize),
}

impl ResponseSelector {
    /// A header name if one matches exactly, otherwise a 0-based index if
    /// `s` is an integer.
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            ResponseSelector::Index(i) if *i < headers.len() => Ok(*i),
            ResponseSelector::Index(i) => Err(HidetifyError::InvalidData(format!(
                "response column index {i} out of range ({} columns)",
                headers.len()
            ))),
            ResponseSelector::Name(name) => {
                if let Some(i) = headers.iter().position(|h| h == name) {
                    Ok(i)
                } else if let Ok(i) = name.parse::<usize>() {
                    ResponseSelector::Index(i).resolve(headers)
                } else {
                    Err(HidetifyError::InvalidData(format!(
                        "response column {name:?} not found in header"
                    )))
                }
            }
        }
    }
}

impl Default for ResponseSelector {
    fn default() -> Self {
        ResponseSelector::Name(DEFAULT_RESPONSE.to_string())
    }
}

/// A parsed dataset with its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub data: DataMatrix,
    pub predictor_names: Vec<String>,
    pub response_name: String,
    /// Names of constant predictors removed on request.
    pub dropped: Vec<String>,
}

/// Parse a dataset. Constant predictor columns are an error unless
/// `drop_degenerate` is set, in which case they are removed and listed in
/// [`LoadedDataset::dropped`].
pub fn read_dataset<R: Read>(
    reader: R,
    response: &ResponseSelector,
    drop_degenerate: bool,
) -> Result<LoadedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let y_col = response.resolve(&headers)?;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            HidetifyError::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(HidetifyError::Parse {
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| HidetifyError::Parse {
                line,
                message: format!("column {:?}: cannot parse {cell:?} as a number", headers[j]),
            })?;
            if !value.is_finite() {
                return Err(HidetifyError::Parse {
                    line,
                    message: format!("column {:?}: non-finite value {cell:?}", headers[j]),
                });
            }
            columns[j].push(value);
        }
    }
    let y = columns[y_col].clone();
    let n = y.len();
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut dropped = Vec::new();
    for (j, col) in columns.into_iter().enumerate() {
        if j == y_col {
            continue;
        }
        if n >= 2 && asymmetric_variance(&col, 0.5)? == 0.0 {
            if drop_degenerate {
                dropped.push(headers[j].clone());
                continue;
            }
            return Err(HidetifyError::DegenerateColumn {
                column: Some(names.len() + dropped.len()),
                subset: None,
            });
        }
        names.push(headers[j].clone());
        values.extend(col);
    }
    let data = DataMatrix::new(n, names.len(), values, y)?;
    Ok(LoadedDataset {
        data,
        predictor_names: names,
        response_name: headers[y_col].clone(),
        dropped,
    })
}

pub fn read_dataset_file(
    path: &Path,
    response: &ResponseSelector,
    drop_degenerate: bool,
) -> Result<LoadedDataset> {
    read_dataset(std::fs::File::open(path)?, response, drop_degenerate)
}

/// Write predictors as `x1..xp` followed by the response column `y`.
pub fn write_dataset<W: Write>(writer: W, data: &DataMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    header.push(DEFAULT_RESPONSE.to_string());
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut row: Vec<String> = (0..data.p()).map(|j| data.get(i, j).to_string()).collect();
        row.push(data.response()[i].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One 1-based row index per line.
pub fn write_truth<W: Write>(mut writer: W, truth: &[usize]) -> Result<()> {
    for &i in truth {
        writeln!(writer, "{}", i + 1)?;
    }
    Ok(())
}

/// Parse a sidecar back into sorted 0-based indices.
pub fn read_truth<R: BufRead>(reader: R) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let idx: usize = t.parse().map_err(|_| HidetifyError::Parse {
            line: line_no + 1,
            message: format!("expected a row index, found {t:?}"),
        })?;
        if idx == 0 {
            return Err(HidetifyError::Parse {
                line: line_no + 1,
                message: "row indices are 1-based".into(),
            });
        }
        out.push(idx - 1);
    }
    out.sort_unstable();
    Ok(out)
}

/// The sidecar path for a dataset path: `data.csv` → `data.truth.txt`.
pub fn truth_path(dataset: &Path) -> PathBuf {
    dataset.with_extension("truth.txt")
}

/// Write a sample and its sidecar next to each other.
pub fn export_sample(path: &Path, sample: &ContaminatedSample) -> Result<PathBuf> {
    write_dataset(std::fs::File::create(path)?, &sample.data)?;
    let sidecar = truth_path(path);
    write_truth(std::fs::File::create(&sidecar)?, &sample.truth)?;
    Ok(sidecar)
}

/// One row of an influence report. Missing statistics are empty cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord {
    /// 1-based row number in the input file.
    pub row: usize,
    pub t_min_stat: Option<f64>,
    pub t_min_p: Option<f64>,
    pub t_max_stat: Option<f64>,
    pub t_max_p: Option<f64>,
    /// `min:<iteration>`, `max:<iteration>`, `single`, or empty.
    pub step_flagged: String,
    pub validation_stat: Option<f64>,
    pub validation_p: Option<f64>,
    pub influential: bool,
}

/// One record per row, using the most recent Min and Max scores of each row.
pub fn report_records(result: &DetectionResult, n: usize) -> Vec<ReportRecord> {
    (0..n)
        .map(|i| {
            let t_min = result.latest_score(i, ScoreKind::SubsetMin);
            let t_max = result.latest_score(i, ScoreKind::SubsetMax);
            let validation = result.validation_score(i);
            let step_flagged = match result.flagged_by(i) {
                Some((crate::ramm::StepKind::Single, _)) => "single".to_string(),
                Some((kind, it)) => format!("{}:{it}", kind.label()),
                None => String::new(),
            };
            ReportRecord {
                row: i + 1,
                t_min_stat: t_min.map(|s| s.statistic),
                t_min_p: t_min.map(|s| s.p_value),
                t_max_stat: t_max.map(|s| s.statistic),
                t_max_p: t_max.map(|s| s.p_value),
                step_flagged,
                validation_stat: validation.map(|s| s.statistic),
                validation_p: validation.map(|s| s.p_value),
                influential: result.influential.binary_search(&i).is_ok(),
            }
        })
        .collect()
}

pub fn write_report<W: Write>(writer: W, records: &[ReportRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// The metadata path for a report path: `report.csv` → `report.meta.json`.
pub fn metadata_path(report: &Path) -> PathBuf {
    report.with_extension("meta.json")
}
