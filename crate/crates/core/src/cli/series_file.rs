//! Series CSV (`index, x, u, y, imputed`) with a JSON sidecar header.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imputation::{ControlMask, ImputedSeries};
use crate::processes::{ProcessConfig, ProcessPath};

pub const COLUMNS: [&str; 5] = ["index", "x", "u", "y", "imputed"];

/// Sidecar contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesHeader {
    pub process: ProcessConfig,
    pub period: usize,
    pub p: f64,
    pub n: usize,
    pub seed: Option<u64>,
    pub process_seed: u64,
    pub mask_seed: u64,
}

impl SeriesHeader {
    pub fn for_series(series: &ImputedSeries, seed: Option<u64>) -> Self {
        Self {
            process: series.x.config,
            period: series.period(),
            p: series.mask.p,
            n: series.n(),
            seed,
            process_seed: series.x.seed,
            mask_seed: series.mask.seed,
        }
    }
}

/// `<csv path>.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// CSV text; reals use the shortest representation that round-trips.
pub fn series_csv(series: &ImputedSeries) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for k in 0..=series.n() {
        let (y, imputed) = if k == 0 {
            (String::new(), String::new())
        } else {
            (series.y(k).to_string(), (series.imputed(k) as u8).to_string())
        };
        w.write_record([
            k.to_string(),
            series.x.values[k].to_string(),
            (series.mask.u[k] as u8).to_string(),
            y,
            imputed,
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_series(path: &Path, series: &ImputedSeries, seed: Option<u64>) -> Result<()> {
    let header = SeriesHeader::for_series(series, seed);
    let mut json = serde_json::to_vec_pretty(&header)?;
    json.push(b'\n');
    write_atomic(&sidecar_path(path), &json)?;
    write_atomic(path, &series_csv(series)?)
}

fn parse_bit(field: &str, line: usize, name: &str) -> Result<bool> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Structural(format!(
            "row {line}: column {name} must be 0 or 1, got {other:?}"
        ))),
    }
}

fn parse_real(field: &str, line: usize, name: &str) -> Result<f64> {
    field.parse().map_err(|_| {
        Error::Structural(format!("row {line}: column {name} is not a number: {field:?}"))
    })
}

/// Reads a series and its sidecar, checking that `y` and the imputed flags
/// agree with the model applied to `x` and `u`.
pub fn read_series(path: &Path) -> Result<(ImputedSeries, SeriesHeader)> {
    let header: SeriesHeader = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    header.process.validate()?;
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()? != &csv::StringRecord::from(COLUMNS.to_vec()) {
        return Err(Error::Structural(format!(
            "expected columns {}",
            COLUMNS.join(",")
        )));
    }
    let (mut x, mut u, mut y, mut imputed) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != COLUMNS.len() {
            return Err(Error::Structural(format!("row {line}: {} fields", rec.len())));
        }
        let index: usize = rec[0]
            .parse()
            .map_err(|_| Error::Structural(format!("row {line}: bad index {:?}", &rec[0])))?;
        if index != line {
            return Err(Error::Structural(format!("row {line} has index {index}")));
        }
        x.push(parse_real(&rec[1], line, "x")?);
        u.push(parse_bit(&rec[2], line, "u")?);
        if line == 0 {
            if !rec[3].is_empty() || !rec[4].is_empty() {
                return Err(Error::Structural("row 0 must leave y and imputed empty".into()));
            }
        } else {
            y.push(parse_real(&rec[3], line, "y")?);
            imputed.push(parse_bit(&rec[4], line, "imputed")?);
        }
    }
    if x.len() != header.n + 1 {
        return Err(Error::Structural(format!(
            "header says n = {} but the file has {} rows",
            header.n,
            x.len()
        )));
    }
    if let Some(k) = (1..x.len()).find(|&k| imputed[k - 1] == u[k]) {
        return Err(Error::Structural(format!("row {k}: imputed flag must equal 1 - u")));
    }
    let path = ProcessPath {
        values: x,
        config: header.process,
        seed: header.process_seed,
    };
    let mask = ControlMask {
        u,
        period: header.period,
        p: header.p,
        seed: header.mask_seed,
    };
    Ok((ImputedSeries::from_parts(path, mask, y)?, header))
}
