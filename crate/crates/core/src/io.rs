//! CSV and JSON files written by the pipeline, and readers for them.
//!
//! Frequencies in files are in THz (rad/fs × 10³), times in fs. Densities
//! keep the normalization of the in-memory profiles (unit integral over
//! rad/fs or fs).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use crate::contour::ContourLine;
use crate::error::{Error, Result};
use crate::units::{rad_per_fs_to_thz, thz_to_rad_per_fs};
use crate::wigner::{ChronocyclicWigner, IntensityProfile};

pub const CWF_FILE: &str = "cwf.csv";
pub const CONTOUR_NUMERIC_FILE: &str = "contour_numeric.csv";
pub const CONTOUR_ANALYTIC_FILE: &str = "contour_analytic.csv";
pub const SPECTRUM_FILE: &str = "i_omega.csv";
pub const TEMPORAL_FILE: &str = "i_t.csv";
pub const SCHMIDT_FILE: &str = "schmidt.csv";
pub const S_MINUS_FILE: &str = "s_minus.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SCAN_CSV_FILE: &str = "scan.csv";
pub const SCAN_JSON_FILE: &str = "scan.json";
pub const DESIGN_CSV_FILE: &str = "design.csv";
pub const DESIGN_JSON_FILE: &str = "design.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: e.position().map(|p| p.line() as usize).unwrap_or(0),
        message: e.to_string(),
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn finish(path: &Path, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numeric(format!("csv buffer: {e}")))?;
    write_atomic(path, &bytes)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// First row `t_fs, t_0, t_1, …`, second row `omega_thz, ω_0, ω_1, …`,
/// then one row of `W` per frequency, led by its row index.
pub fn write_cwf(path: &Path, w: &ChronocyclicWigner) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let row = |label: String, vals: &mut dyn Iterator<Item = f64>| {
        std::iter::once(label).chain(vals.map(|v| v.to_string())).collect::<Vec<_>>()
    };
    let e = |e| csv_err(path, e);
    out.write_record(row("t_fs".into(), &mut w.t.iter().copied())).map_err(e)?;
    out.write_record(row("omega_thz".into(), &mut w.omega.iter().map(|&x| rad_per_fs_to_thz(x))))
        .map_err(|e| csv_err(path, e))?;
    for (j, r) in w.values.outer_iter().enumerate() {
        out.write_record(row(j.to_string(), &mut r.iter().copied()))
            .map_err(|e| csv_err(path, e))?;
    }
    finish(path, out)
}

pub fn read_cwf(path: &Path) -> Result<ChronocyclicWigner> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(|e| csv_err(path, e))?);
    }
    if rows.len() < 3 {
        return Err(bad(rows.len(), "expected two axis rows and at least one value row".into()));
    }
    let numbers = |line: usize, rec: &csv::StringRecord| -> Result<Vec<f64>> {
        rec.iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|_| bad(line, format!("not a number: `{s}`"))))
            .collect()
    };
    if &rows[0][0] != "t_fs" || &rows[1][0] != "omega_thz" {
        return Err(bad(1, "missing `t_fs` / `omega_thz` axis rows".into()));
    }
    let t = numbers(1, &rows[0])?;
    let omega: Vec<f64> = numbers(2, &rows[1])?.into_iter().map(thz_to_rad_per_fs).collect();
    let body = &rows[2..];
    if body.len() != omega.len() {
        return Err(bad(3, format!("{} value rows for {} frequencies", body.len(), omega.len())));
    }
    let mut values = Array2::zeros((omega.len(), t.len()));
    for (j, rec) in body.iter().enumerate() {
        let v = numbers(j + 3, rec)?;
        if v.len() != t.len() {
            return Err(bad(j + 3, format!("{} values for {} times", v.len(), t.len())));
        }
        values.row_mut(j).assign(&ndarray::ArrayView1::from(&v));
    }
    Ok(ChronocyclicWigner { omega, t, values })
}

/// Rows `line, omega_thz, t_fs`.
pub fn write_contours(path: &Path, lines: &[ContourLine]) -> Result<()> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["line", "omega_thz", "t_fs"]).map_err(|e| csv_err(path, e))?;
    for (i, l) in lines.iter().enumerate() {
        for &(w, t) in &l.points {
            out.write_record([i.to_string(), rad_per_fs_to_thz(w).to_string(), t.to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    finish(path, out)
}

pub fn read_contours(path: &Path) -> Result<Vec<ContourLine>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    for rec in rdr.deserialize::<(usize, f64, f64)>() {
        let (i, w, t) = rec.map_err(|e| csv_err(path, e))?;
        if i >= lines.len() {
            lines.resize(i + 1, Vec::new());
        }
        lines[i].push((thz_to_rad_per_fs(w), t));
    }
    Ok(lines
        .into_iter()
        .map(|points| {
            let closed = points.len() > 2 && points.first() == points.last();
            ContourLine { points, closed }
        })
        .collect())
}

/// Two columns; `axis_label` names the first (`omega_thz` or `t_fs`).
pub fn write_profile(path: &Path, axis_label: &str, profile: &IntensityProfile) -> Result<()> {
    let to_file: fn(f64) -> f64 = if axis_label == "omega_thz" { rad_per_fs_to_thz } else { |x| x };
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record([axis_label, "density"]).map_err(|e| csv_err(path, e))?;
    for (x, y) in profile.axis.iter().zip(&profile.density) {
        out.write_record([to_file(*x).to_string(), y.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    finish(path, out)
}

pub fn read_profile(path: &Path) -> Result<IntensityProfile> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let thz = rdr.headers().map_err(|e| csv_err(path, e))?.get(0) == Some("omega_thz");
    let mut axis = Vec::new();
    let mut density = Vec::new();
    for rec in rdr.deserialize::<(f64, f64)>() {
        let (x, y) = rec.map_err(|e| csv_err(path, e))?;
        axis.push(if thz { thz_to_rad_per_fs(x) } else { x });
        density.push(y);
    }
    Ok(IntensityProfile { axis, density })
}

/// Rows `m, lambda`.
pub fn write_schmidt(path: &Path, lambdas: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["m", "lambda"]).map_err(|e| csv_err(path, e))?;
    for (m, l) in lambdas.iter().enumerate() {
        out.write_record([m.to_string(), l.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    finish(path, out)
}

pub fn read_schmidt(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    rdr.deserialize::<(usize, f64)>()
        .map(|r| r.map(|(_, l)| l).map_err(|e| csv_err(path, e)))
        .collect()
}

/// CSV text of `rows` with a header row taken from the field names.
pub fn records_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    for r in rows {
        out.serialize(r).map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    }
    let bytes = out
        .into_inner()
        .map_err(|e| Error::Numeric(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numeric(e.to_string()))
}

pub fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, records_csv(rows)?.as_bytes())
}

pub fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    rdr.deserialize().map(|r| r.map_err(|e| csv_err(path, e))).collect()
}

pub fn output_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
