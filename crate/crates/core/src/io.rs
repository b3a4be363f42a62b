//! Input parsing, CSV export and fixed-precision JSON output.

use serde::Serialize;
use std::io;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::models::{Hyperbolic, HyperbolicPoint, Model};
use crate::scores::ScoreOptions;

/// JSON formatter writing every float with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `1.2345678901234567e0` style: 17 significant digits, always round-trips.
pub fn format_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Point-set file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses from the extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// A point-set file: header `x1..xn` (plus `x0` for Lorentz) and an
/// optional `label` column. JSON files hold an array of objects with the
/// same keys.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: Format,
    pub model: Model,
}

impl InputSpec {
    pub fn new(path: impl Into<PathBuf>, model: Model) -> Self {
        let path = path.into();
        let format = Format::from_path(&path);
        Self { path, format, model }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointTable {
    pub points: Vec<HyperbolicPoint>,
    pub labels: Option<Vec<String>>,
}

impl PointTable {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, HyperbolicPoint::dim)
    }

    /// Points grouped by label, in order of first appearance.
    pub fn groups(&self) -> Vec<(String, Vec<HyperbolicPoint>)> {
        let mut out: Vec<(String, Vec<HyperbolicPoint>)> = Vec::new();
        let Some(labels) = &self.labels else {
            return vec![(String::new(), self.points.clone())];
        };
        for (p, l) in self.points.iter().zip(labels) {
            match out.iter_mut().find(|(k, _)| k == l) {
                Some((_, v)) => v.push(p.clone()),
                None => out.push((l.clone(), vec![p.clone()])),
            }
        }
        out
    }
}

fn coordinate_columns(names: &[String], model: Model, source: &str) -> Result<(Vec<usize>, Option<usize>)> {
    let mut label = None;
    let mut coords: Vec<(usize, usize)> = Vec::new();
    for (col, name) in names.iter().enumerate() {
        let name = name.trim();
        if name == "label" {
            label = Some(col);
        } else if let Some(k) = name.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()) {
            coords.push((k, col));
        } else {
            return Err(Error::Parse(format!("{source}: unknown column '{name}'")));
        }
    }
    coords.sort_unstable();
    let first = if model == Model::Lorentz { 0 } else { 1 };
    for (expect, &(k, _)) in (first..).zip(&coords) {
        if k != expect {
            let hint = if k == 0 { " (x0 is only valid for the lorentz model)" } else { "" };
            return Err(Error::Parse(format!("{source}: expected column x{expect}, found x{k}{hint}")));
        }
    }
    if coords.len() < 2 - first {
        return Err(Error::Parse(format!("{source}: no coordinate columns x1..xn")));
    }
    Ok((coords.into_iter().map(|(_, c)| c).collect(), label))
}

fn row_point(geometry: &Hyperbolic, model: Model, coords: Vec<f64>, source: &str, row: usize) -> Result<HyperbolicPoint> {
    geometry
        .point(model, coords)
        .map_err(|e| Error::InvalidPoint(format!("{source}: row {row}: {e}")))
}

/// Parses CSV text; `row` numbers in diagnostics count data rows from 1.
pub fn parse_csv(text: &str, model: Model, geometry: &Hyperbolic, source: &str) -> Result<PointTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(format!("{source}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let (cols, label_col) = coordinate_columns(&header, model, source)?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse(format!("{source}: row {row}: {e}")))?;
        let coords = cols
            .iter()
            .map(|&c| {
                let field = rec.get(c).unwrap_or("");
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("{source}: row {row}: '{}' is not a number in column {}", field, header[c])))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(row_point(geometry, model, coords, source, row)?);
        if let Some(l) = label_col {
            labels.push(rec.get(l).unwrap_or("").to_string());
        }
    }
    finish_table(points, label_col.map(|_| labels), source)
}

/// Parses a JSON array of row objects.
pub fn parse_json(text: &str, model: Model, geometry: &Hyperbolic, source: &str) -> Result<PointTable> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("{source}: {e}")))?;
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{source}: expected a JSON array of rows")))?;
    let mut names: Vec<String> = Vec::new();
    if let Some(first) = rows.first().and_then(|r| r.as_object()) {
        names = first.keys().cloned().collect();
    }
    let (cols, label_col) = coordinate_columns(&names, model, source)?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let row = i + 1;
        let obj = r
            .as_object()
            .ok_or_else(|| Error::Parse(format!("{source}: row {row}: expected an object")))?;
        if obj.len() != names.len() || !names.iter().all(|k| obj.contains_key(k)) {
            return Err(Error::Parse(format!("{source}: row {row}: keys differ from the first row")));
        }
        let coords = cols
            .iter()
            .map(|&c| {
                obj[&names[c]]
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("{source}: row {row}: {} is not a number", names[c])))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(row_point(geometry, model, coords, source, row)?);
        if let Some(l) = label_col {
            labels.push(match &obj[&names[l]] {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            });
        }
    }
    finish_table(points, label_col.map(|_| labels), source)
}

fn finish_table(points: Vec<HyperbolicPoint>, labels: Option<Vec<String>>, source: &str) -> Result<PointTable> {
    if points.is_empty() {
        return Err(Error::EmptyInput(format!("{source}: no data rows")));
    }
    Ok(PointTable { points, labels })
}

pub fn read_points(spec: &InputSpec, geometry: &Hyperbolic) -> Result<PointTable> {
    let source = spec.path.display().to_string();
    let text = std::fs::read_to_string(&spec.path).map_err(|e| Error::Io(format!("{source}: {e}")))?;
    match spec.format {
        Format::Csv => parse_csv(&text, spec.model, geometry, &source),
        Format::Json => parse_json(&text, spec.model, geometry, &source),
    }
}

/// Writes points as CSV with 17 significant digits (exact round trip).
pub fn write_points_csv<W: io::Write>(points: &[HyperbolicPoint], labels: Option<&[String]>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = points.first() else {
        return Err(Error::EmptyInput("no points to write".into()));
    };
    let start = if first.model() == Model::Lorentz { 0 } else { 1 };
    let mut header: Vec<String> = (start..start + first.coords().len()).map(|k| format!("x{k}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for (i, p) in points.iter().enumerate() {
        let mut rec: Vec<String> = p.coords().iter().map(|&c| format_f64(c)).collect();
        if let Some(l) = labels {
            rec.push(l[i].clone());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub const ENV_PRUNE_TOLERANCE: &str = "HYPERDGA_EPS_PRUNE";
pub const ENV_BOUNDARY_MARGIN: &str = "HYPERDGA_DELTA_BOUNDARY";

/// Default options with the environment overrides applied.
pub fn options_from_env() -> Result<ScoreOptions> {
    options_from_vars(|k| std::env::var(k).ok())
}

pub fn options_from_vars(get: impl Fn(&str) -> Option<String>) -> Result<ScoreOptions> {
    let mut opts = ScoreOptions::default();
    let read = |key: &str| -> Result<Option<f64>> {
        match get(key) {
            None => Ok(None),
            Some(v) => match v.trim().parse::<f64>() {
                Ok(x) if x.is_finite() && x >= 0.0 && x < 1.0 => Ok(Some(x)),
                _ => Err(Error::Parse(format!("{key}='{v}' must be a number in [0, 1)"))),
            },
        }
    };
    if let Some(t) = read(ENV_PRUNE_TOLERANCE)? {
        opts.prune.tolerance = t;
    }
    if let Some(m) = read(ENV_BOUNDARY_MARGIN)? {
        opts.geometry.boundary_margin = m;
    }
    Ok(opts)
}
