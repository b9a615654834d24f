use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use disctree::{ChargeSystem, DensitySpec};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Classify, CliError, CliResult};

/// 17 significant digits, enough to round-trip any double.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn raw(v: f64) -> Box<RawValue> {
    if v.is_finite() {
        RawValue::from_string(num(v)).expect("exponent notation is valid JSON")
    } else {
        RawValue::from_string("null".into()).unwrap()
    }
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads a CSV whose header starts with `expected` and returns the first
/// `expected.len()` columns of each row. With `extra_ok`, rows may carry
/// further columns as long as every row has the header's width.
fn read_columns(path: &Path, expected: &[&str], extra_ok: bool) -> CliResult<Vec<Vec<f64>>> {
    let name = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{name}: {e}")))?
        .clone();
    let width = header.len();
    let matches = header.iter().zip(expected).all(|(h, e)| h == *e);
    if !matches || width < expected.len() || (!extra_ok && width != expected.len()) {
        return Err(CliError::Data(format!(
            "{name}: line 1: expected header `{}`, found `{}`",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            match e.kind() {
                csv::ErrorKind::UnequalLengths { len, .. } => CliError::Data(format!(
                    "{name}: line {line}: expected {width} fields, found {len}"
                )),
                _ => CliError::Data(format!("{name}: line {line}: {e}")),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = record
            .iter()
            .take(expected.len())
            .map(|field| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(CliError::Data(format!(
                    "{name}: line {line}: non-finite value `{field}`"
                ))),
                Err(_) => Err(CliError::Data(format!(
                    "{name}: line {line}: `{field}` is not a number"
                ))),
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_particles(path: &Path) -> CliResult<ChargeSystem> {
    let rows = read_columns(path, &["x", "q"], false)?;
    ChargeSystem::from_particles(rows.into_iter().map(|r| (r[0], r[1])))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Target file with header `y`; a field file (`y,E`) is also accepted so
/// output can be fed back in.
pub fn read_targets(path: &Path) -> CliResult<Vec<f64>> {
    let rows = read_columns(path, &["y"], true)?;
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

pub fn read_density(path: &Path) -> CliResult<DensitySpec> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: line {}: {e}", path.display(), e.line())))
}

pub fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_field_csv(w: &mut dyn Write, targets: &[f64], values: &[f64]) -> io::Result<()> {
    writeln!(w, "y,E")?;
    for (y, e) in targets.iter().zip(values) {
        writeln!(w, "{},{}", num(*y), num(*e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Point {
    y: Box<RawValue>,
    #[serde(rename = "E")]
    e: Box<RawValue>,
}

#[derive(Serialize)]
struct FieldDoc<'a, S: Serialize> {
    summary: &'a S,
    field: Vec<Point>,
}

pub fn write_field_json<S: Serialize>(
    w: &mut dyn Write,
    summary: &S,
    targets: &[f64],
    values: &[f64],
) -> CliResult<()> {
    let doc = FieldDoc {
        summary,
        field: targets
            .iter()
            .zip(values)
            .map(|(&y, &e)| Point {
                y: raw(y),
                e: raw(e),
            })
            .collect(),
    };
    serde_json::to_writer(&mut *w, &doc).internal()?;
    writeln!(w).internal()
}

/// A rectangular report: header plus rows of already formatted cells.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Table {
    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Num(v) => num(*v),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Array of objects keyed by the header.
    pub fn write_json(&self, w: &mut dyn Write) -> CliResult<()> {
        let rows: Vec<Row> = self
            .rows
            .iter()
            .map(|cells| Row {
                header: &self.header,
                cells,
            })
            .collect();
        serde_json::to_writer_pretty(&mut *w, &rows).internal()?;
        writeln!(w).internal()
    }
}

struct Row<'a> {
    header: &'a [&'static str],
    cells: &'a [Cell],
}

impl Serialize for Row<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.cells.len()))?;
        for (h, c) in self.header.iter().zip(self.cells) {
            match c {
                Cell::Int(v) => map.serialize_entry(h, v)?,
                Cell::Num(v) => map.serialize_entry(h, &raw(*v))?,
                Cell::Text(t) => map.serialize_entry(h, t)?,
            }
        }
        map.end()
    }
}
