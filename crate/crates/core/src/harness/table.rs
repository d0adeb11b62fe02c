//! Tabular reports: six-significant-digit CSV, JSON with metadata, and
//! atomic file output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Metadata};

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Float(x) => Some(x),
            Cell::Text(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match *self {
            Cell::Int(i) => Some(i),
            _ => None,
        }
    }

    fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_sig(*x, 6),
            Cell::Text(s) => s.clone(),
        }
    }

    fn from_csv_field(s: &str) -> Cell {
        if let Ok(i) = s.parse::<i64>() {
            Cell::Int(i)
        } else if let Ok(x) = s.parse::<f64>() {
            Cell::Float(x)
        } else {
            Cell::Text(s.to_string())
        }
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

/// Format with `sig` significant digits, trailing zeros trimmed; magnitudes
/// below 1e−5 use scientific notation.
pub fn format_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    if x.abs() < 1e-5 {
        let s = format!("{:.*e}", sig - 1, x);
        let (mantissa, exp) = s.split_once('e').expect("scientific format has an exponent");
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // rounding may carry into a new leading digit
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    let significant = digits.trim_start_matches('0').len();
    let s = if decimals > 0 && significant > sig { format!("{:.*}", decimals - 1, x) } else { s };
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// A table with its provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub metadata: Metadata,
    pub table: Table,
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    metadata: Metadata,
    columns: Vec<String>,
    rows: Vec<serde_json::Map<String, serde_json::Value>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Report {
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        if self.table.rows.is_empty() {
            return Err(HarnessError::Argument("refusing to emit an empty table".into()));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.table.columns).map_err(HarnessError::from_csv)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(Cell::to_csv_field)).map_err(HarnessError::from_csv)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        if self.table.rows.is_empty() {
            return Err(HarnessError::Argument("refusing to emit an empty table".into()));
        }
        let rows = self
            .table
            .rows
            .iter()
            .map(|row| {
                self.table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| Ok((c.clone(), serde_json::to_value(v)?)))
                    .collect::<Result<serde_json::Map<_, _>, serde_json::Error>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::Parse(e.to_string()))?;
        let doc = JsonReport { metadata: self.metadata.clone(), columns: self.table.columns.clone(), rows };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| HarnessError::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String, HarnessError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Parse a JSON report produced by [`Report::to_json`].
pub fn parse_report_json(text: &str) -> Result<Report, HarnessError> {
    let doc: JsonReport = serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    let mut table = Table::new(doc.columns);
    for (i, obj) in doc.rows.into_iter().enumerate() {
        if obj.len() != table.columns.len() {
            return Err(HarnessError::Parse(format!("row {i} has {} fields, expected {}", obj.len(), table.columns.len())));
        }
        let mut row = Vec::with_capacity(table.columns.len());
        for c in &table.columns {
            let v = obj.get(c).ok_or_else(|| HarnessError::Parse(format!("row {i} lacks column {c:?}")))?;
            row.push(serde_json::from_value(v.clone()).map_err(|e| HarnessError::Parse(e.to_string()))?);
        }
        table.rows.push(row);
    }
    Ok(Report { metadata: doc.metadata, table })
}

/// Parse a CSV table with a header row.
pub fn parse_table_csv(text: &str) -> Result<Table, HarnessError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let columns: Vec<String> = r.headers().map_err(HarnessError::from_csv)?.iter().map(str::to_string).collect();
    let mut table = Table::new(columns);
    for rec in r.records() {
        let rec = rec.map_err(HarnessError::from_csv)?;
        table.rows.push(rec.iter().map(Cell::from_csv_field).collect());
    }
    Ok(table)
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, so a failure never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig(0.697759, 6), "0.697759");
        assert_eq!(format_sig(1.2945677, 6), "1.29457");
        assert_eq!(format_sig(-0.0921229, 6), "-0.0921229");
        assert_eq!(format_sig(0.00202, 6), "0.00202");
        assert_eq!(format_sig(0.0000122, 6), "0.0000122");
        assert_eq!(format_sig(9.1e-6, 6), "9.1e-6");
        assert_eq!(format_sig(6.84321e-6, 2), "6.8e-6");
        assert_eq!(format_sig(9.9999996, 6), "10");
        assert_eq!(format_sig(0.99999996, 6), "1");
        assert_eq!(format_sig(123456789.0, 6), "123456789");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(-1.0, 6), "-1");
    }

    #[test]
    fn csv_cells_round_trip() {
        let mut t = Table::new(["n", "x", "tag"]);
        t.push(vec![Cell::Int(1), Cell::Float(0.25), Cell::Text("a,b".into())]);
        let report = Report { metadata: Metadata::default(), table: t };
        let csv = report.to_csv().unwrap();
        assert_eq!(csv, "n,x,tag\n1,0.25,\"a,b\"\n");
        let back = parse_table_csv(&csv).unwrap();
        assert_eq!(back, report.table);
    }

    #[test]
    fn empty_tables_are_rejected() {
        let report = Report { metadata: Metadata::default(), table: Table::new(["n"]) };
        assert!(matches!(report.to_csv(), Err(HarnessError::Argument(_))));
        assert!(matches!(report.to_json(), Err(HarnessError::Argument(_))));
    }

    #[test]
    fn json_round_trip_is_idempotent() {
        let mut t = Table::new(["n", "E"]);
        t.push(vec![Cell::Int(2), Cell::Float(-0.2304905123456789)]);
        t.push(vec![Cell::Int(3), Cell::Float(100.0)]);
        let report = Report { metadata: Metadata::default(), table: t };
        let json = report.to_json().unwrap();
        let parsed = parse_report_json(&json).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(parsed.to_json().unwrap(), json);
    }

    #[test]
    fn atomic_write_replaces_and_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        let bad = dir.path().join("missing").join("out.csv");
        assert!(matches!(write_atomic(&bad, "x"), Err(HarnessError::Io { .. })));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
