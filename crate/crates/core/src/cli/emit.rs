use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::report::{Cell, CliError, Report, Table};

/// `%.17g`-style rendering: 17 significant digits, trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Output format of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Pretty JSON whose floats go through [`fmt_g17`].
struct G17Formatter(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f64) -> io::Result<()> {
        // "-0" would read back as the integer 0
        let s = if x == 0.0 { "0".to_string() } else { fmt_g17(x) };
        w.write_all(s.as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f32) -> io::Result<()> {
        self.write_f64(w, x as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// The whole report as one JSON document, newline terminated.
pub fn to_json(report: &Report) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter(serde_json::ser::PrettyFormatter::new()));
    report.serialize(&mut ser).expect("report serializes to memory");
    out.push(b'\n');
    out
}

/// One table as CSV with a header row.
pub fn table_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Io(io::Error::other(e.to_string()));
    w.write_record(&table.columns).map_err(io_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(io_err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(io::Error::other(e.to_string())))
}

/// Verdicts as a two-column table, values in JSON form.
pub fn verdict_table(report: &Report) -> Table {
    let mut t = Table::new("verdicts", &["key", "value"]);
    for (k, v) in &report.verdicts {
        let text = match v {
            Value::String(s) => s.clone(),
            other => String::from_utf8(to_json_value(other)).unwrap_or_default(),
        };
        t.push(vec![k.as_str().into(), text.into()]);
    }
    t
}

fn to_json_value(v: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter(serde_json::ser::PrettyFormatter::with_indent(b"")));
    v.serialize(&mut ser).expect("value serializes to memory");
    out.retain(|&b| b != b'\n');
    out
}

fn csv_tables(report: &Report) -> Vec<Table> {
    let mut all = report.tables.clone();
    all.push(verdict_table(report));
    all
}

/// Single byte stream: JSON, or every table as CSV behind a `# name` line.
pub fn emit(report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => Ok(to_json(report)),
        Format::Csv => {
            let mut out = Vec::new();
            for t in csv_tables(report) {
                out.extend_from_slice(format!("# {}\n", t.name).as_bytes());
                out.extend(table_csv(&t)?);
            }
            Ok(out)
        }
    }
}

/// Writes to `out`, or stdout when absent. CSV gives one file per table,
/// named `<stem>-<table>.<ext>` next to `out`.
pub fn write_report(report: &Report, format: Format, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let Some(path) = out else {
        io::stdout().write_all(&emit(report, format)?)?;
        return Ok(Vec::new());
    };
    match format {
        Format::Json => {
            std::fs::write(path, to_json(report))?;
            Ok(vec![path.to_path_buf()])
        }
        Format::Csv => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
            let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
            let mut written = Vec::new();
            for t in csv_tables(report) {
                let p = path.with_file_name(format!("{stem}-{}.{ext}", t.name));
                std::fs::write(&p, table_csv(&t)?)?;
                written.push(p);
            }
            Ok(written)
        }
    }
}
