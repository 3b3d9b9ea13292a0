//! Report serialization: long-format CSV and an aligned text table.

use std::str::FromStr;

use crate::change::TestKind;
use crate::error::{Error, Result};
use crate::fieldgen::{DepKind, NoiseDist};
use crate::grid::SurfaceKind;
use crate::io::format_f64;
use crate::montecarlo::{ExperimentReport, ReportRow};

/// CSV column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "test",
    "n",
    "dist",
    "dep_kind",
    "rho",
    "surface",
    "amplitude",
    "decorrelated",
    "reps",
    "rate",
    "se",
    "crit_value",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "table" | "text" | "txt" => Ok(ReportFormat::Table),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

fn fields(r: &ReportRow) -> [String; 12] {
    [
        r.test.to_string(),
        r.n.to_string(),
        r.dist.to_string(),
        r.dep_kind.to_string(),
        format_f64(r.rho),
        r.surface.to_string(),
        format_f64(r.amplitude),
        r.decorrelated.to_string(),
        r.reps.to_string(),
        format_f64(r.rate),
        format_f64(r.se),
        r.crit_value.map(format_f64).unwrap_or_default(),
    ]
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::InvalidArgument("report has no rows".into()));
    }
    match format {
        ReportFormat::Csv => Ok(to_csv(report)),
        ReportFormat::Table => Ok(to_table(report)),
    }
}

fn to_csv(report: &ExperimentReport) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("write to memory");
    for r in &report.rows {
        w.write_record(fields(r)).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
}

fn to_table(report: &ExperimentReport) -> String {
    let mut cells: Vec<[String; 12]> = vec![CSV_COLUMNS.map(String::from)];
    for r in &report.rows {
        let mut f = fields(r);
        f[9] = format!("{:.3}", r.rate);
        f[10] = format!("{:.4}", r.se);
        f[11] = r.crit_value.map(|c| format!("{c:.4}")).unwrap_or_else(|| "-".into());
        cells.push(f);
    }
    let widths: Vec<usize> = (0..12).map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for note in &report.notes {
        out.push_str("# ");
        out.push_str(note);
        out.push('\n');
    }
    for row in &cells {
        let line: Vec<String> = row.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn field<T: FromStr>(rec: &csv::StringRecord, row: usize, col: usize) -> Result<T> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        row,
        col: col + 1,
        msg: format!("bad value `{raw}` for column {}", CSV_COLUMNS[col]),
    })
}

/// Parses the CSV produced by [`emit_report`]. Wall-clock times are not
/// stored in the CSV and come back as 0.
pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse { row: 0, col: 0, msg: e.to_string() })?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parse { row: 0, col: 0, msg: format!("unexpected header {header:?}") });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse { row, col: 0, msg: e.to_string() })?;
        let crit = match rec.get(11) {
            Some("") | None => None,
            Some(_) => Some(field::<f64>(&rec, row, 11)?),
        };
        rows.push(ReportRow {
            test: field::<TestKind>(&rec, row, 0)?,
            n: field(&rec, row, 1)?,
            dist: field::<NoiseDist>(&rec, row, 2)?,
            dep_kind: field::<DepKind>(&rec, row, 3)?,
            rho: field(&rec, row, 4)?,
            surface: field::<SurfaceKind>(&rec, row, 5)?,
            amplitude: field(&rec, row, 6)?,
            decorrelated: field(&rec, row, 7)?,
            reps: field(&rec, row, 8)?,
            rate: field(&rec, row, 9)?,
            se: field(&rec, row, 10)?,
            crit_value: crit,
            wall_clock_secs: 0.0,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let base = ReportRow {
            test: TestKind::Var,
            n: 20,
            dist: NoiseDist::StudentT3,
            dep_kind: DepKind::Sma,
            rho: 0.1,
            surface: SurfaceKind::A2,
            amplitude: 0.5,
            decorrelated: true,
            reps: 1000,
            rate: 0.933,
            se: (0.933f64 * 0.067 / 1000.0).sqrt(),
            crit_value: None,
            wall_clock_secs: 1.5,
        };
        let corrected = ReportRow { test: TestKind::Gmd, rate: 1.0 / 3.0, crit_value: Some(1.7234), ..base.clone() };
        ExperimentReport { rows: vec![base, corrected], notes: vec!["paired".into()], wall_clock_secs: 2.0 }
    }

    #[test]
    fn csv_header_and_roundtrip() {
        let r = sample();
        let text = emit_report(&r, ReportFormat::Csv).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        let back = parse_report_csv(&text).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.iter().zip(&r.rows) {
            assert_eq!(a, &ReportRow { wall_clock_secs: 0.0, ..b.clone() });
        }
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn table_is_aligned() {
        let t = emit_report(&sample(), ReportFormat::Table).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "# paired");
        assert_eq!(lines[1].len(), lines[2].len());
        assert!(lines[2].contains("0.933"));
        assert!(lines[3].contains("1.7234"));
    }

    #[test]
    fn empty_report_rejected() {
        assert!(emit_report(&ExperimentReport::default(), ReportFormat::Csv).is_err());
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_report_csv("a,b\n1,2\n").is_err());
    }
}
