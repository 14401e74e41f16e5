//! Reading and writing evaluation report CSVs.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rank::{EvalReport, EVAL_CSV_HEADER};

use super::compare::{MethodSummary, SUMMARY_CSV_HEADER};

pub fn write_reports<W: Write>(mut out: W, reports: &[EvalReport]) -> std::io::Result<()> {
    writeln!(out, "{EVAL_CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(mut out: W, summary: &[MethodSummary]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_CSV_HEADER}")?;
    for s in summary {
        writeln!(out, "{}", s.csv_row())?;
    }
    Ok(())
}

pub fn read_reports<R: BufRead>(reader: R) -> Result<Vec<EvalReport>> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == EVAL_CSV_HEADER => {}
        _ => return Err(Error::Schema(format!("expected report header {EVAL_CSV_HEADER:?}"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(EvalReport::parse_csv_row(&line).map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_reports_file(path: &Path) -> Result<Vec<EvalReport>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_reports(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let r = EvalReport {
            network: "net_0001".into(),
            method: "sample-0.05:2".into(),
            metric: "betweenness".into(),
            tau_b: 0.912345678901234,
            r2: 0.8,
            mse: 0.01,
            seconds: 0.25,
        };
        let mut buf = Vec::new();
        write_reports(&mut buf, &[r.clone(), r.clone()]).unwrap();
        assert_eq!(read_reports(buf.as_slice()).unwrap(), vec![r.clone(), r]);
    }

    #[test]
    fn header_is_required() {
        assert!(matches!(read_reports("a,b\n".as_bytes()), Err(Error::Schema(_))));
    }
}
