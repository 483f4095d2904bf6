use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{BenchRecord, ErrorKind, MatrixSpec, ScalarRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "family,d,n,mode,shift,seed,trial,error,error_kind,t_seq_ms,t_para_ms,t_total_ms,bound";
pub const SCALAR_CSV_HEADER: &str = "n,max_e1,max_e2,max_e3,m1,m2";

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn sci_opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn emit_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.spec.family_label(),
            r.spec.d,
            r.n,
            r.mode,
            r.shift,
            r.spec.seed,
            r.trial,
            sci(r.error),
            r.error_kind.name(),
            sci(r.t_seq_ms),
            sci(r.t_para_ms),
            sci(r.t_total_ms),
            sci_opt(r.bound),
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing or unexpected header".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(err(format!("expected 13 fields, found {}", f.len())));
        }
        let num = |k: usize| -> Result<f64> { f[k].parse().map_err(|_| err(format!("bad number '{}'", f[k]))) };
        let int = |k: usize| -> Result<u64> { f[k].parse().map_err(|_| err(format!("bad integer '{}'", f[k]))) };
        let (family, range) = MatrixSpec::parse_family_label(f[0]).map_err(|e| err(e.to_string()))?;
        records.push(BenchRecord {
            spec: MatrixSpec {
                family,
                d: int(1)? as usize,
                range,
                seed: int(5)?,
            },
            n: int(2)? as usize,
            mode: f[3].parse().map_err(|e: Error| err(e.to_string()))?,
            shift: f[4].parse().map_err(|e: Error| err(e.to_string()))?,
            trial: int(6)? as usize,
            error: num(7)?,
            error_kind: f[8].parse::<ErrorKind>().map_err(|e| err(e.to_string()))?,
            t_seq_ms: num(9)?,
            t_para_ms: num(10)?,
            t_total_ms: num(11)?,
            bound: if f[12].is_empty() { None } else { Some(num(12)?) },
            per_term_ms: Vec::new(),
        });
    }
    Ok(records)
}

pub fn write_csv(records: &[BenchRecord], path: &Path) -> Result<()> {
    fs::write(path, emit_csv(records))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Whitespace-separated blocks, one per `(family, mode, n)`, separated by two
/// blank lines so each block is a separate gnuplot index. Per-term times
/// follow the fixed columns.
pub fn emit_plotdata(records: &[BenchRecord]) -> String {
    let mut keys: Vec<(String, &'static str, usize)> = Vec::new();
    for r in records {
        let key = (r.spec.family_label(), r.mode.name(), r.n);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut out = String::new();
    for (b, (family, mode, n)) in keys.iter().enumerate() {
        if b > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# family={family} mode={mode} n={n}");
        out.push_str("# d trial error bound t_seq_ms t_para_ms t_total_ms per_term_ms...\n");
        for r in records
            .iter()
            .filter(|r| (&r.spec.family_label(), r.mode.name(), r.n) == (family, *mode, *n))
        {
            let bound = r.bound.map(sci).unwrap_or_else(|| "NaN".into());
            let _ = write!(
                out,
                "{} {} {} {} {} {} {}",
                r.spec.d,
                r.trial,
                sci(r.error),
                bound,
                sci(r.t_seq_ms),
                sci(r.t_para_ms),
                sci(r.t_total_ms)
            );
            for t in &r.per_term_ms {
                let _ = write!(out, " {}", sci(*t));
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_plotdata(records: &[BenchRecord], path: &Path) -> Result<()> {
    fs::write(path, emit_plotdata(records))?;
    Ok(())
}

pub fn emit_scalar_csv(rows: &[ScalarRecord]) -> String {
    let mut out = String::from(SCALAR_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            sci(r.max_e1),
            sci(r.max_e2),
            sci(r.max_e3),
            sci(r.m1),
            sci_opt(r.m2)
        );
    }
    out
}

pub fn write_scalar_csv(rows: &[ScalarRecord], path: &Path) -> Result<()> {
    fs::write(path, emit_scalar_csv(rows))?;
    Ok(())
}
