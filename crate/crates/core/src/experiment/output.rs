//! CSV and gnuplot emission of sweep results.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::sweep::{SweepResult, SweepRow};

pub const CSV_HEADER: &str = "scenario,scheme,snr_db,alpha,beta,r_oc,r_ic,r_p,r_sum,stderr,n_draws,wall_ms";

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_row<W: Write>(out: &mut W, r: &SweepRow) -> std::io::Result<()> {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.scenario,
        r.scheme,
        format_sig6(r.snr_db),
        format_sig6(r.alpha),
        format_sig6(r.beta),
        format_sig6(r.r_oc),
        format_sig6(r.r_ic),
        format_sig6(r.r_p),
        format_sig6(r.r_sum),
        format_sig6(r.stderr),
        r.n_draws,
        format_sig6(r.wall_ms),
    )
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &result.rows {
        write_row(&mut out, r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(result, std::io::BufWriter::new(file))
}

pub fn read_csv<R: BufRead>(input: R) -> Result<SweepResult> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let perr = |message: String| Error::Parse { line: i + 1, message };
        if i == 0 {
            if line != CSV_HEADER {
                return Err(perr(format!("unexpected header '{line}'")));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(perr(format!("expected 12 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| perr(format!("bad number '{s}'")));
        rows.push(SweepRow {
            scenario: f[0].to_string(),
            scheme: f[1].parse().map_err(|e: Error| perr(e.to_string()))?,
            snr_db: num(f[2])?,
            alpha: num(f[3])?,
            beta: num(f[4])?,
            r_oc: num(f[5])?,
            r_ic: num(f[6])?,
            r_p: num(f[7])?,
            r_sum: num(f[8])?,
            stderr: num(f[9])?,
            n_draws: f[10].parse().map_err(|_| perr(format!("bad count '{}'", f[10])))?,
            wall_ms: num(f[11])?,
        });
    }
    Ok(SweepResult { rows })
}

/// One gnuplot data block per `(scenario, scheme)` curve: `snr_db r_sum`
/// columns, blocks separated by two blank lines (select with `index`).
pub fn write_gnuplot<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    let mut curves: Vec<(&str, String)> = Vec::new();
    for r in &result.rows {
        let key = (r.scenario.as_str(), r.scheme.to_string());
        if !curves.contains(&key) {
            curves.push(key);
        }
    }
    for (i, (scenario, scheme)) in curves.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# {scenario} {scheme}")?;
        for r in result.rows.iter().filter(|r| r.scenario == *scenario && r.scheme.to_string() == *scheme) {
            writeln!(out, "{} {}", format_sig6(r.snr_db), format_sig6(r.r_sum))?;
        }
    }
    Ok(())
}
