//! CSV and JSON emission. Both formats are deterministic: floats are written
//! with 17 significant digits in CSV and via serde_json's shortest-round-trip
//! form in JSON, so identical results serialize to identical bytes.

use std::io::Write;

use crate::error::Result;
use crate::sweep::{SweepKind, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn emit(result: &SweepResult, format: Format, w: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => emit_csv(result, w),
        Format::Json => emit_json(result, w),
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Leading `#` comment lines carry the lossless parameter echo, then a
/// header row with units, then one record per grid point.
pub fn emit_csv(result: &SweepResult, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "# tool = {} {}", result.metadata.tool, result.metadata.version)?;
    for (key, value) in &result.metadata.config {
        writeln!(w, "# {key} = {value}")?;
    }
    for warning in &result.metadata.warnings {
        writeln!(w, "# warning: {warning}")?;
    }
    let power_sweep = result.metadata.kind == SweepKind::Power;
    if power_sweep {
        writeln!(
            w,
            "power_nw,n_p,branch,fold,magnitude,phase_rad,group_delay_s"
        )?;
    } else {
        writeln!(w, "delta_r_hz,n_p,branch,fold,magnitude,phase_rad")?;
    }
    for row in &result.rows {
        write!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(row.swept),
            fmt_f64(row.n_p),
            row.branch,
            row.fold as u8,
            fmt_f64(row.magnitude),
            fmt_f64(row.phase)
        )?;
        if power_sweep {
            match row.group_delay_s {
                Some(tau) => write!(w, ",{}", fmt_f64(tau))?,
                None => write!(w, ",nan")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn emit_json(result: &SweepResult, w: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, result).map_err(std::io::Error::other)?;
    writeln!(w)?;
    Ok(())
}

/// Parses JSON previously produced by [`emit_json`].
pub fn parse_json(text: &str) -> Result<SweepResult> {
    serde_json::from_str(text).map_err(|e| std::io::Error::other(e).into())
}
