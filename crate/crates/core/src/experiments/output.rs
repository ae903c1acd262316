//! CSV and summary writers. Floats use 17 significant digits so that
//! identical runs give identical text.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::{EocTable, RunLedger};
use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, NodalField};

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Short label of a time for file names: `0`, `3e-4`, `1e-7`.
pub fn time_label(t: f64) -> String {
    let rounded: f64 = format!("{t:.6e}").parse().unwrap_or(t);
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded:e}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub const LEDGER_HEADER: &str =
    "t,mass,min_u,min_v,max_v,E_uv,E_usigma,D1,D2,D3,energy_residual,picard_iters";

pub fn write_ledger(path: &Path, ledger: &RunLedger) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{LEDGER_HEADER}")?;
    for r in &ledger.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_real(r.t),
            fmt_real(r.mass),
            fmt_real(r.min_u),
            fmt_real(r.min_v),
            fmt_real(r.max_v),
            fmt_real(r.e_uv),
            fmt_real(r.e_usigma),
            fmt_real(r.d1),
            fmt_real(r.d2),
            fmt_real(r.d3),
            fmt_opt(r.energy_residual),
            r.picard_iters
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `x,value` rows of a nodal field.
pub fn write_field(path: &Path, f: &NodalField) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,value")?;
    let mesh = f.mesh();
    for (j, v) in f.values().iter().enumerate() {
        writeln!(w, "{},{}", fmt_real(mesh.x(j)), fmt_real(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field`]. The nodes must be uniform.
pub fn read_field(path: &Path) -> Result<NodalField> {
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    let file = File::open(path).map_err(|e| bad(e.to_string()))?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "x,value" {
                return Err(bad("expected header 'x,value'".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (x, v) = line
            .split_once(',')
            .ok_or_else(|| bad(format!("line {}: expected two columns", i + 1)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("line {}: '{s}' is not a number", i + 1)))
        };
        xs.push(parse(x)?);
        values.push(parse(v)?);
    }
    if xs.len() < 2 {
        return Err(bad("fewer than two nodes".into()));
    }
    let mesh = Mesh1D::new(xs[0], xs[xs.len() - 1], xs.len()).map_err(|e| bad(e.to_string()))?;
    for (j, x) in xs.iter().enumerate() {
        if (x - mesh.x(j)).abs() > 1e-12 * mesh.length() {
            return Err(bad(format!("node {j} is not on a uniform mesh")));
        }
    }
    NodalField::new(mesh, values)
}

/// Failed cells are written as `x`.
pub fn table_cell(min_u: Option<f64>) -> String {
    min_u.map(fmt_real).unwrap_or_else(|| "x".into())
}

pub fn write_eoc(path: &Path, table: &EocTable) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "h,e_u,r_u,e_v,r_v,e_vx,r_vx")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_real(r.h),
            fmt_real(r.e_u),
            fmt_opt(r.r_u),
            fmt_real(r.e_v),
            fmt_opt(r.r_v),
            fmt_real(r.e_vx),
            fmt_opt(r.r_vx)
        )?;
    }
    w.flush()?;
    Ok(())
}
