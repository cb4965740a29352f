//! Dataset text format.
//!
//! ```text
//! # caznrls dataset v1
//! meta,n,<n>
//! meta,p,<p>
//! meta,corruption,<none|additive|multiplicative|missing>
//! meta,tau,<tau>
//! beta_star,0,<p values>
//! x,<i>,<p values>        one line per row, i = 0..n
//! z,<i>,<p values>
//! y,0,<n values>
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so a write/read cycle is exact.
//! Lines starting with `#` and blank lines are ignored; the `x` block is optional.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{Corruption, Dataset};
use crate::error::{Error, Result};

fn push_row(out: &mut String, kind: &str, row: usize, values: impl Iterator<Item = f64>) {
    let _ = write!(out, "{kind},{row}");
    for v in values {
        let _ = write!(out, ",{v:e}");
    }
    out.push('\n');
}

pub fn write_dataset(ds: &Dataset, mut w: impl Write) -> Result<()> {
    let mut out = String::new();
    out.push_str("# caznrls dataset v1\n");
    let _ = writeln!(out, "meta,n,{}", ds.n());
    let _ = writeln!(out, "meta,p,{}", ds.p());
    let _ = writeln!(out, "meta,corruption,{}", ds.corruption);
    let _ = writeln!(out, "meta,tau,{:e}", ds.tau);
    push_row(&mut out, "beta_star", 0, ds.beta_star.iter().copied());
    for (kind, m) in [("x", &ds.x), ("z", &ds.z)] {
        for i in 0..m.nrows() {
            push_row(&mut out, kind, i, m.row(i).iter().copied());
        }
    }
    push_row(&mut out, "y", 0, ds.y.iter().copied());
    w.write_all(out.as_bytes())?;
    Ok(())
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn parse_values(line: usize, fields: &[&str], expected: usize) -> Result<Vec<f64>> {
    if fields.len() != expected {
        return Err(parse_err(line, format!("expected {expected} values, found {}", fields.len())));
    }
    fields.iter().map(|f| f.trim().parse::<f64>().map_err(|e| parse_err(line, format!("'{f}': {e}")))).collect()
}

pub fn read_dataset(r: impl BufRead) -> Result<Dataset> {
    let mut n = None;
    let mut p = None;
    let mut corruption = None;
    let mut tau = None;
    let mut beta = None;
    let mut y = None;
    let mut x_rows: Vec<Option<Vec<f64>>> = Vec::new();
    let mut z_rows: Vec<Option<Vec<f64>>> = Vec::new();

    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 {
            return Err(parse_err(lineno, "expected at least three fields"));
        }
        let kind = fields[0].trim();
        if kind == "meta" {
            let value = fields[2].trim();
            match fields[1].trim() {
                "n" => n = Some(value.parse::<usize>().map_err(|e| parse_err(lineno, e))?),
                "p" => p = Some(value.parse::<usize>().map_err(|e| parse_err(lineno, e))?),
                "corruption" => corruption = Some(value.parse::<Corruption>()?),
                "tau" => tau = Some(value.parse::<f64>().map_err(|e| parse_err(lineno, e))?),
                other => return Err(parse_err(lineno, format!("unknown meta key '{other}'"))),
            }
            continue;
        }
        let (n, p) = match (n, p) {
            (Some(n), Some(p)) => (n, p),
            _ => return Err(parse_err(lineno, "data before meta n/p")),
        };
        let row: usize = fields[1].trim().parse().map_err(|e| parse_err(lineno, e))?;
        match kind {
            "beta_star" => beta = Some(parse_values(lineno, &fields[2..], p)?),
            "y" => y = Some(parse_values(lineno, &fields[2..], n)?),
            "x" | "z" => {
                if row >= n {
                    return Err(parse_err(lineno, format!("row {row} out of range")));
                }
                let rows = if kind == "x" { &mut x_rows } else { &mut z_rows };
                rows.resize(n, None);
                rows[row] = Some(parse_values(lineno, &fields[2..], p)?);
            }
            other => return Err(parse_err(lineno, format!("unknown block '{other}'"))),
        }
    }

    let missing = |what: &str| Error::Parse(format!("missing {what}"));
    let n = n.ok_or_else(|| missing("meta n"))?;
    let p = p.ok_or_else(|| missing("meta p"))?;
    let corruption = corruption.ok_or_else(|| missing("meta corruption"))?;
    let tau = tau.ok_or_else(|| missing("meta tau"))?;
    let beta = DVector::from_vec(beta.ok_or_else(|| missing("beta_star"))?);
    let y = DVector::from_vec(y.ok_or_else(|| missing("y"))?);
    let assemble = |rows: Vec<Option<Vec<f64>>>, name: &str| -> Result<DMatrix<f64>> {
        if rows.len() != n || rows.iter().any(Option::is_none) {
            return Err(Error::Parse(format!("block {name} must have {n} rows")));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().flatten().collect();
        Ok(DMatrix::from_row_slice(n, p, &flat))
    };
    let z = assemble(z_rows, "z")?;
    let x = if x_rows.is_empty() { z.clone() } else { assemble(x_rows, "x")? };
    let support = (0..p).filter(|&i| beta[i] != 0.0).collect();
    Ok(Dataset { x, z, y, beta_star: beta, support, corruption, tau })
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_dataset(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let f = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(f))
}
