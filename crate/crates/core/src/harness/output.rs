//! CSV and JSON writers. Floats carry 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const SUSCEPTIBILITY_HEADER: &[&str] =
    &["bx", "zeta_x", "zeta_y", "sqrt_zeta_x", "chi", "gap", "c_xxyy", "eta"];
pub const GAIN_HEADER: &[&str] = &["t", "pe", "sx2", "sy2", "gain"];
pub const QFUNCTION_HEADER: &[&str] = &["theta", "phi", "q"];
pub const TRANSDUCTION_HEADER: &[&str] = &["delta_pp", "gamma", "pe_steady"];
pub const SIZE_HEADER: &[&str] = &["n", "chi", "gap", "c_xxyy"];
pub const ABSORPTION_HEADER: &[&str] = &["t", "pe"];
pub const GAIN_SCALING_HEADER: &[&str] = &["n", "g_max", "t_am"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(usize),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v)
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render a CSV table; every row must match the header width.
pub fn render_csv<R>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<String>
where
    R: AsRef<[Cell]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for (k, row) in rows.into_iter().enumerate() {
        let row = row.as_ref();
        if row.len() != header.len() {
            return Err(Error::InvalidArgument(format!(
                "csv row {k} has {} cells, header has {}",
                row.len(),
                header.len()
            )));
        }
        for (j, c) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            match c {
                Cell::F(v) => out.push_str(&format_float(*v)),
                Cell::I(v) => write!(out, "{v}").expect("write to String"),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv<R>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()>
where
    R: AsRef<[Cell]>,
{
    std::fs::write(path, render_csv(header, rows)?)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Header plus rows split on commas; used by tests and the manifest checks.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty csv".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("csv row {k}: {e}")))?;
        if row.len() != header.len() {
            return Err(Error::InvalidArgument(format!("csv row {k} has {} cells", row.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = format_float(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn render_and_parse() {
        let text = render_csv(SIZE_HEADER, [[Cell::I(200), 1.5.into(), 2.0.into(), (-3.0).into()]]).unwrap();
        assert!(text.starts_with("n,chi,gap,c_xxyy\n200,"));
        let (h, rows) = parse_csv(&text).unwrap();
        assert_eq!(h, SIZE_HEADER);
        assert_eq!(rows, vec![vec![200.0, 1.5, 2.0, -3.0]]);
    }

    #[test]
    fn width_mismatch_rejected() {
        assert!(render_csv(ABSORPTION_HEADER, [[Cell::F(1.0)]]).is_err());
    }
}
