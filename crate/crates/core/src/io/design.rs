use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Result, RomError};

/// Text design table: a `#` header naming the columns, then one
/// whitespace-separated row per sample.
pub fn render_design_table(names: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# {}\n", names.join(" "));
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

/// Parses a design table. Lines starting with `#` and blank lines are
/// skipped; every data row must have the same width.
pub fn parse_design_table(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| {
                    RomError::Format(format!(
                        "design table line {}: bad number '{tok}'",
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(RomError::Format(format!(
                    "design table line {}: {} values, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(RomError::Format("design table has no rows".into()));
    }
    Ok(rows)
}

pub fn write_design_table(path: &Path, names: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, render_design_table(names, rows).as_bytes())
}

pub fn read_design_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| RomError::io(path, e))?;
    parse_design_table(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![vec![1.0 / 3.0, 1.7, 123.456789], vec![2.0, 1e-300, -0.0]];
        let text = render_design_table(&["lx", "ly", "re"], &rows);
        assert!(text.starts_with("# lx ly re\n"));
        let back = parse_design_table(&text).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.iter().flatten().zip(rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(render_design_table(&["lx", "ly", "re"], &back), text);
    }

    #[test]
    fn ragged_and_bad_rows() {
        assert!(parse_design_table("1 2\n3\n").is_err());
        assert!(parse_design_table("1 x\n").is_err());
        assert!(parse_design_table("# only\n").is_err());
    }
}
