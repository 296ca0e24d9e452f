//! Per-channel CSV interchange for snapshots produced outside the toolkit.
//!
//! One file per channel. The first column is a label: leading rows labelled
//! `mu` carry one design dimension each (value per snapshot column), the
//! remaining rows carry state entry `i` labelled by `i`.

use std::path::Path;

use nalgebra::DMatrix;
use romforge::io::{write_atomic, SnapshotSet};
use romforge::RomError;

use crate::error::CliError;

pub fn channel_to_csv(design: &[Vec<f64>], data: &DMatrix<f64>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Core(RomError::Format(e.to_string()));
    let p = design.first().map_or(0, |r| r.len());
    for d in 0..p {
        let mut rec = vec!["mu".to_string()];
        rec.extend(design.iter().map(|row| row[d].to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    for i in 0..data.nrows() {
        let mut rec = vec![i.to_string()];
        rec.extend(data.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Core(RomError::Format(e.to_string())))
}

/// Parses one channel file into its design table and `N x n` block.
pub fn channel_from_csv(
    name: &str,
    bytes: &[u8],
) -> Result<(Vec<Vec<f64>>, DMatrix<f64>), CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes);
    let mut mu_rows: Vec<Vec<f64>> = Vec::new();
    let mut state_rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let line = |rec: &csv::StringRecord| rec.position().map_or(0, |p| p.line());
        let rec = rec.map_err(|e| CliError::Parse {
            path: name.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let bad = |msg: String| CliError::Parse {
            path: name.to_string(),
            line: line(&rec),
            msg,
        };
        let label = rec.get(0).unwrap_or("").trim();
        let values = rec
            .iter()
            .skip(1)
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad number '{f}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if label == "mu" {
            if !state_rows.is_empty() {
                return Err(bad("'mu' rows must precede state rows".into()));
            }
            mu_rows.push(values);
        } else {
            let idx: usize = label
                .parse()
                .map_err(|_| bad(format!("bad row label '{label}'")))?;
            if idx != state_rows.len() {
                return Err(bad(format!("state row {idx} out of order")));
            }
            state_rows.push(values);
        }
    }
    if mu_rows.is_empty() || state_rows.is_empty() {
        return Err(CliError::Parse {
            path: name.to_string(),
            line: 0,
            msg: "need at least one 'mu' row and one state row".into(),
        });
    }
    let n = mu_rows[0].len();
    let design: Vec<Vec<f64>> = (0..n)
        .map(|j| mu_rows.iter().map(|r| r[j]).collect())
        .collect();
    let data = DMatrix::from_fn(state_rows.len(), n, |i, j| state_rows[i][j]);
    Ok((design, data))
}

/// Writes `<dir>/<stem>_<channel>.csv` for every channel.
pub fn export_csv(
    set: &SnapshotSet,
    dir: &Path,
    stem: &str,
    names: &[&str],
) -> Result<Vec<std::path::PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| RomError::io(dir, e))?;
    let mut paths = Vec::new();
    for (c, data) in set.channels.iter().enumerate() {
        let name = names
            .get(c)
            .map_or_else(|| format!("c{c}"), |s| s.to_string());
        let path = dir.join(format!("{stem}_{name}.csv"));
        write_atomic(&path, &channel_to_csv(&set.design, data)?)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Builds a snapshot set from one CSV file per channel. The design rows must
/// agree across files.
pub fn import_csv(
    paths: &[std::path::PathBuf],
    ny: usize,
    nx: usize,
) -> Result<SnapshotSet, CliError> {
    let mut design: Option<Vec<Vec<f64>>> = None;
    let mut channels = Vec::new();
    for p in paths {
        let bytes = std::fs::read(p).map_err(|e| RomError::io(p, e))?;
        let (d, data) = channel_from_csv(&p.display().to_string(), &bytes)?;
        match &design {
            Some(prev) if *prev != d => {
                return Err(CliError::usage(format!(
                    "{}: design rows differ from the first file",
                    p.display()
                )));
            }
            Some(_) => {}
            None => design = Some(d),
        }
        channels.push(data);
    }
    let design = design.ok_or_else(|| CliError::usage("no CSV files given"))?;
    Ok(SnapshotSet::new(design, channels, ny, nx)?)
}
