//! CSV ingestion and crash-safe output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use fsvar::Panel;
use ndarray::{Array2, ArrayView2};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// Directory for staging files before they are moved into place.
pub const TMPDIR_ENV: &str = "FSVAR_TMPDIR";

const MISSING: [&str; 6] = ["", "na", "nan", "null", "n/a", "."];

pub fn load_csv(path: &Path) -> CliResult<Panel> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, &path.display().to_string())
}

/// Parses a headed numeric CSV; rows are time points in ascending order.
/// `source` only appears in error messages.
pub fn read_csv<R: Read>(reader: R, source: &str) -> CliResult<Panel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::input(format!("{source}: cannot read header row: {e}")))?.clone();
    let labels: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    if labels.is_empty() || labels.iter().all(|l| l.is_empty()) {
        return Err(CliError::input(format!("{source}: missing header row")));
    }
    if let Some(c) = labels.iter().position(|l| l.is_empty()) {
        return Err(CliError::input(format!("{source}: column {} has an empty header", c + 1)));
    }
    let n = labels.len();
    let mut data = Vec::new();
    let mut t = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::input(format!("{source}: data row {row}: {e}")))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(row as u64 + 1);
        if rec.len() != n {
            return Err(CliError::input(format!(
                "{source}: data row {row} (line {line}) has {} fields, expected {n}",
                rec.len()
            )));
        }
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            let at = || format!("{source}: data row {row} (line {line}), column {} ({:?})", c + 1, labels[c]);
            if MISSING.contains(&cell.to_ascii_lowercase().as_str()) {
                return Err(CliError::input(format!("{}: missing value {cell:?}", at())));
            }
            let v: f64 = cell.parse().map_err(|_| CliError::input(format!("{}: non-numeric value {cell:?}", at())))?;
            if !v.is_finite() {
                return Err(CliError::input(format!("{}: non-finite value {cell:?}", at())));
            }
            data.push(v);
        }
        t += 1;
    }
    if t == 0 {
        return Err(CliError::input(format!("{source}: no data rows (T=0)")));
    }
    let values = Array2::from_shape_vec((t, n), data).expect("row lengths checked");
    Ok(Panel::new(values, labels)?)
}

/// Headed CSV of a matrix. `index` prepends a leading column.
pub fn matrix_csv(header: &[String], index: Option<(&str, &[String])>, m: &ArrayView2<f64>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head: Vec<String> = Vec::with_capacity(header.len() + 1);
    if let Some((name, _)) = index {
        head.push(name.to_string());
    }
    head.extend(header.iter().cloned());
    w.write_record(&head).map_err(csv_err)?;
    for (i, row) in m.rows().into_iter().enumerate() {
        let mut rec: Vec<String> = Vec::with_capacity(row.len() + 1);
        if let Some((_, idx)) = index {
            rec.push(idx[i].clone());
        }
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::input(format!("csv writer: {e}")))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::input(format!("csv writer: {e}"))
}

/// A file written to a temporary location, moved into place by [`commit`].
pub struct Staged {
    target: PathBuf,
    file: NamedTempFile,
}

pub fn stage(target: &Path, bytes: &[u8]) -> CliResult<Staged> {
    let dir = match std::env::var_os(TMPDIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => parent_dir(target),
    };
    let mut file = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    file.write_all(bytes).map_err(|e| CliError::io(file.path(), e))?;
    file.as_file().sync_all().map_err(|e| CliError::io(file.path(), e))?;
    Ok(Staged {
        target: target.to_path_buf(),
        file,
    })
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Renames every staged file onto its target. A staging directory on
/// another file system falls back to a copy next to the target first.
pub fn commit(staged: Vec<Staged>) -> CliResult<()> {
    for s in staged {
        let Staged { target, file } = s;
        if let Err(e) = file.persist(&target) {
            let file = e.file;
            let dir = parent_dir(&target);
            let mut local = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
            let mut src = File::open(file.path()).map_err(|e| CliError::io(file.path(), e))?;
            std::io::copy(&mut src, &mut local).map_err(|e| CliError::io(&target, e))?;
            local.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        }
    }
    Ok(())
}

/// Stages all outputs before moving any of them, so a failure leaves no
/// partial set behind.
pub fn write_all(outputs: &[(PathBuf, Vec<u8>)]) -> CliResult<()> {
    let staged = outputs.iter().map(|(p, b)| stage(p, b)).collect::<CliResult<Vec<_>>>()?;
    commit(staged)
}
