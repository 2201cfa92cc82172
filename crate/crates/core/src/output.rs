//! CSV persistence for sweep results.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{CONTROL_NAMES, COSTATE_NAMES, STATE_NAMES};
use crate::sweep::SweepSolution;

pub const TRAJECTORY_HEADER: &str =
    "t,S_H,I_H,R_H,S_V,I_V,u1,u2,u3,lambda1,lambda2,lambda3,lambda4,lambda5";
pub const SUMMARY_HEADER: &str = "strategy,alpha,converged,iterations,J,final_I_H,final_I_V";

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other(format!("not a file path: {}", path.display()))))?;
    let tmp_name = format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id());
    let tmp = match dir {
        Some(dir) => dir.join(tmp_name),
        None => tmp_name.into(),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// One row per grid node in [`TRAJECTORY_HEADER`] column order.
pub fn trajectory_csv(sol: &SweepSolution) -> String {
    debug_assert_eq!(
        TRAJECTORY_HEADER.split(',').count(),
        1 + STATE_NAMES.len() + CONTROL_NAMES.len() + COSTATE_NAMES.len()
    );
    let mut w = csv::Writer::from_writer(Vec::with_capacity(sol.grid.n_nodes() * 200));
    let mut record = Vec::new();
    let fail = |e: csv::Error| unreachable!("writing to memory: {e}");
    w.write_record(TRAJECTORY_HEADER.split(',')).unwrap_or_else(fail);
    for (k, t) in sol.grid.nodes().enumerate() {
        record.clear();
        record.push(t.to_string());
        record.extend(
            sol.states
                .row(k)
                .iter()
                .chain(sol.controls.row(k))
                .chain(sol.costates.row(k))
                .map(f64::to_string),
        );
        w.write_record(&record).unwrap_or_else(fail);
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("numbers are ASCII")
}

/// Parsed numeric CSV with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingChannel(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Numeric CSV with a header row; empty fields read as NaN.
pub fn parse_csv(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::Csv("empty file".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(f64::NAN)
                } else {
                    s.parse::<f64>().map_err(|e| Error::Csv(format!("line {line}: `{s}`: {e}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn read_csv(path: &Path) -> Result<Table> {
    parse_csv(&fs::read_to_string(path)?)
}
