//! CSV readers and writers for simulation input and output.
//!
//! Every file starts with a `# kinklab <kind> v1` comment line; readers skip
//! comment lines. Floats are written with Rust's shortest round-trip
//! formatting, so a snapshot read back reproduces the state bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dynamics::{FieldState, ModulationTrack};
use crate::error::{Error, Result};

/// Format version written into every header line.
pub const FORMAT_VERSION: u32 = 1;

/// `# kinklab <kind> v1` followed by optional `key=value` fields.
pub fn header_line(kind: &str, fields: &[(&str, String)]) -> String {
    let mut line = format!("# kinklab {kind} v{FORMAT_VERSION}");
    for (k, v) in fields {
        line.push_str(&format!(" {k}={v}"));
    }
    line
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes a header comment and then CSV rows.
pub fn write_table(path: &Path, header: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let text: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:?}")).collect())
        .collect();
    write_records(path, header, columns, &text)
}

/// Writes a header comment and then CSV rows of preformatted fields.
pub fn write_records(
    path: &Path,
    header: &str,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a table written by [`write_table`]: the header line, column names
/// and numeric rows.
pub fn read_table(path: &Path) -> Result<(String, Vec<String>, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io(path, e))?;
    let header = header.trim_end().to_string();
    if !header.starts_with("# kinklab ") {
        return Err(Error::Config(format!(
            "{}: missing kinklab header line",
            path.display()
        )));
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let columns = r
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!("{}: '{s}' is not a number", path.display()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, columns, rows))
}

/// Value of `key=...` in a header line.
pub fn header_field(header: &str, key: &str) -> Option<String> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .map(str::to_string)
}

/// Perturbation samples `(x, u₁, u₂)` from a CSV with those three columns.
pub fn read_perturbation(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(BufReader::new(file));
    let (mut x, mut u1, mut u2) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.len() != 3 {
            return Err(Error::Config(format!(
                "{}: expected columns x,u1,u2, found {} fields",
                path.display(),
                rec.len()
            )));
        }
        let v: Vec<f64> = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!("{}: '{s}' is not a number", path.display()))
                })
            })
            .collect::<Result<_>>()?;
        x.push(v[0]);
        u1.push(v[1]);
        u2.push(v[2]);
    }
    Ok((x, u1, u2))
}

/// Snapshot metadata stored in the header line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub t: f64,
    pub step: u64,
    pub dt: f64,
    /// Last modulation parameters, the warm start on resume.
    pub c: f64,
    pub y: f64,
}

/// Writes `x, phi1, phi2` with the metadata in the header.
pub fn write_snapshot(path: &Path, state: &FieldState, meta: SnapshotMeta) -> Result<()> {
    let header = header_line(
        "snapshot",
        &[
            ("t", meta.t.to_string()),
            ("step", meta.step.to_string()),
            ("dt", meta.dt.to_string()),
            ("c", meta.c.to_string()),
            ("y", meta.y.to_string()),
            ("dx", state.dx.to_string()),
        ],
    );
    let rows: Vec<Vec<f64>> = (0..state.len())
        .map(|i| vec![state.x(i), state.phi1[i], state.phi2[i]])
        .collect();
    write_table(path, &header, &["x", "phi1", "phi2"], &rows)
}

/// Snapshot contents: metadata, `φ₁` and `φ₂`.
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub dx: f64,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

/// Reads a snapshot written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let (header, columns, rows) = read_table(path)?;
    if !header.starts_with("# kinklab snapshot v1") || columns != ["x", "phi1", "phi2"] {
        return Err(Error::Config(format!(
            "{} is not a v1 snapshot",
            path.display()
        )));
    }
    let field = |k: &str| -> Result<f64> {
        header_field(&header, k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Config(format!("{}: snapshot header lacks {k}", path.display())))
    };
    let meta = SnapshotMeta {
        t: field("t")?,
        step: field("step")? as u64,
        dt: field("dt")?,
        c: field("c")?,
        y: field("y")?,
    };
    Ok(Snapshot {
        meta,
        dx: field("dx")?,
        phi1: rows.iter().map(|r| r[1]).collect(),
        phi2: rows.iter().map(|r| r[2]).collect(),
    })
}

/// Column names of the modulation track CSV.
pub fn track_columns(radii: &[f64]) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "c", "y", "E", "P", "M"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(radii.iter().map(|r| format!("local_{r}")));
    cols.extend(
        ["Lfun", "res_F", "res_G", "newton_iterations", "orbital"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols
}

/// Writes the modulation track; `orbital` is NaN where it was not evaluated.
pub fn write_track(path: &Path, track: &ModulationTrack) -> Result<()> {
    let cols = track_columns(&track.radii);
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = track
        .samples
        .iter()
        .map(|s| {
            let mut row = vec![
                s.t,
                s.c,
                s.y,
                s.conserved.energy,
                s.conserved.momentum,
                s.conserved.invariant,
            ];
            row.extend(&s.local);
            row.extend([
                s.lfun,
                s.residuals[0],
                s.residuals[1],
                s.iterations as f64,
                s.orbital.unwrap_or(f64::NAN),
            ]);
            row
        })
        .collect();
    write_table(path, &header_line("track", &[]), &col_refs, &rows)
}
