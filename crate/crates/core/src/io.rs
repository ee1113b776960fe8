//! On-disk artifacts: cut sequences and measures as CSV, run headers and
//! reports as JSON, and the skeleton as DOT.
//!
//! Every CSV starts with a `schema_version` column. Floats are written in
//! their shortest round-trip form, so reading an artifact back reproduces the
//! simulated values exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{IcrtError, Result};
use crate::measure::MuRealization;
use crate::params::{ThetaFamily, ThetaRealization};
use crate::rtree::IcrtTree;
use crate::stickbreak::{CutSequence, Provenance, StopRule};

pub const SCHEMA_VERSION: u32 = 1;

pub const CUTS_HEADER: [&str; 7] = ["schema_version", "i", "Y", "Z", "l", "m", "M"];
pub const MEASURE_HEADER: [&str; 3] = ["schema_version", "position", "weight"];
pub const SEGMENTS_HEADER: [&str; 7] = ["schema_version", "segment", "start", "end", "parent", "glue", "attach_depth"];

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Writes a table whose first column is `schema_version`.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(header)?;
    let version = SCHEMA_VERSION.to_string();
    for row in rows {
        out.write_record(std::iter::once(version.as_str()).chain(row.iter().map(String::as_str)))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_table_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_table(fs::File::create(path)?, header, rows)
}

fn artifact_error(path: &Path, reason: impl Into<String>) -> IcrtError {
    IcrtError::Artifact { path: path.display().to_string(), reason: reason.into() }
}

/// Reads a table written by [`write_table`], checking header and schema version.
/// Returns the rows without the version column.
pub fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new().from_path(path)?;
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(artifact_error(path, format!("expected columns {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let version: u32 = rec[0].parse().map_err(|_| artifact_error(path, "bad schema_version"))?;
        if version != SCHEMA_VERSION {
            return Err(artifact_error(path, format!("unsupported schema_version {version}")));
        }
        rows.push(rec.iter().skip(1).map(str::to_owned).collect());
    }
    Ok(rows)
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.parse().map_err(|_| artifact_error(path, format!("not a number: '{s}'")))
}

fn opt_f64(v: Option<&f64>) -> String {
    v.map_or_else(String::new, |x| fmt_f64(*x))
}

/// One row per cut: `i, Y_i, Z_i, l_i, m_i, M_i`. Unknown values are empty.
pub fn cut_rows(cuts: &CutSequence) -> Vec<Vec<String>> {
    (0..cuts.len())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                fmt_f64(cuts.y[i]),
                opt_f64(cuts.z.get(i)),
                fmt_f64(cuts.seg_len[i]),
                opt_f64(cuts.seg_mass.get(i)),
                opt_f64(cuts.cum_mass.get(i)),
            ]
        })
        .collect()
}

pub fn write_cuts<W: Write>(w: W, cuts: &CutSequence) -> Result<()> {
    write_table(w, &CUTS_HEADER, &cut_rows(cuts))
}

/// Cuts and glue points of a CSV written by [`write_cuts`].
pub fn read_cuts(path: &Path) -> Result<CutSequence> {
    let rows = read_table(path, &CUTS_HEADER)?;
    let mut y = Vec::with_capacity(rows.len());
    let mut z = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        y.push(parse_f64(path, &row[1])?);
        if row[2].is_empty() {
            if k + 1 != rows.len() {
                return Err(artifact_error(path, format!("missing glue point at row {}", k + 1)));
            }
        } else {
            z.push(parse_f64(path, &row[2])?);
        }
    }
    CutSequence::from_parts(y, z)
}

/// Atoms of `mu` with position `<= upto`.
pub fn measure_rows(mu: &MuRealization, upto: f64) -> Vec<Vec<String>> {
    mu.positions()
        .iter()
        .zip(mu.weights())
        .take_while(|(x, _)| **x <= upto)
        .map(|(x, w)| vec![fmt_f64(*x), fmt_f64(*w)])
        .collect()
}

/// Measure with the given drift, atoms from a file written from
/// [`measure_rows`], and horizon `horizon`.
pub fn read_measure(path: &Path, drift: f64, horizon: f64) -> Result<MuRealization> {
    let rows = read_table(path, &MEASURE_HEADER)?;
    let atoms = rows
        .iter()
        .map(|r| Ok((parse_f64(path, &r[0])?, parse_f64(path, &r[1])?)))
        .collect::<Result<Vec<_>>>()?;
    MuRealization::new(drift, atoms, Some(horizon))
}

/// Segment table of a tree, one row per segment (1-based ids, parent 0 for
/// the first segment).
pub fn segment_rows(tree: &IcrtTree) -> Vec<Vec<String>> {
    (0..tree.segments())
        .map(|k| {
            vec![
                (k + 1).to_string(),
                fmt_f64(tree.seg_start(k)),
                fmt_f64(tree.ends()[k]),
                tree.parent(k).map_or(0, |p| p + 1).to_string(),
                fmt_f64(tree.glue()[k]),
                fmt_f64(tree.attach_depth(k)),
            ]
        })
        .collect()
}

/// Hex SHA-256 of the weights of a realization.
pub fn theta_digest(theta: &ThetaRealization) -> String {
    let mut h = Sha256::new();
    h.update(theta.theta0.to_le_bytes());
    h.update((theta.atoms.len() as u64).to_le_bytes());
    for w in &theta.atoms {
        h.update(w.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// JSON header written next to each cut sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub schema_version: u32,
    pub seed: u64,
    pub replication: u64,
    pub provenance: Provenance,
    pub family: ThetaFamily,
    pub atoms: usize,
    pub theta_digest: String,
    pub residual_square_mass: f64,
    pub drift: f64,
    pub stop: StopRule,
    pub cuts: usize,
    pub total_length: f64,
    /// Length up to which the measure file lists every atom.
    pub measure_horizon: f64,
    pub cuts_file: String,
    pub measure_file: String,
}

/// File stem of replication `rep`.
pub fn rep_stem(rep: u64) -> String {
    format!("rep_{rep:04}")
}

/// Writes `rep_NNNN.csv`, `rep_NNNN_mu.csv` and `rep_NNNN.json` into `dir`.
pub fn write_run(dir: &Path, header: &RunHeader, cuts: &CutSequence, mu: &MuRealization) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_cuts(fs::File::create(dir.join(&header.cuts_file))?, cuts)?;
    write_table_file(&dir.join(&header.measure_file), &MEASURE_HEADER, &measure_rows(mu, header.measure_horizon))?;
    write_json(&dir.join(format!("{}.json", rep_stem(header.replication))), header)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// A stored replication.
#[derive(Clone, Debug)]
pub struct StoredRun {
    pub header: RunHeader,
    pub cuts: CutSequence,
    pub mu: MuRealization,
}

pub fn read_run(dir: &Path, rep: u64) -> Result<StoredRun> {
    let header_path = dir.join(format!("{}.json", rep_stem(rep)));
    let header: RunHeader = serde_json::from_str(&fs::read_to_string(&header_path)?)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(artifact_error(&header_path, format!("unsupported schema_version {}", header.schema_version)));
    }
    let cuts = read_cuts(&dir.join(&header.cuts_file))?;
    let mu = read_measure(&dir.join(&header.measure_file), header.drift, header.measure_horizon)?;
    let cuts = cuts.with_measure(&mu)?;
    Ok(StoredRun { header, cuts, mu })
}

/// Replication headers present in `dir`, sorted.
pub fn list_runs(dir: &Path) -> Result<Vec<u64>> {
    let mut reps = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(n) = name.strip_prefix("rep_").and_then(|s| s.strip_suffix(".json")) {
            if let Ok(r) = n.parse() {
                reps.push(r);
            }
        }
    }
    reps.sort_unstable();
    Ok(reps)
}
