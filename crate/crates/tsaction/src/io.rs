//! File formats.
//!
//! * Coupling tensor, JSON: `{"modes": M, "terms": [{"i", "j", "k", "l", "re", "im"}]}`
//!   with indices in `0..=M`; repeated indices accumulate.
//! * Path, CSV: a `t` column followed by one column per component.
//! * Summary, CSV: `tau,t,component,mean,variance,stderr,n_traj`.
//! * Snapshots, CSV: `trajectory,tau,t,component,value`.
//! * Run metadata, JSON: see [`RunMeta`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tsaction_core::action::{PathField, PathGrid};
use tsaction_core::bridge::TrajectoryRecord;
use tsaction_core::phase_model::CouplingTensor;
use tsaction_core::sampler::EnsembleSummary;

use crate::config::ScenarioConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorTerm {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub modes: usize,
    pub terms: Vec<TensorTerm>,
}

impl TensorFile {
    pub fn from_tensor(tensor: &CouplingTensor) -> Self {
        Self {
            modes: tensor.modes(),
            terms: tensor
                .nonzero()
                .map(|([i, j, k, l], z)| TensorTerm {
                    i,
                    j,
                    k,
                    l,
                    re: z.re,
                    im: z.im,
                })
                .collect(),
        }
    }

    pub fn to_tensor(&self) -> Result<CouplingTensor> {
        Ok(CouplingTensor::from_terms(
            self.modes,
            self.terms.iter().map(|t| ([t.i, t.j, t.k, t.l], Complex64::new(t.re, t.im))),
        )?)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

pub fn read_tensor(path: &Path) -> Result<CouplingTensor> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: TensorFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    file.to_tensor()
}

pub fn write_tensor(path: &Path, tensor: &CouplingTensor) -> Result<()> {
    write_json(path, &TensorFile::from_tensor(tensor))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::json(path, e))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a path sampled on a uniform lattice.
pub fn read_path(path: &Path) -> Result<PathField> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.get(0).map(str::trim) != Some("t") || headers.len() < 2 {
        return Err(Error::Config(format!(
            "{}: expected a header `t,<component>,...`",
            path.display()
        )));
    }
    let dim = headers.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| {
                Error::Config(format!("{}: row {}: `{s}` is not a number", path.display(), line + 1))
            })
        };
        times.push(parse(&row[0])?);
        for c in 1..=dim {
            values.push(parse(&row[c])?);
        }
    }
    if times.len() < 2 {
        return Err(Error::Config(format!("{}: a path needs at least two rows", path.display())));
    }
    let grid = PathGrid::new(times[0], *times.last().unwrap(), times.len() - 1)?;
    let tol = 1e-9 * grid.eps().max(f64::MIN_POSITIVE) + 1e-12 * times[0].abs();
    if let Some((k, t)) = times.iter().enumerate().find(|(k, t)| (grid.time(*k) - **t).abs() > tol) {
        return Err(Error::Config(format!(
            "{}: times must be uniformly spaced; row {} has t = {t}, expected {}",
            path.display(),
            k + 1,
            grid.time(k)
        )));
    }
    Ok(PathField::new(grid, dim, values)?)
}

pub fn write_path(path: &Path, field: &PathField, names: &[String]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (k, t) in field.grid().times().into_iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(field.row(k).iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub tau: f64,
    pub t: f64,
    pub component: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub n_traj: usize,
}

pub fn summary_rows(summary: &EnsembleSummary) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (ci, &tau) in summary.taus().iter().enumerate() {
        for (k, &t) in summary.times().iter().enumerate() {
            for c in 0..summary.dim() {
                let (mean, variance, stderr) = summary.at(ci, k, c);
                rows.push(SummaryRow {
                    tau,
                    t,
                    component: c,
                    mean,
                    variance,
                    stderr,
                    n_traj: summary.trajectories(),
                });
            }
        }
    }
    rows
}

pub fn write_summary(path: &Path, summary: &EnsembleSummary) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in summary_rows(summary) {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::csv(path, e)))
        .collect()
}

pub fn write_snapshots(path: &Path, records: &[TrajectoryRecord], times: &[f64], dim: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["trajectory", "tau", "t", "component", "value"])
        .map_err(|e| Error::csv(path, e))?;
    for r in records {
        for (tau, snap) in r.taus.iter().zip(&r.snapshots) {
            for (k, t) in times.iter().enumerate() {
                for c in 0..dim {
                    w.write_record([
                        r.trajectory.to_string(),
                        tau.to_string(),
                        t.to_string(),
                        c.to_string(),
                        snap[k * dim + c].to_string(),
                    ])
                    .map_err(|e| Error::csv(path, e))?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibrationEntry {
    pub component: String,
    /// Equilibration pseudo-time, absent when not reached.
    pub tau: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub component: String,
    pub curve: String,
    /// Largest `|variance − reference| / stderr` at the final checkpoint.
    pub max_normalized_deviation: f64,
}

/// Sidecar describing a run; `config` re-runs it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub config: ScenarioConfig,
    pub components: Vec<String>,
    pub trajectories: u64,
    pub seed: u64,
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub warnings: Vec<String>,
    pub equilibration: Vec<EquilibrationEntry>,
    pub references: Vec<ReferenceEntry>,
    pub files: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        let t = CouplingTensor::squeezing(0.7);
        write_tensor(&p, &t).unwrap();
        assert_eq!(read_tensor(&p).unwrap(), t);
    }

    #[test]
    fn path_round_trip_and_spacing_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        let grid = PathGrid::new(0.0, 1.0, 4).unwrap();
        let field = PathField::from_fn(grid, 2, |t| vec![t.sin(), 1.0 / 3.0 - t]).unwrap();
        write_path(&p, &field, &["x".into(), "y".into()]).unwrap();
        assert_eq!(read_path(&p).unwrap(), field);

        std::fs::write(&p, "t,x\n0,1\n0.3,2\n1,3\n").unwrap();
        assert!(matches!(read_path(&p), Err(Error::Config(m)) if m.contains("uniformly")));
        std::fs::write(&p, "time,x\n0,1\n1,2\n").unwrap();
        assert!(read_path(&p).is_err());
    }

    #[test]
    fn malformed_tensor_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        std::fs::write(&p, r#"{"modes": 1, "terms": [{"i": 0, "j": 2, "k": 0, "l": 0, "re": 1.0}]}"#).unwrap();
        assert!(matches!(read_tensor(&p), Err(Error::Core(_))));
        std::fs::write(&p, r#"{"modes": 1, "terms": [], "extra": 0}"#).unwrap();
        assert!(matches!(read_tensor(&p), Err(Error::Json { .. })));
    }
}
