//! Plot-ready CSV files derived from an ensemble summary.
//!
//! For every stochastic component `c` the files are
//!
//! * `<preset>_<c>_line.csv`: variance against `t` at the last checkpoint,
//! * `<preset>_<c>_tau.csv`: variance against `τ` at the lattice point
//!   nearest `t = 0.5`,
//! * `<preset>_<c>_surface.csv`: variance over the whole `(τ, t)` grid,
//!
//! each with a `reference` column where a closed form is known. A
//! deterministic scenario gets `<preset>_path.csv` with the mean path and
//! the exact solution instead.

use std::path::{Path, PathBuf};

use tsaction_core::phase_model::QuadratureModel;
use tsaction_core::sampler::EnsembleSummary;

use crate::scenario::Scenario;
use crate::{Error, Result};

/// Real time of the variance-against-τ plots.
pub const TAU_PLOT_TIME: f64 = 0.5;

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn emit_figure_data(scenario: &Scenario, summary: &EnsembleSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    let preset = scenario.preset().name();
    let mut files = Vec::new();
    let times = summary.times();

    if let Some(free) = &scenario.free_field {
        let last = summary.taus().len() - 1;
        let path = dir.join(format!("{preset}_path.csv"));
        let mut rows = Vec::new();
        for (k, &t) in times.iter().enumerate() {
            let exact = free.phase(t);
            for (c, name) in scenario.components.iter().enumerate() {
                let (mean, var, _) = summary.at(last, k, c);
                rows.push(vec![t.to_string(), name.clone(), mean.to_string(), var.to_string(), exact[c].to_string()]);
            }
        }
        write_rows(&path, &["t", "component", "mean", "variance", "reference"], rows)?;
        files.push(path);
        return Ok(files);
    }

    let p = scenario.model.partition();
    let last = summary.taus().len() - 1;
    let k_fixed = summary.nearest_time_index(TAU_PLOT_TIME);
    for c in p.x.iter().chain(&p.y).copied() {
        let name = &scenario.components[c];
        let reference = scenario.reference(c);

        let line = dir.join(format!("{preset}_{name}_line.csv"));
        let rows = times.iter().enumerate().map(|(k, &t)| {
            let (mean, var, se) = summary.at(last, k, c);
            vec![t.to_string(), mean.to_string(), var.to_string(), se.to_string(), cell(reference.map(|r| r.variance(t)))]
        });
        write_rows(&line, &["t", "mean", "variance", "stderr", "reference"], rows)?;
        files.push(line);

        let tau_plot = dir.join(format!("{preset}_{name}_tau.csv"));
        let t_fixed = times[k_fixed];
        let rows = summary.taus().iter().enumerate().map(|(ci, &tau)| {
            let (mean, var, se) = summary.at(ci, k_fixed, c);
            vec![
                tau.to_string(),
                t_fixed.to_string(),
                mean.to_string(),
                var.to_string(),
                se.to_string(),
                cell(reference.map(|r| r.variance(t_fixed))),
            ]
        });
        write_rows(&tau_plot, &["tau", "t", "mean", "variance", "stderr", "reference"], rows)?;
        files.push(tau_plot);

        let surface = dir.join(format!("{preset}_{name}_surface.csv"));
        let mut rows = Vec::new();
        for (ci, &tau) in summary.taus().iter().enumerate() {
            for (k, &t) in times.iter().enumerate() {
                let (_, var, se) = summary.at(ci, k, c);
                rows.push(vec![tau.to_string(), t.to_string(), var.to_string(), se.to_string(), cell(reference.map(|r| r.variance(t)))]);
            }
        }
        write_rows(&surface, &["tau", "t", "variance", "stderr", "reference"], rows)?;
        files.push(surface);
    }
    Ok(files)
}
