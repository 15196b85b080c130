//! CSV tables and the JSON run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scan::{PairedScan, ScanTable};
use super::transition::BranchCurves;
use crate::error::Result;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line per p_x: best energy and overlap plus the two lowest cluster
/// means (empty when absent).
pub fn write_scan_csv<W: Write>(table: &ScanTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "p_x",
        "scaled_px",
        "best_energy",
        "best_overlap",
        "n_clusters",
        "branch1_energy",
        "branch2_energy",
        "converged_starts",
    ])?;
    for r in &table.rows {
        let b = r.branch_energies();
        w.write_record([
            r.p_x.to_string(),
            r.scaled_px.to_string(),
            r.best_energy.to_string(),
            r.best_overlap.to_string(),
            b.len().to_string(),
            opt(b.first().copied()),
            opt(b.get(1).copied()),
            r.solutions.converged_count().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Every multi-start solution: p_x, start index, energy, convergence flag.
pub fn write_distribution_csv<W: Write>(table: &ScanTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p_x", "scaled_px", "start_index", "energy_final", "converged"])?;
    for r in &table.rows {
        for s in &r.solutions.records {
            w.write_record([
                r.p_x.to_string(),
                r.scaled_px.to_string(),
                s.start_index.to_string(),
                s.energy_final.to_string(),
                s.converged.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_paired_csv<W: Write>(pair: &PairedScan, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "p_x",
        "scaled_px",
        "exact_best_energy",
        "perturbative_best_energy",
        "exact_overlap",
        "perturbative_overlap",
    ])?;
    for (a, b) in pair.exact.rows.iter().zip(&pair.perturbative.rows) {
        w.write_record([
            a.p_x.to_string(),
            a.scaled_px.to_string(),
            a.best_energy.to_string(),
            b.best_energy.to_string(),
            a.best_overlap.to_string(),
            b.best_overlap.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_branches_csv<W: Write>(curves: &BranchCurves, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p_x", "low_branch_energy", "high_branch_energy"])?;
    for ((p, f), b) in curves.p_x.iter().zip(&curves.low_branch).zip(&curves.high_branch) {
        w.write_record([p.to_string(), f.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Creates `dir/name` and hands a buffered writer to `f`; returns the path.
pub fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C: Serialize, S: Serialize> {
    pub software: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: C,
    pub outputs: Vec<String>,
    pub summary: S,
}

impl<C: Serialize, S: Serialize> Manifest<C, S> {
    pub fn new(subcommand: &str, config: C, outputs: Vec<String>, summary: S) -> Self {
        Self {
            software: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config,
            outputs,
            summary,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        write_file(dir, "manifest.json", |w| {
            serde_json::to_writer_pretty(&mut *w, self)?;
            writeln!(w)?;
            Ok(())
        })
    }
}
