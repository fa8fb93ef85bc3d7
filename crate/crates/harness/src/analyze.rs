//! Offline re-analysis of stored snapshots.

use std::path::PathBuf;

use phototaxis_core::analysis::{information_dimension, BoxCountResult, RadialAccumulator, RadialBins, RadialProfile};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{ensure_dir, num, write_csv, Layout, Manifest};
use crate::snapshot;
use crate::theory_table::write_radial;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub files: Vec<(PathBuf, usize, BoxCountResult)>,
    /// Radial profile pooled over every file.
    pub pooled: RadialProfile,
}

pub fn analyze(cfg: &RunConfig, files: &[PathBuf]) -> Result<AnalysisReport> {
    let mut pooled = RadialAccumulator::new(RadialBins::new(cfg.analysis.n_bins), cfg.light.center);
    let mut out = Vec::with_capacity(files.len());
    for path in files {
        let positions = snapshot::read(path)?;
        pooled.add(&positions);
        let result = information_dimension(&positions, &cfg.analysis.eps_list)?;
        out.push((path.clone(), positions.len(), result));
    }
    Ok(AnalysisReport {
        files: out,
        pooled: pooled.profile(),
    })
}

/// Writes `analysis.csv` (one row per file) and `radial_pooled.csv`.
pub fn cmd_analyze(cfg: &RunConfig, files: &[PathBuf], layout: &Layout) -> Result<AnalysisReport> {
    ensure_dir(&layout.root)?;
    let mut manifest = Manifest::new("analyze", cfg);
    manifest.set("files", files.len());
    let report = analyze(cfg, files)?;
    let rows: Vec<Vec<String>> = report
        .files
        .iter()
        .map(|(p, n, r)| {
            vec![
                p.display().to_string(),
                n.to_string(),
                num(r.d1),
                num(r.raw_d1),
                num(r.r2),
                num(r.fit_range.0),
                num(r.fit_range.1),
            ]
        })
        .collect();
    write_csv(
        &layout.file("analysis.csv"),
        &["file", "count", "d1", "raw_d1", "r2", "fit_eps_min", "fit_eps_max"],
        &rows,
    )?;
    write_radial(&layout.file("radial_pooled.csv"), &report.pooled)?;
    manifest.write(&layout.file("manifest_analyze.txt"))?;
    Ok(report)
}
