//! Single-chi simulations and chi sweeps.

use log::{info, warn};
use phototaxis_core::analysis::{
    information_dimension, light_gain, lyapunov_summary, BoxCountResult, LyapunovSummary, RadialAccumulator,
    RadialBins, RadialProfile,
};

use crate::calibrate::Calibration;
use crate::config::RunConfig;
use crate::engine::{batch_mean, kaplan_yorke_with_stderr, Engine};
use crate::error::{HarnessError, Result};
use crate::output::{chi_label, ensure_dir, num, write_csv, Layout, Manifest};
use crate::seeds::Scope;
use crate::snapshot;
use crate::theory_table::{theory_point, TheoryRow};

/// Blocks used for batch-mean standard errors of time series.
const BATCHES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotDimension {
    pub time: f64,
    pub file: Option<String>,
    pub result: BoxCountResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub chi: f64,
    pub gain: f64,
    pub gain_stderr: f64,
    pub d1_boxcount: f64,
    pub d1_boxcount_stderr: f64,
    pub lyapunov: LyapunovSummary,
    pub d1_ky: f64,
    pub d1_ky_stderr: f64,
    pub theory: TheoryRow,
    /// Spread of the exact theory gain from the `D_f` calibration error.
    pub gain_theory_stderr: f64,
    pub radial: RadialProfile,
    pub radial_theory: RadialProfile,
    pub dimensions: Vec<SnapshotDimension>,
    pub phi_series: Vec<(f64, f64)>,
    pub log_volumes: Vec<(f64, f64)>,
}

pub const SWEEP_HEADER: [&str; 22] = [
    "chi",
    "gain_numeric",
    "gain_numeric_se",
    "gain_theory_exact",
    "gain_theory_exact_se",
    "gain_theory_first_order",
    "gain_theory_series",
    "d1_boxcount",
    "d1_boxcount_se",
    "d1_ky_benettin",
    "d1_ky_benettin_se",
    "d1_theory_direct",
    "d1_theory_energy",
    "lambda1",
    "lambda1_se",
    "lambda2",
    "lambda2_se",
    "alpha",
    "alpha_se",
    "lambda1_theory",
    "lambda2_theory",
    "alpha_theory",
];

impl PointResult {
    pub fn sweep_row(&self) -> Vec<String> {
        let l = &self.lyapunov;
        let p = &self.theory.prediction;
        let mut row: Vec<String> = [
            self.chi,
            self.gain,
            self.gain_stderr,
            p.gain,
            self.gain_theory_stderr,
            self.theory.gain_first_order,
            self.theory.gain_series,
            self.d1_boxcount,
            self.d1_boxcount_stderr,
            self.d1_ky,
            self.d1_ky_stderr,
            p.d1_direct,
            p.d1_energy,
            l.lambda1,
            l.stderr[0],
            l.lambda2,
            l.stderr[1],
            l.alpha,
            l.stderr[2],
            p.lambda1,
            p.lambda2,
            p.alpha,
        ]
        .iter()
        .map(|&x| num(x))
        .collect();
        row.push("ok".into());
        row
    }
}

fn sweep_header() -> Vec<&'static str> {
    let mut h = SWEEP_HEADER.to_vec();
    h.push("status");
    h
}

fn failed_row(chi: f64, err: &HarnessError) -> Vec<String> {
    let mut row = vec![num(chi)];
    row.extend(std::iter::repeat_n(num(f64::NAN), SWEEP_HEADER.len() - 1));
    row.push(format!("failed: {err}"));
    row
}

/// Integrates one chi point and analyzes it without writing any files
/// except the optional snapshots.
pub fn run_point(cfg: &RunConfig, chi: f64, cal: &Calibration, layout: Option<&Layout>) -> Result<PointResult> {
    cfg.validate()?;
    let mut engine = Engine::new(cfg, chi, Scope::Point(chi), cfg.run.n_particles)?;
    let transient = cfg.steps(cfg.run.t_transient);
    let measure = cfg.steps(cfg.run.t_measure);
    let phi_every = cfg.cadence(cfg.run.phi_every);
    let snap_every = cfg.cadence(cfg.run.snapshot_every);
    let light = cfg.light_params();
    let center = light.center;

    let snap_dir = match layout {
        Some(l) if cfg.run.save_snapshots => {
            let d = l.snapshot_dir(chi);
            ensure_dir(&d)?;
            Some(d)
        }
        _ => None,
    };

    info!("chi {chi}: {transient} transient + {measure} measured steps");
    for _ in 0..transient {
        engine.step()?;
    }
    engine.reset_tangents()?;

    let mut radial = RadialAccumulator::new(RadialBins::new(cfg.analysis.n_bins), center);
    let mut dimensions = Vec::new();
    let mut phi_series = Vec::new();
    let mut log_volumes = Vec::new();
    for k in 1..=measure {
        engine.step()?;
        let t = (transient + k) as f64 * cfg.integration.dt;
        if k % phi_every == 0 {
            phi_series.push((t, engine.ensemble.mean_phi(&light)));
        }
        if k % snap_every == 0 {
            let positions = &engine.ensemble.positions;
            let file = match &snap_dir {
                Some(dir) => {
                    let name = format!("snap_{:06}.bin", dimensions.len() + 1);
                    snapshot::write(positions, &dir.join(&name))?;
                    Some(name)
                }
                None => None,
            };
            radial.add(positions);
            let result = information_dimension(positions, &cfg.analysis.eps_list)?;
            dimensions.push(SnapshotDimension { time: t, file, result });
        }
    }
    for tr in &engine.tracked {
        log_volumes.push((tr.bundle.log_volume(), tr.divergence_integral));
    }

    let bundles = engine.bundles()?;
    let lyapunov = lyapunov_summary(&bundles)?;
    let (d1_ky, d1_ky_stderr) = kaplan_yorke_with_stderr(&bundles);

    let phis: Vec<f64> = phi_series.iter().map(|p| p.1).collect();
    let point = theory_point(cfg, chi, cal.d_f, cal.lambda0)?;
    let spatial_mean = point.model.spatial_mean_phi();
    let gain = light_gain(&phis, spatial_mean)?;
    let (_, gain_stderr) = batch_mean(&phis, BATCHES);
    let d1s: Vec<f64> = dimensions.iter().map(|d| d.result.d1).collect();
    let (d1_boxcount, d1_boxcount_stderr) = batch_mean(&d1s, BATCHES);

    let gain_theory_stderr = if chi > 0.0 && cal.d_f_stderr > 0.0 {
        let lo = theory_point(cfg, chi, cal.d_f - cal.d_f_stderr, cal.lambda0)?.row.prediction.gain;
        let hi = theory_point(cfg, chi, cal.d_f + cal.d_f_stderr, cal.lambda0)?.row.prediction.gain;
        0.5 * (lo - hi).abs()
    } else {
        0.0
    };

    Ok(PointResult {
        chi,
        gain,
        gain_stderr,
        d1_boxcount,
        d1_boxcount_stderr,
        lyapunov,
        d1_ky,
        d1_ky_stderr,
        gain_theory_stderr,
        radial: radial.profile(),
        radial_theory: point.model.radial_profile(cfg.analysis.n_bins)?,
        theory: point.row,
        dimensions,
        phi_series,
        log_volumes,
    })
}

fn write_point(result: &PointResult, layout: &Layout) -> Result<()> {
    let chi = result.chi;
    let rows: Vec<Vec<String>> = (0..result.radial.bins.count)
        .map(|i| {
            let (a, b) = result.radial.bins.edges(i);
            vec![
                num(a),
                num(b),
                num(result.radial.bins.center(i)),
                num(result.radial.density[i]),
                num(result.radial_theory.density[i]),
                num(result.radial.fractions[i]),
            ]
        })
        .collect();
    write_csv(
        &layout.per_chi("radial", chi),
        &["r_inner", "r_outer", "r_center", "density", "density_theory", "fraction"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = result
        .dimensions
        .iter()
        .map(|d| {
            let r = &d.result;
            vec![
                num(d.time),
                d.file.clone().unwrap_or_default(),
                num(r.d1),
                num(r.raw_d1),
                num(r.r2),
                num(r.fit_range.0),
                num(r.fit_range.1),
            ]
        })
        .collect();
    write_csv(
        &layout.per_chi("dimension", chi),
        &["t", "snapshot", "d1", "raw_d1", "r2", "fit_eps_min", "fit_eps_max"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = result.phi_series.iter().map(|&(t, p)| vec![num(t), num(p)]).collect();
    write_csv(&layout.per_chi("phi", chi), &["t", "mean_phi"], &rows)?;

    let rows: Vec<Vec<String>> = result
        .log_volumes
        .iter()
        .map(|&(v, d)| vec![num(v), num(d)])
        .collect();
    write_csv(&layout.per_chi("tangent", chi), &["log_volume", "divergence_integral"], &rows)?;

    write_csv(&layout.per_chi("run", chi), &sweep_header(), &[result.sweep_row()])
}

fn point_manifest(cfg: &RunConfig, chi: f64, cal: &Calibration) -> Manifest {
    let mut m = Manifest::new("simulate", cfg);
    m.set("chi", num(chi));
    m.set("calibration.d_f", num(cal.d_f));
    m.set("calibration.d_f_stderr", num(cal.d_f_stderr));
    m.set("calibration.lambda0", num(cal.lambda0));
    m.streams(Scope::Point(chi));
    m
}

/// Runs one chi point and writes its CSVs, snapshots and manifest.
pub fn cmd_simulate(cfg: &RunConfig, chi: f64, cal: &Calibration, layout: &Layout) -> Result<PointResult> {
    ensure_dir(&layout.root)?;
    let mut manifest = point_manifest(cfg, chi, cal);
    let result = run_point(cfg, chi, cal, Some(layout))?;
    write_point(&result, layout)?;
    manifest.set("result.gain", num(result.gain));
    manifest.set("result.d1_boxcount", num(result.d1_boxcount));
    manifest.set("result.lambda1", num(result.lyapunov.lambda1));
    manifest.set("result.lambda2", num(result.lyapunov.lambda2));
    manifest.write(&layout.file(&format!("manifest_simulate_{}.txt", chi_label(chi))))?;
    Ok(result)
}

/// Runs every point of `chi_list`; failures are logged, marked in
/// `sweep.csv` and returned in place.
pub fn cmd_sweep(cfg: &RunConfig, cal: &Calibration, layout: &Layout) -> Result<Vec<Result<PointResult>>> {
    ensure_dir(&layout.root)?;
    let mut manifest = Manifest::new("sweep", cfg);
    manifest.set("calibration.d_f", num(cal.d_f));
    manifest.set("calibration.lambda0", num(cal.lambda0));
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for &chi in &cfg.run.chi_list {
        manifest.streams(Scope::Point(chi));
        let outcome = cmd_simulate(cfg, chi, cal, layout);
        match &outcome {
            Ok(r) => {
                info!("chi {chi}: gain {:.4}, D1 {:.3}, KY {:.3}", r.gain, r.d1_boxcount, r.d1_ky);
                rows.push(r.sweep_row());
            }
            Err(e) => {
                warn!("chi {chi} failed: {e}");
                rows.push(failed_row(chi, e));
            }
        }
        results.push(outcome);
    }
    write_csv(&layout.file("sweep.csv"), &sweep_header(), &rows)?;
    manifest.write(&layout.file("manifest_sweep.txt"))?;
    Ok(results)
}
