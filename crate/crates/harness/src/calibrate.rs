//! Calibration of the passive carrier flow.
//!
//! A long flow-only run gives the time-averaged MSV and energy spectrum.
//! Independent replicas of passive tracers with tangent trajectories give
//! the effective diffusivity `D_f` and the positive exponent `lambda0`.

use std::collections::BTreeMap;
use std::path::Path;

use log::info;
use phototaxis_core::analysis::{effective_diffusivity, lyapunov_summary, mean_and_stderr};
use phototaxis_core::flow::{EnergySpectrum, SpectralFlowState, SpectrumBins};

use crate::config::RunConfig;
use crate::engine::Engine;
use crate::error::{HarnessError, Result};
use crate::output::{num, read_csv, write_csv, Layout, Manifest};
use crate::seeds::{self, Scope, Stream};

/// Interval between MSV and spectrum samples of the flow-only average.
const FLOW_SAMPLE_DT: f64 = 0.1;
/// Interval between MSD samples of the calibration replicas.
const MSD_SAMPLE_DT: f64 = 1.0;
/// Shortest MSD series accepted for a diffusivity fit.
const MIN_MSD_SPAN: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub msv: f64,
    pub msv_expected: f64,
    pub d_f: f64,
    pub d_f_stderr: f64,
    /// Log-log slope of the averaged MSD over the fit window.
    pub msd_loglog_slope: f64,
    pub lambda0: f64,
    pub lambda0_stderr: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub spectrum: Vec<(f64, f64)>,
    /// Replica-averaged `(t, msd)`.
    pub msd: Vec<(f64, f64)>,
}

impl Calibration {
    /// Velocity scale `U = sqrt(MSV)`.
    pub fn u_rms(&self) -> f64 {
        self.msv.sqrt()
    }

    /// `U L / D_f` with the box length `L = 1`.
    pub fn diffusivity_ratio(&self) -> f64 {
        self.u_rms() / self.d_f
    }

    /// `lambda0 L / U`.
    pub fn lyapunov_ratio(&self) -> f64 {
        self.lambda0 / self.u_rms()
    }

    fn scalars(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("msv", self.msv),
            ("msv_expected", self.msv_expected),
            ("d_f", self.d_f),
            ("d_f_stderr", self.d_f_stderr),
            ("msd_loglog_slope", self.msd_loglog_slope),
            ("lambda0", self.lambda0),
            ("lambda0_stderr", self.lambda0_stderr),
            ("lambda2", self.lambda2),
            ("alpha", self.alpha),
            ("alpha_stderr", self.alpha_stderr),
            ("u_l_over_d_f", self.diffusivity_ratio()),
            ("lambda0_l_over_u", self.lyapunov_ratio()),
        ]
    }

    pub fn write(&self, layout: &Layout) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .scalars()
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), num(v)])
            .collect();
        write_csv(&layout.calibration(), &["quantity", "value"], &rows)?;
        let rows: Vec<Vec<String>> = self.spectrum.iter().map(|&(k, e)| vec![num(k), num(e)]).collect();
        write_csv(&layout.file("spectrum.csv"), &["k_center", "E_k"], &rows)?;
        let rows: Vec<Vec<String>> = self.msd.iter().map(|&(t, m)| vec![num(t), num(m)]).collect();
        write_csv(&layout.file("msd.csv"), &["t", "msd"], &rows)
    }

    /// Reads the scalars back; the spectrum and MSD series are not needed
    /// downstream and are left empty.
    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(HarnessError::MissingCalibration(path.to_path_buf()));
        }
        let bad = |message: String| HarnessError::BadCalibration {
            path: path.to_path_buf(),
            message,
        };
        let (_, rows) = read_csv(path)?;
        let mut values = BTreeMap::new();
        for row in rows {
            let [key, value] = row.as_slice() else {
                return Err(bad(format!("expected two columns, got {row:?}")));
            };
            let v: f64 = value.parse().map_err(|_| bad(format!("{key}: not a number: {value}")))?;
            values.insert(key.clone(), v);
        }
        let get = |k: &str| values.get(k).copied().ok_or_else(|| bad(format!("missing {k}")));
        Ok(Self {
            msv: get("msv")?,
            msv_expected: get("msv_expected")?,
            d_f: get("d_f")?,
            d_f_stderr: get("d_f_stderr")?,
            msd_loglog_slope: get("msd_loglog_slope")?,
            lambda0: get("lambda0")?,
            lambda0_stderr: get("lambda0_stderr")?,
            lambda2: get("lambda2")?,
            alpha: get("alpha")?,
            alpha_stderr: get("alpha_stderr")?,
            spectrum: Vec::new(),
            msd: Vec::new(),
        })
    }
}

/// Time-averaged MSV and binned spectrum of the flow alone.
pub fn flow_averages(cfg: &RunConfig) -> Result<(f64, f64, EnergySpectrum)> {
    let master = cfg.run.seed;
    let scope = Scope::CalibrationFlow;
    let mut state = SpectralFlowState::new_stationary(cfg.flow_params(), &mut seeds::rng(master, scope, Stream::FlowInit))?;
    let mut noise = seeds::rng(master, scope, Stream::FlowNoise);
    let mut spectrum = EnergySpectrum::new(SpectrumBins::centered_multiples_of_pi(cfg.analysis.spectrum_bins));
    let samples = (cfg.run.calibration_flow_time / FLOW_SAMPLE_DT).round().max(1.0) as usize;
    let mut sum = 0.0;
    for _ in 0..samples {
        state.advance(FLOW_SAMPLE_DT, &mut noise)?;
        sum += state.mean_square_velocity();
        spectrum.accumulate(&state);
    }
    Ok((sum / samples as f64, state.expected_msv(), spectrum))
}

struct Replica {
    msd: Vec<(f64, f64)>,
    bundles: Vec<phototaxis_core::dynamics::TangentBundle>,
}

fn run_replica(cfg: &RunConfig, index: u32) -> Result<Replica> {
    let mut engine = Engine::new(cfg, 0.0, Scope::CalibrationReplica(index), cfg.run.calibration_particles)?;
    let steps = cfg.steps(cfg.run.calibration_time);
    let every = cfg.cadence(MSD_SAMPLE_DT);
    // Tangent vectors align with the unstable direction within a few
    // inverse exponents; the first tenth of the run is discarded.
    let reset_at = (steps / 10).max(1);
    let mut msd = vec![(0.0, 0.0)];
    for step in 1..=steps {
        engine.step()?;
        if step == reset_at {
            engine.reset_tangents()?;
        }
        if step % every == 0 {
            msd.push((step as f64 * cfg.integration.dt, engine.ensemble.mean_square_displacement()));
        }
    }
    Ok(Replica {
        msd,
        bundles: engine.bundles()?,
    })
}

fn fit(series: &[(f64, f64)]) -> Result<phototaxis_core::analysis::DiffusivityFit> {
    let (t, m): (Vec<f64>, Vec<f64>) = series.iter().copied().unzip();
    Ok(effective_diffusivity(&t, &m, MIN_MSD_SPAN)?)
}

/// `D_f` is fitted to the replica-averaged MSD; its standard error comes
/// from the scatter of the per-replica fits.
pub fn calibrate(cfg: &RunConfig) -> Result<Calibration> {
    let (msv, msv_expected, spectrum) = flow_averages(cfg)?;
    info!("flow-only average: MSV {msv:.5} (expected {msv_expected:.5})");
    let mut replicas = Vec::new();
    let mut per_replica = Vec::new();
    for i in 0..cfg.run.calibration_replicas as u32 {
        let r = run_replica(cfg, i)?;
        let f = fit(&r.msd)?;
        info!("replica {i}: D_f {:.5}, log-log slope {:.3}", f.d_f, f.loglog_slope);
        per_replica.push(f.d_f);
        replicas.push(r);
    }
    let samples = replicas[0].msd.len();
    let msd: Vec<(f64, f64)> = (0..samples)
        .map(|j| {
            let t = replicas[0].msd[j].0;
            let m = replicas.iter().map(|r| r.msd[j].1).sum::<f64>() / replicas.len() as f64;
            (t, m)
        })
        .collect();
    let pooled = fit(&msd)?;
    if !pooled.diffusive {
        return Err(HarnessError::Calibration {
            message: format!(
                "MSD is not diffusive over t in [{}, {}] (log-log slope {:.3}); lengthen calibration_time",
                pooled.window.0, pooled.window.1, pooled.loglog_slope
            ),
            series: msd,
        });
    }
    let d_f_stderr = mean_and_stderr(&per_replica).1;
    let bundles: Vec<_> = replicas.iter().flat_map(|r| r.bundles.iter().cloned()).collect();
    let lyap = lyapunov_summary(&bundles)?;
    Ok(Calibration {
        msv,
        msv_expected,
        d_f: pooled.d_f,
        d_f_stderr,
        msd_loglog_slope: pooled.loglog_slope,
        lambda0: lyap.lambda1,
        lambda0_stderr: lyap.stderr[0],
        lambda2: lyap.lambda2,
        alpha: lyap.alpha,
        alpha_stderr: lyap.stderr[2],
        spectrum: spectrum.values(),
        msd,
    })
}

/// Runs the calibration and writes `calibration.csv`, `spectrum.csv`,
/// `msd.csv` and a manifest into `layout`.
pub fn cmd_calibrate(cfg: &RunConfig, layout: &Layout) -> Result<Calibration> {
    crate::output::ensure_dir(&layout.root)?;
    let mut manifest = Manifest::new("calibrate", cfg);
    manifest.streams(Scope::CalibrationFlow);
    for i in 0..cfg.run.calibration_replicas as u32 {
        manifest.streams(Scope::CalibrationReplica(i));
    }
    let cal = calibrate(cfg)?;
    cal.write(layout)?;
    for (k, v) in cal.scalars() {
        manifest.set(&format!("result.{k}"), num(v));
    }
    manifest.write(&layout.file("manifest_calibrate.txt"))?;
    Ok(cal)
}
