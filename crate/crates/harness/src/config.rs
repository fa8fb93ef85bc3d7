//! Run configuration.
//!
//! The file format is TOML restricted to six tables: `[flow]`, `[light]`,
//! `[integration]`, `[run]`, `[analysis]` and `[theory]`. Every key has a
//! default, so an empty file is a valid configuration, and unknown keys are
//! rejected.

use std::path::Path;

use phototaxis_core::dynamics::IntegratorConfig;
use phototaxis_core::flow::{Backend, FlowParams};
use phototaxis_core::light::LightParams;
use phototaxis_core::theory::TheoryInputs;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub nu: f64,
    pub k0: f64,
    pub n_max: u32,
    pub target_msv: f64,
    pub grid_n: usize,
}

impl Default for FlowSection {
    fn default() -> Self {
        let p = FlowParams::default();
        Self {
            nu: p.nu,
            k0: p.k0,
            n_max: p.n_max,
            target_msv: p.target_msv,
            grid_n: p.grid_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LightSection {
    pub amplitude: f64,
    pub decay: f64,
    pub center: [f64; 2],
    pub image_radius: u32,
}

impl Default for LightSection {
    fn default() -> Self {
        let p = LightParams::default();
        Self {
            amplitude: p.amplitude,
            decay: p.decay,
            center: p.center,
            image_radius: p.image_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Direct,
    #[default]
    Grid,
}

impl From<BackendChoice> for Backend {
    fn from(b: BackendChoice) -> Self {
        match b {
            BackendChoice::Direct => Backend::Direct,
            BackendChoice::Grid => Backend::Grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSection {
    pub dt: f64,
    pub renorm_every: u32,
    pub backend: BackendChoice,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        Self {
            dt: c.dt,
            renorm_every: c.renorm_every,
            backend: BackendChoice::Grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub n_particles: usize,
    pub t_transient: f64,
    pub t_measure: f64,
    /// Time between stored position snapshots.
    pub snapshot_every: f64,
    /// Time between samples of the ensemble-mean illumination.
    pub phi_every: f64,
    /// Write snapshot files; analysis runs on every snapshot either way.
    pub save_snapshots: bool,
    /// Tangent trajectories per run for the Lyapunov exponents.
    pub n_tangent: usize,
    pub chi_list: Vec<f64>,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    /// Duration of the flow-only average for MSV and spectrum.
    pub calibration_flow_time: f64,
    /// Independent flow realizations used to calibrate `D_f` and `lambda0`.
    pub calibration_replicas: usize,
    /// Passive tracers per calibration replica.
    pub calibration_particles: usize,
    pub calibration_time: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            n_particles: 20_000,
            t_transient: 50.0,
            t_measure: 200.0,
            snapshot_every: 2.0,
            phi_every: 0.1,
            save_snapshots: true,
            n_tangent: 16,
            chi_list: vec![0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15],
            seed: 1,
            threads: 0,
            calibration_flow_time: 5000.0,
            calibration_replicas: 4,
            calibration_particles: 1000,
            calibration_time: 400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Box sizes for the information dimension, each `1/integer`.
    pub eps_list: Vec<f64>,
    pub n_bins: usize,
    /// Bins of the time-averaged energy spectrum, centered on multiples of pi.
    pub spectrum_bins: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            eps_list: (3..=8).map(|p| 1.0 / f64::from(1u32 << p)).collect(),
            n_bins: 20,
            spectrum_bins: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheorySection {
    pub quad_n: usize,
    pub series_terms: usize,
}

impl Default for TheorySection {
    fn default() -> Self {
        Self {
            quad_n: 1024,
            series_terms: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub flow: FlowSection,
    pub light: LightSection,
    pub integration: IntegrationSection,
    pub run: RunSection,
    pub analysis: AnalysisSection,
    pub theory: TheorySection,
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn flow_params(&self) -> FlowParams {
        FlowParams {
            nu: self.flow.nu,
            k0: self.flow.k0,
            n_max: self.flow.n_max,
            target_msv: self.flow.target_msv,
            grid_n: self.flow.grid_n,
            seed: self.run.seed,
        }
    }

    pub fn light_params(&self) -> LightParams {
        LightParams {
            amplitude: self.light.amplitude,
            decay: self.light.decay,
            center: self.light.center,
            image_radius: self.light.image_radius,
        }
    }

    pub fn integrator(&self, chi: f64) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.integration.dt,
            chi,
            renorm_every: self.integration.renorm_every,
        }
    }

    pub fn backend(&self) -> Backend {
        self.integration.backend.into()
    }

    pub fn theory_inputs(&self, chi: f64, d_f: f64, lambda0: f64) -> TheoryInputs {
        TheoryInputs {
            chi,
            d_f,
            lambda0,
            light: self.light_params(),
            quad_n: self.theory.quad_n,
        }
    }

    /// Steps of length `dt` covering `duration`.
    pub fn steps(&self, duration: f64) -> usize {
        (duration / self.integration.dt).round() as usize
    }

    /// Steps between events spaced `interval` apart, at least one.
    pub fn cadence(&self, interval: f64) -> usize {
        self.steps(interval).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let core = |e: phototaxis_core::Error| invalid(e.to_string());
        self.flow_params().validate().map_err(core)?;
        self.light_params().validate().map_err(core)?;
        self.integrator(0.0).validate().map_err(core)?;
        let r = &self.run;
        for (name, v) in [
            ("t_transient", r.t_transient),
            ("t_measure", r.t_measure),
            ("snapshot_every", r.snapshot_every),
            ("phi_every", r.phi_every),
            ("calibration_flow_time", r.calibration_flow_time),
            ("calibration_time", r.calibration_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("run.{name} must be > 0, got {v}")));
            }
        }
        if r.n_particles == 0 {
            return Err(invalid("run.n_particles must be >= 1"));
        }
        if r.n_tangent < 2 {
            return Err(invalid("run.n_tangent must be >= 2"));
        }
        if r.calibration_replicas == 0 || r.calibration_particles == 0 {
            return Err(invalid("calibration replicas and particles must be >= 1"));
        }
        if r.chi_list.is_empty() {
            return Err(invalid("run.chi_list is empty"));
        }
        if let Some(c) = r.chi_list.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
            return Err(invalid(format!("run.chi_list values must be >= 0, got {c}")));
        }
        let eps = &self.analysis.eps_list;
        if eps.len() < 3 {
            return Err(invalid("analysis.eps_list needs at least 3 box sizes"));
        }
        if !eps.windows(2).all(|w| w[1] < w[0]) {
            return Err(invalid("analysis.eps_list must be strictly decreasing"));
        }
        for &e in eps {
            let m = (1.0 / e).round();
            if !(e > 0.0 && e <= 1.0) || ((1.0 / e) - m).abs() > 1e-9 * m {
                return Err(invalid(format!("analysis.eps_list entry {e} is not 1/integer")));
            }
        }
        if self.analysis.n_bins < 8 {
            return Err(invalid("analysis.n_bins must be >= 8"));
        }
        if self.analysis.spectrum_bins < 4 {
            return Err(invalid("analysis.spectrum_bins must be >= 4"));
        }
        if self.theory.quad_n < 64 {
            return Err(invalid("theory.quad_n must be >= 64"));
        }
        if self.theory.series_terms == 0 {
            return Err(invalid("theory.series_terms must be >= 1"));
        }
        Ok(())
    }
}
