//! Shared stepping loop for calibration replicas and simulations.

use phototaxis_core::analysis::mean_and_stderr;
use phototaxis_core::dynamics::{
    step_ensemble, FlowStepper, IntegratorConfig, ParticleEnsemble, TangentBundle, TrackedTrajectory,
};
use phototaxis_core::flow::SpectralFlowState;
use phototaxis_core::light::LightParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::Result;
use crate::seeds::{self, Scope, Stream};

/// An evolving flow carrying a particle ensemble and tangent trajectories.
pub struct Engine {
    pub stepper: FlowStepper<ChaCha8Rng>,
    pub ensemble: ParticleEnsemble,
    pub tracked: Vec<TrackedTrajectory>,
    pub light: LightParams,
    pub integ: IntegratorConfig,
    steps: u64,
}

impl Engine {
    pub fn new(cfg: &RunConfig, chi: f64, scope: Scope, n_particles: usize) -> Result<Self> {
        let master = cfg.run.seed;
        let integ = cfg.integrator(chi);
        integ.validate()?;
        let state = SpectralFlowState::new_stationary(cfg.flow_params(), &mut seeds::rng(master, scope, Stream::FlowInit))?;
        let stepper = FlowStepper::new(state, cfg.backend(), seeds::rng(master, scope, Stream::FlowNoise));
        let ensemble = ParticleEnsemble::uniform(n_particles, &mut seeds::rng(master, scope, Stream::Particles));
        let mut tr = seeds::rng(master, scope, Stream::Tangent);
        let tracked = (0..cfg.run.n_tangent)
            .map(|_| TrackedTrajectory::new([tr.random::<f64>() - 0.5, tr.random::<f64>() - 0.5]))
            .collect();
        Ok(Self {
            stepper,
            ensemble,
            tracked,
            light: cfg.light_params(),
            integ,
            steps: 0,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self) -> Result<()> {
        let stages = self.stepper.stages(self.integ.dt)?;
        step_ensemble(&mut self.ensemble, &stages, &self.light, &self.integ)?;
        for t in &mut self.tracked {
            t.advance(&stages, &self.light, &self.integ)?;
        }
        self.steps += 1;
        Ok(())
    }

    /// Starts the Lyapunov measurement window.
    pub fn reset_tangents(&mut self) -> Result<()> {
        for t in &mut self.tracked {
            t.reset_accumulators()?;
        }
        Ok(())
    }

    /// Renormalized copies of the tangent bundles accumulated so far.
    pub fn bundles(&self) -> Result<Vec<TangentBundle>> {
        self.tracked
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.renormalize()?;
                Ok(t.bundle)
            })
            .collect()
    }
}

/// Mean and standard error from the means of `batches` contiguous blocks,
/// which tolerates short-range correlation in the series.
pub fn batch_mean(series: &[f64], batches: usize) -> (f64, f64) {
    let n = series.len();
    let batches = batches.min(n);
    if batches < 2 {
        return mean_and_stderr(series);
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| {
            let block = &series[b * n / batches..(b + 1) * n / batches];
            block.iter().sum::<f64>() / block.len() as f64
        })
        .collect();
    let mean = series.iter().sum::<f64>() / n as f64;
    (mean, mean_and_stderr(&means).1)
}

/// Kaplan-Yorke dimension of the mean exponents, with a delta-method
/// standard error from the across-bundle scatter.
pub fn kaplan_yorke_with_stderr(bundles: &[TangentBundle]) -> (f64, f64) {
    let ex: Vec<[f64; 2]> = bundles.iter().filter_map(TangentBundle::exponents).collect();
    let n = ex.len() as f64;
    let l1 = ex.iter().map(|e| e[0]).sum::<f64>() / n;
    let l2 = ex.iter().map(|e| e[1]).sum::<f64>() / n;
    let d = phototaxis_core::analysis::kaplan_yorke(l1, l2);
    if ex.len() < 2 || d == 0.0 || d == 2.0 {
        return (d, 0.0);
    }
    let (mut c11, mut c22, mut c12) = (0.0, 0.0, 0.0);
    for e in &ex {
        c11 += (e[0] - l1) * (e[0] - l1);
        c22 += (e[1] - l2) * (e[1] - l2);
        c12 += (e[0] - l1) * (e[1] - l2);
    }
    let scale = 1.0 / ((n - 1.0) * n);
    let (g1, g2) = (1.0 / l2.abs(), l1 / (l2 * l2));
    let var = scale * (g1 * g1 * c11 + g2 * g2 * c22 + 2.0 * g1 * g2 * c12);
    (d, var.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_mean_of_constant_blocks() {
        let s: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { 3.0 }).collect();
        let (m, se) = batch_mean(&s, 2);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-12);
        assert_eq!(batch_mean(&[4.0], 10), (4.0, 0.0));
    }

    #[test]
    fn kaplan_yorke_error_vanishes_for_identical_bundles() {
        let b = TangentBundle {
            vectors: [[1.0, 0.0], [0.0, 1.0]],
            log_sums: [10.0, -20.0],
            elapsed: 10.0,
        };
        assert_eq!(kaplan_yorke_with_stderr(&[b.clone(), b]), (1.5, 0.0));
    }

    #[test]
    fn kaplan_yorke_error_matches_finite_difference_propagation() {
        let mk = |l1: f64, l2: f64| TangentBundle {
            vectors: [[1.0, 0.0], [0.0, 1.0]],
            log_sums: [l1, l2],
            elapsed: 1.0,
        };
        // Scatter in lambda1 only: the error is se(l1) / |l2|.
        let (d, se) = kaplan_yorke_with_stderr(&[mk(0.9, -2.0), mk(1.1, -2.0)]);
        assert!((d - 1.5).abs() < 1e-12);
        assert!((se - 0.1 / 2.0).abs() < 1e-12);
    }
}
