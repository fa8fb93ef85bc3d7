//! Swimmer trajectories `dr/dt = v(r, t) + chi grad Phi(r)`.
//!
//! Time stepping is classical RK4 in space. The flow is advanced exactly
//! (OU transition) from `t` to `t + dt/2` to `t + dt`, and the three frozen
//! snapshots are shared by every particle and every tangent trajectory for
//! that step. All time-discretization error therefore lives in the particle
//! ODE; the field statistics are exact.

mod tangent;

pub use tangent::{renormalize, step_tangent, TangentBundle, TrackedTrajectory};

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{Backend, FieldSnapshot, FlowParams, SpectralFlowState, VelocityField};
use crate::geometry::{wrap, Vec2};
use crate::light::{LightEvaluator, LightParams};

/// Particles per parallel work item. Reductions sum per-chunk partials in
/// chunk order, so results do not depend on the thread count.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Phototactic coefficient.
    pub chi: f64,
    /// Steps between Gram-Schmidt renormalizations of tangent vectors.
    pub renorm_every: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            chi: 0.0,
            renorm_every: 10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("integration dt must be > 0, got {}", self.dt)));
        }
        if !(self.chi >= 0.0 && self.chi.is_finite()) {
            return Err(Error::Config(format!("chi must be >= 0, got {}", self.chi)));
        }
        if self.renorm_every == 0 {
            return Err(Error::Config("renorm_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Three frozen fields for one RK4 step: at `t`, `t + dt/2` and `t + dt`.
#[derive(Debug)]
pub struct FieldStages<F> {
    pub start: Arc<F>,
    pub mid: Arc<F>,
    pub end: Arc<F>,
    pub time: f64,
    pub dt: f64,
}

impl<F> Clone for FieldStages<F> {
    fn clone(&self) -> Self {
        Self {
            start: Arc::clone(&self.start),
            mid: Arc::clone(&self.mid),
            end: Arc::clone(&self.end),
            time: self.time,
            dt: self.dt,
        }
    }
}

impl<F> FieldStages<F> {
    /// The same field at all three stages.
    pub fn frozen(field: Arc<F>, time: f64, dt: f64) -> Self {
        Self {
            start: Arc::clone(&field),
            mid: Arc::clone(&field),
            end: field,
            time,
            dt,
        }
    }
}

/// Owns the evolving flow and hands out staged snapshots.
pub struct FlowStepper<R> {
    state: SpectralFlowState,
    backend: Backend,
    current: Arc<FieldSnapshot>,
    rng: R,
}

impl<R: Rng> FlowStepper<R> {
    pub fn new(state: SpectralFlowState, backend: Backend, rng: R) -> Self {
        let current = Arc::new(state.snapshot(backend));
        Self {
            state,
            backend,
            current,
            rng,
        }
    }

    pub fn state(&self) -> &SpectralFlowState {
        &self.state
    }

    pub fn current(&self) -> &Arc<FieldSnapshot> {
        &self.current
    }

    /// Advances the flow by `dt` and returns the snapshots used for that step.
    pub fn stages(&mut self, dt: f64) -> Result<FieldStages<FieldSnapshot>> {
        let time = self.state.time();
        let start = Arc::clone(&self.current);
        self.state.advance(0.5 * dt, &mut self.rng)?;
        let mid = Arc::new(self.state.snapshot(self.backend));
        self.state.advance(0.5 * dt, &mut self.rng)?;
        let end = Arc::new(self.state.snapshot(self.backend));
        self.current = Arc::clone(&end);
        Ok(FieldStages {
            start,
            mid,
            end,
            time,
            dt,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    /// Torus coordinates in `[-1/2, 1/2)^2`.
    pub positions: Vec<Vec2>,
    /// Positions continued across the periodic boundaries.
    pub unwrapped: Vec<Vec2>,
    /// Positions at construction, the reference for dispersion.
    pub initial: Vec<Vec2>,
}

impl ParticleEnsemble {
    pub fn from_positions(positions: Vec<Vec2>) -> Self {
        let positions: Vec<Vec2> = positions.into_iter().map(wrap).collect();
        Self {
            unwrapped: positions.clone(),
            initial: positions.clone(),
            positions,
        }
    }

    pub fn uniform<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Self {
        let positions = (0..count)
            .map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5])
            .collect();
        Self::from_positions(positions)
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    /// Mean squared unwrapped displacement since construction.
    pub fn mean_square_displacement(&self) -> f64 {
        if self.positions.is_empty() {
            return 0.0;
        }
        let partials: Vec<f64> = self
            .unwrapped
            .par_chunks(CHUNK)
            .zip(self.initial.par_chunks(CHUNK))
            .map(|(u, o)| {
                u.iter()
                    .zip(o)
                    .map(|(a, b)| {
                        let dx = a[0] - b[0];
                        let dy = a[1] - b[1];
                        dx * dx + dy * dy
                    })
                    .sum::<f64>()
            })
            .collect();
        partials.iter().sum::<f64>() / self.count() as f64
    }

    /// Ensemble mean illumination.
    pub fn mean_phi(&self, light: &LightParams) -> f64 {
        if self.positions.is_empty() {
            return 0.0;
        }
        let partials: Vec<f64> = self
            .positions
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&r| light.phi(r)).sum::<f64>())
            .collect();
        partials.iter().sum::<f64>() / self.count() as f64
    }
}

/// Right-hand side of the particle ODE.
#[inline]
pub(crate) fn swim_velocity<F: VelocityField + ?Sized>(
    field: &F,
    light: &LightEvaluator,
    chi: f64,
    r: Vec2,
) -> Vec2 {
    let v = field.velocity(r);
    if chi == 0.0 {
        return v;
    }
    let (_, g) = light.phi_and_grad(r);
    [v[0] + chi * g[0], v[1] + chi * g[1]]
}

/// RK4 displacement of one particle over a staged step.
#[inline]
pub fn rk4_displacement<F: VelocityField + ?Sized>(
    stages: (&F, &F, &F),
    light: &LightEvaluator,
    chi: f64,
    dt: f64,
    r: Vec2,
) -> Vec2 {
    let (s0, s1, s2) = stages;
    let h = 0.5 * dt;
    let k1 = swim_velocity(s0, light, chi, r);
    let k2 = swim_velocity(s1, light, chi, [r[0] + h * k1[0], r[1] + h * k1[1]]);
    let k3 = swim_velocity(s1, light, chi, [r[0] + h * k2[0], r[1] + h * k2[1]]);
    let k4 = swim_velocity(s2, light, chi, [r[0] + dt * k3[0], r[1] + dt * k3[1]]);
    let w = dt / 6.0;
    [
        w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// One RK4 step of every particle against shared staged snapshots.
///
/// Positions are wrapped back onto the torus; unwrapped positions accumulate
/// the raw displacement.
pub fn step_ensemble<F: VelocityField>(
    ens: &mut ParticleEnsemble,
    stages: &FieldStages<F>,
    light: &LightParams,
    cfg: &IntegratorConfig,
) -> Result<()> {
    let fields = (&*stages.start, &*stages.mid, &*stages.end);
    let chi = cfg.chi;
    let dt = stages.dt;
    let light = &light.evaluator();
    ens.positions
        .par_chunks_mut(CHUNK)
        .zip(ens.unwrapped.par_chunks_mut(CHUNK))
        .for_each(|(pos, unw)| {
            for (r, u) in pos.iter_mut().zip(unw.iter_mut()) {
                let d = rk4_displacement(fields, light, chi, dt, *r);
                u[0] += d[0];
                u[1] += d[1];
                *r = wrap([r[0] + d[0], r[1] + d[1]]);
            }
        });
    if let Some(index) = ens
        .unwrapped
        .iter()
        .position(|u| !(u[0].is_finite() && u[1].is_finite()))
    {
        return Err(Error::Divergence {
            index,
            time: stages.time + dt,
        });
    }
    Ok(())
}

/// Mean squared displacement sampled at fixed intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MsdSeries {
    pub times: Vec<f64>,
    pub msd: Vec<f64>,
}

/// Passive tracers (`chi = 0`) in a freshly drawn stationary flow.
///
/// `sample_every` is the number of integration steps between MSD samples;
/// the series starts with `(0, 0)`.
pub fn run_passive_dispersion<R: Rng>(
    count: usize,
    flow: FlowParams,
    duration: f64,
    cfg: &IntegratorConfig,
    sample_every: usize,
    backend: Backend,
    rng: &mut R,
) -> Result<MsdSeries> {
    cfg.validate()?;
    if cfg.chi != 0.0 {
        return Err(Error::Argument(format!(
            "passive dispersion requires chi = 0, got {}",
            cfg.chi
        )));
    }
    if sample_every == 0 {
        return Err(Error::Argument("sample_every must be >= 1".into()));
    }
    let state = SpectralFlowState::new_stationary(flow, rng)?;
    let mut ens = ParticleEnsemble::uniform(count, rng);
    let mut stepper = FlowStepper::new(state, backend, rng);
    let light = LightParams::default();
    let steps = (duration / cfg.dt).round() as usize;
    let mut series = MsdSeries {
        times: vec![0.0],
        msd: vec![0.0],
    };
    for step in 1..=steps {
        let stages = stepper.stages(cfg.dt)?;
        step_ensemble(&mut ens, &stages, &light, cfg)?;
        if step % sample_every == 0 {
            series.times.push(step as f64 * cfg.dt);
            series.msd.push(ens.mean_square_displacement());
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowGrid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_flow() -> Arc<FlowGrid> {
        Arc::new(SpectralFlowState::zero(FlowParams::default()).unwrap().grid())
    }

    #[test]
    fn passive_particles_in_still_fluid_do_not_move() {
        let stages = FieldStages::frozen(zero_flow(), 0.0, 5e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ens = ParticleEnsemble::uniform(100, &mut rng);
        let before = ens.clone();
        let cfg = IntegratorConfig::default();
        for _ in 0..10 {
            step_ensemble(&mut ens, &stages, &LightParams::default(), &cfg).unwrap();
        }
        assert_eq!(ens, before);
    }

    #[test]
    fn swimmer_at_light_center_stays() {
        let stages = FieldStages::frozen(zero_flow(), 0.0, 5e-3);
        let mut ens = ParticleEnsemble::from_positions(vec![[0.0, 0.0]]);
        let cfg = IntegratorConfig {
            chi: 0.1,
            ..IntegratorConfig::default()
        };
        for _ in 0..100 {
            step_ensemble(&mut ens, &stages, &LightParams::default(), &cfg).unwrap();
        }
        assert_eq!(ens.positions[0], [0.0, 0.0]);
    }

    #[test]
    fn divergence_reports_particle_index() {
        struct Exploding;
        impl VelocityField for Exploding {
            fn velocity(&self, r: Vec2) -> Vec2 {
                if r[0] > 0.3 {
                    [f64::NAN, 0.0]
                } else {
                    [0.0, 0.0]
                }
            }
            fn sample(&self, r: Vec2) -> crate::flow::VelocitySample {
                crate::flow::VelocitySample {
                    v: self.velocity(r),
                    grad: [[0.0; 2]; 2],
                }
            }
        }
        let stages = FieldStages::frozen(Arc::new(Exploding), 0.0, 1e-2);
        let mut ens = ParticleEnsemble::from_positions(vec![[0.0, 0.0], [0.1, 0.0], [0.4, 0.0]]);
        let err = step_ensemble(&mut ens, &stages, &LightParams::default(), &IntegratorConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { index: 2, .. }));
    }

    #[test]
    fn unwrapped_differs_from_wrapped_by_lattice_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let state = SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap();
        let mut ens = ParticleEnsemble::uniform(200, &mut rng);
        let mut stepper = FlowStepper::new(state, Backend::Grid, ChaCha8Rng::seed_from_u64(4));
        let cfg = IntegratorConfig {
            dt: 0.01,
            chi: 0.1,
            ..IntegratorConfig::default()
        };
        for _ in 0..300 {
            let stages = stepper.stages(cfg.dt).unwrap();
            step_ensemble(&mut ens, &stages, &LightParams::default(), &cfg).unwrap();
        }
        for (p, u) in ens.positions.iter().zip(&ens.unwrapped) {
            assert!((-0.5..0.5).contains(&p[0]) && (-0.5..0.5).contains(&p[1]));
            for c in 0..2 {
                let d = u[c] - p[c];
                assert!((d - d.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_flow_dispersion_is_zero() {
        let params = FlowParams {
            n_max: 0,
            ..FlowParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = IntegratorConfig::default();
        let s = run_passive_dispersion(50, params, 1.0, &cfg, 20, Backend::Grid, &mut rng).unwrap();
        assert_eq!(s.times.len(), 11);
        assert!(s.msd.iter().all(|&m| m == 0.0));
        let bad = IntegratorConfig { chi: 0.1, ..cfg };
        assert!(run_passive_dispersion(5, params, 1.0, &bad, 20, Backend::Grid, &mut rng).is_err());
    }
}
