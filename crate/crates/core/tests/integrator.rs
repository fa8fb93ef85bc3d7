use std::sync::Arc;

use phototaxis_core::analysis::{effective_diffusivity, lyapunov_summary};
use phototaxis_core::dynamics::{
    step_ensemble, FieldStages, FlowStepper, IntegratorConfig, ParticleEnsemble, TrackedTrajectory,
};
use phototaxis_core::flow::{Backend, FieldSnapshot, FlowParams, SpectralFlowState};
use phototaxis_core::light::LightParams;
use phototaxis_core::Vec2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn still_water() -> Arc<FieldSnapshot> {
    let state = SpectralFlowState::zero(FlowParams::default()).unwrap();
    Arc::new(state.snapshot(Backend::Direct))
}

fn cfg(dt: f64, chi: f64) -> IntegratorConfig {
    IntegratorConfig {
        dt,
        chi,
        renorm_every: 10,
    }
}

/// d/dx of the one-dimensional image sum `sum_m exp(-8 (x - m)^2)`, written
/// out independently of the library.
fn image_sum_slope(x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for m in -1..=1 {
        let s = x - f64::from(m);
        let g = (-8.0 * s * s).exp();
        value += g;
        slope += -16.0 * s * g;
    }
    (value, slope)
}

#[test]
fn swimmer_in_still_water_matches_fine_reference() {
    let chi = 0.1;
    // On the x axis the motion stays one-dimensional: dx/dt = chi X'(x) Y(0).
    let (y0, _) = image_sum_slope(0.0);
    let rhs = |x: f64| chi * image_sum_slope(x).1 * y0;
    let h = 1e-5;
    let mut x = 0.25;
    for _ in 0..100_000 {
        let k1 = rhs(x);
        let k2 = rhs(x + 0.5 * h * k1);
        let k3 = rhs(x + 0.5 * h * k2);
        let k4 = rhs(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    let dt = 1e-3;
    let stages = FieldStages::frozen(still_water(), 0.0, dt);
    let mut ens = ParticleEnsemble::from_positions(vec![[0.25, 0.0]]);
    for _ in 0..1000 {
        step_ensemble(&mut ens, &stages, &LightParams::default(), &cfg(dt, chi)).unwrap();
    }
    assert!((ens.unwrapped[0][0] - x).abs() < 1e-6, "{} vs {x}", ens.unwrapped[0][0]);
    assert_eq!(ens.unwrapped[0][1], 0.0);
    // The swimmer moved towards the light.
    assert!(x < 0.2);
}

fn start_points() -> Vec<Vec2> {
    (0..64)
        .map(|i| [-0.45 + 0.0137 * i as f64, 0.37 - 0.0113 * i as f64])
        .collect()
}

fn rms_error(a: &ParticleEnsemble, b: &ParticleEnsemble) -> f64 {
    let s: f64 = a
        .unwrapped
        .iter()
        .zip(&b.unwrapped)
        .map(|(p, q)| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2))
        .sum();
    (s / a.count() as f64).sqrt()
}

fn frozen_run(seed: u64, dt: f64, duration: f64) -> ParticleEnsemble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap();
    let stages = FieldStages::frozen(Arc::new(state.snapshot(Backend::Direct)), 0.0, dt);
    let mut ens = ParticleEnsemble::from_positions(start_points());
    let steps = (duration / dt).round() as usize;
    for _ in 0..steps {
        step_ensemble(&mut ens, &stages, &LightParams::default(), &cfg(dt, 0.1)).unwrap();
    }
    ens
}

#[test]
fn fourth_order_convergence_in_a_frozen_field() {
    let t = 1.0;
    let (mut coarse, mut fine) = (0.0, 0.0);
    for seed in 0..6 {
        let reference = frozen_run(seed, 1e-4, t);
        coarse += rms_error(&frozen_run(seed, 0.01, t), &reference).powi(2);
        fine += rms_error(&frozen_run(seed, 0.005, t), &reference).powi(2);
    }
    let ratio = (coarse / fine).sqrt();
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

/// Integrates over one realization of the evolving flow. The flow path is
/// sampled at spacing `h` from a fixed seed, so every step size sees the
/// same field history.
fn evolving_run(seed: u64, substeps: usize, h: f64, duration: f64) -> ParticleEnsemble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap();
    let dt = 2.0 * substeps as f64 * h;
    let steps = (duration / dt).round() as usize;
    let mut ens = ParticleEnsemble::from_positions(start_points());
    let mut start = Arc::new(state.snapshot(Backend::Direct));
    for step in 0..steps {
        for _ in 0..substeps {
            state.advance(h, &mut rng).unwrap();
        }
        let mid = Arc::new(state.snapshot(Backend::Direct));
        for _ in 0..substeps {
            state.advance(h, &mut rng).unwrap();
        }
        let end = Arc::new(state.snapshot(Backend::Direct));
        let stages = FieldStages {
            start,
            mid,
            end: Arc::clone(&end),
            time: step as f64 * dt,
            dt,
        };
        step_ensemble(&mut ens, &stages, &LightParams::default(), &cfg(dt, 0.1)).unwrap();
        start = end;
    }
    ens
}

/// The field is an OU process in time, so its increments over a step scale
/// as `dt^(1/2)` and the staged scheme converges at first order against a
/// fixed field path: halving `dt` should roughly halve the error.
#[test]
fn evolving_field_converges_at_first_order() {
    let h = 5e-5;
    let t = 1.0;
    let (mut coarse, mut fine) = (0.0, 0.0);
    for seed in 0..8 {
        let reference = evolving_run(seed, 1, h, t);
        coarse += rms_error(&evolving_run(seed, 100, h, t), &reference).powi(2);
        fine += rms_error(&evolving_run(seed, 50, h, t), &reference).powi(2);
    }
    let ratio = (coarse / fine).sqrt();
    assert!((1.6..2.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn fixed_point_contracts_at_the_hessian_rate() {
    let chi = 0.1;
    let dt = 1e-3;
    for (light, rate) in [
        (
            LightParams {
                image_radius: 0,
                ..LightParams::default()
            },
            -16.0 * chi,
        ),
        (LightParams::default(), {
            // Exact curvature of the image sum at the origin.
            let (y0, _) = image_sum_slope(0.0);
            let xpp: f64 = (-1..=1)
                .map(|m: i32| {
                    let s = f64::from(m);
                    (256.0 * s * s - 16.0) * (-8.0 * s * s).exp()
                })
                .sum();
            chi * xpp * y0
        }),
    ] {
        let stages = FieldStages::frozen(still_water(), 0.0, dt);
        let mut traj = TrackedTrajectory::new([0.0, 0.0]);
        let c = cfg(dt, chi);
        for _ in 0..2000 {
            traj.advance(&stages, &light, &c).unwrap();
        }
        traj.renormalize().unwrap();
        let t = traj.bundle.elapsed;
        for i in 0..2 {
            let stretch = (traj.bundle.log_sums[i]).exp();
            assert!((stretch - (rate * t).exp()).abs() < 1e-4, "{stretch} vs {}", (rate * t).exp());
            assert!((traj.bundle.log_sums[i] / t - rate).abs() < 1e-4 * rate.abs());
        }
        assert_eq!(traj.position, [0.0, 0.0]);
    }
}

fn tracked_run(chi: f64, dt: f64, renorm_every: u32, duration: f64, seed: u64) -> Vec<TrackedTrajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap();
    let mut stepper = FlowStepper::new(state, Backend::Direct, rng);
    let c = IntegratorConfig {
        dt,
        chi,
        renorm_every,
    };
    let mut trajs: Vec<TrackedTrajectory> = (0..4)
        .map(|i| TrackedTrajectory::new([0.2 * i as f64 - 0.3, 0.1 - 0.15 * i as f64]))
        .collect();
    let light = LightParams::default();
    let steps = (duration / c.dt).round() as usize;
    for _ in 0..steps {
        let stages = stepper.stages(c.dt).unwrap();
        for t in &mut trajs {
            t.advance(&stages, &light, &c).unwrap();
        }
    }
    trajs
}

#[test]
fn log_volume_equals_divergence_integral() {
    for t in tracked_run(0.1, 5e-3, 10, 10.0, 4) {
        let lv = t.bundle.log_volume();
        let q = t.divergence_integral;
        assert!((lv - q).abs() <= 1e-4 * q.abs(), "{lv} vs {q}");
        assert!(q != 0.0);
    }
}

#[test]
fn passive_tangent_volume_is_conserved() {
    // RK4 does not conserve det M exactly; its drift scales as dt^4.
    let duration = 10.0;
    for t in tracked_run(0.0, 2.5e-3, 10, duration, 5) {
        let lv = t.bundle.log_volume();
        assert!(lv.abs() < 1e-6 * duration, "ln det M = {lv}");
        assert_eq!(t.divergence_integral, 0.0);
    }
}

#[test]
fn exponents_do_not_depend_on_renormalization_cadence() {
    let runs: Vec<Vec<TrackedTrajectory>> = [1, 10, 37]
        .iter()
        .map(|&every| {
            let mut trajs = tracked_run(0.05, 5e-3, every, 5.0, 6);
            for t in &mut trajs {
                t.renormalize().unwrap();
            }
            trajs
        })
        .collect();
    for other in &runs[1..] {
        for (a, b) in runs[0].iter().zip(other) {
            for i in 0..2 {
                let (x, y) = (a.bundle.log_sums[i], b.bundle.log_sums[i]);
                assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn passive_exponents_sum_to_zero_over_long_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let state = SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap();
    let mut stepper = FlowStepper::new(state, Backend::Direct, rng);
    let c = IntegratorConfig {
        dt: 1e-2,
        chi: 0.0,
        renorm_every: 10,
    };
    let mut trajs: Vec<TrackedTrajectory> =
        (0..8).map(|i| TrackedTrajectory::new([0.1 * i as f64 - 0.4, 0.05 * i as f64])).collect();
    let light = LightParams::default();
    for _ in 0..50_000 {
        let stages = stepper.stages(c.dt).unwrap();
        for t in &mut trajs {
            t.advance(&stages, &light, &c).unwrap();
        }
    }
    let bundles: Vec<_> = trajs
        .into_iter()
        .map(|mut t| {
            t.renormalize().unwrap();
            t.bundle
        })
        .collect();
    let s = lyapunov_summary(&bundles).unwrap();
    assert!(s.lambda1 > 0.0);
    assert!(s.alpha.abs() < 0.02 * s.lambda1, "{s:?}");
}

#[test]
fn frozen_shear_disperses_ballistically() {
    let mut state = SpectralFlowState::zero(FlowParams::default()).unwrap();
    // psi = 0.1 cos(2 pi y): a pure shear u(y) along x.
    state.set_coefficient([0, 1], Complex64::new(0.05, 0.0)).unwrap();
    let dt = 1e-2;
    let stages = FieldStages::frozen(Arc::new(state.snapshot(Backend::Grid)), 0.0, dt);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ens = ParticleEnsemble::uniform(2000, &mut rng);
    let (mut times, mut msd) = (vec![0.0], vec![0.0]);
    for step in 1..=3000 {
        step_ensemble(&mut ens, &stages, &LightParams::default(), &cfg(dt, 0.0)).unwrap();
        if step % 20 == 0 {
            times.push(step as f64 * dt);
            msd.push(ens.mean_square_displacement());
        }
    }
    let fit = effective_diffusivity(&times, &msd, 10.0).unwrap();
    assert!(!fit.diffusive);
    assert!((fit.loglog_slope - 2.0).abs() < 0.05, "{}", fit.loglog_slope);
    // Exact shear kinematics: <d^2> = <u^2> t^2 = 2 (0.2 pi)^2 * 0.5 t^2.
    let t = times[times.len() - 1];
    let expected = 0.5 * (0.2 * std::f64::consts::PI).powi(2) * t * t;
    assert!((msd[msd.len() - 1] / expected - 1.0).abs() < 0.05);
}
