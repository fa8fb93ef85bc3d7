//! Tangent-space dynamics and Benettin renormalization.

use super::{FieldStages, IntegratorConfig};
use crate::error::{Error, Result};
use crate::flow::VelocityField;
use crate::geometry::{det, dot, norm, wrap, Mat2, Vec2};
use crate::light::{LightEvaluator, LightParams};

/// Collinearity threshold for Gram-Schmidt, relative to the second vector.
const COLLINEAR_TOL: f64 = 1e-12;

/// Two tangent vectors and their accumulated log-stretch totals.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBundle {
    pub vectors: [Vec2; 2],
    pub log_sums: [f64; 2],
    pub elapsed: f64,
}

impl Default for TangentBundle {
    fn default() -> Self {
        Self {
            vectors: [[1.0, 0.0], [0.0, 1.0]],
            log_sums: [0.0; 2],
            elapsed: 0.0,
        }
    }
}

impl TangentBundle {
    /// Finite-time exponents `log_sums / elapsed`.
    pub fn exponents(&self) -> Option<[f64; 2]> {
        (self.elapsed > 0.0).then(|| [self.log_sums[0] / self.elapsed, self.log_sums[1] / self.elapsed])
    }

    /// Total `ln |det M|` since the last reset, including the part not yet
    /// folded into `log_sums`.
    pub fn log_volume(&self) -> f64 {
        let m: Mat2 = [
            [self.vectors[0][0], self.vectors[1][0]],
            [self.vectors[0][1], self.vectors[1][1]],
        ];
        self.log_sums[0] + self.log_sums[1] + det(&m).abs().ln()
    }
}

/// Gram-Schmidt step: orthonormalizes the vectors and adds the log norms to
/// the running sums.
pub fn renormalize(bundle: &mut TangentBundle) -> Result<()> {
    let [a, b] = bundle.vectors;
    let na = norm(a);
    let nb = norm(b);
    if !(na > 0.0 && na.is_finite() && nb > 0.0 && nb.is_finite()) {
        return Err(Error::DegenerateTangent {
            first: na,
            second: nb,
        });
    }
    let e1 = [a[0] / na, a[1] / na];
    let p = dot(b, e1);
    let w = [b[0] - p * e1[0], b[1] - p * e1[1]];
    let nw = norm(w);
    if !(nw > COLLINEAR_TOL * nb) {
        return Err(Error::DegenerateTangent {
            first: na,
            second: nw,
        });
    }
    bundle.vectors = [e1, [w[0] / nw, w[1] / nw]];
    bundle.log_sums[0] += na.ln();
    bundle.log_sums[1] += nw.ln();
    Ok(())
}

/// A carrier trajectory with its tangent bundle.
///
/// `divergence_integral` accumulates `∫ chi lap Phi(r(s)) ds` with the same
/// RK4 staging; in an incompressible flow it must equal
/// [`TangentBundle::log_volume`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedTrajectory {
    pub position: Vec2,
    pub bundle: TangentBundle,
    pub divergence_integral: f64,
    steps_since_renorm: u32,
}

impl TrackedTrajectory {
    pub fn new(position: Vec2) -> Self {
        Self {
            position: wrap(position),
            bundle: TangentBundle::default(),
            divergence_integral: 0.0,
            steps_since_renorm: 0,
        }
    }

    /// Integrates one step and renormalizes on the configured cadence.
    pub fn advance<F: VelocityField>(
        &mut self,
        stages: &FieldStages<F>,
        light: &LightParams,
        cfg: &IntegratorConfig,
    ) -> Result<()> {
        step_tangent(self, stages, light, cfg)?;
        self.steps_since_renorm += 1;
        if self.steps_since_renorm >= cfg.renorm_every {
            self.renormalize()?;
        }
        Ok(())
    }

    pub fn renormalize(&mut self) -> Result<()> {
        self.steps_since_renorm = 0;
        renormalize(&mut self.bundle)
    }

    /// Starts a new measurement window: renormalizes, then clears the sums.
    pub fn reset_accumulators(&mut self) -> Result<()> {
        self.renormalize()?;
        self.bundle.log_sums = [0.0; 2];
        self.bundle.elapsed = 0.0;
        self.divergence_integral = 0.0;
        Ok(())
    }
}

struct TangentRate {
    r: Vec2,
    m: [Vec2; 2],
    q: f64,
}

fn tangent_rate<F: VelocityField + ?Sized>(
    field: &F,
    light: &LightEvaluator,
    chi: f64,
    r: Vec2,
    m: &[Vec2; 2],
) -> TangentRate {
    let s = field.sample(r);
    let mut jac = s.grad;
    let mut q = 0.0;
    let mut vel = s.v;
    if chi != 0.0 {
        let l = light.sample(r);
        vel[0] += chi * l.grad[0];
        vel[1] += chi * l.grad[1];
        for i in 0..2 {
            for j in 0..2 {
                jac[i][j] += chi * l.hessian[i][j];
            }
        }
        q = chi * l.laplacian();
    }
    let apply = |v: Vec2| [jac[0][0] * v[0] + jac[0][1] * v[1], jac[1][0] * v[0] + jac[1][1] * v[1]];
    TangentRate {
        r: vel,
        m: [apply(m[0]), apply(m[1])],
        q,
    }
}

/// RK4 step of the carrier, `dM/dt = J M` with
/// `J = grad v + chi Hess Phi`, and the divergence integral.
pub fn step_tangent<F: VelocityField>(
    traj: &mut TrackedTrajectory,
    stages: &FieldStages<F>,
    light: &LightParams,
    cfg: &IntegratorConfig,
) -> Result<()> {
    let dt = stages.dt;
    let h = 0.5 * dt;
    let chi = cfg.chi;
    let light = &light.evaluator();
    let r0 = traj.position;
    let m0 = traj.bundle.vectors;
    let shift = |r: Vec2, k: &TangentRate, s: f64| [r[0] + s * k.r[0], r[1] + s * k.r[1]];
    let shift_m = |m: &[Vec2; 2], k: &TangentRate, s: f64| {
        [
            [m[0][0] + s * k.m[0][0], m[0][1] + s * k.m[0][1]],
            [m[1][0] + s * k.m[1][0], m[1][1] + s * k.m[1][1]],
        ]
    };
    let k1 = tangent_rate(&*stages.start, light, chi, r0, &m0);
    let k2 = tangent_rate(&*stages.mid, light, chi, shift(r0, &k1, h), &shift_m(&m0, &k1, h));
    let k3 = tangent_rate(&*stages.mid, light, chi, shift(r0, &k2, h), &shift_m(&m0, &k2, h));
    let k4 = tangent_rate(&*stages.end, light, chi, shift(r0, &k3, dt), &shift_m(&m0, &k3, dt));
    let w = dt / 6.0;
    let comb = |a: f64, b: f64, c: f64, d: f64| w * (a + 2.0 * b + 2.0 * c + d);
    let dr = [
        comb(k1.r[0], k2.r[0], k3.r[0], k4.r[0]),
        comb(k1.r[1], k2.r[1], k3.r[1], k4.r[1]),
    ];
    let mut m = m0;
    for v in 0..2 {
        for c in 0..2 {
            m[v][c] += comb(k1.m[v][c], k2.m[v][c], k3.m[v][c], k4.m[v][c]);
        }
    }
    let dq = comb(k1.q, k2.q, k3.q, k4.q);
    let next = [r0[0] + dr[0], r0[1] + dr[1]];
    let finite = next.iter().chain(m.iter().flatten()).all(|x| x.is_finite());
    if !finite {
        return Err(Error::Divergence {
            index: 0,
            time: stages.time + dt,
        });
    }
    traj.position = wrap(next);
    traj.bundle.vectors = m;
    traj.bundle.elapsed += dt;
    traj.divergence_integral += dq;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::VelocitySample;
    use std::sync::Arc;

    #[test]
    fn diagonal_vectors() {
        let mut b = TangentBundle {
            vectors: [[2.0, 0.0], [0.0, 3.0]],
            ..TangentBundle::default()
        };
        renormalize(&mut b).unwrap();
        assert_eq!(b.vectors, [[1.0, 0.0], [0.0, 1.0]]);
        assert!((b.log_sums[0] - 2f64.ln()).abs() < 1e-15);
        assert!((b.log_sums[1] - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sheared_vectors() {
        let mut b = TangentBundle {
            vectors: [[2.0, 0.0], [1.0, 1.0]],
            ..TangentBundle::default()
        };
        renormalize(&mut b).unwrap();
        assert!((b.log_sums[0] - 2f64.ln()).abs() < 1e-15);
        assert!(b.log_sums[1].abs() < 1e-15);
        assert!(dot(b.vectors[0], b.vectors[1]).abs() < 1e-12);
        assert!((norm(b.vectors[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_vectors_are_degenerate() {
        let mut b = TangentBundle {
            vectors: [[1.0, 1.0], [2.0, 2.0]],
            ..TangentBundle::default()
        };
        assert!(matches!(renormalize(&mut b), Err(Error::DegenerateTangent { .. })));
        let mut z = TangentBundle {
            vectors: [[0.0, 0.0], [0.0, 1.0]],
            ..TangentBundle::default()
        };
        assert!(renormalize(&mut z).is_err());
    }

    struct Linear(Mat2);

    impl VelocityField for Linear {
        fn velocity(&self, r: Vec2) -> Vec2 {
            crate::geometry::mat_vec(&self.0, r)
        }
        fn sample(&self, r: Vec2) -> VelocitySample {
            VelocitySample {
                v: self.velocity(r),
                grad: self.0,
            }
        }
    }

    #[test]
    fn constant_jacobian_recovers_its_eigenvalues() {
        let (a, b) = (0.7, 1.3);
        let field = Arc::new(Linear([[a, 0.0], [0.0, -b]]));
        let dt = 0.01;
        let stages = FieldStages::frozen(field, 0.0, dt);
        let cfg = IntegratorConfig {
            dt,
            chi: 0.0,
            renorm_every: 10,
        };
        let mut traj = TrackedTrajectory::new([0.0, 0.0]);
        // A generic start direction so both exponents are visited.
        traj.bundle.vectors = [[0.6, 0.8], [-0.8, 0.6]];
        let light = LightParams::default();
        for _ in 0..10_000 {
            traj.advance(&stages, &light, &cfg).unwrap();
        }
        // The first vector starts with weight 0.6 on the expanding axis.
        let offset = 0.6f64.ln() / 100.0;
        let ex = traj.bundle.exponents().unwrap();
        assert!((ex[0] - a - offset).abs() < 1e-6, "{ex:?}");
        assert!((ex[1] + b + offset).abs() < 1e-6, "{ex:?}");
        assert!((traj.bundle.elapsed - 100.0).abs() < 1e-9);
    }
}
