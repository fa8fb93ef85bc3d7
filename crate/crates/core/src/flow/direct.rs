use std::f64::consts::PI;

use num_complex::Complex64;

use super::{SpectralFlowState, VelocityField, VelocitySample};
use crate::geometry::Vec2;

/// Reference backend: truncated Fourier sum with analytic derivatives.
#[derive(Debug, Clone)]
pub struct DirectField {
    n_max: usize,
    /// `(n_x, n_y, k_x, k_y, psi_k)` for each stored representative.
    modes: Vec<(i32, i32, f64, f64, Complex64)>,
}

/// Stream-function derivatives accumulated from the Fourier sum.
#[derive(Debug, Default, Clone, Copy)]
struct StreamDerivs {
    psi_x: f64,
    psi_y: f64,
    psi_xx: f64,
    psi_xy: f64,
    psi_yy: f64,
}

impl DirectField {
    pub fn new(state: &SpectralFlowState) -> Self {
        Self {
            n_max: state.params().n_max as usize,
            modes: state
                .modes()
                .iter()
                .map(|m| (m.n[0], m.n[1], m.k[0], m.k[1], m.coeff))
                .collect(),
        }
    }

    /// `exp(i 2 pi n x)` for `n = 0..=n_max`.
    fn phases(&self, x: f64) -> Vec<Complex64> {
        let base = Complex64::from_polar(1.0, 2.0 * PI * x);
        let mut out = Vec::with_capacity(self.n_max + 1);
        let mut cur = Complex64::new(1.0, 0.0);
        for _ in 0..=self.n_max {
            out.push(cur);
            cur *= base;
        }
        out
    }

    fn accumulate(&self, r: Vec2, second: bool) -> StreamDerivs {
        let ex = self.phases(r[0]);
        let ey = self.phases(r[1]);
        let mut d = StreamDerivs::default();
        for &(nx, ny, kx, ky, c) in &self.modes {
            let px = if nx >= 0 {
                ex[nx as usize]
            } else {
                ex[(-nx) as usize].conj()
            };
            // ny >= 0 for every stored representative.
            let z = c * px * ey[ny as usize];
            // Each stored term stands for z + conj(z).
            d.psi_x -= 2.0 * kx * z.im;
            d.psi_y -= 2.0 * ky * z.im;
            if second {
                d.psi_xx -= 2.0 * kx * kx * z.re;
                d.psi_xy -= 2.0 * kx * ky * z.re;
                d.psi_yy -= 2.0 * ky * ky * z.re;
            }
        }
        d
    }

    /// Stream function value; used by tests.
    pub fn stream(&self, r: Vec2) -> f64 {
        let ex = self.phases(r[0]);
        let ey = self.phases(r[1]);
        self.modes
            .iter()
            .map(|&(nx, ny, _, _, c)| {
                let px = if nx >= 0 {
                    ex[nx as usize]
                } else {
                    ex[(-nx) as usize].conj()
                };
                2.0 * (c * px * ey[ny as usize]).re
            })
            .sum()
    }
}

impl VelocityField for DirectField {
    fn velocity(&self, r: Vec2) -> Vec2 {
        let d = self.accumulate(r, false);
        [d.psi_y, -d.psi_x]
    }

    fn sample(&self, r: Vec2) -> VelocitySample {
        let d = self.accumulate(r, true);
        VelocitySample::from_stream([d.psi_y, -d.psi_x], d.psi_xx, d.psi_xy, d.psi_yy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(seed: u64) -> SpectralFlowState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap()
    }

    #[test]
    fn single_cosine_velocity() {
        let mut s = SpectralFlowState::zero(FlowParams::default()).unwrap();
        s.set_coefficient([1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let f = s.direct();
        let v = f.velocity([0.25, 0.0]);
        assert!(v[0].abs() < 1e-12);
        assert!((v[1] - 4.0 * PI).abs() < 1e-12);
        // Box average of |v|^2 by midpoint quadrature (exact for trig polynomials).
        let n = 64;
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let r = [(i as f64 + 0.5) / n as f64 - 0.5, (j as f64 + 0.5) / n as f64 - 0.5];
                let v = f.velocity(r);
                acc += v[0] * v[0] + v[1] * v[1];
            }
        }
        assert!((acc / (n * n) as f64 - 8.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn full_sum_is_real() {
        let s = random_state(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nm = s.params().n_max as i32;
        for _ in 0..20 {
            let r: Vec2 = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let mut total = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for ny in -nm..=nm {
                for nx in -nm..=nm {
                    let c = s.coefficient([nx, ny]);
                    let phase = 2.0 * PI * (f64::from(nx) * r[0] + f64::from(ny) * r[1]);
                    total += c * Complex64::from_polar(1.0, phase);
                    scale += c.norm();
                }
            }
            assert!(total.im.abs() < 1e-12 * scale.max(1.0));
            assert!((total.re - s.direct().stream(r)).abs() < 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn periodic_and_traceless() {
        let s = random_state(6);
        let f = s.direct();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r: Vec2 = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let a = f.sample(r);
            assert_eq!(a.grad[0][0] + a.grad[1][1], 0.0);
            for shift in [[1.0, 0.0], [0.0, 1.0]] {
                let b = f.sample([r[0] + shift[0], r[1] + shift[1]]);
                for c in 0..2 {
                    assert!((a.v[c] - b.v[c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = random_state(8);
        let f = s.direct();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-5;
        for _ in 0..50 {
            let r: Vec2 = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let smp = f.sample(r);
            let scale = smp.grad.iter().flatten().map(|g| g.abs()).fold(0.0, f64::max);
            for axis in 0..2 {
                let mut rp = r;
                let mut rm = r;
                rp[axis] += h;
                rm[axis] -= h;
                let vp = f.velocity(rp);
                let vm = f.velocity(rm);
                for comp in 0..2 {
                    let fd = (vp[comp] - vm[comp]) / (2.0 * h);
                    assert!((fd - smp.grad[comp][axis]).abs() <= 1e-4 * scale);
                }
            }
        }
    }
}
