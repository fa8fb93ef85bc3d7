use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{SpectralFlowState, VelocityField, VelocitySample};
use crate::geometry::Vec2;

/// Stream-function derivative `d^(a+b) psi / dx^a dy^b` stored at every node,
/// in this order.
const ORDERS: [(u32, u32); 12] = [
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (3, 1),
    (2, 2),
    (1, 3),
];

const P10: usize = 0;
const P01: usize = 1;
const P20: usize = 2;
const P11: usize = 3;
const P02: usize = 4;
const P30: usize = 5;
const P21: usize = 6;
const P12: usize = 7;
const P03: usize = 8;
const P31: usize = 9;
const P22: usize = 10;
const P13: usize = 11;

/// Interpolated quantity: node slots for `(f, f_x, f_y, f_xy)`.
type Stencil = [usize; 4];
const U: Stencil = [P01, P11, P02, P12];
/// `v = -psi_x`; sign applied after interpolation.
const MINUS_V: Stencil = [P10, P20, P11, P21];
const PSI_XX: Stencil = [P20, P30, P21, P31];
const PSI_XY: Stencil = [P11, P21, P12, P22];
const PSI_YY: Stencil = [P02, P12, P03, P13];

/// Fast backend: spectral derivative grids synthesized by inverse FFT and
/// bicubic Hermite interpolation between nodes.
///
/// Each interpolated quantity uses its value, first derivatives and cross
/// derivative at the four cell corners, all taken exactly from the spectrum,
/// so the interpolation error is fourth order in the grid spacing. The
/// gradient is assembled from the interpolated `psi_xx`, `psi_xy`, `psi_yy`
/// and is traceless by construction.
#[derive(Debug, Clone)]
pub struct FlowGrid {
    n: usize,
    h: f64,
    nodes: Arc<Vec<[f64; 12]>>,
}

impl FlowGrid {
    pub fn new(state: &SpectralFlowState, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_inverse(n);
        let mut nodes = vec![[0.0; 12]; n * n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        // Two real fields per complex transform: A + iB.
        for pair in 0..6 {
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for (slot, imag) in [(2 * pair, false), (2 * pair + 1, true)] {
                let (a, b) = ORDERS[slot];
                for m in state.modes() {
                    let mult = deriv_multiplier(m.k, a, b);
                    let coeff = mult * m.coeff;
                    // Conjugate partner: multiplier at -k times conj(coeff).
                    let partner = deriv_multiplier([-m.k[0], -m.k[1]], a, b) * m.coeff.conj();
                    let i = wrap_index(m.n[0], n);
                    let j = wrap_index(m.n[1], n);
                    let ip = wrap_index(-m.n[0], n);
                    let jp = wrap_index(-m.n[1], n);
                    let (c, cp) = if imag {
                        (coeff * Complex64::i(), partner * Complex64::i())
                    } else {
                        (coeff, partner)
                    };
                    buf[j * n + i] += c;
                    buf[jp * n + ip] += cp;
                }
            }
            inverse_2d(&*fft, &mut buf, &mut column, n);
            for (node, value) in nodes.iter_mut().zip(&buf) {
                node[2 * pair] = value.re;
                node[2 * pair + 1] = value.im;
            }
        }
        Self {
            n,
            h: 1.0 / n as f64,
            nodes: Arc::new(nodes),
        }
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Locates the cell containing `r` and returns the corner node indices
    /// and the Hermite weights along each axis.
    #[inline]
    fn locate(&self, r: Vec2) -> ([usize; 4], [[f64; 4]; 2]) {
        let n = self.n;
        let mut idx = [0usize; 2];
        let mut w = [[0.0; 4]; 2];
        for axis in 0..2 {
            let s = r[axis] * n as f64;
            let fl = s.floor();
            let mut t = s - fl;
            let mut i = (fl as i64).rem_euclid(n as i64) as usize;
            if t >= 1.0 {
                t = 0.0;
                i = (i + 1) % n;
            }
            idx[axis] = i;
            let t2 = t * t;
            let t3 = t2 * t;
            // value weights at corners 0 and 1, then slope weights (scaled by h).
            w[axis] = [
                2.0 * t3 - 3.0 * t2 + 1.0,
                -2.0 * t3 + 3.0 * t2,
                self.h * (t3 - 2.0 * t2 + t),
                self.h * (t3 - t2),
            ];
        }
        let i0 = idx[0];
        let i1 = (idx[0] + 1) % n;
        let j0 = idx[1];
        let j1 = (idx[1] + 1) % n;
        ([j0 * n + i0, j0 * n + i1, j1 * n + i0, j1 * n + i1], w)
    }

    #[inline]
    fn interp<const K: usize>(
        &self,
        corners: &[usize; 4],
        w: &[[f64; 4]; 2],
        stencils: [Stencil; K],
    ) -> [f64; K] {
        let mut out = [0.0; K];
        for (c, &node_idx) in corners.iter().enumerate() {
            let node = &self.nodes[node_idx];
            let ax = c & 1;
            let ay = c >> 1;
            let vx = w[0][ax];
            let dx = w[0][2 + ax];
            let vy = w[1][ay];
            let dy = w[1][2 + ay];
            let wv = vx * vy;
            let wx = dx * vy;
            let wy = vx * dy;
            let wxy = dx * dy;
            for (o, s) in out.iter_mut().zip(stencils.iter()) {
                *o += node[s[0]] * wv + node[s[1]] * wx + node[s[2]] * wy + node[s[3]] * wxy;
            }
        }
        out
    }
}

impl VelocityField for FlowGrid {
    #[inline]
    fn velocity(&self, r: Vec2) -> Vec2 {
        let (corners, w) = self.locate(r);
        let [u, minus_v] = self.interp(&corners, &w, [U, MINUS_V]);
        [u, -minus_v]
    }

    fn sample(&self, r: Vec2) -> VelocitySample {
        let (corners, w) = self.locate(r);
        let [u, minus_v, pxx, pxy, pyy] =
            self.interp(&corners, &w, [U, MINUS_V, PSI_XX, PSI_XY, PSI_YY]);
        VelocitySample::from_stream([u, -minus_v], pxx, pxy, pyy)
    }
}

fn wrap_index(n: i32, size: usize) -> usize {
    n.rem_euclid(size as i32) as usize
}

/// `(i k_x)^a (i k_y)^b`.
fn deriv_multiplier(k: Vec2, a: u32, b: u32) -> Complex64 {
    let ik = |kc: f64, p: u32| Complex64::new(0.0, kc).powu(p);
    ik(k[0], a) * ik(k[1], b)
}

/// Unnormalized 2D inverse DFT of a row-major `n x n` array (row = y index).
fn inverse_2d(fft: &dyn Fft<f64>, buf: &mut [Complex64], column: &mut [Complex64], n: usize) {
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    for i in 0..n {
        for j in 0..n {
            column[j] = buf[j * n + i];
        }
        fft.process(column);
        for j in 0..n {
            buf[j * n + i] = column[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowParams, SpectralFlowState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn nodes_reproduce_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap();
        let g = s.grid();
        let d = s.direct();
        let n = g.resolution();
        for &(i, j) in &[(0usize, 0usize), (5, 17), (63, 2), (31, 40)] {
            let r = [i as f64 / n as f64, j as f64 / n as f64];
            let a = g.sample(r);
            let b = d.sample(r);
            for c in 0..2 {
                assert!((a.v[c] - b.v[c]).abs() < 1e-11);
                for k in 0..2 {
                    assert!((a.grad[c][k] - b.grad[c][k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_cosine_on_grid() {
        let mut s = SpectralFlowState::zero(FlowParams::default()).unwrap();
        s.set_coefficient([1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let v = s.grid().velocity([0.25, 0.0]);
        assert!(v[0].abs() < 1e-12);
        assert!((v[1] - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn traceless_off_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let s = SpectralFlowState::new_stationary(FlowParams::default(), &mut rng).unwrap();
        let g = s.grid();
        for _ in 0..100 {
            let r = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let smp = g.sample(r);
            assert_eq!(smp.grad[0][0] + smp.grad[1][1], 0.0);
        }
    }
}
