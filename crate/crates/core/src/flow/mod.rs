//! Synthetic two-dimensional turbulence.
//!
//! The stream function is a truncated Fourier series on the unit torus,
//!
//! ```text
//! psi(r, t) = sum_k psi_k(t) exp(i k.r),   k = 2 pi (n_x, n_y),  |n_x|, |n_y| <= n_max
//! ```
//!
//! and every mode is an independent complex Ornstein-Uhlenbeck process with
//! relaxation rate `nu |k|^2` and stationary variance
//! `E|psi_k|^2 = A exp(-|k|^2 / k0^2)`. With this variance the
//! shell-integrated kinetic-energy spectrum is `E(k) ∝ k^3 exp(-k^2/k0^2)`.
//! `A` is fixed by the discrete sum over retained modes so that the expected
//! mean-square velocity equals the target exactly.
//!
//! Only one mode of each conjugate pair is stored; the other is implied by
//! Hermitian symmetry, so the field is real by construction.
//!
//! Velocity is `v = (d psi/dy, -d psi/dx)`. Two evaluation backends are
//! provided: [`DirectField`] sums the Fourier series (reference) and
//! [`FlowGrid`] interpolates FFT-synthesized grids (fast path).

mod direct;
mod grid;
mod spectrum;

pub use direct::DirectField;
pub use grid::FlowGrid;
pub use spectrum::{EnergySpectrum, SpectrumBins};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    /// Decorrelation coefficient; mode `k` relaxes at rate `nu |k|^2`.
    pub nu: f64,
    /// Spectrum scale `k0` (radians per unit length).
    pub k0: f64,
    /// Mode cutoff in integer wavenumber per axis. Zero retains no modes.
    pub n_max: u32,
    /// Target spatial mean of `|v|^2`.
    pub target_msv: f64,
    /// Grid points per axis for the interpolating backend.
    pub grid_n: usize,
    pub seed: u64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            nu: 0.01,
            // 2 pi / k0 is two thirds of the box.
            k0: 3.0 * PI,
            n_max: 8,
            target_msv: 0.5,
            grid_n: 64,
            seed: 1,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("flow nu must be > 0, got {}", self.nu)));
        }
        if !(self.k0 > 0.0 && self.k0.is_finite()) {
            return Err(Error::Config(format!("flow k0 must be > 0, got {}", self.k0)));
        }
        if !(self.target_msv > 0.0 && self.target_msv.is_finite()) {
            return Err(Error::Config(format!(
                "flow target_msv must be > 0, got {}",
                self.target_msv
            )));
        }
        let min_grid = (4 * self.n_max as usize).max(4);
        if self.grid_n < min_grid {
            return Err(Error::Config(format!(
                "flow grid_n = {} must be >= max(4 * n_max, 4) = {min_grid}",
                self.grid_n
            )));
        }
        Ok(())
    }

    /// Unnormalized stationary variance shape.
    fn variance_shape(&self, k2: f64) -> f64 {
        (-k2 / (self.k0 * self.k0)).exp()
    }

    /// Fraction of the infinite-lattice mean-square velocity kept by the
    /// `n_max` truncation.
    pub fn retained_fraction(&self) -> f64 {
        let wide = 4 * self.n_max as i32 + 16;
        let mut kept = 0.0;
        let mut total = 0.0;
        for ny in -wide..=wide {
            for nx in -wide..=wide {
                let k2 = 4.0 * PI * PI * f64::from(nx * nx + ny * ny);
                let w = k2 * self.variance_shape(k2);
                total += w;
                if nx.unsigned_abs() <= self.n_max && ny.unsigned_abs() <= self.n_max {
                    kept += w;
                }
            }
        }
        if total > 0.0 {
            kept / total
        } else {
            1.0
        }
    }
}

/// One stored representative of a conjugate mode pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub n: [i32; 2],
    pub k: Vec2,
    pub k2: f64,
    /// Stationary variance `E|psi_k|^2`.
    pub sigma2: f64,
    /// Relaxation rate `nu |k|^2`.
    pub rate: f64,
    pub coeff: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlowState {
    params: FlowParams,
    time: f64,
    modes: Vec<Mode>,
}

/// Velocity and velocity gradient at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySample {
    pub v: Vec2,
    /// `grad[i][j] = d v_i / d x_j`; traceless.
    pub grad: Mat2,
}

impl VelocitySample {
    pub const ZERO: Self = Self {
        v: [0.0, 0.0],
        grad: [[0.0, 0.0], [0.0, 0.0]],
    };

    /// Assembles the sample from stream-function derivatives so that the
    /// gradient trace is zero exactly.
    #[inline]
    pub fn from_stream(v: Vec2, psi_xx: f64, psi_xy: f64, psi_yy: f64) -> Self {
        Self {
            v,
            grad: [[psi_xy, psi_yy], [-psi_xx, -psi_xy]],
        }
    }
}

/// A velocity field that can be evaluated anywhere in the plane.
pub trait VelocityField: Sync {
    fn velocity(&self, r: Vec2) -> Vec2;
    fn sample(&self, r: Vec2) -> VelocitySample;
}

/// Which evaluation route a frozen snapshot uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Direct Fourier sum; exact but slower.
    Direct,
    /// FFT grids with bicubic Hermite interpolation.
    #[default]
    Grid,
}

/// Immutable evaluation structure built from a flow state.
#[derive(Debug, Clone)]
pub enum FieldSnapshot {
    Direct(DirectField),
    Grid(FlowGrid),
}

impl VelocityField for FieldSnapshot {
    #[inline]
    fn velocity(&self, r: Vec2) -> Vec2 {
        match self {
            FieldSnapshot::Direct(f) => f.velocity(r),
            FieldSnapshot::Grid(f) => f.velocity(r),
        }
    }

    #[inline]
    fn sample(&self, r: Vec2) -> VelocitySample {
        match self {
            FieldSnapshot::Direct(f) => f.sample(r),
            FieldSnapshot::Grid(f) => f.sample(r),
        }
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

impl SpectralFlowState {
    /// All-zero state with the stationary statistics of `params` attached.
    pub fn zero(params: FlowParams) -> Result<Self> {
        params.validate()?;
        let nm = params.n_max as i32;
        let mut modes = Vec::new();
        for ny in 0..=nm {
            for nx in -nm..=nm {
                if ny == 0 && nx <= 0 {
                    continue;
                }
                let k = [2.0 * PI * f64::from(nx), 2.0 * PI * f64::from(ny)];
                let k2 = k[0] * k[0] + k[1] * k[1];
                modes.push(Mode {
                    n: [nx, ny],
                    k,
                    k2,
                    sigma2: params.variance_shape(k2),
                    rate: params.nu * k2,
                    coeff: Complex64::new(0.0, 0.0),
                });
            }
        }
        // Expected MSV = sum over all modes of k^2 sigma^2, twice the stored half.
        let raw: f64 = modes.iter().map(|m| 2.0 * m.k2 * m.sigma2).sum();
        let scale = if raw > 0.0 { params.target_msv / raw } else { 0.0 };
        for m in &mut modes {
            m.sigma2 *= scale;
        }
        Ok(Self {
            params,
            time: 0.0,
            modes,
        })
    }

    /// Draws every mode from its stationary distribution.
    pub fn new_stationary<R: Rng + ?Sized>(params: FlowParams, rng: &mut R) -> Result<Self> {
        let mut state = Self::zero(params)?;
        for m in &mut state.modes {
            m.coeff = complex_normal(rng, m.sigma2);
        }
        Ok(state)
    }

    /// Exact OU transition over `dt`.
    pub fn advance<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> Result<()> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::Argument(format!("advance needs dt >= 0, got {dt}")));
        }
        if dt == 0.0 {
            return Ok(());
        }
        for m in &mut self.modes {
            let decay = (-m.rate * dt).exp();
            let noise_var = m.sigma2 * (-(-2.0 * m.rate * dt).exp_m1());
            m.coeff = m.coeff * decay + complex_normal(rng, noise_var);
        }
        self.time += dt;
        Ok(())
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Amplitude of wavevector `2 pi n`, resolving the conjugate half.
    pub fn coefficient(&self, n: [i32; 2]) -> Complex64 {
        let (rep, conj) = representative(n);
        match self.modes.iter().find(|m| m.n == rep) {
            Some(m) if conj => m.coeff.conj(),
            Some(m) => m.coeff,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Overwrites one mode (and implicitly its conjugate partner).
    pub fn set_coefficient(&mut self, n: [i32; 2], value: Complex64) -> Result<()> {
        if n == [0, 0] {
            return Err(Error::Argument("the zero mode is pinned to 0".into()));
        }
        let (rep, conj) = representative(n);
        let mode = self
            .modes
            .iter_mut()
            .find(|m| m.n == rep)
            .ok_or_else(|| Error::Argument(format!("mode {n:?} is outside the cutoff")))?;
        mode.coeff = if conj { value.conj() } else { value };
        Ok(())
    }

    /// Spatial mean of `|v|^2` from the Parseval relation
    /// `sum_k |k|^2 |psi_k|^2` (unit-area box, so the convention constant is 1).
    pub fn mean_square_velocity(&self) -> f64 {
        2.0 * self.modes.iter().map(|m| m.k2 * m.coeff.norm_sqr()).sum::<f64>()
    }

    /// Expected mean-square velocity under the stationary distribution.
    pub fn expected_msv(&self) -> f64 {
        2.0 * self.modes.iter().map(|m| m.k2 * m.sigma2).sum::<f64>()
    }

    pub fn energy_spectrum(&self, bins: &SpectrumBins) -> EnergySpectrum {
        let mut spec = EnergySpectrum::new(bins.clone());
        spec.accumulate(self);
        spec
    }

    pub fn direct(&self) -> DirectField {
        DirectField::new(self)
    }

    pub fn grid(&self) -> FlowGrid {
        FlowGrid::new(self, self.params.grid_n)
    }

    pub fn snapshot(&self, backend: Backend) -> FieldSnapshot {
        match backend {
            Backend::Direct => FieldSnapshot::Direct(self.direct()),
            Backend::Grid => FieldSnapshot::Grid(self.grid()),
        }
    }
}

/// Maps `n` to the stored half-plane (`n_y > 0`, or `n_y = 0` and `n_x > 0`).
fn representative(n: [i32; 2]) -> ([i32; 2], bool) {
    if n[1] > 0 || (n[1] == 0 && n[0] > 0) {
        (n, false)
    } else {
        ([-n[0], -n[1]], true)
    }
}
