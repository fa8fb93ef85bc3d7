//! Effective-diffusion predictions.
//!
//! Treating the turbulent advection as diffusion with coefficient `D_f`, the
//! time-averaged swimmer density relaxes to the Boltzmann-like steady state
//! `rho(r) = exp(beta Phi(r)) / Z` with `beta = chi / D_f`. Everything here is
//! a quadrature of `Phi`, its gradient or its Laplacian against that density.
//!
//! Area integrals use the midpoint rule on a uniform `quad_n x quad_n` grid
//! over the unit square, which converges spectrally for the periodic light
//! field. Radial profiles use polar Gauss-Legendre quadrature instead, so
//! annulus averages are not polluted by grid cells straddling annulus edges.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::analysis::{RadialBins, RadialProfile};
use crate::error::{Error, Result};
use crate::light::LightParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryInputs {
    pub chi: f64,
    /// Effective diffusivity of the carrier flow.
    pub d_f: f64,
    /// Positive Lyapunov exponent of passive tracers.
    pub lambda0: f64,
    pub light: LightParams,
    pub quad_n: usize,
}

impl TheoryInputs {
    pub fn new(chi: f64, d_f: f64, lambda0: f64) -> Self {
        Self {
            chi,
            d_f,
            lambda0,
            light: LightParams::default(),
            quad_n: 1024,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_f > 0.0 && self.d_f.is_finite()) {
            return Err(Error::Config(format!("theory d_f must be > 0, got {}", self.d_f)));
        }
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return Err(Error::Config(format!(
                "theory lambda0 must be > 0, got {}",
                self.lambda0
            )));
        }
        if !(self.chi >= 0.0 && self.chi.is_finite()) {
            return Err(Error::Config(format!("theory chi must be >= 0, got {}", self.chi)));
        }
        if self.quad_n < 64 {
            return Err(Error::Config(format!("quad_n must be >= 64, got {}", self.quad_n)));
        }
        self.light.validate()
    }

    /// `chi / D_f`.
    pub fn beta(&self) -> f64 {
        self.chi / self.d_f
    }
}

/// Separable tables of the light profile on the midpoint grid.
#[derive(Debug, Clone)]
pub struct LightQuadrature {
    amplitude: f64,
    x: Vec<[f64; 3]>,
    y: Vec<[f64; 3]>,
}

/// Density-weighted sums over the quadrature grid, each divided by the node
/// count (the domain has unit area).
#[derive(Debug, Clone, Copy, Default)]
struct WeightedSums {
    /// `∫ e^{beta Phi}`
    weight: f64,
    /// `∫ e^{beta Phi} Phi`
    phi: f64,
    /// `∫ e^{beta Phi} lap Phi`
    laplacian: f64,
    /// `∫ e^{beta Phi} |grad Phi|^2`
    grad2: f64,
}

impl LightQuadrature {
    pub fn new(light: &LightParams, n: usize) -> Self {
        let coords: Vec<f64> = (0..n).map(|i| -0.5 + (i as f64 + 0.5) / n as f64).collect();
        Self {
            amplitude: light.amplitude,
            x: light.axis_table(&coords, 0),
            y: light.axis_table(&coords, 1),
        }
    }

    pub fn nodes(&self) -> usize {
        self.x.len() * self.y.len()
    }

    /// Row-parallel sum with a fixed reduction order.
    fn reduce<T, F>(&self, row: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64; 3]) -> T + Sync + Send,
    {
        self.y.par_iter().map(row).collect()
    }

    fn weighted(&self, beta: f64) -> WeightedSums {
        let a = self.amplitude;
        let rows = self.reduce(|yv| {
            let mut s = WeightedSums::default();
            for xv in &self.x {
                let phi = a * xv[0] * yv[0];
                let gx = a * xv[1] * yv[0];
                let gy = a * xv[0] * yv[1];
                let lap = a * (xv[2] * yv[0] + xv[0] * yv[2]);
                let w = (beta * phi).exp();
                s.weight += w;
                s.phi += w * phi;
                s.laplacian += w * lap;
                s.grad2 += w * (gx * gx + gy * gy);
            }
            s
        });
        let inv = 1.0 / self.nodes() as f64;
        let mut total = WeightedSums::default();
        for r in rows {
            total.weight += r.weight;
            total.phi += r.phi;
            total.laplacian += r.laplacian;
            total.grad2 += r.grad2;
        }
        WeightedSums {
            weight: total.weight * inv,
            phi: total.phi * inv,
            laplacian: total.laplacian * inv,
            grad2: total.grad2 * inv,
        }
    }

    /// Raw moments `∫ Phi^n dV` for `n = 1..=order`.
    pub fn raw_moments(&self, order: usize) -> Vec<f64> {
        let a = self.amplitude;
        let rows = self.reduce(|yv| {
            let mut m = vec![0.0; order];
            for xv in &self.x {
                let phi = a * xv[0] * yv[0];
                let mut p = 1.0;
                for slot in m.iter_mut() {
                    p *= phi;
                    *slot += p;
                }
            }
            m
        });
        let inv = 1.0 / self.nodes() as f64;
        let mut total = vec![0.0; order];
        for r in rows {
            for (t, v) in total.iter_mut().zip(r) {
                *t += v;
            }
        }
        total.iter().map(|t| t * inv).collect()
    }
}

/// Cumulants from raw moments `m_1..m_N` via
/// `k_n = m_n - sum_{j=1}^{n-1} C(n-1, j-1) k_j m_{n-j}`.
pub fn cumulants_from_moments(moments: &[f64]) -> Vec<f64> {
    let n = moments.len();
    let mut k = vec![0.0; n];
    for order in 1..=n {
        let mut acc = moments[order - 1];
        let mut binom = 1.0; // C(order-1, j-1) starting at j = 1
        for j in 1..order {
            acc -= binom * k[j - 1] * moments[order - j - 1];
            binom = binom * (order - j) as f64 / j as f64;
        }
        k[order - 1] = acc;
    }
    k
}

/// Cumulants `k_1..k_order` of `Phi` under the uniform measure on the box.
pub fn illumination_cumulants(light: &LightParams, quad_n: usize, order: usize) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(Error::Argument("cumulant order must be >= 1".into()));
    }
    let quad = LightQuadrature::new(light, quad_n);
    Ok(cumulants_from_moments(&quad.raw_moments(order)))
}

/// Truncated cumulant series `sum_{n<n_terms} k_{n+1} beta^n / n!`.
/// `n_terms = 2` is the first-order (variance) approximation.
pub fn mean_illumination_series(inputs: &TheoryInputs, n_terms: usize) -> Result<f64> {
    inputs.validate()?;
    if n_terms < 1 {
        return Err(Error::Argument("series needs at least one term".into()));
    }
    let k = illumination_cumulants(&inputs.light, inputs.quad_n, n_terms)?;
    Ok(series_from_cumulants(&k, inputs.beta(), n_terms))
}

pub fn series_from_cumulants(cumulants: &[f64], beta: f64, n_terms: usize) -> f64 {
    let mut term_scale = 1.0; // beta^n / n!
    let mut total = 0.0;
    for (n, k) in cumulants.iter().take(n_terms).enumerate() {
        if n > 0 {
            term_scale *= beta / n as f64;
        }
        total += k * term_scale;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPrediction {
    pub chi: f64,
    pub z: f64,
    /// Density-weighted mean illumination.
    pub mean_phi: f64,
    /// `mean_phi` minus the spatial mean.
    pub gain: f64,
    /// Dissipation rate `<chi lap Phi>`.
    pub alpha: f64,
    /// The same rate from `-<(chi grad Phi)^2> / D_f`.
    pub alpha_by_parts: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub d1_direct: f64,
    pub d1_energy: f64,
    /// Mean-square swimming speed `chi^2 <|grad Phi|^2>`.
    pub vs2: f64,
    /// Set when either dimension had to be clamped to `[0, 2]`.
    pub clamped: bool,
}

/// Steady-state model for one parameter set; holds the quadrature and `Z`.
#[derive(Debug, Clone)]
pub struct BoltzmannModel {
    inputs: TheoryInputs,
    quad: LightQuadrature,
    sums: WeightedSums,
    spatial_mean: f64,
}

impl BoltzmannModel {
    pub fn new(inputs: TheoryInputs) -> Result<Self> {
        inputs.validate()?;
        let quad = LightQuadrature::new(&inputs.light, inputs.quad_n);
        let sums = quad.weighted(inputs.beta());
        let spatial_mean = quad.weighted(0.0).phi;
        Ok(Self {
            inputs,
            quad,
            sums,
            spatial_mean,
        })
    }

    pub fn inputs(&self) -> &TheoryInputs {
        &self.inputs
    }

    /// `Z = ∫ exp(beta Phi) dV`.
    pub fn partition_function(&self) -> f64 {
        self.sums.weight
    }

    pub fn boltzmann_density(&self, r: [f64; 2]) -> f64 {
        (self.inputs.beta() * self.inputs.light.phi(r)).exp() / self.sums.weight
    }

    /// Cumulants `k_1..k_order` of the light field on this model's grid.
    pub fn cumulants(&self, order: usize) -> Vec<f64> {
        cumulants_from_moments(&self.quad.raw_moments(order))
    }

    /// Spatial mean of `Phi` (the first cumulant).
    pub fn spatial_mean_phi(&self) -> f64 {
        self.spatial_mean
    }

    pub fn mean_illumination(&self) -> f64 {
        self.sums.phi / self.sums.weight
    }

    pub fn dissipation_rate(&self) -> f64 {
        self.inputs.chi * self.sums.laplacian / self.sums.weight
    }

    /// Integration-by-parts form; the boundary term vanishes on the torus.
    pub fn dissipation_rate_by_parts(&self) -> f64 {
        -self.mean_square_swim_speed() / self.inputs.d_f
    }

    pub fn mean_square_swim_speed(&self) -> f64 {
        let chi = self.inputs.chi;
        chi * chi * self.sums.grad2 / self.sums.weight
    }

    /// `(lambda0 + alpha/2, -lambda0 + alpha/2)`.
    pub fn predicted_lyapunovs(&self) -> (f64, f64) {
        let half = 0.5 * self.dissipation_rate();
        (self.inputs.lambda0 + half, -self.inputs.lambda0 + half)
    }

    pub fn predict(&self) -> TheoryPrediction {
        let lambda0 = self.inputs.lambda0;
        let alpha = self.dissipation_rate();
        let (lambda1, lambda2) = self.predicted_lyapunovs();
        // [1/2 - (1 / (4 lambda0 Z)) ∫ e^{beta Phi} chi lap Phi]^-1
        let raw_direct = 1.0 / (0.5 - alpha / (4.0 * lambda0));
        let vs2 = self.mean_square_swim_speed();
        let raw_energy = 2.0 / (1.0 + vs2 / (2.0 * lambda0 * self.inputs.d_f));
        let d1_direct = raw_direct.clamp(0.0, 2.0);
        let d1_energy = raw_energy.clamp(0.0, 2.0);
        let mean_phi = self.mean_illumination();
        TheoryPrediction {
            chi: self.inputs.chi,
            z: self.partition_function(),
            mean_phi,
            gain: mean_phi - self.spatial_mean,
            alpha,
            alpha_by_parts: self.dissipation_rate_by_parts(),
            lambda1,
            lambda2,
            d1_direct,
            d1_energy,
            vs2,
            clamped: d1_direct != raw_direct || d1_energy != raw_energy || raw_direct.is_nan(),
        }
    }

    /// Annulus averages of the steady-state density about the light center.
    pub fn radial_profile(&self, n_bins: usize) -> Result<RadialProfile> {
        if n_bins < 8 {
            return Err(Error::Argument(format!("radial profile needs >= 8 bins, got {n_bins}")));
        }
        let bins = RadialBins::new(n_bins);
        let polar = PolarQuadrature::new();
        let beta = self.inputs.beta();
        let light = &self.inputs.light;
        let z = self.sums.weight;
        let center = light.center;
        let density = |r: f64, theta: f64| {
            let p = [center[0] + r * theta.cos(), center[1] + r * theta.sin()];
            (beta * light.phi(p)).exp() / z
        };
        let fractions: Vec<f64> = (0..n_bins)
            .map(|i| {
                let (a, b) = bins.edges(i);
                polar.integrate_annulus(a, b, &density)
            })
            .collect();
        Ok(RadialProfile::from_fractions(bins, fractions))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Polar quadrature over an annulus clipped to the unit square.
struct PolarQuadrature {
    radial: Vec<(f64, f64)>,
    arc: Vec<(f64, f64)>,
    full_circle: usize,
}

impl PolarQuadrature {
    fn new() -> Self {
        Self {
            radial: gauss_legendre(16),
            arc: gauss_legendre(32),
            full_circle: 256,
        }
    }

    fn gl<F: Fn(f64) -> f64>(nodes: &[(f64, f64)], a: f64, b: f64, f: F) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        half * nodes.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
    }

    /// `r ∫ density(r, theta) dtheta` over the part of the circle inside the square.
    fn ring<F: Fn(f64, f64) -> f64>(&self, r: f64, density: &F) -> f64 {
        if r <= 0.5 {
            let n = self.full_circle;
            let h = 2.0 * PI / n as f64;
            r * h * (0..n).map(|k| density(r, k as f64 * h)).sum::<f64>()
        } else {
            let tc = (0.5 / r).min(1.0).acos();
            let mut total = 0.0;
            for q in 0..4 {
                let off = q as f64 * FRAC_PI_2;
                total += Self::gl(&self.arc, off + tc, off + FRAC_PI_2 - tc, |t| density(r, t));
            }
            r * total
        }
    }

    fn integrate_annulus<F: Fn(f64, f64) -> f64>(&self, a: f64, b: f64, density: &F) -> f64 {
        let mut total = 0.0;
        if a < 0.5 {
            let hi = b.min(0.5);
            total += Self::gl(&self.radial, a, hi, |r| self.ring(r, density));
        }
        if b > 0.5 {
            // r = 1/2 + (c - 1/2)(1 - cos phi)/2 removes the square-root
            // behavior of the clipped arc length at both ends of [1/2, c].
            let c = FRAC_1_SQRT_2;
            let span = c - 0.5;
            let to_phi = |r: f64| (1.0 - 2.0 * (r - 0.5) / span).clamp(-1.0, 1.0).acos();
            let (pa, pb) = (to_phi(a.max(0.5)), to_phi(b.min(c)));
            total += Self::gl(&self.radial, pa, pb, |phi| {
                let r = 0.5 + span * (1.0 - phi.cos()) / 2.0;
                let dr = span * phi.sin() / 2.0;
                self.ring(r, density) * dr
            });
        }
        total
    }
}

pub fn partition_function(inputs: &TheoryInputs) -> Result<f64> {
    Ok(BoltzmannModel::new(*inputs)?.partition_function())
}

pub fn boltzmann_density(inputs: &TheoryInputs, r: [f64; 2]) -> Result<f64> {
    Ok(BoltzmannModel::new(*inputs)?.boltzmann_density(r))
}

pub fn mean_illumination(inputs: &TheoryInputs) -> Result<f64> {
    Ok(BoltzmannModel::new(*inputs)?.mean_illumination())
}

pub fn dissipation_rate(inputs: &TheoryInputs) -> Result<f64> {
    Ok(BoltzmannModel::new(*inputs)?.dissipation_rate())
}

pub fn dissipation_rate_by_parts(inputs: &TheoryInputs) -> Result<f64> {
    Ok(BoltzmannModel::new(*inputs)?.dissipation_rate_by_parts())
}

pub fn predicted_lyapunovs(inputs: &TheoryInputs) -> Result<(f64, f64)> {
    Ok(BoltzmannModel::new(*inputs)?.predicted_lyapunovs())
}

pub fn predicted_d1(inputs: &TheoryInputs) -> Result<TheoryPrediction> {
    Ok(BoltzmannModel::new(*inputs)?.predict())
}

pub fn radial_profile(inputs: &TheoryInputs, n_bins: usize) -> Result<RadialProfile> {
    BoltzmannModel::new(*inputs)?.radial_profile(n_bins)
}
