//! Localized illumination field on the unit torus.
//!
//! The light is a Gaussian `amplitude * exp(-decay * |r - center|^2)` made
//! periodic by summing `(2M + 1)^2` lattice images. The Gaussian factorizes
//! in `x` and `y`, so the image sum does too and every derivative is a
//! product of two one-dimensional image sums.

use crate::error::{Error, Result};
use crate::geometry::{wrap_coord, Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightParams {
    /// Peak intensity of a single image.
    pub amplitude: f64,
    /// Exponent coefficient; the default 8 gives `exp(-8 (x^2 + y^2))`.
    pub decay: f64,
    pub center: Vec2,
    /// Number of image shells `M` on each side of the home cell.
    pub image_radius: u32,
}

impl Default for LightParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            decay: 8.0,
            center: [0.0, 0.0],
            image_radius: 1,
        }
    }
}

/// Value and exact derivatives of the illumination at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightSample {
    pub phi: f64,
    pub grad: Vec2,
    pub hessian: Mat2,
}

impl LightSample {
    pub fn laplacian(&self) -> f64 {
        self.hessian[0][0] + self.hessian[1][1]
    }
}

/// One-dimensional image sum and its first two derivatives.
#[derive(Debug, Clone, Copy)]
struct Profile1d {
    value: f64,
    d1: f64,
    d2: f64,
}

impl LightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "light amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(self.decay > 0.0 && self.decay.is_finite()) {
            return Err(Error::Config(format!(
                "light decay must be positive, got {}",
                self.decay
            )));
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(Error::Config("light center must be finite".into()));
        }
        Ok(())
    }

    /// Upper bound on the periodicity defect caused by truncating the image sum.
    pub fn truncation_bound(&self) -> f64 {
        let m = f64::from(self.image_radius) + 0.5;
        4.0 * self.amplitude * (-self.decay * m * m).exp()
    }

    fn profile(&self, offset: f64) -> Profile1d {
        let d = wrap_coord(offset);
        let m = self.image_radius as i32;
        let a = self.decay;
        let mut p = Profile1d {
            value: 0.0,
            d1: 0.0,
            d2: 0.0,
        };
        for image in -m..=m {
            let s = d - f64::from(image);
            let g = (-a * s * s).exp();
            p.value += g;
            p.d1 += -2.0 * a * s * g;
            p.d2 += (4.0 * a * a * s * s - 2.0 * a) * g;
        }
        p
    }

    fn value_only(&self, offset: f64) -> f64 {
        let d = wrap_coord(offset);
        let m = self.image_radius as i32;
        (-m..=m)
            .map(|image| {
                let s = d - f64::from(image);
                (-self.decay * s * s).exp()
            })
            .sum()
    }

    pub fn phi(&self, r: Vec2) -> f64 {
        self.amplitude * self.value_only(r[0] - self.center[0]) * self.value_only(r[1] - self.center[1])
    }

    pub fn grad_phi(&self, r: Vec2) -> Vec2 {
        self.sample(r).grad
    }

    pub fn hessian_phi(&self, r: Vec2) -> Mat2 {
        self.sample(r).hessian
    }

    pub fn laplacian_phi(&self, r: Vec2) -> f64 {
        self.sample(r).laplacian()
    }

    /// Value and gradient; cheaper than [`LightParams::sample`] for the
    /// particle right-hand side.
    #[inline]
    pub fn phi_and_grad(&self, r: Vec2) -> (f64, Vec2) {
        let px = self.profile(r[0] - self.center[0]);
        let py = self.profile(r[1] - self.center[1]);
        let a = self.amplitude;
        (
            a * px.value * py.value,
            [a * px.d1 * py.value, a * px.value * py.d1],
        )
    }

    pub fn sample(&self, r: Vec2) -> LightSample {
        let px = self.profile(r[0] - self.center[0]);
        let py = self.profile(r[1] - self.center[1]);
        let a = self.amplitude;
        let cross = a * px.d1 * py.d1;
        LightSample {
            phi: a * px.value * py.value,
            grad: [a * px.d1 * py.value, a * px.value * py.d1],
            hessian: [[a * px.d2 * py.value, cross], [cross, a * px.value * py.d2]],
        }
    }

    /// Precomputes the image weights for repeated evaluation.
    pub fn evaluator(&self) -> LightEvaluator {
        LightEvaluator::new(*self)
    }

    /// Per-axis tables `(value, d1, d2)` on a set of coordinates, used by
    /// separable quadrature.
    pub(crate) fn axis_table(&self, coords: &[f64], axis: usize) -> Vec<[f64; 3]> {
        coords
            .iter()
            .map(|&c| {
                let p = self.profile(c - self.center[axis]);
                [p.value, p.d1, p.d2]
            })
            .collect()
    }
}

/// Largest `decay * image_radius` for which the factored image sum cannot
/// overflow.
const FACTORED_LIMIT: f64 = 300.0;

/// Light evaluation with two exponentials per axis.
///
/// `exp(-a (d - k)^2) = exp(-a d^2) exp(2 a d)^k exp(-a k^2)`, and the last
/// factor depends only on the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LightEvaluator {
    params: LightParams,
    weights: Vec<f64>,
}

impl LightEvaluator {
    pub fn new(params: LightParams) -> Self {
        let a = params.decay;
        let weights = if a * f64::from(params.image_radius) <= FACTORED_LIMIT {
            (0..=params.image_radius)
                .map(|k| (-a * f64::from(k * k)).exp())
                .collect()
        } else {
            Vec::new()
        };
        Self { params, weights }
    }

    pub fn params(&self) -> &LightParams {
        &self.params
    }

    #[inline]
    fn profile(&self, offset: f64) -> Profile1d {
        if self.weights.is_empty() {
            return self.params.profile(offset);
        }
        let a = self.params.decay;
        let d = wrap_coord(offset);
        let e0 = (-a * d * d).exp();
        let q = (2.0 * a * d).exp();
        let qi = 1.0 / q;
        let mut p = Profile1d {
            value: e0,
            d1: -2.0 * a * d * e0,
            d2: (4.0 * a * a * d * d - 2.0 * a) * e0,
        };
        let (mut up, mut down) = (e0, e0);
        for (k, &w) in self.weights.iter().enumerate().skip(1) {
            up *= q;
            down *= qi;
            for (s, g) in [(d - k as f64, up * w), (d + k as f64, down * w)] {
                p.value += g;
                p.d1 += -2.0 * a * s * g;
                p.d2 += (4.0 * a * a * s * s - 2.0 * a) * g;
            }
        }
        p
    }

    /// Value and first derivative of the image sum along one axis.
    #[inline]
    fn slope(&self, offset: f64) -> (f64, f64) {
        if self.weights.is_empty() {
            let p = self.params.profile(offset);
            return (p.value, p.d1);
        }
        let a = self.params.decay;
        let d = wrap_coord(offset);
        let e0 = (-a * d * d).exp();
        let q = (2.0 * a * d).exp();
        let qi = 1.0 / q;
        let (mut value, mut moment) = (e0, d * e0);
        let (mut up, mut down) = (e0, e0);
        for (k, &w) in self.weights.iter().enumerate().skip(1) {
            up *= q;
            down *= qi;
            let (gu, gd) = (up * w, down * w);
            value += gu + gd;
            moment += (d - k as f64) * gu + (d + k as f64) * gd;
        }
        (value, -2.0 * a * moment)
    }

    #[inline]
    pub fn phi_and_grad(&self, r: Vec2) -> (f64, Vec2) {
        let c = self.params.center;
        let (vx, dx) = self.slope(r[0] - c[0]);
        let (vy, dy) = self.slope(r[1] - c[1]);
        let a = self.params.amplitude;
        (a * vx * vy, [a * dx * vy, a * vx * dy])
    }

    #[inline]
    pub fn sample(&self, r: Vec2) -> LightSample {
        let c = self.params.center;
        let px = self.profile(r[0] - c[0]);
        let py = self.profile(r[1] - c[1]);
        let a = self.params.amplitude;
        let cross = a * px.d1 * py.d1;
        LightSample {
            phi: a * px.value * py.value,
            grad: [a * px.d1 * py.value, a * px.value * py.d1],
            hessian: [[a * px.d2 * py.value, cross], [cross, a * px.value * py.d2]],
        }
    }
}
