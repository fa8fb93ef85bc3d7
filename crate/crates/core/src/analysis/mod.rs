//! Diagnostics computed from simulation output.

mod boxcount;
mod diffusivity;
mod radial;

pub use boxcount::{information_dimension, BoxCountResult, MIN_POINTS, MIN_OCCUPANCY};
pub use diffusivity::{effective_diffusivity, DiffusivityFit};
pub use radial::{annulus_area, disk_square_area, radial_density, RadialAccumulator, RadialBins, RadialProfile};

use crate::dynamics::TangentBundle;
use crate::error::{Error, Result};

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when `y` is constant.
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Dissipation rate `lambda1 + lambda2`.
    pub alpha: f64,
    /// Standard errors of `(lambda1, lambda2, alpha)` across bundles.
    pub stderr: [f64; 3],
}

/// Averages per-bundle exponents.
pub fn lyapunov_summary(bundles: &[TangentBundle]) -> Result<LyapunovSummary> {
    if bundles.is_empty() {
        return Err(Error::Argument("lyapunov_summary needs at least one bundle".into()));
    }
    let mut l1 = Vec::with_capacity(bundles.len());
    let mut l2 = Vec::with_capacity(bundles.len());
    let mut al = Vec::with_capacity(bundles.len());
    for (i, b) in bundles.iter().enumerate() {
        let ex = b
            .exponents()
            .ok_or_else(|| Error::Argument(format!("bundle {i} has no elapsed time")))?;
        l1.push(ex[0]);
        l2.push(ex[1]);
        al.push(ex[0] + ex[1]);
    }
    let (lambda1, s1) = mean_and_stderr(&l1);
    let (lambda2, s2) = mean_and_stderr(&l2);
    let (alpha, sa) = mean_and_stderr(&al);
    Ok(LyapunovSummary {
        lambda1,
        lambda2,
        alpha,
        stderr: [s1, s2, sa],
    })
}

/// Kaplan-Yorke dimension of a two-dimensional flow, clamped to `[0, 2]`.
pub fn kaplan_yorke(lambda1: f64, lambda2: f64) -> f64 {
    if lambda1 <= 0.0 {
        0.0
    } else if lambda1 + lambda2 >= 0.0 {
        2.0
    } else {
        1.0 + lambda1 / lambda2.abs()
    }
}

/// Time-averaged ensemble illumination in excess of the spatial mean.
pub fn light_gain(ensemble_phi_series: &[f64], spatial_mean_phi: f64) -> Result<f64> {
    if ensemble_phi_series.is_empty() {
        return Err(Error::InsufficientData("empty illumination series".into()));
    }
    let mean = ensemble_phi_series.iter().sum::<f64>() / ensemble_phi_series.len() as f64;
    Ok(mean - spatial_mean_phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn synthetic_bundle_exponents() {
        let t = 50.0;
        let b = TangentBundle {
            vectors: [[1.0, 0.0], [0.0, 1.0]],
            log_sums: [t, -2.0 * t],
            elapsed: t,
        };
        let s = lyapunov_summary(&[b.clone(), b]).unwrap();
        assert_eq!((s.lambda1, s.lambda2, s.alpha), (1.0, -2.0, -1.0));
        assert_eq!(s.stderr, [0.0; 3]);
        assert!(lyapunov_summary(&[]).is_err());
        assert!(lyapunov_summary(&[TangentBundle::default()]).is_err());
    }

    #[test]
    fn kaplan_yorke_cases() {
        assert_eq!(kaplan_yorke(0.8, -0.8), 2.0);
        assert_eq!(kaplan_yorke(1.0, -2.0), 1.5);
        assert_eq!(kaplan_yorke(-0.1, -0.5), 0.0);
    }

    #[test]
    fn gain_of_pinned_and_uniform_ensembles() {
        assert_eq!(light_gain(&[1.0, 1.0], 0.25).unwrap(), 0.75);
        assert_eq!(light_gain(&[0.3, 0.5], 0.4).unwrap(), 0.0);
        assert!(light_gain(&[], 0.4).is_err());
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn kaplan_yorke_in_unit_range(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let (l1, l2) = if a >= b { (a, b) } else { (b, a) };
            let d = kaplan_yorke(l1, l2);
            prop_assert!((0.0..=2.0).contains(&d));
        }

        #[test]
        fn kaplan_yorke_continuous_inside_regime(l1 in 0.1f64..2.0, extra in 0.01f64..3.0) {
            let l2 = -l1 - extra;
            let d0 = kaplan_yorke(l1, l2);
            let d1 = kaplan_yorke(l1 + 1e-9, l2);
            prop_assert!((d0 - d1).abs() < 1e-6);
        }
    }
}
