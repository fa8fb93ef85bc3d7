use super::linear_fit;
use crate::error::{Error, Result};

/// Largest tolerated deviation of the log-log MSD slope from 1.
const DIFFUSIVE_SLOPE_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusivityFit {
    /// `slope / 4` of MSD against time.
    pub d_f: f64,
    pub window: (f64, f64),
    pub slope_r2: f64,
    /// Least-squares slope of `ln MSD` against `ln t` over the window.
    pub loglog_slope: f64,
    pub diffusive: bool,
}

/// Fits `<d^2> = 4 D t + c` over the last half of an MSD series.
///
/// `min_span` is the shortest acceptable series duration (the caller knows
/// the flow correlation time).
pub fn effective_diffusivity(times: &[f64], msd: &[f64], min_span: f64) -> Result<DiffusivityFit> {
    if times.len() != msd.len() {
        return Err(Error::Argument("times and msd differ in length".into()));
    }
    let n = times.len();
    if n < 8 {
        return Err(Error::InsufficientData(format!("MSD series has {n} samples, need >= 8")));
    }
    let span = times[n - 1] - times[0];
    if span < min_span {
        return Err(Error::InsufficientData(format!(
            "MSD series spans {span}, need >= {min_span}"
        )));
    }
    let start = n / 2;
    let (t, m) = (&times[start..], &msd[start..]);
    let window = (t[0], t[t.len() - 1]);
    if m.iter().all(|&v| v == 0.0) {
        return Ok(DiffusivityFit {
            d_f: 0.0,
            window,
            slope_r2: 1.0,
            loglog_slope: 1.0,
            diffusive: true,
        });
    }
    let fit = linear_fit(t, m).ok_or_else(|| Error::InsufficientData("degenerate time window".into()))?;
    let (lt, lm): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(m)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    let loglog_slope = linear_fit(&lt, &lm).map_or(f64::NAN, |f| f.slope);
    let diffusive = (loglog_slope - 1.0).abs() <= DIFFUSIVE_SLOPE_TOL;
    Ok(DiffusivityFit {
        d_f: fit.slope / 4.0,
        window,
        slope_r2: fit.r2,
        loglog_slope,
        diffusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ballistic_is_flagged() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.5).collect();
        let m: Vec<f64> = t.iter().map(|x| x * x).collect();
        let f = effective_diffusivity(&t, &m, 20.0).unwrap();
        assert!(!f.diffusive);
        assert!((f.loglog_slope - 2.0).abs() < 0.05);
    }

    #[test]
    fn still_particles() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let f = effective_diffusivity(&t, &vec![0.0; 100], 20.0).unwrap();
        assert_eq!(f.d_f, 0.0);
        assert!(f.diffusive);
    }

    #[test]
    fn exact_linear_law() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.25).collect();
        let m: Vec<f64> = t.iter().map(|x| 4.0 * 0.07 * x).collect();
        let f = effective_diffusivity(&t, &m, 20.0).unwrap();
        assert!((f.d_f - 0.07).abs() < 1e-12);
        assert!(f.diffusive);
    }

    #[test]
    fn too_short() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let m = t.clone();
        assert!(matches!(effective_diffusivity(&t, &m, 20.0), Err(Error::InsufficientData(_))));
        assert!(matches!(effective_diffusivity(&t[..4], &m[..4], 0.0), Err(Error::InsufficientData(_))));
    }
}
