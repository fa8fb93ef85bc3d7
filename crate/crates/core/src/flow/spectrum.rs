use std::f64::consts::PI;

use super::SpectralFlowState;

/// Uniform wavenumber bins `[start + i w, start + (i + 1) w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBins {
    pub start: f64,
    pub width: f64,
    pub count: usize,
}

impl SpectrumBins {
    /// `count` bins covering `[0, k_max)`.
    pub fn uniform(count: usize, k_max: f64) -> Self {
        Self {
            start: 0.0,
            width: k_max / count as f64,
            count,
        }
    }

    /// Bins of width `pi` centered on integer multiples of `pi`, which puts
    /// the lattice shells `|n| = j / 2` at bin centers.
    pub fn centered_multiples_of_pi(count: usize) -> Self {
        Self {
            start: 0.5 * PI,
            width: PI,
            count,
        }
    }

    pub fn index_of(&self, k: f64) -> Option<usize> {
        let x = (k - self.start) / self.width;
        if x < 0.0 {
            return None;
        }
        let i = x.floor() as usize;
        (i < self.count).then_some(i)
    }

    pub fn center(&self, i: usize) -> f64 {
        self.start + (i as f64 + 0.5) * self.width
    }
}

/// Time-averageable kinetic-energy spectrum.
///
/// `E(k)` is energy per unit wavenumber, so that `∫ E dk = <|v|^2> / 2`.
/// On the discrete lattice each mode contributes the estimate
/// `|k|^3 |psi_k|^2 / (4 pi)` (its shell-integrated density), and a bin
/// reports the mean estimate over the modes it contains. Averaging per mode
/// instead of summing removes the jitter from uneven lattice shell counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    bins: SpectrumBins,
    sums: Vec<f64>,
    counts: Vec<u64>,
    samples: u64,
}

impl EnergySpectrum {
    pub fn new(bins: SpectrumBins) -> Self {
        let n = bins.count;
        Self {
            bins,
            sums: vec![0.0; n],
            counts: vec![0; n],
            samples: 0,
        }
    }

    pub fn accumulate(&mut self, state: &SpectralFlowState) {
        for m in state.modes() {
            let k = m.k2.sqrt();
            if let Some(i) = self.bins.index_of(k) {
                // Both members of the conjugate pair carry the same estimate.
                self.sums[i] += 2.0 * k * m.k2 * m.coeff.norm_sqr() / (4.0 * PI);
                self.counts[i] += 2;
            }
        }
        self.samples += 1;
    }

    pub fn bins(&self) -> &SpectrumBins {
        &self.bins
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// `(k_center, E_k)` per bin; empty bins report 0.
    pub fn values(&self) -> Vec<(f64, f64)> {
        (0..self.bins.count)
            .map(|i| {
                let e = if self.counts[i] > 0 {
                    self.sums[i] / self.counts[i] as f64
                } else {
                    0.0
                };
                (self.bins.center(i), e)
            })
            .collect()
    }

    pub fn value_at(&self, k: f64) -> Option<f64> {
        let i = self.bins.index_of(k)?;
        Some(self.values()[i].1)
    }

    /// Index of the largest bin.
    pub fn peak_bin(&self) -> usize {
        self.values()
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &(_, e))| if e > best.1 { (i, e) } else { best })
            .0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowParams;
    use num_complex::Complex64;

    #[test]
    fn bins_beyond_cutoff_are_zero() {
        let mut s = SpectralFlowState::zero(FlowParams::default()).unwrap();
        for m in 0..s.modes().len() {
            let n = s.modes()[m].n;
            s.set_coefficient(n, Complex64::new(0.1, 0.0)).unwrap();
        }
        let kmax_retained = 2.0 * PI * 8.0 * 2f64.sqrt();
        let spec = s.energy_spectrum(&SpectrumBins::uniform(40, 2.0 * kmax_retained));
        for (k, e) in spec.values() {
            if k > kmax_retained + spec.bins().width {
                assert_eq!(e, 0.0);
            }
        }
    }

    #[test]
    fn bin_lookup() {
        let b = SpectrumBins::centered_multiples_of_pi(10);
        assert_eq!(b.index_of(3.0 * PI), Some(2));
        assert!((b.center(2) - 3.0 * PI).abs() < 1e-12);
        assert_eq!(b.index_of(0.1), None);
        assert_eq!(b.index_of(100.0), None);
    }
}
