//! Radial density profiles about the light center.
//!
//! Annuli are uniform in radius over `[0, sqrt(2)/2]`, the distance from the
//! center of the unit square to its corners. For radii beyond `1/2` the
//! annuli are clipped by the square; their areas are computed exactly.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::geometry::{wrap, Vec2};

/// Area of the disk of radius `r` intersected with the unit square centered
/// on the disk.
pub fn disk_square_area(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if r <= 0.5 {
        PI * r * r
    } else if r >= FRAC_1_SQRT_2 {
        1.0
    } else {
        // Four circular segments beyond the lines |x| = 1/2, |y| = 1/2.
        let segment = r * r * (0.5 / r).acos() - 0.5 * (r * r - 0.25).sqrt();
        PI * r * r - 4.0 * segment
    }
}

pub fn annulus_area(inner: f64, outer: f64) -> f64 {
    disk_square_area(outer) - disk_square_area(inner)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialBins {
    pub count: usize,
}

impl RadialBins {
    pub fn new(count: usize) -> Self {
        assert!(count >= 1, "radial profile needs at least one bin");
        Self { count }
    }

    pub fn width(&self) -> f64 {
        FRAC_1_SQRT_2 / self.count as f64
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.width();
        (i as f64 * w, if i + 1 == self.count { FRAC_1_SQRT_2 } else { (i + 1) as f64 * w })
    }

    pub fn center(&self, i: usize) -> f64 {
        let (a, b) = self.edges(i);
        0.5 * (a + b)
    }

    pub fn area(&self, i: usize) -> f64 {
        let (a, b) = self.edges(i);
        annulus_area(a, b)
    }

    pub fn index_of(&self, r: f64) -> usize {
        ((r / self.width()) as usize).min(self.count - 1)
    }
}

/// Density per unit area in each annulus; integrates to 1 over the square.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub bins: RadialBins,
    /// Fraction of the probability mass in each annulus.
    pub fractions: Vec<f64>,
    pub density: Vec<f64>,
}

impl RadialProfile {
    pub fn from_fractions(bins: RadialBins, fractions: Vec<f64>) -> Self {
        let density = fractions
            .iter()
            .enumerate()
            .map(|(i, f)| f / bins.area(i))
            .collect();
        Self {
            bins,
            fractions,
            density,
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins.count).map(|i| self.bins.center(i)).collect()
    }

    /// `sum density * area`.
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| d * self.bins.area(i))
            .sum()
    }
}

/// Histogram of particle distances from a center, poolable over snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialAccumulator {
    bins: RadialBins,
    center: Vec2,
    counts: Vec<u64>,
    total: u64,
}

impl RadialAccumulator {
    pub fn new(bins: RadialBins, center: Vec2) -> Self {
        let n = bins.count;
        Self {
            bins,
            center,
            counts: vec![0; n],
            total: 0,
        }
    }

    pub fn add(&mut self, positions: &[Vec2]) {
        for &p in positions {
            let d = wrap([p[0] - self.center[0], p[1] - self.center[1]]);
            let r = d[0].hypot(d[1]);
            self.counts[self.bins.index_of(r)] += 1;
        }
        self.total += positions.len() as u64;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn profile(&self) -> RadialProfile {
        let n = self.total.max(1) as f64;
        let fractions = self.counts.iter().map(|&c| c as f64 / n).collect();
        RadialProfile::from_fractions(self.bins.clone(), fractions)
    }
}

/// Radial density of a point set about `center`.
pub fn radial_density(positions: &[Vec2], center: Vec2, n_bins: usize) -> RadialProfile {
    let mut acc = RadialAccumulator::new(RadialBins::new(n_bins), center);
    acc.add(positions);
    acc.profile()
}
