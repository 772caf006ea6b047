use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::region::{sample_uniform, Ball, Intersect, Minus, Region, Slab};
use crate::error::{Error, Result};

const MEASURE_TRIES: usize = 1_000_000;

/// A one-parameter family `A(theta)` of subsets of a base set carrying a
/// probability measure. `theta_range().0` gives the whole base set; the
/// measure of `A(theta)` is nonincreasing and the worst local radius over it
/// nonincreasing in `theta`.
pub trait ExcludedSetFamily: Send + Sync {
    fn dim(&self) -> usize;
    fn theta_range(&self) -> (f64, f64);
    fn region(&self, theta: f64) -> Box<dyn Region>;
    /// Observations on which the radius over `A(theta)` is evaluated,
    /// including the values where it peaks.
    fn y_grid(&self, theta: f64) -> Vec<Vec<f64>>;
    /// One draw from the measure on the base set.
    fn sample_measure(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let base = self.region(self.theta_range().0);
        sample_uniform(base.as_ref(), rng, MEASURE_TRIES).ok_or(Error::SamplingBudget { budget: MEASURE_TRIES as u64 })
    }
}

fn uniform_disk(rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let x = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        if x[0] * x[0] + x[1] * x[1] <= 1.0 {
            return x.to_vec();
        }
    }
}

fn grid_on(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let count = count.max(2);
    (0..count).map(move |i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
}

/// Uniform unit disk minus the open strip `|x1| < tau`; observed through `x1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabFamily {
    pub grid: usize,
}

impl SlabFamily {
    pub fn new(grid: usize) -> Self {
        SlabFamily { grid }
    }

    /// Fraction of the disk inside `|x1| < tau`.
    pub fn excluded_fraction(tau: f64) -> f64 {
        let t = tau.clamp(0.0, 1.0);
        2.0 / std::f64::consts::PI * (t * (1.0 - t * t).sqrt() + t.asin())
    }
}

impl ExcludedSetFamily for SlabFamily {
    fn dim(&self) -> usize {
        2
    }
    fn theta_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn region(&self, theta: f64) -> Box<dyn Region> {
        Box::new(Minus(Ball::unit(2), Slab { dim: 2, axis: 0, half_width: theta, closed: false }))
    }
    fn y_grid(&self, theta: f64) -> Vec<Vec<f64>> {
        let mut ys: Vec<f64> = grid_on(-1.0, 1.0, self.grid).filter(|y| y.abs() >= theta).collect();
        ys.extend([-theta, theta]);
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        ys.into_iter().map(|y| vec![y]).collect()
    }
    fn sample_measure(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(uniform_disk(rng))
    }
}

/// Uniform unit disk cut to the band `|x2| <= 1 - theta`; observed through `x1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandFamily {
    pub grid: usize,
}

impl BandFamily {
    pub fn new(grid: usize) -> Self {
        BandFamily { grid }
    }

    /// Fraction of the disk inside `|x2| <= r`.
    pub fn kept_fraction(r: f64) -> f64 {
        SlabFamily::excluded_fraction(r)
    }
}

impl ExcludedSetFamily for BandFamily {
    fn dim(&self) -> usize {
        2
    }
    fn theta_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn region(&self, theta: f64) -> Box<dyn Region> {
        Box::new(Intersect(Ball::unit(2), Slab { dim: 2, axis: 1, half_width: 1.0 - theta, closed: true }))
    }
    fn y_grid(&self, _theta: f64) -> Vec<Vec<f64>> {
        let mut ys: Vec<f64> = grid_on(-1.0, 1.0, self.grid).collect();
        ys.push(0.0);
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        ys.into_iter().map(|y| vec![y]).collect()
    }
    fn sample_measure(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(uniform_disk(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_area_closed_form() {
        assert!(SlabFamily::excluded_fraction(0.0).abs() < 1e-15);
        assert!((SlabFamily::excluded_fraction(1.0) - 1.0).abs() < 1e-15);
        assert!((SlabFamily::excluded_fraction(0.078621) - 0.1).abs() < 1e-5);
    }

    #[test]
    fn slab_grid_contains_edges() {
        let g = SlabFamily::new(11).y_grid(0.25);
        assert!(g.contains(&vec![0.25]) && g.contains(&vec![-0.25]));
        assert!(g.iter().all(|y| y[0].abs() >= 0.25));
    }

    #[test]
    fn band_membership() {
        let r = BandFamily::new(5).region(0.5);
        assert!(r.contains(&[0.0, 0.5]) && !r.contains(&[0.0, 0.51]));
    }
}
