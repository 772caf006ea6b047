use serde::{Deserialize, Serialize};

use super::PointSet;
use crate::error::{Error, Result};
use crate::spaces::NormedSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::invalid("box needs lo <= hi"));
        }
        Ok(BoxBounds { lo, hi })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }
}

/// Exhaustive grid search for the Chebyshev radius: the minimum over grid
/// centers (spacing `step`, box corners included) of the max distance to the set.
///
/// Independent of [`super::radius_center`]; used as its oracle.
pub fn brute_radius_oracle(points: &PointSet, space: &NormedSpace, bounds: &BoxBounds, step: f64) -> Result<f64> {
    let dim = points.dim();
    if dim > 3 {
        return Err(Error::Unsupported(format!("brute oracle needs dim <= 3, got {dim}")));
    }
    if bounds.lo.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: bounds.lo.len() });
    }
    if !(step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    if !points.iter().all(|p| bounds.contains(p)) {
        return Err(Error::invalid("box must contain the point set"));
    }
    let counts: Vec<usize> = (0..dim)
        .map(|k| ((bounds.hi[k] - bounds.lo[k]) / step).ceil() as usize + 1)
        .collect();
    let coord = |k: usize, i: usize| -> f64 { (bounds.lo[k] + i as f64 * step).min(bounds.hi[k]) };

    let mut best = f64::INFINITY;
    let mut c = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    loop {
        for k in 0..dim {
            c[k] = coord(k, idx[k]);
        }
        // early exit once this candidate cannot beat the incumbent
        let mut worst = 0.0f64;
        for p in points.iter() {
            worst = worst.max(space.distance(p, &c));
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);

        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == dim {
                return Ok(best);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pts: &[&[f64]]) -> PointSet {
        PointSet::new(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn two_points() {
        let pts = set(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let b = BoxBounds::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        let r = brute_radius_oracle(&pts, &NormedSpace::euclidean(2), &b, 1e-3).unwrap();
        assert!((r - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn unit_square_corners() {
        let pts = set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let b = pts.bounding_box();
        let r = brute_radius_oracle(&pts, &NormedSpace::euclidean(2), &b, 1e-3).unwrap();
        assert!((r - 2f64.sqrt() / 2.0).abs() <= 1e-3);
    }

    #[test]
    fn single_point_is_zero() {
        let pts = set(&[&[0.25, 0.5]]);
        let b = BoxBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let r = brute_radius_oracle(&pts, &NormedSpace::euclidean(2), &b, 0.25).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn rejects_high_dim_and_bad_box() {
        let pts = set(&[&[0.0; 4]]);
        let b = BoxBounds::new(vec![0.0; 4], vec![1.0; 4]).unwrap();
        assert!(brute_radius_oracle(&pts, &NormedSpace::euclidean(4), &b, 0.1).is_err());
        let pts = set(&[&[2.0, 0.0]]);
        let b = BoxBounds::new(vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(brute_radius_oracle(&pts, &NormedSpace::euclidean(2), &b, 0.1).is_err());
    }
}
