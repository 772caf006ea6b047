//! Chebyshev radii and centers of finite point sets in an arbitrary
//! (absolute) norm, with certified lower bounds, plus probes of the
//! geometry of near-optimal center sets.

mod oracle;
mod probe;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use oracle::{brute_radius_oracle, BoxBounds};
pub use probe::{epsilon_center_diameter, nested_radius_sequence, CenterSetProbe, CenterSetSample};
pub use solver::radius_center;

/// A nonempty finite set of points of equal dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().ok_or_else(|| Error::invalid("point set is empty"))?.len();
        if dim == 0 {
            return Err(Error::invalid("points must have dimension >= 1"));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(PointSet { points, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(|p| p.as_slice())
    }

    /// Coordinate-wise bounding box.
    pub fn bounding_box(&self) -> BoxBounds {
        let mut lo = self.points[0].clone();
        let mut hi = self.points[0].clone();
        for p in &self.points[1..] {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        BoxBounds { lo, hi }
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.points.iter().any(|p| p.as_slice() == x)
    }

    /// Largest distance from `c` to the set.
    pub fn max_distance(&self, space: &crate::spaces::NormedSpace, c: &[f64]) -> f64 {
        self.iter().map(|p| space.distance(p, c)).fold(0.0, f64::max)
    }
}

/// Outcome of a Chebyshev radius computation.
///
/// `upper` is the attained max distance from `center`; `lower` is a certified
/// lower bound on the radius. `radius` reports `upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusCertificate {
    pub radius: f64,
    pub center: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl RadiusCertificate {
    pub(crate) fn exact(radius: f64, center: Vec<f64>) -> Self {
        RadiusCertificate { radius, center, upper: radius, lower: radius, gap: 0.0, converged: true, iterations: 0 }
    }
}
