use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{radius_center, PointSet};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::spaces::NormedSpace;

/// Acceptance rate below which a center-set sample is reported as starved.
pub const STARVATION_RATE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSetSample {
    pub epsilon: f64,
    pub diameter: f64,
    pub acceptance: f64,
    pub starved: bool,
}

/// Sampled diameters of `C(A, eps) = { c : max_i |x_i - c| <= r + eps }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSetProbe {
    pub r: f64,
    pub solver_gap: f64,
    pub trend: Vec<CenterSetSample>,
}

impl CenterSetProbe {
    /// True when the diameters do not increase as epsilon shrinks, up to `slack`.
    pub fn is_shrinking(&self, slack: f64) -> bool {
        let mut by_eps: Vec<&CenterSetSample> = self.trend.iter().collect();
        by_eps.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        by_eps.windows(2).all(|w| w[0].diameter <= w[1].diameter + slack)
    }
}

fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Rejection-samples the epsilon-center sets around a computed Chebyshev center.
///
/// The center set is convex and contains the computed center, so its radial
/// extents along a fan of directions bound the sampling box; candidates are
/// drawn uniformly in that (slightly padded) box. The radial boundary points
/// are members as well and are included in the diameter.
pub fn epsilon_center_diameter(
    points: &PointSet,
    space: &NormedSpace,
    eps_list: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CenterSetProbe> {
    if eps_list.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::invalid("epsilon values must be nonnegative"));
    }
    let cert = radius_center(points, space, 1e-10, 2000)?;
    let dim = points.dim();
    let r = cert.upper;
    let center = cert.center.clone();
    let inside = |c: &[f64], level: f64| points.max_distance(space, c) <= level;

    let mut trend = Vec::with_capacity(eps_list.len());
    for (e_idx, &eps) in eps_list.iter().enumerate() {
        let level = r + eps;
        let mut rng = stream_rng(seed, streams::CENTER_SET, e_idx as u64);
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for k in 0..dim {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; dim];
                d[k] = s;
                dirs.push(d);
            }
        }
        if dim == 2 {
            for i in 0..64 {
                let a = std::f64::consts::TAU * i as f64 / 64.0;
                dirs.push(vec![a.cos(), a.sin()]);
            }
        } else {
            for _ in 0..64 {
                dirs.push(random_direction(&mut rng, dim));
            }
        }
        let reach = 2.0 * level * space.euclid_factor(dim) + 1e-9;
        let mut members: Vec<Vec<f64>> = vec![center.clone()];
        for d in &dirs {
            let (mut lo, mut hi) = (0.0, reach);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let c: Vec<f64> = center.iter().zip(d).map(|(x, u)| x + mid * u).collect();
                if inside(&c, level) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if lo > 0.0 {
                members.push(center.iter().zip(d).map(|(x, u)| x + lo * u).collect());
            }
        }
        let mut blo = center.clone();
        let mut bhi = center.clone();
        for m in &members {
            for k in 0..dim {
                blo[k] = blo[k].min(m[k]);
                bhi[k] = bhi[k].max(m[k]);
            }
        }
        for k in 0..dim {
            let pad = 0.1 * (bhi[k] - blo[k]) + 1e-12;
            blo[k] -= pad;
            bhi[k] += pad;
        }
        let mut accepted = 0usize;
        for _ in 0..samples {
            let c: Vec<f64> = (0..dim).map(|k| rng.gen_range(blo[k]..=bhi[k])).collect();
            if inside(&c, level) {
                accepted += 1;
                if members.len() < 1500 {
                    members.push(c);
                }
            }
        }
        let mut diameter = 0.0f64;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                diameter = diameter.max(space.distance(&members[i], &members[j]));
            }
        }
        let acceptance = if samples == 0 { 0.0 } else { accepted as f64 / samples as f64 };
        trend.push(CenterSetSample { epsilon: eps, diameter, acceptance, starved: acceptance < STARVATION_RATE });
    }
    Ok(CenterSetProbe { r, solver_gap: cert.gap, trend })
}

/// Radii of a nested sequence `A_1 ⊆ A_2 ⊆ ...`.
pub fn nested_radius_sequence(sets: &[PointSet], space: &NormedSpace, tol: f64) -> Result<Vec<f64>> {
    for (k, w) in sets.windows(2).enumerate() {
        if let Some(p) = w[0].iter().find(|p| !w[1].contains_point(p)) {
            return Err(Error::invalid(format!("set {k} is not contained in set {}: point {p:?}", k + 1)));
        }
    }
    sets.iter()
        .map(|s| radius_center(s, space, tol, 5000).map(|c| c.radius))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pts: &[&[f64]]) -> PointSet {
        PointSet::new(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn unique_center_at_zero_epsilon() {
        let probe = epsilon_center_diameter(&set(&[&[-1.0, 0.0], &[1.0, 0.0]]), &NormedSpace::euclidean(2), &[0.0], 2000, 1).unwrap();
        assert!(probe.trend[0].diameter < 1e-3, "{probe:?}");
    }

    #[test]
    fn euclidean_lens_is_thin() {
        let probe = epsilon_center_diameter(&set(&[&[-1.0, 0.0], &[1.0, 0.0]]), &NormedSpace::euclidean(2), &[0.01], 5000, 2).unwrap();
        let d = probe.trend[0].diameter;
        // lens half-height sqrt(1.01^2 - 1)
        assert!(d <= 0.35 && d > 0.25, "{d}");
    }

    #[test]
    fn max_norm_center_set_is_fat() {
        let probe = epsilon_center_diameter(&set(&[&[0.0, 0.0], &[1.0, 0.0]]), &NormedSpace::max_norm(2), &[0.01], 5000, 3).unwrap();
        assert!(probe.trend[0].diameter >= 0.9, "{probe:?}");
    }

    #[test]
    fn nesting_violation_rejected() {
        let a = set(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = set(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(nested_radius_sequence(&[a, b], &NormedSpace::euclidean(2), 1e-6).is_err());
    }

    #[test]
    fn constant_sequence() {
        let a = set(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let r = nested_radius_sequence(&[a.clone(), a.clone(), a], &NormedSpace::euclidean(2), 1e-9).unwrap();
        assert!(r.iter().all(|x| (x - 0.5).abs() < 1e-9));
    }
}
