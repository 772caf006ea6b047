//! Information operators on `R^d` and the local, worst-case and
//! probabilistic radii of information for recovering `x` itself.

mod family;
mod operator;
mod region;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{radius_center, PointSet, RadiusCertificate};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::spaces::NormedSpace;
use crate::stats::{wilson, Interval, Z95};

pub use family::{BandFamily, ExcludedSetFamily, SlabFamily};
pub use operator::{ContinuationRule, InformationOperator};
pub use region::{Ball, Cube, Hyperplane, Intersect, Minus, Nothing, Region, Singleton, Slab};

use operator::affine_fiber;

/// Proposals spent looking for a first fiber point before declaring it empty.
pub const FIBER_BUDGET: usize = 200_000;

const SOLVER_TOL: f64 = 1e-10;
const SOLVER_ITERS: usize = 2000;

/// Points of `{ x in A : N x = y }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSample {
    pub y: Vec<f64>,
    pub points: PointSet,
}

fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Samples a fiber: one interior point `x0`, then the boundary points hit by
/// rays from `x0` along kernel directions. For one-dimensional kernels the two
/// endpoints are exact and further points add nothing. Successive calls with
/// a larger `n_points` extend the same sequence of points.
pub fn sample_fiber(n: &InformationOperator, y: &[f64], region: &dyn Region, n_points: usize, seed: u64) -> Result<FiberSample> {
    sample_fiber_at(n, y, region, n_points, seed, 0)
}

fn sample_fiber_at(
    n: &InformationOperator,
    y: &[f64],
    region: &dyn Region,
    n_points: usize,
    seed: u64,
    index: u64,
) -> Result<FiberSample> {
    if n_points == 0 {
        return Err(Error::invalid("n_points must be >= 1"));
    }
    if region.dim() != n.dim() {
        return Err(Error::DimensionMismatch { expected: n.dim(), got: region.dim() });
    }
    let rows = n.resolve(y)?;
    let fiber = affine_fiber(&rows, y)?;
    let empty = || Error::EmptyFiber { y: y.to_vec() };
    let k = fiber.kernel.len();
    let embed = |z: &[f64]| -> Vec<f64> {
        let mut x = fiber.base.clone();
        for (zi, col) in z.iter().zip(&fiber.kernel) {
            for (xi, ci) in x.iter_mut().zip(col) {
                *xi += zi * ci;
            }
        }
        x
    };
    let mut rng = stream_rng(seed, streams::FIBER_POINTS, index);

    let x0 = if region.contains(&fiber.base) {
        fiber.base.clone()
    } else {
        let r = region.bounding_radius();
        let base2: f64 = fiber.base.iter().map(|v| v * v).sum();
        let reach2 = r * r - base2;
        if k == 0 || !(reach2 >= 0.0) || !r.is_finite() {
            return Err(empty());
        }
        let reach = reach2.sqrt();
        let mut found = None;
        for _ in 0..FIBER_BUDGET {
            let z: Vec<f64> = (0..k).map(|_| rng.gen_range(-reach..=reach)).collect();
            let x = embed(&z);
            if region.contains(&x) {
                found = Some(x);
                break;
            }
        }
        found.ok_or_else(empty)?
    };

    let mut points = vec![x0.clone()];
    let wanted = if k == 1 { n_points.min(3) } else { n_points };
    let mut j = 0usize;
    while points.len() < wanted && k > 0 {
        let z = if k == 1 {
            vec![if j % 2 == 0 { 1.0 } else { -1.0 }]
        } else {
            let g = gaussian_vec(&mut rng, k);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            g.into_iter().map(|v| v / norm).collect()
        };
        j += 1;
        let zero = vec![0.0; k];
        let dir: Vec<f64> = embed(&z).iter().zip(embed(&zero)).map(|(a, b)| a - b).collect();
        let t = region::exit_along(region, &x0, &dir);
        points.push(x0.iter().zip(&dir).map(|(a, u)| a + t * u).collect());
    }
    Ok(FiberSample { y: y.to_vec(), points: PointSet::new(points)? })
}

/// Chebyshev radius of a sampled fiber `N^{-1}(y) ∩ A`.
pub fn local_radius(
    n: &InformationOperator,
    y: &[f64],
    region: &dyn Region,
    space: &NormedSpace,
    n_points: usize,
    seed: u64,
) -> Result<RadiusCertificate> {
    local_radius_at(n, y, region, space, n_points, seed, 0)
}

fn local_radius_at(
    n: &InformationOperator,
    y: &[f64],
    region: &dyn Region,
    space: &NormedSpace,
    n_points: usize,
    seed: u64,
    index: u64,
) -> Result<RadiusCertificate> {
    let sample = sample_fiber_at(n, y, region, n_points, seed, index)?;
    radius_center(&sample.points, space, SOLVER_TOL, SOLVER_ITERS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstRadius {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Local radius per grid point; `None` where the fiber is empty.
    pub per_y: Vec<Option<f64>>,
}

/// Grid maximum of the local radius. Empty fibers (values outside `N(A)`)
/// are skipped; an entirely empty grid is an error.
pub fn worst_radius(
    n: &InformationOperator,
    region: &dyn Region,
    space: &NormedSpace,
    y_grid: &[Vec<f64>],
    n_points: usize,
    seed: u64,
) -> Result<WorstRadius> {
    let per_y: Vec<Option<f64>> = y_grid
        .par_iter()
        .enumerate()
        .map(|(i, y)| match local_radius_at(n, y, region, space, n_points, seed, i as u64) {
            Ok(c) => Ok(Some(c.radius)),
            Err(Error::EmptyFiber { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in per_y.iter().enumerate() {
        if let Some(r) = *r {
            if best.map_or(true, |(_, b)| r > b) {
                best = Some((i, r));
            }
        }
    }
    let (i, value) = best.ok_or_else(|| Error::EmptyFiber { y: y_grid.first().cloned().unwrap_or_default() })?;
    Ok(WorstRadius { value, argmax: y_grid[i].clone(), per_y })
}

/// Smallest worst-case radius over a finite list of candidate operators.
pub fn best_operator(
    candidates: &[InformationOperator],
    region: &dyn Region,
    space: &NormedSpace,
    y_grid: &[Vec<f64>],
    n_points: usize,
    seed: u64,
) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, n) in candidates.iter().enumerate() {
        let w = worst_radius(n, region, space, y_grid, n_points, seed)?.value;
        if best.map_or(true, |(_, b)| w < b) {
            best = Some((i, w));
        }
    }
    best.ok_or_else(|| Error::invalid("no candidate operators"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbBudget {
    pub measure_samples: usize,
    pub n_points: usize,
    pub bisection_steps: usize,
    pub seed: u64,
}

impl Default for ProbBudget {
    fn default() -> Self {
        ProbBudget { measure_samples: 200_000, n_points: 32, bisection_steps: 50, seed: 0 }
    }
}

/// Upper bound on the probabilistic radius at level `delta`, certified by a
/// set `A(theta)` whose measure has Wilson lower bound at least `1 - delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbRadiusEstimate {
    pub delta: f64,
    pub bound: f64,
    pub theta: f64,
    pub measure_hat: f64,
    pub measure_ci: Interval,
    pub samples: usize,
}

/// Bisects the family parameter for the largest exclusion whose measure
/// still passes `1 - delta` at 95% confidence, then returns the worst local
/// radius over what is left.
///
/// All `theta` are judged on one common sample, so the chosen parameter and
/// the bound are monotone in `delta`.
pub fn prob_radius_upper(
    n: &InformationOperator,
    family: &dyn ExcludedSetFamily,
    delta: f64,
    space: &NormedSpace,
    budget: &ProbBudget,
) -> Result<ProbRadiusEstimate> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::invalid("delta must lie in [0, 1]"));
    }
    let (t_lo, t_hi) = family.theta_range();
    if delta >= 1.0 {
        return Ok(ProbRadiusEstimate {
            delta,
            bound: 0.0,
            theta: t_hi,
            measure_hat: 0.0,
            measure_ci: Interval::new(0.0, 1.0),
            samples: 0,
        });
    }
    let worst_at = |theta: f64| -> Result<f64> {
        let region = family.region(theta);
        Ok(worst_radius(n, region.as_ref(), space, &family.y_grid(theta), budget.n_points, budget.seed)?.value)
    };
    if delta == 0.0 {
        return Ok(ProbRadiusEstimate {
            delta,
            bound: worst_at(t_lo)?,
            theta: t_lo,
            measure_hat: 1.0,
            measure_ci: Interval::new(1.0, 1.0),
            samples: 0,
        });
    }
    if budget.measure_samples == 0 {
        return Err(Error::invalid("measure_samples must be positive"));
    }
    let samples = family_samples(family, budget.measure_samples, budget.seed)?;
    let total = samples.len() as u64;
    let measure = |theta: f64| -> (u64, Interval) {
        let region = family.region(theta);
        let hits = samples.iter().filter(|x| region.contains(x)).count() as u64;
        (hits, wilson(hits, total, Z95))
    };
    let target = 1.0 - delta;
    if measure(t_lo).1.lo < target {
        return Err(Error::Infeasible(format!(
            "measure 1 - {delta} cannot be certified with {total} samples"
        )));
    }
    let theta = if measure(t_hi).1.lo >= target {
        t_hi
    } else {
        let (mut a, mut b) = (t_lo, t_hi);
        for _ in 0..budget.bisection_steps {
            let mid = 0.5 * (a + b);
            if measure(mid).1.lo >= target {
                a = mid;
            } else {
                b = mid;
            }
        }
        a
    };
    let (hits, ci) = measure(theta);
    Ok(ProbRadiusEstimate {
        delta,
        bound: worst_at(theta)?,
        theta,
        measure_hat: hits as f64 / total as f64,
        measure_ci: ci,
        samples: total as usize,
    })
}

fn family_samples(family: &dyn ExcludedSetFamily, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    const CHUNK: usize = 4096;
    let chunks = count.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, streams::REGION_MEASURE, c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| family.sample_measure(&mut rng)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub scale: f64,
    pub max_abs_change: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub baseline: f64,
    /// False when `y` sits at the edge of `N(A)` (a nearby fiber is empty) or
    /// the local radius vanishes; the continuity regime does not apply there.
    pub interior: bool,
    pub rows: Vec<PerturbationRow>,
}

const PERTURBATION_TRIALS: u64 = 8;

/// Local-radius changes under random perturbations of both the functionals
/// and `y` of size `scale`. Fiber points are drawn with the same seed
/// throughout, so `scale = 0` reproduces the baseline exactly.
pub fn perturbation_probe(
    n: &InformationOperator,
    y: &[f64],
    scales: &[f64],
    region: &dyn Region,
    space: &NormedSpace,
    n_points: usize,
    seed: u64,
) -> Result<PerturbationReport> {
    let baseline = local_radius(n, y, region, space, n_points, seed)?.radius;
    let margin = scales.iter().cloned().fold(1e-3, f64::max) * 2.0;
    let mut interior = baseline > 1e-9;
    for i in 0..y.len() {
        for s in [-1.0, 1.0] {
            let mut yy = y.to_vec();
            yy[i] += s * margin;
            if matches!(sample_fiber(n, &yy, region, 1, seed), Err(Error::EmptyFiber { .. })) {
                interior = false;
            }
        }
    }
    let mut rows = Vec::with_capacity(scales.len());
    for (si, &scale) in scales.iter().enumerate() {
        if !(scale >= 0.0) {
            return Err(Error::invalid("scales must be nonnegative"));
        }
        let mut worst = 0.0f64;
        for trial in 0..PERTURBATION_TRIALS {
            let mut rng = stream_rng(seed, streams::PERTURBATION, si as u64 * PERTURBATION_TRIALS + trial);
            let dn: Vec<Vec<f64>> = (0..n.cardinality())
                .map(|_| gaussian_vec(&mut rng, n.dim()).into_iter().map(|v| v * scale).collect())
                .collect();
            let yy: Vec<f64> = y.iter().map(|v| v + scale * rng.sample::<f64, _>(StandardNormal)).collect();
            let pn = n.perturbed(&dn)?;
            match local_radius(&pn, &yy, region, space, n_points, seed) {
                Ok(c) => worst = worst.max((c.radius - baseline).abs()),
                Err(Error::EmptyFiber { .. }) => {
                    interior = false;
                    worst = worst.max(baseline);
                }
                Err(e) => return Err(e),
            }
        }
        let max_ratio = if scale > 0.0 { worst / scale } else { 0.0 };
        rows.push(PerturbationRow { scale, max_abs_change: worst, max_ratio });
    }
    Ok(PerturbationReport { baseline, interior, rows })
}

/// `count` evenly spaced scalar observations on `[lo, hi]`, as 1-vectors.
pub fn scalar_grid(lo: f64, hi: f64, count: usize) -> Vec<Vec<f64>> {
    if count <= 1 {
        return vec![vec![0.5 * (lo + hi)]];
    }
    (0..count).map(|i| vec![lo + (hi - lo) * i as f64 / (count - 1) as f64]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> Ball {
        Ball::unit(2)
    }

    fn x1() -> InformationOperator {
        InformationOperator::coordinate(2, 0)
    }

    #[test]
    fn chord_radii() {
        let e = NormedSpace::euclidean(2);
        for (y, want) in [(0.0, 1.0), (0.6, 0.8), (1.0, 0.0)] {
            let r = local_radius(&x1(), &[y], &disk(), &e, 16, 1).unwrap().radius;
            assert!((r - want).abs() < 1e-9, "y={y}: {r}");
        }
    }

    #[test]
    fn empty_fiber_reported() {
        let e = NormedSpace::euclidean(2);
        assert!(matches!(local_radius(&x1(), &[1.5], &disk(), &e, 4, 1), Err(Error::EmptyFiber { .. })));
    }

    #[test]
    fn fiber_points_satisfy_information() {
        let n = InformationOperator::new(vec![vec![1.0, 1.0, 0.0]]).unwrap();
        let s = sample_fiber(&n, &[0.3], &Ball::unit(3), 20, 9).unwrap();
        assert_eq!(s.points.len(), 20);
        for p in s.points.iter() {
            assert!((n.apply(p)[0] - 0.3).abs() < 1e-12);
            assert!(p.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn fiber_off_base_point() {
        // base point (0.9, 0) is removed; the sampler must search the fiber
        let a = Minus(disk(), Slab { dim: 2, axis: 1, half_width: 0.1, closed: true });
        let r = local_radius(&x1(), &[0.0], &a, &NormedSpace::euclidean(2), 8, 3).unwrap();
        assert!((r.radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn worst_radius_examples() {
        let e = NormedSpace::euclidean(2);
        let grid = scalar_grid(-1.0, 1.0, 41);
        let w = worst_radius(&x1(), &disk(), &e, &grid, 8, 1).unwrap();
        assert!((w.value - 1.0).abs() < 1e-9);
        let both = InformationOperator::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let grid2: Vec<Vec<f64>> = (0..9).flat_map(|i| (0..9).map(move |j| vec![i as f64 / 4.0 - 1.0, j as f64 / 4.0 - 1.0])).collect();
        assert_eq!(worst_radius(&both, &disk(), &e, &grid2, 8, 1).unwrap().value, 0.0);
        let sq = Cube { dim: 2, half_width: 1.0 };
        assert!((worst_radius(&x1(), &sq, &e, &grid, 8, 1).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn slab_family_bound() {
        let e = NormedSpace::euclidean(2);
        let fam = SlabFamily::new(401);
        let budget = ProbBudget { measure_samples: 400_000, ..ProbBudget::default() };
        let est = prob_radius_upper(&x1(), &fam, 0.1, &e, &budget).unwrap();
        // slab area fraction (2/pi)(t sqrt(1-t^2) + asin t) = 0.1 gives t = 0.078621
        assert!((est.bound - 0.996_904_6).abs() < 2e-3, "{est:?}");
        assert!(est.measure_ci.lo >= 0.9);
        assert!((prob_radius_upper(&x1(), &fam, 0.0, &e, &budget).unwrap().bound - 1.0).abs() < 1e-9);
        assert_eq!(prob_radius_upper(&x1(), &fam, 1.0, &e, &budget).unwrap().bound, 0.0);
    }

    #[test]
    fn perturbation_examples() {
        let e = NormedSpace::euclidean(2);
        let rep = perturbation_probe(&x1(), &[0.0], &[0.0, 1e-3], &disk(), &e, 8, 5).unwrap();
        assert!(rep.interior);
        assert!(rep.rows[0].max_abs_change <= 1e-12);
        assert!(rep.rows[1].max_abs_change <= 5e-3);
        let edge = perturbation_probe(&x1(), &[0.999], &[1e-3], &disk(), &e, 8, 5).unwrap();
        assert!(!edge.interior);
    }
}
