//! p-average radii of information by Monte Carlo, with the per-cell
//! recovery map `h(y)` fitted to the empirical p-mean.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::information::{InformationOperator, ProbRadiusEstimate, Region};
use crate::rng::{stream_rng, streams};
use crate::spaces::NormedSpace;
use crate::stats::{quantile_sorted, Interval};

/// A probability measure on `R^d` that can be sampled.
pub trait MeasureSampler: Send + Sync {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;
}

/// Uniform measure on a bounded region, by rejection from its bounding cube.
pub struct UniformOn<R>(pub R);

const UNIFORM_TRIES: usize = 1_000_000;

impl<R: Region> MeasureSampler for UniformOn<R> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let r = self.0.bounding_radius();
        if !r.is_finite() {
            return Err(Error::invalid("uniform measure needs a bounded region"));
        }
        for _ in 0..UNIFORM_TRIES {
            let x: Vec<f64> = (0..self.0.dim()).map(|_| rng.gen_range(-r..=r)).collect();
            if self.0.contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::SamplingBudget { budget: UNIFORM_TRIES as u64 })
    }
}

/// Dirac measure.
pub struct PointMass(pub Vec<f64>);

impl MeasureSampler for PointMass {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn sample(&self, _rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

/// The recovery value used for one cell of observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCenter {
    pub cell: Vec<usize>,
    pub count: usize,
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PAverageResult {
    pub p: f64,
    pub estimate: f64,
    pub ci95: Interval,
    pub n_samples: usize,
    pub local_centers: Vec<CellCenter>,
}

/// Cells with fewer samples are merged into a neighbor.
const MIN_CELL: usize = 8;
const BOOTSTRAP_ROUNDS: u64 = 200;

struct Sampled {
    xs: Vec<Vec<f64>>,
    /// Cell groups: sample indices and the cell label of each group.
    groups: Vec<(Vec<usize>, Vec<usize>)>,
}

fn draw(sampler: &dyn MeasureSampler, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    const CHUNK: usize = 4096;
    let parts = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, streams::P_AVERAGE, c as u64);
            (c * CHUNK..((c + 1) * CHUNK).min(n)).map(|_| sampler.sample(&mut rng)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn sample_and_bin(
    n_op: &InformationOperator,
    sampler: &dyn MeasureSampler,
    y_cells: usize,
    n: usize,
    seed: u64,
) -> Result<Sampled> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if y_cells == 0 {
        return Err(Error::invalid("y_cells must be positive"));
    }
    if sampler.dim() != n_op.dim() {
        return Err(Error::DimensionMismatch { expected: n_op.dim(), got: sampler.dim() });
    }
    let xs = draw(sampler, n, seed)?;
    let ys: Vec<Vec<f64>> = xs.iter().map(|x| n_op.apply(x)).collect();
    let k = n_op.cardinality();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for y in &ys {
        for j in 0..k {
            lo[j] = lo[j].min(y[j]);
            hi[j] = hi[j].max(y[j]);
        }
    }
    let label = |y: &[f64]| -> Vec<usize> {
        (0..k)
            .map(|j| {
                let w = hi[j] - lo[j];
                if w <= 0.0 {
                    0
                } else {
                    (((y[j] - lo[j]) / w * y_cells as f64) as usize).min(y_cells - 1)
                }
            })
            .collect()
    };
    let mut cells: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for (i, y) in ys.iter().enumerate() {
        cells.entry(label(y)).or_default().push(i);
    }
    // merge undersized cells into the following one (the last into its predecessor)
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    for (lab, mut idx) in cells {
        pending.append(&mut idx);
        if pending.len() >= MIN_CELL {
            groups.push((lab, std::mem::take(&mut pending)));
        }
    }
    if !pending.is_empty() {
        match groups.last_mut() {
            Some(g) => g.1.append(&mut pending),
            None => groups.push((vec![0; k], pending)),
        }
    }
    Ok(Sampled { xs, groups })
}

/// `(mean d^p)^(1/p)` computed with the largest distance factored out;
/// `p = inf` gives the max.
fn power_mean(d: &[f64], p: f64) -> f64 {
    let top = d.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 || d.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let s: f64 = if p.fract() == 0.0 && p <= 1024.0 {
        let e = p as i32;
        d.iter().map(|v| (v / top).powi(e)).sum()
    } else {
        d.iter().map(|v| (v / top).powf(p)).sum()
    };
    top * (s / d.len() as f64).powf(1.0 / p)
}

fn cell_objective(xs: &[Vec<f64>], idx: &[usize], space: &NormedSpace, h: &[f64], p: f64) -> f64 {
    let d: Vec<f64> = idx.iter().map(|&i| space.distance(&xs[i], h)).collect();
    power_mean(&d, p)
}

/// Descent on the convex p-mean objective with backtracking along the
/// normalized weighted subgradient.
fn fit_center(xs: &[Vec<f64>], idx: &[usize], space: &NormedSpace, p: f64, start: Vec<f64>) -> Vec<f64> {
    let dim = start.len();
    let mut h = start;
    let mut f = cell_objective(xs, idx, space, &h, p);
    let mut step = 0.5 * f.max(1e-12);
    for _ in 0..400 {
        if f == 0.0 || step < 1e-12 {
            break;
        }
        let d: Vec<f64> = idx.iter().map(|&i| space.distance(&xs[i], &h)).collect();
        let top = d.iter().cloned().fold(0.0, f64::max);
        let mut g = vec![0.0; dim];
        for (&i, &di) in idx.iter().zip(&d) {
            let w = if p.is_infinite() {
                if di >= top * (1.0 - 1e-9) { 1.0 } else { 0.0 }
            } else {
                (di / top).powf(p - 1.0)
            };
            if w == 0.0 || di == 0.0 {
                continue;
            }
            let diff: Vec<f64> = h.iter().zip(&xs[i]).map(|(a, b)| a - b).collect();
            for (gk, uk) in g.iter_mut().zip(space.subgradient(&diff)) {
                *gk += w * uk;
            }
        }
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn < 1e-300 {
            break;
        }
        loop {
            let trial: Vec<f64> = h.iter().zip(&g).map(|(a, b)| a - step * b / gn).collect();
            let ft = cell_objective(xs, idx, space, &trial, p);
            if ft < f {
                h = trial;
                f = ft;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    h
}

fn cell_mean(xs: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let dim = xs[idx[0]].len();
    let mut m = vec![0.0; dim];
    for &i in idx {
        for (a, b) in m.iter_mut().zip(&xs[i]) {
            *a += b;
        }
    }
    m.iter_mut().for_each(|a| *a /= idx.len() as f64);
    m
}

/// Errors per sample against the per-cell center minimizing the cell's
/// p-mean among `candidates[cell]`.
fn evaluate(s: &Sampled, space: &NormedSpace, p: f64, candidates: &[Vec<Vec<f64>>]) -> (Vec<f64>, Vec<CellCenter>) {
    let mut errors = vec![0.0; s.xs.len()];
    let mut centers = Vec::with_capacity(s.groups.len());
    for ((lab, idx), cands) in s.groups.iter().zip(candidates) {
        let best = cands
            .iter()
            .map(|c| (cell_objective(&s.xs, idx, space, c, p), c))
            .fold(None::<(f64, &Vec<f64>)>, |acc, x| match acc {
                Some(a) if a.0 <= x.0 => Some(a),
                _ => Some(x),
            })
            .expect("nonempty candidates")
            .1;
        for &i in idx {
            errors[i] = space.distance(&s.xs[i], best);
        }
        centers.push(CellCenter { cell: lab.clone(), count: idx.len(), center: best.clone() });
    }
    (errors, centers)
}

fn bootstrap_ci(errors: &[f64], p: f64, seed: u64) -> Interval {
    let n = errors.len();
    let mut reps: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, streams::BOOTSTRAP, b);
            let draw: Vec<f64> = (0..n).map(|_| errors[rng.gen_range(0..n)]).collect();
            power_mean(&draw, p)
        })
        .collect();
    reps.sort_by(f64::total_cmp);
    Interval::new(quantile_sorted(&reps, 0.025), quantile_sorted(&reps, 0.975))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

fn fit_all(s: &Sampled, space: &NormedSpace, ps: &[f64]) -> Vec<Vec<Vec<f64>>> {
    s.groups
        .par_iter()
        .map(|(_, idx)| {
            let mean = cell_mean(&s.xs, idx);
            let mut cands = vec![mean.clone()];
            for &p in ps {
                cands.push(fit_center(&s.xs, idx, space, p, mean.clone()));
            }
            cands
        })
        .collect()
}

/// `( (1/n) sum |x_i - h(N x_i)|^p )^(1/p)` with `h` constant on cells of
/// observed values, fitted per cell. An upper estimate of the p-average
/// radius up to sampling error.
pub fn p_avg_radius(
    n_op: &InformationOperator,
    p: f64,
    sampler: &dyn MeasureSampler,
    space: &NormedSpace,
    y_cells: usize,
    n: usize,
    seed: u64,
) -> Result<PAverageResult> {
    check_p(p)?;
    let s = sample_and_bin(n_op, sampler, y_cells, n, seed)?;
    let cands = fit_all(&s, space, &[p]);
    let (errors, local_centers) = evaluate(&s, space, p, &cands);
    Ok(PAverageResult {
        p,
        estimate: power_mean(&errors, p),
        ci95: bootstrap_ci(&errors, p, seed),
        n_samples: n,
        local_centers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub delta: f64,
    pub prob_bound: f64,
    /// `prob_bound * delta^(1/p) - 2 * halfwidth`.
    pub lower: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSweepRow {
    pub p: f64,
    pub estimate: f64,
    pub ci95: Interval,
    pub checks: Vec<ChainCheck>,
    /// `estimate <= worst + 2 * halfwidth`, when a worst-case radius is given.
    pub below_worst: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSweep {
    pub rows: Vec<PSweepRow>,
    pub monotone: bool,
}

/// Estimates for every `p` on one common sample. Each cell keeps the fitted
/// centers of all `p` as candidates and every `p` uses its best candidate,
/// which makes the estimates exactly nondecreasing in `p`. `p = inf` gives
/// the sample max.
#[allow(clippy::too_many_arguments)]
pub fn p_sweep(
    n_op: &InformationOperator,
    ps: &[f64],
    sampler: &dyn MeasureSampler,
    space: &NormedSpace,
    prob_bounds: &[ProbRadiusEstimate],
    worst: Option<f64>,
    y_cells: usize,
    n: usize,
    seed: u64,
) -> Result<PSweep> {
    if ps.is_empty() {
        return Err(Error::invalid("ps is empty"));
    }
    for &p in ps {
        check_p(p)?;
    }
    if ps.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("ps must be strictly increasing"));
    }
    let s = sample_and_bin(n_op, sampler, y_cells, n, seed)?;
    let cands = fit_all(&s, space, ps);
    let mut rows = Vec::with_capacity(ps.len());
    for &p in ps {
        let (errors, _) = evaluate(&s, space, p, &cands);
        let estimate = power_mean(&errors, p);
        let ci95 = bootstrap_ci(&errors, p, seed);
        let hw = ci95.half_width();
        let checks = prob_bounds
            .iter()
            .map(|b| {
                let lower = b.bound * b.delta.powf(1.0 / p) - 2.0 * hw;
                ChainCheck { delta: b.delta, prob_bound: b.bound, lower, pass: estimate >= lower }
            })
            .collect();
        let below_worst = worst.map(|w| estimate <= w + 2.0 * hw);
        rows.push(PSweepRow { p, estimate, ci95, checks, below_worst });
    }
    let monotone = rows.windows(2).all(|w| w[0].estimate <= w[1].estimate * (1.0 + 1e-12));
    Ok(PSweep { rows, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::information::Ball;

    #[test]
    fn power_mean_basics() {
        assert_eq!(power_mean(&[0.0, 0.0], 3.0), 0.0);
        assert!((power_mean(&[1.0, 3.0], 1.0) - 2.0).abs() < 1e-15);
        assert!((power_mean(&[3.0, 4.0], 2.0) - 12.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(power_mean(&[1.0, 5.0], f64::INFINITY), 5.0);
    }

    #[test]
    fn disk_second_moment() {
        let n = InformationOperator::coordinate(2, 0);
        let r = p_avg_radius(&n, 2.0, &UniformOn(Ball::unit(2)), &NormedSpace::euclidean(2), 32, 20_000, 4).unwrap();
        // E[x2^2] = 1/4 on the uniform disk
        assert!((r.estimate - 0.5).abs() < 0.02, "{r:?}");
        assert!(r.ci95.lo <= r.estimate && r.estimate <= r.ci95.hi);
    }

    #[test]
    fn point_mass_is_zero() {
        let n = InformationOperator::coordinate(2, 0);
        let r = p_avg_radius(&n, 8.0, &PointMass(vec![0.3, 0.1]), &NormedSpace::euclidean(2), 4, 100, 1).unwrap();
        assert!(r.estimate < 1e-12);
    }

    #[test]
    fn rejects_small_p() {
        let n = InformationOperator::coordinate(2, 0);
        assert!(p_avg_radius(&n, 0.5, &PointMass(vec![0.0, 0.0]), &NormedSpace::euclidean(2), 4, 10, 1).is_err());
    }

    #[test]
    fn sweep_is_monotone() {
        let n = InformationOperator::coordinate(2, 0);
        let sw = p_sweep(
            &n,
            &[2.0, 4.0, 16.0, f64::INFINITY],
            &UniformOn(Ball::unit(2)),
            &NormedSpace::euclidean(2),
            &[],
            Some(1.0),
            16,
            5000,
            2,
        )
        .unwrap();
        assert!(sw.monotone, "{:?}", sw.rows.iter().map(|r| r.estimate).collect::<Vec<_>>());
        assert!(sw.rows.iter().all(|r| r.below_worst == Some(true)));
    }
}
