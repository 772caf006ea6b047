//! Exact fiber errors for the observation `N f = f(1/2)` over the
//! ball-conditioned path space, under `|f - c|_sup + |f(1/2) - c(1/2)|`.
//!
//! Over the continuum fiber the constraints are pointwise: `|f(t)| <= 1`
//! everywhere, plus `|f(t) - y| <= 1` inside the window for `F(m)`.
//! Continuous paths can take any admissible value arbitrarily close to any
//! time, so the supremum of `|f(t) - c(t)|` on a segment is the envelope of
//! the admissible range against the linear center, maximal at an endpoint.
//! Every node `k` therefore carries an envelope `|c_k - a_k| + b_k`:
//! `a = 0, b = 1` when it touches a segment where only `|f| <= 1` binds, and
//! `a, b` = midpoint, half-length of `[max(-1, y-1), min(1, y+1)]` otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{estimate_delta_curve, DeltaEstimate, WienerConfig};
use crate::chebyshev::RadiusCertificate;
use crate::error::{Error, Result};
use crate::stats::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberConstraint {
    Full,
    Window { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub y: f64,
    pub constraint: FiberConstraint,
}

impl FiberSpec {
    pub fn full(y: f64) -> Self {
        FiberSpec { y, constraint: FiberConstraint::Full }
    }

    pub fn window(y: f64, m: usize) -> Self {
        FiberSpec { y, constraint: FiberConstraint::Window { m } }
    }
}

/// Node values of a piecewise-linear center on the uniform grid `k / T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearCenter {
    pub values: Vec<f64>,
}

impl PiecewiseLinearCenter {
    pub fn zero(intervals: usize) -> Self {
        PiecewiseLinearCenter { values: vec![0.0; intervals + 1] }
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    /// Linear interpolation at `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.intervals();
        let x = (t.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let s = x - k as f64;
        self.values[k] * (1.0 - s) + self.values[k + 1] * s
    }
}

/// Per-node envelope offsets `a_k` and floors `b_k`.
struct Envelope {
    a: Vec<f64>,
    b: Vec<f64>,
    half: usize,
    y: f64,
}

impl Envelope {
    fn new(fiber: &FiberSpec, intervals: usize) -> Result<Self> {
        let y = fiber.y;
        if !(y.abs() <= 1.0) {
            return Err(Error::invalid("observation must lie in [-1, 1]"));
        }
        if intervals < 2 || intervals % 2 != 0 {
            return Err(Error::invalid("center grid needs an even number of intervals"));
        }
        let half = intervals / 2;
        let mut a = vec![0.0; intervals + 1];
        let mut b = vec![1.0; intervals + 1];
        if let FiberConstraint::Window { m } = fiber.constraint {
            if m < 2 || intervals % m != 0 {
                return Err(Error::MisalignedWindow { m, intervals });
            }
            let w = intervals / m;
            let lo = (y - 1.0).max(-1.0);
            let hi = (y + 1.0).min(1.0);
            let in_window = |k: usize| k.abs_diff(half) <= w;
            for k in 0..=intervals {
                let left_out = k > 0 && !(in_window(k - 1) && in_window(k));
                let right_out = k < intervals && !(in_window(k) && in_window(k + 1));
                if !left_out && !right_out {
                    a[k] = 0.5 * (lo + hi);
                    b[k] = 0.5 * (hi - lo);
                }
            }
        }
        Ok(Envelope { a, b, half, y })
    }

    fn value(&self, c: &[f64]) -> f64 {
        let top = c.iter().zip(self.a.iter().zip(&self.b)).fold(f64::NEG_INFINITY, |m, (ck, (ak, bk))| m.max((ck - ak).abs() + bk));
        top + (self.y - c[self.half]).abs()
    }

    /// `max_k b_k` and the node-1/2 envelope coupled with the point term.
    fn lower_bound(&self) -> f64 {
        let floor = self.b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        floor.max(self.b[self.half] + (self.y - self.a[self.half]).abs())
    }
}

/// Exact supremum of the error over the continuum fiber.
pub fn fiber_sup_error(center: &PiecewiseLinearCenter, fiber: &FiberSpec) -> Result<f64> {
    let env = Envelope::new(fiber, center.intervals())?;
    if center.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("center values must be finite"));
    }
    Ok(env.value(&center.values))
}

/// Tent center: `y` at 1/2, zero for `|t - 1/2| >= 1/m`, linear in between.
pub fn tent_center(y: f64, m: usize, cfg: &WienerConfig) -> Result<PiecewiseLinearCenter> {
    let w = cfg.window_nodes(m)?;
    let half = cfg.half();
    let values = (0..=cfg.intervals)
        .map(|k| {
            let d = k.abs_diff(half);
            if d >= w {
                0.0
            } else {
                y * (1.0 - d as f64 / w as f64)
            }
        })
        .collect();
    Ok(PiecewiseLinearCenter { values })
}

/// Minimizes [`fiber_sup_error`] over node values by projected-free
/// subgradient steps of Polyak length aimed at the certified lower bound.
///
/// Tied maximal nodes share the step (their averaged signs form an
/// approximate minimum-norm subgradient). The lower bound `max(max_k b_k,
/// b_half + |y - a_half|)` is attained by `c_k = a_k` off 1/2 and
/// `c(1/2) = y`, so the gap closes in finitely many steps.
pub fn optimize_center(fiber: &FiberSpec, cfg: &WienerConfig, tol: f64, max_iters: usize) -> Result<RadiusCertificate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let env = Envelope::new(fiber, cfg.intervals)?;
    let lower = env.lower_bound();
    let n = cfg.intervals + 1;
    let mut c = vec![0.0; n];
    let mut best = c.clone();
    let mut best_value = env.value(&c);
    let mut iterations = 0;
    while iterations < max_iters && best_value - lower > tol {
        iterations += 1;
        let f = env.value(&c);
        let top = f - (env.y - c[env.half]).abs();
        let active: Vec<usize> = (0..n).filter(|&k| (c[k] - env.a[k]).abs() + env.b[k] >= top - 1e-12).collect();
        let mut d = vec![0.0; n];
        if active.iter().all(|&k| c[k] != env.a[k]) {
            for &k in &active {
                d[k] = (c[k] - env.a[k]).signum() / active.len() as f64;
            }
        }
        if c[env.half] != env.y {
            d[env.half] += (c[env.half] - env.y).signum();
        }
        let mut d2: f64 = d.iter().map(|v| v * v).sum();
        if d2 == 0.0 {
            // fall back to a single steepest node
            if let Some(&k) = active.iter().find(|&&k| c[k] != env.a[k]) {
                d[k] = (c[k] - env.a[k]).signum();
                d2 = 1.0;
            } else {
                break;
            }
        }
        let step = (f - lower) / d2;
        for (ck, dk) in c.iter_mut().zip(&d) {
            *ck -= step * dk;
        }
        let v = env.value(&c);
        if v < best_value {
            best_value = v;
            best = c.clone();
        }
    }
    let gap = (best_value - lower).max(0.0);
    Ok(RadiusCertificate {
        radius: best_value,
        center: best,
        upper: best_value,
        lower,
        gap,
        converged: gap <= tol,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerWorst {
    pub value: f64,
    pub per_y: Vec<(f64, f64)>,
    pub converged: bool,
}

const OPT_ITERS: usize = 10_000;

fn radii_over(grid: &[f64], make: impl Fn(f64) -> FiberSpec + Sync, cfg: &WienerConfig, tol: f64) -> Result<WienerWorst> {
    if grid.is_empty() {
        return Err(Error::invalid("y grid is empty"));
    }
    let certs = grid
        .par_iter()
        .map(|&y| optimize_center(&make(y), cfg, tol, OPT_ITERS))
        .collect::<Result<Vec<_>>>()?;
    let per_y: Vec<(f64, f64)> = grid.iter().zip(&certs).map(|(y, c)| (*y, c.radius)).collect();
    let value = per_y.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(WienerWorst { value, per_y, converged: certs.iter().all(|c| c.converged) })
}

/// Grid maximum over `y` of the optimal fiber error on the full ball.
pub fn worst_case_radius_wiener(cfg: &WienerConfig, y_grid: &[f64], tol: f64) -> Result<WienerWorst> {
    cfg.validate()?;
    radii_over(y_grid, FiberSpec::full, cfg, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerProbBound {
    pub delta: f64,
    pub m: usize,
    pub bound: f64,
    pub delta_hat: f64,
    pub ci: Interval,
    pub per_y: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Picks the smallest candidate `m` with `delta_hat_m + 2 * halfwidth <= delta`
/// and returns the worst fiber radius over `F(m)`.
pub fn prob_radius_upper_wiener(
    delta: f64,
    cfg: &WienerConfig,
    m_candidates: &[usize],
    y_grid: &[f64],
    tol: f64,
) -> Result<WienerProbBound> {
    let curve = estimate_delta_curve(m_candidates, cfg)?;
    select_window(delta, &curve.estimates, cfg, y_grid, tol)
}

pub(crate) fn select_window(
    delta: f64,
    estimates: &[DeltaEstimate],
    cfg: &WienerConfig,
    y_grid: &[f64],
    tol: f64,
) -> Result<WienerProbBound> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1]"));
    }
    let mut sorted: Vec<&DeltaEstimate> = estimates.iter().collect();
    sorted.sort_by_key(|e| e.m);
    let chosen = sorted
        .into_iter()
        .find(|e| e.delta_hat + 2.0 * e.ci.half_width() <= delta)
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "no candidate window certifies delta = {delta}; use larger m or more samples"
            ))
        })?;
    let m = chosen.m;
    let w = radii_over(y_grid, |y| FiberSpec::window(y, m), cfg, tol)?;
    Ok(WienerProbBound {
        delta,
        m,
        bound: w.value,
        delta_hat: chosen.delta_hat,
        ci: chosen.ci,
        per_y: w.per_y,
        converged: w.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t: usize) -> WienerConfig {
        WienerConfig::new(t, 1000, 1).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let zero = PiecewiseLinearCenter::zero(64);
        assert_eq!(fiber_sup_error(&zero, &FiberSpec::full(1.0)).unwrap(), 2.0);
        assert_eq!(fiber_sup_error(&zero, &FiberSpec::full(0.0)).unwrap(), 1.0);
        let tent = tent_center(1.0, 8, &cfg(64)).unwrap();
        assert!((fiber_sup_error(&tent, &FiberSpec::window(1.0, 8)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tent_shape() {
        let t = tent_center(1.0, 4, &cfg(8)).unwrap();
        assert_eq!(t.values, vec![0.0, 0.0, 0.0, 0.5, 1.0, 0.5, 0.0, 0.0, 0.0]);
        assert!(tent_center(0.0, 4, &cfg(8)).unwrap().values.iter().all(|v| *v == 0.0));
        assert!((t.eval(0.4375) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn error_is_at_least_one() {
        let mut c = PiecewiseLinearCenter::zero(32);
        for (k, v) in c.values.iter_mut().enumerate() {
            *v = (k as f64 * 0.37).sin() * 0.8;
        }
        for fib in [FiberSpec::full(0.2), FiberSpec::window(-0.7, 4), FiberSpec::window(1.0, 32)] {
            assert!(fiber_sup_error(&c, &fib).unwrap() >= 1.0);
        }
    }

    #[test]
    fn optimizer_hits_closed_form() {
        let c = cfg(256);
        for y in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let full = optimize_center(&FiberSpec::full(y), &c, 1e-9, 1000).unwrap();
            assert!(full.converged && (full.radius - (1.0 + f64::abs(y))).abs() < 1e-9);
            let win = optimize_center(&FiberSpec::window(y, 8), &c, 1e-9, 1000).unwrap();
            assert!(win.converged && (win.radius - 1.0).abs() < 1e-9, "{y}: {win:?}");
        }
    }

    #[test]
    fn misaligned_window_rejected() {
        let zero = PiecewiseLinearCenter::zero(64);
        assert!(matches!(fiber_sup_error(&zero, &FiberSpec::window(0.0, 3)), Err(Error::MisalignedWindow { .. })));
    }

    #[test]
    fn degenerate_grid_gives_one() {
        let w = worst_case_radius_wiener(&cfg(64), &[0.0], 1e-9).unwrap();
        assert!((w.value - 1.0).abs() < 1e-12);
    }
}
