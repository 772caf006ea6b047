//! Adversarial paths for a general observation `N f = sum_j w_j f(t_j) +
//! int f rho`: a spike `f(1/2) = 1`, `f(1/2 + eta) = -1`, with a bump away
//! from 1/2 that holds `N f` fixed as `eta` shrinks.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use super::fiber::PiecewiseLinearCenter;
use super::WienerConfig;
use crate::error::{Error, Result};
use crate::spaces::GridPath;

/// Piecewise-linear density on `grid` (zero outside it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// A signed measure on `[0, 1]`: point masses `(t, w)` plus an optional density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFunctional {
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub density: Option<Density>,
}

impl DiscreteFunctional {
    fn validate(&self) -> Result<()> {
        if self.atoms.iter().any(|(t, w)| !(0.0..=1.0).contains(t) || !w.is_finite()) {
            return Err(Error::invalid("atoms need t in [0, 1] and finite weights"));
        }
        if let Some(d) = &self.density {
            if d.grid.len() != d.values.len() || d.grid.len() < 2 {
                return Err(Error::invalid("density needs matching grid and values, at least 2 nodes"));
            }
            if d.grid.windows(2).any(|w| !(w[0] < w[1])) || d.grid[0] < 0.0 || *d.grid.last().unwrap() > 1.0 {
                return Err(Error::invalid("density grid must increase within [0, 1]"));
            }
        }
        if self.total_mass() > 1.0 + 1e-12 {
            return Err(Error::invalid("functional total mass exceeds 1"));
        }
        Ok(())
    }

    /// Total variation `sum |w_j| + int |rho|`.
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|(_, w)| w.abs()).sum();
        let dens = self.density.as_ref().map_or(0.0, |d| {
            d.grid
                .windows(2)
                .zip(d.values.windows(2))
                .map(|(t, v)| {
                    let h = t[1] - t[0];
                    if v[0] * v[1] >= 0.0 {
                        0.5 * h * (v[0].abs() + v[1].abs())
                    } else {
                        0.5 * h * (v[0] * v[0] + v[1] * v[1]) / (v[0].abs() + v[1].abs())
                    }
                })
                .sum()
        });
        atoms + dens
    }

    fn mass_at_half(&self) -> f64 {
        self.atoms.iter().filter(|(t, _)| *t == 0.5).map(|(_, w)| w).sum()
    }
}

fn interp(grid: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= grid[0] {
        return if t == grid[0] { values[0] } else { 0.0 };
    }
    let last = grid.len() - 1;
    if t >= grid[last] {
        return if t == grid[last] { values[last] } else { 0.0 };
    }
    let k = grid.partition_point(|g| *g <= t) - 1;
    let s = (t - grid[k]) / (grid[k + 1] - grid[k]);
    values[k] * (1.0 - s) + values[k + 1] * s
}

fn path_at(path: &GridPath, t: f64) -> f64 {
    interp(path.grid(), path.values(), t)
}

/// `N f` for a piecewise-linear path, exact: the integrand is piecewise
/// quadratic between merged breakpoints, where Simpson's rule is exact.
pub fn functional_value(fun: &DiscreteFunctional, path: &GridPath) -> f64 {
    let mut v: f64 = fun.atoms.iter().map(|(t, w)| w * path_at(path, *t)).sum();
    if let Some(d) = &fun.density {
        let (a, b) = (d.grid[0], *d.grid.last().unwrap());
        let mut knots: Vec<f64> = d.grid.clone();
        knots.extend(path.grid().iter().cloned().filter(|t| *t > a && *t < b));
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        for w in knots.windows(2) {
            let (l, r) = (w[0], w[1]);
            let m = 0.5 * (l + r);
            let g = |t: f64| path_at(path, t) * interp(&d.grid, &d.values, t);
            // density evaluated just inside the piece to respect its support
            let gl = path_at(path, l) * interp(&d.grid, &d.values, l);
            let gr = path_at(path, r) * interp(&d.grid, &d.values, r);
            v += (r - l) / 6.0 * (gl + 4.0 * g(m) + gr);
        }
    }
    v
}

fn tent(center: f64, hw: f64, peak: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(center - hw, 0.0), (center, peak)];
    if center + hw <= 1.0 {
        pts.push((center + hw, 0.0));
    }
    pts
}

/// Path through `pts`, zero elsewhere. Pieces never straddle 1/2 unless 1/2
/// is one of their breakpoints.
fn build_path(mut pts: Vec<(f64, f64)>) -> Result<GridPath> {
    pts.push((0.0, 0.0));
    if !pts.iter().any(|p| p.0 == 0.5) {
        pts.push((0.5, 0.0));
    }
    if !pts.iter().any(|p| p.0 == 1.0) {
        pts.push((1.0, 0.0));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let (grid, values): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    GridPath::new(grid, values)
}

/// Spike of half-width `eta` at 1/2: `0` at `1/2 - eta`, `1` at 1/2, `-1` at
/// `1/2 + eta`, back to `0` at `1/2 + 2 eta`.
fn core(eta: f64) -> Vec<(f64, f64)> {
    vec![(0.5 - eta, 0.0), (0.5, 1.0), (0.5 + eta, -1.0), (0.5 + 2.0 * eta, 0.0)]
}

/// Path with `f(1/2) = 1`, `f(1/2 + eta) = -1`, `|f| <= 1`, and
/// `N f = (mass of N at 1/2)` independent of `eta`.
///
/// The compensating bump is a tent of height at most 1 placed on the
/// atom or density tent that carries the largest response, away from the
/// spike. `eta` must cover at least two steps of the configuration grid.
pub fn adversary_f_eta(fun: &DiscreteFunctional, eta: f64, cfg: &WienerConfig) -> Result<GridPath> {
    cfg.validate()?;
    fun.validate()?;
    if !(eta * cfg.intervals as f64 >= 2.0 - 1e-9) || !(0.5 + 2.0 * eta < 1.0) {
        return Err(Error::invalid(format!("eta must be at least 2 grid steps and below 1/4, got {eta}")));
    }
    let c0 = fun.mass_at_half();
    if (c0.abs() - 1.0).abs() <= 1e-12 {
        return Err(Error::Unsupported(
            "unit point mass at 1/2: the observation is f(1/2) itself and needs no adversary".into(),
        ));
    }
    let core_path = build_path(core(eta))?;
    let need = c0 - functional_value(fun, &core_path);
    if need.abs() <= 1e-15 {
        return Ok(core_path);
    }
    let (s_lo, s_hi) = (0.5 - eta, 0.5 + 2.0 * eta);
    let clear = |t: f64| if t < s_lo { s_lo - t } else if t > s_hi { t - s_hi } else { 0.0 };
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for (t, w) in &fun.atoms {
        if *w != 0.0 && *t > 0.0 && clear(*t) > 0.0 {
            candidates.push((*t, 0.5 * clear(*t).min(*t)));
        }
    }
    if fun.density.is_some() {
        for i in 1..=16 {
            let t = i as f64 / 16.0;
            if clear(t) > 0.0 {
                candidates.push((t, (1.0f64 / 32.0).min(0.5 * clear(t)).min(0.5 * t)));
            }
        }
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for (t, hw) in candidates {
        let resp = functional_value(fun, &build_path(tent(t, hw, 1.0))?);
        if best.map_or(true, |b| resp.abs() > b.2.abs()) {
            best = Some((t, hw, resp));
        }
    }
    let (t, hw, resp) = match best {
        Some(b) if b.2.abs() > 1e-12 => b,
        _ => return Err(Error::Infeasible("functional has no mass away from the spike to compensate with".into())),
    };
    let amp = need / resp;
    if amp.abs() > 1.0 {
        return Err(Error::Infeasible(format!("compensation needs bump height {amp:.3} > 1; decrease eta")));
    }
    let mut pts = core(eta);
    pts.extend(tent(t, hw, amp));
    build_path(pts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCenter {
    /// Exact worst error of `center` over the paths.
    pub error: f64,
    pub lp_value: f64,
    pub center: PiecewiseLinearCenter,
}

/// The piecewise-linear center on `intervals` uniform cells minimizing the
/// worst error `|f - c|_sup + |f(1/2) - c(1/2)|` over `paths`.
///
/// Both `f` and `c` are linear between merged breakpoints, so the continuum
/// sup is a max over finitely many points and the problem is a small LP.
pub fn best_center_error(paths: &[GridPath], intervals: usize) -> Result<BestCenter> {
    if paths.is_empty() {
        return Err(Error::invalid("no paths"));
    }
    if intervals < 2 || intervals % 2 != 0 {
        return Err(Error::invalid("center grid needs an even number of intervals"));
    }
    let mut knots: Vec<f64> = (0..=intervals).map(|k| k as f64 / intervals as f64).collect();
    for p in paths {
        knots.extend_from_slice(p.grid());
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let weights = |t: f64| -> (usize, f64) {
        let x = t * intervals as f64;
        let k = (x.floor() as usize).min(intervals - 1);
        (k, x - k as f64)
    };
    let half = intervals / 2;

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let v: Vec<_> = (0..=intervals).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let e = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for path in paths {
        let p = lp.add_var(0.0, (0.0, f64::INFINITY));
        let fh = path.value_at_half();
        lp.add_constraint([(p, 1.0), (v[half], 1.0)], ComparisonOp::Ge, fh);
        lp.add_constraint([(p, 1.0), (v[half], -1.0)], ComparisonOp::Ge, -fh);
        for &t in &knots {
            let f = path_at(path, t);
            let (k, s) = weights(t);
            // E - p + (Pv)(t) >= f  and  E - p - (Pv)(t) >= -f
            for sign in [1.0, -1.0] {
                let mut expr = vec![(e, 1.0), (p, -1.0), (v[k], sign * (1.0 - s))];
                if s != 0.0 {
                    expr.push((v[k + 1], sign * s));
                }
                lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, sign * f);
            }
        }
    }
    let sol = lp
        .solve()
        .map_err(|err| Error::Infeasible(format!("center LP failed: {err}")))?
        .into_solution()
        .map_err(|_| Error::Infeasible("center LP interrupted".into()))?;
    let center = PiecewiseLinearCenter { values: v.iter().map(|&x| sol[x]).collect() };
    let error = paths
        .iter()
        .map(|path| {
            let sup = knots.iter().map(|&t| (path_at(path, t) - center.eval(t)).abs()).fold(0.0, f64::max);
            sup + (path.value_at_half() - center.values[half]).abs()
        })
        .fold(0.0, f64::max);
    Ok(BestCenter { error, lp_value: sol.objective(), center })
}
