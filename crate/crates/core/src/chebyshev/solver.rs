//! Minimizes `c -> max_i |x_i - c|` over the bounding box of the points.
//!
//! Every evaluated iterate contributes linear minorants
//! `|x_i - c'| >= |x_i - c| + <g, c' - c>` for its far points. Two kinds of
//! trial points are generated each round: a projected subgradient step with
//! Polyak length (targeting the current lower bound) from the best iterate,
//! and the minimizer of the cutting-plane model. The lower bound is the dual
//! value of the cutting-plane model, recomputed exactly from LP weights, so
//! it does not depend on LP round-off.
//!
//! For absolute norms, clamping a center into the bounding box never moves it
//! away from any point coordinate-wise, so an optimal center lies in the box.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{PointSet, RadiusCertificate};
use crate::error::{Error, Result};
use crate::spaces::NormedSpace;

const MAX_CUTS: usize = 400;

struct Cut {
    offset: f64,
    slope: Vec<f64>,
}

struct State<'a> {
    points: &'a PointSet,
    space: &'a NormedSpace,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cuts: Vec<Cut>,
    best: Vec<f64>,
    best_value: f64,
    best_slope: Vec<f64>,
    lower: f64,
}

impl State<'_> {
    /// Evaluates `c`, records cuts for its far points, updates the incumbent.
    fn visit(&mut self, c: &[f64]) {
        let dists: Vec<f64> = self.points.iter().map(|p| self.space.distance(c, p)).collect();
        let value = dists.iter().cloned().fold(0.0, f64::max);
        let band = (0.5 * (value - self.lower)).max(1e-12 * (1.0 + value));
        let mut far: Vec<usize> = (0..dists.len()).filter(|&i| dists[i] >= value - band).collect();
        far.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
        far.truncate(2 * self.points.dim() + 2);

        let mut top_slope = None;
        for &i in &far {
            let diff: Vec<f64> = c.iter().zip(&self.points.points()[i]).map(|(a, b)| a - b).collect();
            let g = self.space.subgradient(&diff);
            let offset = dists[i] - dot(&g, c);
            if top_slope.is_none() {
                top_slope = Some(g.clone());
            }
            self.cuts.push(Cut { offset, slope: g });
        }
        if self.cuts.len() > MAX_CUTS {
            let excess = self.cuts.len() - MAX_CUTS;
            self.cuts.drain(..excess);
        }
        if value < self.best_value {
            self.best_value = value;
            self.best = c.to_vec();
            self.best_slope = top_slope.unwrap_or_else(|| vec![0.0; c.len()]);
        }
    }

    fn project(&self, c: &mut [f64]) {
        for k in 0..c.len() {
            c[k] = c[k].clamp(self.lo[k], self.hi[k]);
        }
    }

    /// Minimizer of the cutting-plane model over the box.
    fn model_minimizer(&self) -> Option<Vec<f64>> {
        let d = self.lo.len();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = (0..d).map(|k| lp.add_var(0.0, (self.lo[k], self.hi[k]))).collect();
        let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        for cut in &self.cuts {
            let mut expr: Vec<_> = vars.iter().zip(&cut.slope).map(|(&v, &g)| (v, -g)).collect();
            expr.push((t, 1.0));
            lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, cut.offset);
        }
        let sol = lp.solve().ok()?.into_solution().ok()?;
        Some(vars.iter().map(|&v| sol.var_value(v)).collect())
    }

    /// Lower bound `sum_j w_j a_j + min_{c in box} <sum_j w_j g_j, c>` for the
    /// LP-optimal dual weights `w`.
    fn dual_bound(&self) -> Option<f64> {
        let d = self.lo.len();
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let weights: Vec<_> = self.cuts.iter().map(|c| lp.add_var(c.offset, (0.0, f64::INFINITY))).collect();
        let plus: Vec<_> = (0..d).map(|k| lp.add_var(self.lo[k], (0.0, f64::INFINITY))).collect();
        let minus: Vec<_> = (0..d).map(|k| lp.add_var(-self.hi[k], (0.0, f64::INFINITY))).collect();
        let ones: Vec<_> = weights.iter().map(|&w| (w, 1.0)).collect();
        lp.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
        for k in 0..d {
            let mut expr: Vec<_> = weights.iter().zip(&self.cuts).map(|(&w, c)| (w, c.slope[k])).collect();
            expr.push((plus[k], -1.0));
            expr.push((minus[k], 1.0));
            lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, 0.0);
        }
        let sol = lp.solve().ok()?.into_solution().ok()?;
        let mut w: Vec<f64> = weights.iter().map(|&v| sol.var_value(v).max(0.0)).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= total);
        let mut bound: f64 = w.iter().zip(&self.cuts).map(|(wi, c)| wi * c.offset).sum();
        for k in 0..d {
            let g: f64 = w.iter().zip(&self.cuts).map(|(wi, c)| wi * c.slope[k]).sum();
            bound += (g * self.lo[k]).min(g * self.hi[k]);
        }
        Some(bound)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest half pairwise distance; exhaustive for small sets, farthest-point
/// chains otherwise.
fn pair_lower_bound(points: &PointSet, space: &NormedSpace, start: &[f64]) -> f64 {
    let pts = points.points();
    if pts.len() <= 200 {
        let mut best = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max(space.distance(&pts[i], &pts[j]));
            }
        }
        return 0.5 * best;
    }
    let farthest = |from: &[f64]| -> (usize, f64) {
        pts.iter()
            .enumerate()
            .map(|(i, p)| (i, space.distance(from, p)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    };
    let mut a = farthest(start).0;
    let mut best = 0.0f64;
    for _ in 0..4 {
        let (b, d) = farthest(&pts[a]);
        best = best.max(d);
        a = b;
    }
    0.5 * best
}

/// Chebyshev radius and center of `points` in `space`.
///
/// Stops as soon as `upper - lower <= tol`. Running out of iterations is not an
/// error: the returned certificate has `converged == false` and `gap > tol`.
/// In norms that are not strictly convex the center need not be unique; the
/// first center reaching the tolerance is returned.
pub fn radius_center(points: &PointSet, space: &NormedSpace, tol: f64, max_iters: usize) -> Result<RadiusCertificate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    if let Some(dim) = space.dim() {
        if dim != points.dim() {
            return Err(Error::DimensionMismatch { expected: dim, got: points.dim() });
        }
    }
    if space.is_path_space() && !matches!(space.kind(), crate::spaces::SpaceKind::SupNormPath) {
        return Err(Error::Unsupported("radius_center needs a vector norm".into()));
    }
    let bb = points.bounding_box();
    let start: Vec<f64> = bb.lo.iter().zip(&bb.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    if points.len() == 1 {
        return Ok(RadiusCertificate::exact(0.0, points.points()[0].clone()));
    }
    let mut st = State {
        points,
        space,
        lo: bb.lo,
        hi: bb.hi,
        cuts: Vec::new(),
        best: start.clone(),
        best_value: f64::INFINITY,
        best_slope: vec![0.0; points.dim()],
        lower: pair_lower_bound(points, space, &start),
    };
    st.visit(&start);
    // Vertices of the far set seed the model with a few extra cuts.
    if points.len() <= 64 {
        for p in points.points() {
            let mut q = p.clone();
            st.project(&mut q);
            st.visit(&q);
        }
    }

    let mut iterations = 0;
    while iterations < max_iters && st.best_value - st.lower > tol {
        iterations += 1;
        if let Some(b) = st.dual_bound() {
            st.lower = st.lower.max(b.min(st.best_value));
        }
        if st.best_value - st.lower <= tol {
            break;
        }
        if let Some(z) = st.model_minimizer() {
            st.visit(&z);
        }
        let g = st.best_slope.clone();
        let g2 = dot(&g, &g);
        if g2 > 0.0 {
            let step = (st.best_value - st.lower) / g2;
            let mut c: Vec<f64> = st.best.iter().zip(&g).map(|(x, gi)| x - step * gi).collect();
            st.project(&mut c);
            st.visit(&c);
        }
    }

    let upper = st.best_value;
    let lower = st.lower.min(upper);
    let gap = upper - lower;
    Ok(RadiusCertificate {
        radius: upper,
        center: st.best,
        upper,
        lower,
        gap,
        converged: gap <= tol,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pts: &[&[f64]]) -> PointSet {
        PointSet::new(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn two_points_midpoint() {
        let cert = radius_center(&set(&[&[0.0, 0.0], &[3.0, 4.0]]), &NormedSpace::euclidean(2), 1e-9, 500).unwrap();
        assert!(cert.converged);
        assert!((cert.radius - 2.5).abs() < 1e-9);
        assert!((cert.center[0] - 1.5).abs() < 1e-4 && (cert.center[1] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn equilateral_circumradius() {
        let h = 3f64.sqrt() / 2.0;
        let cert = radius_center(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]), &NormedSpace::euclidean(2), 1e-9, 500).unwrap();
        assert!(cert.converged, "{cert:?}");
        assert!((cert.radius - 1.0 / 3f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn max_norm_diagonal_pair() {
        let cert = radius_center(&set(&[&[0.0, 0.0], &[1.0, 1.0]]), &NormedSpace::max_norm(2), 1e-9, 500).unwrap();
        assert!(cert.converged);
        assert!((cert.radius - 0.5).abs() < 1e-9);
        assert!(cert.lower <= cert.radius && cert.gap <= 1e-9);
    }

    #[test]
    fn single_point() {
        let cert = radius_center(&set(&[&[1.0, 2.0]]), &NormedSpace::euclidean(2), 1e-9, 10).unwrap();
        assert_eq!(cert.radius, 0.0);
        assert_eq!(cert.center, vec![1.0, 2.0]);
    }

    #[test]
    fn iteration_budget_flags_non_convergence() {
        let h = 3f64.sqrt() / 2.0;
        let cert = radius_center(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]), &NormedSpace::lp(4.0, 2).unwrap(), 1e-15, 1).unwrap();
        assert!(!cert.converged);
        assert!(cert.gap > 1e-15);
        assert!(cert.lower <= cert.upper);
    }

    #[test]
    fn dimension_checks() {
        assert!(radius_center(&set(&[&[0.0, 0.0]]), &NormedSpace::euclidean(3), 1e-6, 10).is_err());
        assert!(radius_center(&set(&[&[0.0, 0.0]]), &NormedSpace::euclidean(2), 0.0, 10).is_err());
    }
}
