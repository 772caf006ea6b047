//! Small self-contained constructions: an atomic measure with zero
//! probabilistic radius, the Hilbert-ball slab gap, a cost model, and
//! convergence and null-set probes on the unit disk.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chebyshev::RadiusCertificate;
use crate::error::{Error, Result};
use crate::information::{
    prob_radius_upper, scalar_grid, worst_radius, Ball, ExcludedSetFamily, Hyperplane, InformationOperator, Minus,
    ProbBudget, Region, Singleton, Slab, SlabFamily,
};
use crate::rng::{stream_rng, streams};
use crate::spaces::NormedSpace;
use crate::stats::{wilson, Interval, Z95};

/// Discrete measure on the first coordinate: atom `q_i` carries weight `c_i`
/// and, given the atom, the second coordinate is uniform on the disk chord.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomMeasureSpec {
    pub atoms: Vec<(f64, f64)>,
    /// Number of heaviest atoms kept; chosen as the shortest prefix with mass
    /// at least `1 - delta/2` when absent.
    #[serde(default)]
    pub k_used: Option<usize>,
    /// Slope of the functional; `floor(2 / gap) + 1` when absent.
    #[serde(default)]
    pub slope: Option<f64>,
}

impl AtomMeasureSpec {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let spec = AtomMeasureSpec { atoms, k_used: None, slope: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::invalid("no atoms"));
        }
        let mut total = 0.0;
        for &(q, c) in &self.atoms {
            if !(-1.0..=1.0).contains(&q) || !(c > 0.0) {
                return Err(Error::invalid(format!("bad atom ({q}, {c})")));
            }
            total += c;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}")));
        }
        let mut qs: Vec<f64> = self.atoms.iter().map(|a| a.0).collect();
        qs.sort_by(f64::total_cmp);
        if qs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("atoms must be distinct"));
        }
        Ok(())
    }
}

/// Kept part of one chord: `E_i` as disjoint intervals of the second coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomChord {
    pub q: f64,
    pub weight: f64,
    pub kept: Vec<(f64, f64)>,
    pub trimmed_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomConstruction {
    pub delta: f64,
    pub slope: f64,
    /// Unit functional `(M, 1) / |(M, 1)|`.
    pub functional: Vec<f64>,
    pub chords: Vec<AtomChord>,
    /// Measure of the kept set.
    pub mass: f64,
    pub min_gap: f64,
    /// Pairs of chords checked for a shared fiber.
    pub pairs_checked: usize,
    /// Fibers in the scan that met the set in two or more points (must be 0).
    pub collisions: usize,
    pub certificate: RadiusCertificate,
}

fn subtract(set: &[(f64, f64)], cut: (f64, f64)) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in set {
        if cut.1 <= a || cut.0 >= b {
            out.push((a, b));
            continue;
        }
        if a < cut.0 {
            out.push((a, cut.0));
        }
        if cut.1 < b {
            out.push((cut.1, b));
        }
    }
    out
}

fn length(set: &[(f64, f64)]) -> f64 {
    set.iter().map(|(a, b)| b - a).sum()
}

/// Keeps the heaviest atoms, maps each chord to the line `s = M q + x2`, and
/// trims lighter chords where images overlap. Fibers of the resulting
/// functional then meet the kept set in at most one point, so every local
/// radius is zero.
pub fn atoms_construct(spec: &AtomMeasureSpec, delta: f64) -> Result<AtomConstruction> {
    spec.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let mut atoms = spec.atoms.clone();
    atoms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    let k = match spec.k_used {
        Some(k) if k == 0 || k > atoms.len() => return Err(Error::invalid(format!("k_used = {k} out of range"))),
        Some(k) => k,
        None => {
            let mut acc = 0.0;
            let mut k = atoms.len();
            for (i, a) in atoms.iter().enumerate() {
                acc += a.1;
                if acc >= 1.0 - delta / 2.0 {
                    k = i + 1;
                    break;
                }
            }
            k
        }
    };
    let top_mass: f64 = atoms[..k].iter().map(|a| a.1).sum();
    if top_mass < 1.0 - delta / 2.0 - 1e-15 {
        return Err(Error::Infeasible(format!("top {k} atoms carry {top_mass} < 1 - delta/2")));
    }
    let kept = &atoms[..k];
    let mut qs: Vec<f64> = kept.iter().map(|a| a.0).collect();
    qs.sort_by(f64::total_cmp);
    let min_gap = qs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let slope = match spec.slope {
        Some(m) => m,
        None if k == 1 => 0.0,
        None => {
            // the margin keeps M strictly above 2/gap for gaps that are exact ratios
            let m = (2.0 / min_gap * (1.0 + 1e-9)).floor() + 1.0;
            if !m.is_finite() || m > 1e12 {
                return Err(Error::Infeasible(format!("atoms too clustered: min gap {min_gap}")));
            }
            m
        }
    };

    // images of accepted chords on the s-axis, heaviest first
    let mut images: Vec<(f64, f64)> = Vec::new();
    let mut chords = Vec::with_capacity(k);
    let mut trimmed = 0.0;
    for &(q, c) in kept {
        let h = (1.0 - q * q).max(0.0).sqrt();
        let mut e = vec![(-h, h)];
        for &(a, b) in &images {
            e = subtract(&e, (a - slope * q, b - slope * q));
        }
        let lost = if h > 0.0 { c * (1.0 - length(&e) / (2.0 * h)) } else { 0.0 };
        trimmed += lost;
        images.extend(e.iter().map(|&(a, b)| (a + slope * q, b + slope * q)));
        chords.push(AtomChord { q, weight: c, kept: e, trimmed_mass: lost });
    }
    if trimmed > delta / 2.0 {
        return Err(Error::Infeasible(format!("trimming removes {trimmed} > delta/2")));
    }

    // every pair of closed images must be disjoint
    let mut pairs_checked = 0;
    let mut collisions = 0;
    for i in 0..chords.len() {
        for j in i + 1..chords.len() {
            pairs_checked += 1;
            for &(a, b) in &chords[i].kept {
                for &(c, d) in &chords[j].kept {
                    let (a, b) = (a + slope * chords[i].q, b + slope * chords[i].q);
                    let (c, d) = (c + slope * chords[j].q, d + slope * chords[j].q);
                    if a.max(c) <= b.min(d) {
                        collisions += 1;
                    }
                }
            }
        }
    }
    // independent scan over fibers
    let smax = slope.abs() + 1.0;
    const SCAN: usize = 200_000;
    for s in 0..=SCAN {
        let s = -smax + 2.0 * smax * s as f64 / SCAN as f64;
        let hits = chords
            .iter()
            .filter(|ch| ch.kept.iter().any(|&(a, b)| (a..=b).contains(&(s - slope * ch.q))))
            .count();
        if hits > 1 {
            collisions += 1;
        }
    }

    let norm = (slope * slope + 1.0).sqrt();
    let mass = top_mass - trimmed;
    let certificate = if collisions == 0 {
        RadiusCertificate::exact(0.0, Vec::new())
    } else {
        return Err(Error::Infeasible(format!("{collisions} fibers meet the set twice")));
    };
    Ok(AtomConstruction {
        delta,
        slope,
        functional: vec![slope / norm, 1.0 / norm],
        chords,
        mass,
        min_gap,
        pairs_checked,
        collisions,
        certificate,
    })
}

/// `min over theta` of `max over y` of the local radius of `L_theta = y` on
/// the unit disk, with `L_theta = (cos theta, sin theta)`.
pub fn atoms_worst_radius(n_directions: usize, y_grid: &[f64]) -> Result<f64> {
    if n_directions == 0 {
        return Err(Error::invalid("n_directions must be positive"));
    }
    let grid: Vec<Vec<f64>> = y_grid.iter().map(|&y| vec![y]).collect();
    let disk = Ball::unit(2);
    let space = NormedSpace::euclidean(2);
    let mut best = f64::INFINITY;
    for k in 0..n_directions {
        let theta = std::f64::consts::PI * k as f64 / n_directions as f64;
        let n = InformationOperator::new(vec![vec![theta.cos(), theta.sin()]])?;
        best = best.min(worst_radius(&n, &disk, &space, &grid, 3, k as u64)?.value);
    }
    Ok(best)
}

/// Anisotropic Gaussian restricted to the unit ball of `R^d`, with the slab
/// `|<z, a>| <= gamma` removed from the worst case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabSpec {
    pub dim: usize,
    pub sigmas: Vec<f64>,
    pub gamma: f64,
    pub z: Vec<f64>,
    /// Required slab measure is `1 - delta`.
    pub delta: f64,
}

impl SlabSpec {
    /// `z = e_d`, spread 0.3 on the other axes and `gamma/3` along `z`.
    pub fn standard(dim: usize, gamma: f64) -> Self {
        let mut sigmas = vec![0.3; dim];
        let mut z = vec![0.0; dim];
        if dim > 0 {
            sigmas[dim - 1] = gamma / 3.0;
            z[dim - 1] = 1.0;
        }
        SlabSpec { dim, sigmas, gamma, z, delta: 0.01 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 || self.sigmas.len() != self.dim || self.z.len() != self.dim {
            return Err(Error::invalid("slab spec needs dim >= 2 and matching lengths"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid("gamma must lie in (0, 1)"));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::invalid("sigmas must be positive"));
        }
        let zn: f64 = self.z.iter().map(|v| v * v).sum();
        if (zn - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("z must be a unit vector"));
        }
        let along: f64 = self.z.iter().zip(&self.sigmas).map(|(z, s)| z * z * s * s).sum::<f64>().sqrt();
        if along > self.gamma / 3.0 * (1.0 + 1e-12) {
            return Err(Error::invalid(format!("spread along z is {along} > gamma/3")));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabDemo {
    pub gamma: f64,
    pub e_wor: f64,
    pub e_delta: f64,
    /// `e_delta` found by projected ascent over the ball minus the slab complement.
    pub e_delta_search: f64,
    pub slab_measure: f64,
    pub slab_ci: Interval,
    pub accepted: usize,
    pub proposals: usize,
    /// Wilson lower bound of the slab measure is at least `1 - delta`.
    pub measure_certified: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Farthest point from `z` in `{ |a| <= 1, |<a, z>| <= gamma }`.
fn slab_ascent(z: &[f64], gamma: f64, seed: u64) -> f64 {
    let d = z.len();
    let project = |a: &mut Vec<f64>| {
        let t = dot(a, z);
        let c = t.clamp(-gamma, gamma);
        for (ai, zi) in a.iter_mut().zip(z) {
            *ai += (c - t) * zi;
        }
        let n = dot(a, a).sqrt();
        if n > 1.0 {
            a.iter_mut().for_each(|v| *v /= n);
        }
    };
    let mut best = 0.0f64;
    for start in 0..8u64 {
        let mut rng = stream_rng(seed, streams::SOLVER_INIT, start);
        let mut a: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        project(&mut a);
        let mut step = 0.5;
        let mut f = dist(&a, z);
        for _ in 0..5000 {
            let g: Vec<f64> = a.iter().zip(z).map(|(x, y)| (x - y) / f.max(1e-300)).collect();
            let mut trial: Vec<f64> = a.iter().zip(&g).map(|(x, gi)| x + step * gi).collect();
            project(&mut trial);
            let ft = dist(&trial, z);
            if ft > f {
                a = trial;
                f = ft;
            } else {
                step *= 0.5;
                if step < 1e-15 {
                    break;
                }
            }
        }
        best = best.max(f);
    }
    best
}

/// Worst error `2` from the antipode, slab-restricted error `sqrt(2 + 2 gamma)`
/// attained on the sphere at `<a, z> = -gamma`, and a Monte Carlo measure of
/// the slab under the restricted Gaussian.
pub fn hilbert_slab_demo(spec: &SlabSpec, n: usize, seed: u64) -> Result<SlabDemo> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let e_wor = dist(&spec.z.iter().map(|v| -v).collect::<Vec<_>>(), &spec.z);
    let e_delta = (2.0 + 2.0 * spec.gamma).sqrt();
    let e_delta_search = slab_ascent(&spec.z, spec.gamma, seed);

    const CHUNK: usize = 4096;
    const MAX_PROPOSALS: usize = 1 << 40;
    let mut accepted = 0usize;
    let mut inside = 0usize;
    let mut proposals = 0usize;
    let mut chunk = 0u64;
    while accepted < n {
        let mut rng = stream_rng(seed, streams::SLAB_GAUSSIAN, chunk);
        chunk += 1;
        for _ in 0..CHUNK {
            if accepted == n {
                break;
            }
            proposals += 1;
            let a: Vec<f64> = spec.sigmas.iter().map(|s| s * rng.sample::<f64, _>(StandardNormal)).collect();
            if dot(&a, &a) > 1.0 {
                continue;
            }
            accepted += 1;
            if dot(&a, &spec.z).abs() <= spec.gamma {
                inside += 1;
            }
        }
        if proposals > MAX_PROPOSALS {
            return Err(Error::SamplingBudget { budget: MAX_PROPOSALS as u64 });
        }
    }
    let slab_ci = wilson(inside as u64, n as u64, Z95);
    Ok(SlabDemo {
        gamma: spec.gamma,
        e_wor,
        e_delta,
        e_delta_search,
        slab_measure: inside as f64 / n as f64,
        slab_ci,
        accepted,
        proposals,
        measure_certified: slab_ci.lo >= 1.0 - spec.delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub c: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEval {
    pub comp_wor: f64,
    pub comp_delta: f64,
    pub gap: bool,
    /// `m < c < M`, the regime the model is meant for.
    pub ordered: bool,
    /// With `M > c` the worst-case cost is `2c`, not `c + M`.
    pub wor_is_two_c: bool,
}

/// One observation plus a combinatory step, or two observations.
/// `epsilon` only fixes the target; both costs are constant in it.
pub fn cost_model_eval(model: &CostModel, epsilon: f64) -> Result<CostEval> {
    let CostModel { c, m, big_m } = *model;
    if [c, m, big_m].iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !(epsilon > 0.0) {
        return Err(Error::invalid("costs must be finite and nonnegative, epsilon positive"));
    }
    let comp_delta = (c + m).min(2.0 * c);
    let comp_wor = (c + big_m).min(2.0 * c);
    Ok(CostEval {
        comp_wor,
        comp_delta,
        gap: comp_delta < comp_wor,
        ordered: m < c && c < big_m,
        wor_is_two_c: 2.0 * c <= c + big_m,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcRow {
    pub delta: f64,
    pub prob_bound: f64,
    pub theta: f64,
    /// `1 - excluded slab area`, the exact measure of the certified set.
    pub exact_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcTable {
    pub worst: f64,
    pub rows: Vec<UcRow>,
    /// Bounds nondecreasing as delta decreases and never above `worst`.
    pub monotone: bool,
}

/// Probabilistic bounds for the first coordinate on the uniform disk, with
/// central slabs as excluded sets.
pub fn uc_delta_convergence(deltas: &[f64], grid: usize, budget: &ProbBudget) -> Result<UcTable> {
    if deltas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::invalid("deltas must be strictly decreasing"));
    }
    let n = InformationOperator::coordinate(2, 0);
    let space = NormedSpace::euclidean(2);
    let family = SlabFamily::new(grid);
    let worst = worst_radius(&n, &Ball::unit(2), &space, &family.y_grid(0.0), budget.n_points, budget.seed)?.value;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let est = prob_radius_upper(&n, &family, delta, &space, budget)?;
        rows.push(UcRow {
            delta,
            prob_bound: est.bound,
            theta: est.theta,
            exact_measure: 1.0 - SlabFamily::excluded_fraction(est.theta),
        });
    }
    let monotone =
        rows.windows(2).all(|w| w[0].prob_bound <= w[1].prob_bound) && rows.iter().all(|r| r.prob_bound <= worst);
    Ok(UcTable { worst, rows, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalRow {
    pub removed: String,
    pub null_set: bool,
    pub worst: f64,
    pub local_half: f64,
    /// `|worst - full worst|` within tolerance for null sets, beyond it otherwise.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub full_worst: f64,
    pub full_local_half: f64,
    pub tolerance: f64,
    pub rows: Vec<RemovalRow>,
}

/// Removes the chord `x1 = 0`, the origin, and (as a control with positive
/// area) the slab `|x1| < control_width` from the unit disk and recomputes
/// the radii of the first-coordinate problem. The grid straddles `y = 0`
/// closely so the supremum over the punctured chord family is resolved.
pub fn measure_zero_removal_probe(grid: usize, control_width: f64, tolerance: f64, seed: u64) -> Result<RemovalReport> {
    if grid < 2 || !(control_width > 0.0 && control_width < 1.0) || !(tolerance > 0.0) {
        return Err(Error::invalid("need grid >= 2, control width in (0, 1), positive tolerance"));
    }
    let n = InformationOperator::coordinate(2, 0);
    let space = NormedSpace::euclidean(2);
    let mut y_grid = scalar_grid(-1.0, 1.0, grid);
    let eps = (tolerance * 1e-3).sqrt().min(1e-4);
    y_grid.push(vec![-eps]);
    y_grid.push(vec![eps]);
    y_grid.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let half = [vec![0.5]];

    let disk = Ball::unit(2);
    let measure = |region: &dyn Region| -> Result<(f64, f64)> {
        Ok((
            worst_radius(&n, region, &space, &y_grid, 3, seed)?.value,
            worst_radius(&n, region, &space, &half, 3, seed)?.value,
        ))
    };
    let (full_worst, full_local_half) = measure(&disk)?;
    let chord = Minus(disk.clone(), Hyperplane { normal: vec![1.0, 0.0], offset: 0.0 });
    let point = Minus(disk.clone(), Singleton(vec![0.0, 0.0]));
    let slab = Minus(disk.clone(), Slab { dim: 2, axis: 0, half_width: control_width, closed: false });
    let cases: [(&str, bool, &dyn Region); 3] =
        [("chord x1 = 0", true, &chord), ("point (0, 0)", true, &point), ("open slab |x1| < w", false, &slab)];
    let mut rows = Vec::with_capacity(3);
    for (name, null_set, region) in cases {
        let (worst, local_half) = measure(region)?;
        let unchanged = (worst - full_worst).abs() <= tolerance && (local_half - full_local_half).abs() <= tolerance;
        rows.push(RemovalRow {
            removed: name.to_string(),
            null_set,
            worst,
            local_half,
            pass: if null_set { unchanged } else { full_worst - worst > tolerance },
        });
    }
    Ok(RemovalReport { full_worst, full_local_half, tolerance, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> AtomMeasureSpec {
        AtomMeasureSpec::new(vec![(0.0, 0.5), (0.5, 0.3), (1.0 / 3.0, 0.2)]).unwrap()
    }

    #[test]
    fn atoms_example_slope() {
        for delta in [0.05, 0.01] {
            let c = atoms_construct(&example(), delta).unwrap();
            assert_eq!(c.slope, 13.0);
            assert_eq!(c.collisions, 0);
            assert_eq!(c.pairs_checked, 3);
            assert_eq!(c.certificate.radius, 0.0);
            assert!(c.mass >= 1.0 - delta);
        }
    }

    #[test]
    fn atoms_contract() {
        assert!(atoms_construct(&example(), 0.0).is_err());
        let one = AtomMeasureSpec::new(vec![(0.25, 1.0)]).unwrap();
        let c = atoms_construct(&one, 0.1).unwrap();
        assert_eq!(c.functional, vec![0.0, 1.0]);
        assert!(AtomMeasureSpec::new(vec![(0.1, 0.5), (0.1, 0.5)]).is_err());
    }

    #[test]
    fn small_slope_trims_or_fails() {
        let mut s = example();
        s.slope = Some(2.0);
        assert!(atoms_construct(&s, 0.05).is_err());
    }

    #[test]
    fn disk_directions() {
        let ys: Vec<f64> = (-10..=10).map(|i| i as f64 / 10.0).collect();
        assert!((atoms_worst_radius(1, &ys).unwrap() - 1.0).abs() < 1e-9);
        assert!((atoms_worst_radius(12, &ys).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn slab_demo_values() {
        let d = hilbert_slab_demo(&SlabSpec::standard(6, 0.01), 20_000, 3).unwrap();
        assert_eq!(d.e_wor, 2.0);
        assert_eq!(d.e_delta, 2.02f64.sqrt());
        assert!((d.e_delta_search - d.e_delta).abs() < 1e-9, "{}", d.e_delta_search);
        assert!(d.slab_measure >= 0.99);
    }

    #[test]
    fn slab_spec_checks() {
        let mut s = SlabSpec::standard(6, 0.01);
        s.sigmas[5] = 0.01;
        assert!(s.validate().is_err());
        assert!(SlabSpec::standard(1, 0.01).validate().is_err());
    }

    #[test]
    fn cost_examples() {
        let e = cost_model_eval(&CostModel { c: 1.0, m: 0.1, big_m: 10.0 }, 0.1).unwrap();
        assert_eq!((e.comp_delta, e.comp_wor, e.gap), (1.1, 2.0, true));
        let e = cost_model_eval(&CostModel { c: 1.0, m: 1.0, big_m: 10.0 }, 0.1).unwrap();
        assert!(!e.gap);
        let e = cost_model_eval(&CostModel { c: 1.0, m: 0.1, big_m: 0.5 }, 0.1).unwrap();
        assert_eq!(e.comp_wor, 1.5);
    }

    #[test]
    fn removal_probe() {
        let r = measure_zero_removal_probe(21, 0.1, 1e-6, 0).unwrap();
        assert!((r.full_worst - 1.0).abs() < 1e-12);
        for row in &r.rows {
            assert!(row.pass, "{row:?}");
        }
    }
}
