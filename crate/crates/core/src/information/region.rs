use rand::Rng;

/// A bounded measurable set in `R^d`, given by a membership test.
///
/// `exit_distance` may return the exact distance from an interior point to
/// the boundary along a unit direction; otherwise boundaries are located by
/// marching and bisection.
pub trait Region: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    /// Radius of a Euclidean ball about the origin containing the region
    /// (infinite for unbounded pieces used only in combinations).
    fn bounding_radius(&self) -> f64;
    fn exit_distance(&self, _from: &[f64], _dir: &[f64]) -> Option<f64> {
        None
    }
}

/// Closed Euclidean ball about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub dim: usize,
    pub radius: f64,
}

impl Ball {
    pub fn unit(dim: usize) -> Self {
        Ball { dim, radius: 1.0 }
    }
}

impl Region for Ball {
    fn dim(&self) -> usize {
        self.dim
    }
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().map(|v| v * v).sum::<f64>() <= self.radius * self.radius
    }
    fn bounding_radius(&self) -> f64 {
        self.radius
    }
    fn exit_distance(&self, from: &[f64], dir: &[f64]) -> Option<f64> {
        // |from + t dir|^2 = r^2 with |dir| = 1
        let b: f64 = from.iter().zip(dir).map(|(a, u)| a * u).sum();
        let c: f64 = from.iter().map(|a| a * a).sum::<f64>() - self.radius * self.radius;
        let disc = (b * b - c).max(0.0);
        Some((-b + disc.sqrt()).max(0.0))
    }
}

/// Closed cube `[-h, h]^d` (the sup-norm ball of radius `h`).
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub dim: usize,
    pub half_width: f64,
}

impl Region for Cube {
    fn dim(&self) -> usize {
        self.dim
    }
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.half_width)
    }
    fn bounding_radius(&self) -> f64 {
        self.half_width * (self.dim as f64).sqrt()
    }
    fn exit_distance(&self, from: &[f64], dir: &[f64]) -> Option<f64> {
        let mut t = f64::INFINITY;
        for (a, u) in from.iter().zip(dir) {
            if *u > 0.0 {
                t = t.min((self.half_width - a) / u);
            } else if *u < 0.0 {
                t = t.min((-self.half_width - a) / u);
            }
        }
        Some(t.max(0.0))
    }
}

/// `{ x : |x[axis]| < w }` (open) or `{ |x[axis]| <= w }` (closed). Unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub dim: usize,
    pub axis: usize,
    pub half_width: f64,
    pub closed: bool,
}

impl Region for Slab {
    fn dim(&self) -> usize {
        self.dim
    }
    fn contains(&self, x: &[f64]) -> bool {
        let v = x[self.axis].abs();
        if self.closed {
            v <= self.half_width
        } else {
            v < self.half_width
        }
    }
    fn bounding_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn exit_distance(&self, from: &[f64], dir: &[f64]) -> Option<f64> {
        let (a, u) = (from[self.axis], dir[self.axis]);
        Some(if u > 0.0 {
            ((self.half_width - a) / u).max(0.0)
        } else if u < 0.0 {
            ((-self.half_width - a) / u).max(0.0)
        } else {
            f64::INFINITY
        })
    }
}

/// Hyperplane `{ x : <normal, x> = offset }`; a null set.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Region for Hyperplane {
    fn dim(&self) -> usize {
        self.normal.len()
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() == self.offset
    }
    fn bounding_radius(&self) -> f64 {
        f64::INFINITY
    }
}

/// A single point.
#[derive(Debug, Clone, PartialEq)]
pub struct Singleton(pub Vec<f64>);

impl Region for Singleton {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.0.as_slice() == x
    }
    fn bounding_radius(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `A \ B`.
pub struct Minus<A, B>(pub A, pub B);

impl<A: Region, B: Region> Region for Minus<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x) && !self.1.contains(x)
    }
    fn bounding_radius(&self) -> f64 {
        self.0.bounding_radius()
    }
}

/// `A ∩ B`.
pub struct Intersect<A, B>(pub A, pub B);

impl<A: Region, B: Region> Region for Intersect<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x) && self.1.contains(x)
    }
    fn bounding_radius(&self) -> f64 {
        self.0.bounding_radius().min(self.1.bounding_radius())
    }
    /// Exact only when both pieces are convex, which holds for every
    /// analytic-exit region in this module.
    fn exit_distance(&self, from: &[f64], dir: &[f64]) -> Option<f64> {
        Some(self.0.exit_distance(from, dir)?.min(self.1.exit_distance(from, dir)?))
    }
}

impl Region for Box<dyn Region> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn contains(&self, x: &[f64]) -> bool {
        (**self).contains(x)
    }
    fn bounding_radius(&self) -> f64 {
        (**self).bounding_radius()
    }
    fn exit_distance(&self, from: &[f64], dir: &[f64]) -> Option<f64> {
        (**self).exit_distance(from, dir)
    }
}

/// Empty region; what remains once everything is excluded.
pub struct Nothing(pub usize);

impl Region for Nothing {
    fn dim(&self) -> usize {
        self.0
    }
    fn contains(&self, _x: &[f64]) -> bool {
        false
    }
    fn bounding_radius(&self) -> f64 {
        0.0
    }
}

const MARCH_STEPS: usize = 512;

/// Distance from `from` (inside) to the farthest member of the region on the
/// ray along `dir`.
///
/// Without an analytic exit the ray is marched through the whole bounding
/// ball, so gaps in nonconvex fibers are crossed. Exclusions thinner than the
/// marching step are stepped over; null sets such as hyperplanes therefore
/// do not cut fibers.
pub(crate) fn exit_along(region: &dyn Region, from: &[f64], dir: &[f64]) -> f64 {
    if let Some(t) = region.exit_distance(from, dir) {
        return t;
    }
    let at = |t: f64| -> Vec<f64> { from.iter().zip(dir).map(|(a, u)| a + t * u).collect() };
    let reach = 2.0 * region.bounding_radius() + 1e-9;
    let h = reach / MARCH_STEPS as f64;
    let mut last_inside = 0;
    for s in 1..=MARCH_STEPS {
        if region.contains(&at(s as f64 * h)) {
            last_inside = s;
        }
    }
    if last_inside == MARCH_STEPS {
        return reach;
    }
    let (mut lo, mut hi) = (last_inside as f64 * h, (last_inside + 1) as f64 * h);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if region.contains(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Uniform draw from the region by rejection from its bounding cube.
pub(crate) fn sample_uniform(region: &dyn Region, rng: &mut impl Rng, max_tries: usize) -> Option<Vec<f64>> {
    let r = region.bounding_radius();
    if !r.is_finite() {
        return None;
    }
    let d = region.dim();
    for _ in 0..max_tries {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-r..=r)).collect();
        if region.contains(&x) {
            return Some(x);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_exit_is_exact() {
        let b = Ball::unit(2);
        let t = exit_along(&b, &[0.6, 0.0], &[0.0, 1.0]);
        assert!((t - 0.8).abs() < 1e-15);
    }

    #[test]
    fn marching_matches_analytic() {
        let disk = Ball::unit(2);
        let m = Minus(Ball::unit(2), Slab { dim: 2, axis: 0, half_width: 0.3, closed: false });
        let dir = [0.0, -1.0];
        let a = exit_along(&disk, &[0.5, 0.1], &dir);
        let b = exit_along(&m, &[0.5, 0.1], &dir);
        assert!((a - b).abs() < 1e-12, "{a} {b}");
        // crosses the removed slab and continues to the far side of the disk
        let c = exit_along(&m, &[0.5, 0.1], &[-1.0, 0.0]);
        assert!((c - (0.5 + 0.99f64.sqrt())).abs() < 1e-12, "{c}");
    }

    #[test]
    fn null_sets_do_not_cut() {
        let m = Minus(Ball::unit(2), Hyperplane { normal: vec![1.0, 0.0], offset: 0.0 });
        let t = exit_along(&m, &[0.5, 0.0], &[-1.0, 0.0]);
        assert!((t - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cube_exit() {
        let c = Cube { dim: 2, half_width: 1.0 };
        assert!((exit_along(&c, &[0.25, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!(c.contains(&[1.0, -1.0]) && !c.contains(&[1.0 + 1e-12, 0.0]));
    }
}
