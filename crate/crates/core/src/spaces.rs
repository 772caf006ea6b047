//! Norm evaluators for every space the experiments use, plus a numeric
//! modulus of convexity for low-dimensional spaces.
//!
//! Spaces are named by short labels, e.g. `lp:p=2,dim=2`, `lp:p=inf,dim=2`,
//! `euclidean:dim=3`, `sup` and `sup_plus_point:t=0.5`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceKind {
    /// `(sum |x_i|^p)^(1/p)`; `p = inf` gives the coordinate-max norm.
    Lp { p: f64, dim: usize },
    Euclidean { dim: usize },
    /// Sup norm of a path (or max-abs of a plain vector of any length).
    SupNormPath,
    /// `sup |f| + |f(t)|` for a path sampled on a grid containing `t`.
    SupPlusPointPath { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NormedSpace {
    kind: SpaceKind,
}

impl NormedSpace {
    pub fn new(kind: SpaceKind) -> Result<Self> {
        match kind {
            SpaceKind::Lp { p, dim } => {
                if !(p >= 1.0) {
                    return Err(Error::invalid(format!("lp requires p >= 1, got {p}")));
                }
                if dim == 0 {
                    return Err(Error::invalid("lp requires dim >= 1"));
                }
            }
            SpaceKind::Euclidean { dim } => {
                if dim == 0 {
                    return Err(Error::invalid("euclidean requires dim >= 1"));
                }
            }
            SpaceKind::SupNormPath => {}
            SpaceKind::SupPlusPointPath { t } => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::invalid(format!("point t = {t} outside [0, 1]")));
                }
            }
        }
        Ok(NormedSpace { kind })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(SpaceKind::Euclidean { dim }).expect("dim >= 1")
    }

    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        Self::new(SpaceKind::Lp { p, dim })
    }

    /// Coordinate-max norm on `R^dim`.
    pub fn max_norm(dim: usize) -> Self {
        Self::new(SpaceKind::Lp { p: f64::INFINITY, dim }).expect("dim >= 1")
    }

    pub fn sup_path() -> Self {
        NormedSpace { kind: SpaceKind::SupNormPath }
    }

    pub fn sup_plus_point(t: f64) -> Result<Self> {
        Self::new(SpaceKind::SupPlusPointPath { t })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Fixed dimension, if the kind has one.
    pub fn dim(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::Lp { dim, .. } | SpaceKind::Euclidean { dim } => Some(dim),
            _ => None,
        }
    }

    pub fn is_path_space(&self) -> bool {
        matches!(self.kind, SpaceKind::SupNormPath | SpaceKind::SupPlusPointPath { .. })
    }

    /// Norm of a plain vector.
    pub fn eval_vector(&self, x: &[f64]) -> Result<f64> {
        if let Some(dim) = self.dim() {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
            }
        }
        match self.kind {
            SpaceKind::SupPlusPointPath { .. } => Err(Error::Unsupported(
                "sup_plus_point needs a grid path, not a bare vector".into(),
            )),
            _ => Ok(self.norm(x)),
        }
    }

    /// Exact norm of a piecewise-linear path: the node maximum is the continuum sup.
    pub fn eval_path(&self, path: &GridPath) -> Result<f64> {
        let sup = path.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match self.kind {
            SpaceKind::SupNormPath => Ok(sup),
            SpaceKind::SupPlusPointPath { t } => {
                let k = path.node_index(t).ok_or(Error::NotOnGrid { t })?;
                Ok(sup + path.values[k].abs())
            }
            _ => self.eval_vector(&path.values),
        }
    }

    /// Unchecked vector norm used in inner loops. Path kinds fall back to max-abs.
    pub(crate) fn norm(&self, x: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::Euclidean { .. } => euclid(x),
            SpaceKind::Lp { p, .. } => lp_norm(x, p),
            SpaceKind::SupNormPath | SpaceKind::SupPlusPointPath { .. } => max_abs(x),
        }
    }

    pub(crate) fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut diff = [0.0f64; 16];
        if a.len() <= diff.len() {
            for (d, (x, y)) in diff.iter_mut().zip(a.iter().zip(b)) {
                *d = x - y;
            }
            self.norm(&diff[..a.len()])
        } else {
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            self.norm(&diff)
        }
    }

    /// A subgradient of the norm at `v`: a dual-unit vector `g` with `<g, v> = |v|`.
    /// Returns zero at the origin.
    pub(crate) fn subgradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; v.len()];
        let n = self.norm(v);
        if n == 0.0 {
            return g;
        }
        let p = match self.kind {
            SpaceKind::Euclidean { .. } => 2.0,
            SpaceKind::Lp { p, .. } => p,
            _ => f64::INFINITY,
        };
        if p == 1.0 {
            for (gi, vi) in g.iter_mut().zip(v) {
                *gi = sign(*vi);
            }
        } else if p.is_infinite() {
            let (k, _) = v
                .iter()
                .enumerate()
                .fold((0, -1.0), |(bk, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bk, bv) });
            g[k] = sign(v[k]);
        } else {
            for (gi, vi) in g.iter_mut().zip(v) {
                *gi = sign(*vi) * (vi.abs() / n).powf(p - 1.0);
            }
        }
        g
    }

    /// Euclidean length bound: `|v|_2 <= factor * |v|` on `R^dim`.
    pub(crate) fn euclid_factor(&self, dim: usize) -> f64 {
        let p = match self.kind {
            SpaceKind::Euclidean { .. } => 2.0,
            SpaceKind::Lp { p, .. } => p,
            _ => f64::INFINITY,
        };
        if p <= 2.0 {
            1.0
        } else {
            let e = if p.is_infinite() { 0.5 } else { 0.5 - 1.0 / p };
            (dim as f64).powf(e)
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return max_abs(x);
    }
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p == 2.0 {
        return euclid(x);
    }
    let m = max_abs(x);
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = if p.fract() == 0.0 && p <= 64.0 {
        let k = p as i32;
        x.iter().map(|v| (v.abs() / m).powi(k)).sum()
    } else {
        x.iter().map(|v| (v.abs() / m).powf(p)).sum()
    };
    m * sum.powf(1.0 / p)
}

impl fmt::Display for NormedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Lp { p, dim } if p.is_infinite() => write!(f, "lp:p=inf,dim={dim}"),
            SpaceKind::Lp { p, dim } => write!(f, "lp:p={p},dim={dim}"),
            SpaceKind::Euclidean { dim } => write!(f, "euclidean:dim={dim}"),
            SpaceKind::SupNormPath => write!(f, "sup"),
            SpaceKind::SupPlusPointPath { t } => write!(f, "sup_plus_point:t={t}"),
        }
    }
}

impl FromStr for NormedSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (s.trim(), ""),
        };
        let mut p = None;
        let mut dim = None;
        let mut t = None;
        for part in rest.split(',').filter(|x| !x.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad space parameter `{part}` in `{s}`")))?;
            let v = v.trim();
            match k.trim() {
                "p" => {
                    p = Some(if v == "inf" || v == "infinity" {
                        f64::INFINITY
                    } else {
                        v.parse::<f64>().map_err(|_| Error::Config(format!("bad p `{v}`")))?
                    })
                }
                "dim" => dim = Some(v.parse::<usize>().map_err(|_| Error::Config(format!("bad dim `{v}`")))?),
                "t" => t = Some(v.parse::<f64>().map_err(|_| Error::Config(format!("bad t `{v}`")))?),
                other => return Err(Error::Config(format!("unknown space parameter `{other}` in `{s}`"))),
            }
        }
        fn need<T>(x: Option<T>, s: &str, what: &str) -> Result<T> {
            x.ok_or_else(|| Error::Config(format!("`{s}` needs {what}")))
        }
        let kind = match name {
            "lp" => SpaceKind::Lp { p: need(p, s, "p")?, dim: need(dim, s, "dim")? },
            "euclidean" | "l2" => SpaceKind::Euclidean { dim: need(dim, s, "dim")? },
            "max" | "linf" => SpaceKind::Lp { p: f64::INFINITY, dim: need(dim, s, "dim")? },
            "sup" => SpaceKind::SupNormPath,
            "sup_plus_point" => SpaceKind::SupPlusPointPath { t: need(t, s, "t")? },
            other => return Err(Error::Config(format!("unknown space kind `{other}`"))),
        };
        NormedSpace::new(kind)
    }
}

impl TryFrom<String> for NormedSpace {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NormedSpace> for String {
    fn from(s: NormedSpace) -> String {
        s.to_string()
    }
}

/// A path on `[0, 1]` sampled on a strictly increasing grid that starts at 0,
/// ends at 1 and contains 1/2. Interpreted as piecewise linear between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    grid: Vec<f64>,
    pub(crate) values: Vec<f64>,
}

impl GridPath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if grid.len() < 3 {
            return Err(Error::invalid("a grid path needs at least the nodes 0, 1/2, 1"));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(Error::invalid("grid must start at 0 and end at 1"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        if !grid.contains(&0.5) {
            return Err(Error::NotOnGrid { t: 0.5 });
        }
        if values[0] != 0.0 {
            return Err(Error::invalid("paths start at 0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("path values must be finite"));
        }
        Ok(GridPath { grid, values })
    }

    /// Uniform grid `t_k = k / intervals`; `intervals` must be even.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let intervals = values.len().saturating_sub(1);
        if intervals < 2 || intervals % 2 != 0 {
            return Err(Error::invalid("uniform grid needs an even number of intervals"));
        }
        GridPath::new(uniform_grid(intervals), values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the node equal to `t`, exact comparison.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        self.grid.binary_search_by(|g| g.partial_cmp(&t).unwrap()).ok()
    }

    pub fn value_at_half(&self) -> f64 {
        self.values[self.node_index(0.5).expect("validated")]
    }

    pub fn sup_norm(&self) -> f64 {
        max_abs(&self.values)
    }
}

pub fn uniform_grid(intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|k| k as f64 / intervals as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub epsilon: f64,
    pub value: f64,
    pub tolerance: f64,
    pub method: String,
}

/// Numeric modulus of convexity
/// `inf { 1 - |(x+y)/2| : |x| = |y| = 1, |x - y| >= epsilon }`.
///
/// The infimum is searched over two-dimensional sections of the space: a
/// dense angular grid of unit vectors in each section gives a feasible pair
/// minimum, which is then refined by golden-section search over the first
/// angle with the second vector pushed onto `|x - y| = epsilon`.
/// Only finite-dimensional kinds with `2 <= dim <= 3` are accepted.
pub fn modulus_of_convexity(space: &NormedSpace, epsilon: f64, tol: f64) -> Result<ModulusEstimate> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 2], got {epsilon}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let dim = match (space.is_path_space(), space.dim()) {
        (false, Some(d)) if (2..=3).contains(&d) => d,
        (true, _) => return Err(Error::Unsupported("modulus of a path space".into())),
        (_, d) => return Err(Error::Unsupported(format!("modulus needs 2 <= dim <= 3, got {d:?}"))),
    };
    let (sections, k) = if dim == 2 {
        (vec![([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])], 1440)
    } else {
        (sections_3d(), 360)
    };
    let mut best = f64::INFINITY;
    for (e1, e2) in &sections {
        let sec = Section { space, e1: &e1[..dim], e2: &e2[..dim] };
        best = best.min(sec.modulus(epsilon, k));
    }
    Ok(ModulusEstimate {
        epsilon,
        value: best.max(0.0),
        tolerance: tol,
        method: format!("2d sections: {} x grid {k} + golden refinement", sections.len()),
    })
}

/// Computable surrogate for uniform convexity: modulus at epsilon = 1 exceeds `tol`.
pub fn is_uniformly_convex(space: &NormedSpace, tol: f64) -> Result<bool> {
    Ok(modulus_of_convexity(space, 1.0, tol)?.value > tol)
}

fn sections_3d() -> Vec<([f64; 3], [f64; 3])> {
    // axes, face diagonals and body diagonals of the cube
    let mut dirs: Vec<[f64; 3]> = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for s in [1.0, -1.0] {
            let mut d = [0.0; 3];
            d[a] = 1.0;
            d[b] = s;
            dirs.push(d);
        }
    }
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            dirs.push([1.0, s1, s2]);
        }
    }
    let mut out = Vec::new();
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let a = normalize3(dirs[i]);
            let proj = dot3(dirs[j], a);
            let b = [dirs[j][0] - proj * a[0], dirs[j][1] - proj * a[1], dirs[j][2] - proj * a[2]];
            if dot3(b, b) < 1e-12 {
                continue;
            }
            out.push((a, normalize3(b)));
        }
    }
    out
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

struct Section<'a> {
    space: &'a NormedSpace,
    e1: &'a [f64],
    e2: &'a [f64],
}

impl Section<'_> {
    fn unit(&self, angle: f64) -> Vec<f64> {
        let (s, c) = angle.sin_cos();
        let v: Vec<f64> = self.e1.iter().zip(self.e2).map(|(a, b)| c * a + s * b).collect();
        let n = self.space.norm(&v);
        v.into_iter().map(|x| x / n).collect()
    }

    fn pair_value(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let d = self.space.distance(x, y);
        let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
        (d, 1.0 - self.space.norm(&mid))
    }

    fn modulus(&self, epsilon: f64, k: usize) -> f64 {
        let step = std::f64::consts::TAU / k as f64;
        let pts: Vec<Vec<f64>> = (0..k).map(|i| self.unit(i as f64 * step)).collect();
        let slack = 1e-12;
        let mut best = f64::INFINITY;
        let mut arg = (0usize, 0usize);
        for i in 0..k {
            for j in i + 1..k {
                let (d, v) = self.pair_value(&pts[i], &pts[j]);
                if d >= epsilon - slack && v < best {
                    best = v;
                    arg = (i, j);
                }
            }
        }
        if !best.is_finite() {
            return best;
        }
        // Signed arc from the first to the second vector, shorter way round.
        let (i, j) = arg;
        let mut arc = (j as f64 - i as f64) * step;
        if arc > std::f64::consts::PI {
            arc -= std::f64::consts::TAU;
        }
        let a0 = i as f64 * step;
        let reach = (arc.abs() + 2.0 * step).min(std::f64::consts::PI);
        let dir = arc.signum();
        let value_at = |alpha: f64| -> f64 {
            let x = self.unit(alpha);
            let far = self.unit(alpha + dir * reach);
            if self.space.distance(&x, &far) < epsilon {
                return f64::INFINITY;
            }
            let (mut lo, mut hi) = (0.0, reach);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let y = self.unit(alpha + dir * mid);
                if self.space.distance(&x, &y) >= epsilon {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let y = self.unit(alpha + dir * hi);
            self.pair_value(&x, &y).1
        };
        let refined = golden_min(value_at, a0 - 2.0 * step, a0 + 2.0 * step, 1e-12);
        best.min(refined)
    }
}

/// Golden-section minimization on `[a, b]`; returns the smallest value seen.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = fc.min(fd);
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.min(fc).min(fd);
    }
    best
}
