use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Switches the functional used at step `step` according to the observed
/// value `y[step - 1]`: `functionals[k]` is used when `y[step-1]` falls in the
/// k-th interval cut by `breakpoints` (ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationRule {
    pub step: usize,
    pub breakpoints: Vec<f64>,
    pub functionals: Vec<Vec<f64>>,
}

/// `N x = (L_1 x, ..., L_n x)` with each `L_i` given by an inner product with
/// a Euclidean-unit vector. Adaptive operators replace some `L_i` by
/// piecewise-constant functions of the previous observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationOperator {
    functionals: Vec<Vec<f64>>,
    continuation: Vec<ContinuationRule>,
}

fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::invalid("functionals must be nonzero and finite"));
    }
    Ok(v.iter().map(|x| x / n).collect())
}

impl InformationOperator {
    pub fn new(functionals: Vec<Vec<f64>>) -> Result<Self> {
        let dim = functionals.first().ok_or_else(|| Error::invalid("cardinality must be >= 1"))?.len();
        let mut out = Vec::with_capacity(functionals.len());
        for f in &functionals {
            if f.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: f.len() });
            }
            out.push(normalize(f)?);
        }
        Ok(InformationOperator { functionals: out, continuation: Vec::new() })
    }

    /// Single coordinate functional `x -> x[axis]` on `R^dim`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut f = vec![0.0; dim];
        f[axis] = 1.0;
        InformationOperator::new(vec![f]).expect("unit functional")
    }

    pub fn with_continuation(mut self, rule: ContinuationRule) -> Result<Self> {
        if rule.step == 0 || rule.step >= self.cardinality() {
            return Err(Error::invalid("continuation step must be in 1..cardinality"));
        }
        if rule.functionals.len() != rule.breakpoints.len() + 1 {
            return Err(Error::invalid("need one functional per breakpoint interval"));
        }
        if rule.breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        let functionals = rule
            .functionals
            .iter()
            .map(|f| {
                if f.len() != self.dim() {
                    Err(Error::DimensionMismatch { expected: self.dim(), got: f.len() })
                } else {
                    normalize(f)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        self.continuation.retain(|r| r.step != rule.step);
        self.continuation.push(ContinuationRule { functionals, ..rule });
        Ok(self)
    }

    pub fn cardinality(&self) -> usize {
        self.functionals.len()
    }

    pub fn dim(&self) -> usize {
        self.functionals[0].len()
    }

    pub fn is_adaptive(&self) -> bool {
        !self.continuation.is_empty()
    }

    pub fn functionals(&self) -> &[Vec<f64>] {
        &self.functionals
    }

    fn functional_for(&self, step: usize, prefix: &[f64]) -> &[f64] {
        match self.continuation.iter().find(|r| r.step == step) {
            Some(rule) => {
                let prev = prefix[step - 1];
                let k = rule.breakpoints.iter().take_while(|b| prev >= **b).count();
                &rule.functionals[k]
            }
            None => &self.functionals[step],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.cardinality());
        for i in 0..self.cardinality() {
            let f = self.functional_for(i, &y);
            y.push(f.iter().zip(x).map(|(a, b)| a * b).sum());
        }
        y
    }

    /// The (nonadaptive) functionals actually applied when `y` is observed.
    pub fn resolve(&self, y: &[f64]) -> Result<Vec<Vec<f64>>> {
        if y.len() != self.cardinality() {
            return Err(Error::DimensionMismatch { expected: self.cardinality(), got: y.len() });
        }
        Ok((0..self.cardinality()).map(|i| self.functional_for(i, y).to_vec()).collect())
    }

    /// Same operator with every functional moved by `delta[i]` and renormalized.
    pub fn perturbed(&self, delta: &[Vec<f64>]) -> Result<Self> {
        let functionals = self
            .functionals
            .iter()
            .zip(delta)
            .map(|(f, d)| normalize(&f.iter().zip(d).map(|(a, b)| a + b).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        Ok(InformationOperator { functionals, continuation: self.continuation.clone() })
    }
}

/// Affine description `{ base + K z }` of a fiber `{x : F x = y}` with `K`
/// orthonormal columns spanning the kernel of `F`.
pub(crate) struct AffineFiber {
    pub base: Vec<f64>,
    pub kernel: Vec<Vec<f64>>,
}

pub(crate) fn affine_fiber(rows: &[Vec<f64>], y: &[f64]) -> Result<AffineFiber> {
    let d = rows[0].len();
    // Orthonormal basis of the row space, tracking the transform so that the
    // minimum-norm solution of F x = y can be read off.
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut qy: Vec<f64> = Vec::new();
    for (row, &yi) in rows.iter().zip(y) {
        let mut v = row.clone();
        let mut vy = yi;
        for (qk, &qyk) in q.iter().zip(&qy) {
            let c: f64 = qk.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(qk) {
                *vi -= c * qi;
            }
            vy -= c * qyk;
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-12 {
            if vy.abs() > 1e-9 {
                return Err(Error::EmptyFiber { y: y.to_vec() });
            }
            continue;
        }
        q.push(v.into_iter().map(|x| x / n).collect());
        qy.push(vy / n);
    }
    let mut base = vec![0.0; d];
    for (qk, &c) in q.iter().zip(&qy) {
        for (b, qi) in base.iter_mut().zip(qk) {
            *b += c * qi;
        }
    }
    let mut kernel: Vec<Vec<f64>> = Vec::new();
    for axis in 0..d {
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for qk in q.iter().chain(kernel.iter()) {
            let c: f64 = qk.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(qk) {
                *vi -= c * qi;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            kernel.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    Ok(AffineFiber { base, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functionals_normalized() {
        let n = InformationOperator::new(vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(n.functionals()[0], vec![0.6, 0.8]);
        assert_eq!(n.apply(&[1.0, 1.0]), vec![1.4]);
    }

    #[test]
    fn empty_and_zero_rejected() {
        assert!(InformationOperator::new(vec![]).is_err());
        assert!(InformationOperator::new(vec![vec![0.0, 0.0]]).is_err());
        assert!(InformationOperator::new(vec![vec![1.0, 0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn adaptive_continuation_switches_on_prefix() {
        let n = InformationOperator::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
            .unwrap()
            .with_continuation(ContinuationRule {
                step: 1,
                breakpoints: vec![0.0],
                functionals: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]],
            })
            .unwrap();
        assert!(n.is_adaptive());
        assert_eq!(n.apply(&[-1.0, 2.0, 3.0]), vec![-1.0, 2.0]);
        assert_eq!(n.apply(&[1.0, 2.0, 3.0]), vec![1.0, 3.0]);
        assert_eq!(n.resolve(&[0.5, 0.0]).unwrap()[1], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn fiber_geometry() {
        let f = affine_fiber(&[vec![1.0, 0.0]], &[0.6]).unwrap();
        assert_eq!(f.base, vec![0.6, 0.0]);
        assert_eq!(f.kernel.len(), 1);
        assert!((f.kernel[0][1].abs() - 1.0).abs() < 1e-15);
        let f = affine_fiber(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.1, 0.2]).unwrap();
        assert!(f.kernel.is_empty());
        assert_eq!(f.base, vec![0.1, 0.2]);
        assert!(affine_fiber(&[vec![1.0, 0.0], vec![1.0, 0.0]], &[0.1, 0.2]).is_err());
    }
}
