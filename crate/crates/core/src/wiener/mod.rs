//! Brownian paths on `[0, 1]` conditioned to the sup-norm unit ball, the
//! window sets `F(m)`, and exact fiber radii for the observation `f(1/2)`
//! under the error norm `|f|_sup + |f(1/2)|`.

mod adversary;
mod fiber;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::spaces::GridPath;
use crate::stats::{wilson, Interval, Z95};

pub(crate) use fiber::select_window;
pub use adversary::{adversary_f_eta, best_center_error, functional_value, BestCenter, Density, DiscreteFunctional};
pub use fiber::{
    fiber_sup_error, optimize_center, prob_radius_upper_wiener, tent_center, worst_case_radius_wiener, FiberConstraint,
    FiberSpec, PiecewiseLinearCenter, WienerProbBound, WienerWorst,
};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerConfig {
    /// Grid intervals `T`; nodes are `k / T`.
    pub intervals: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Rejection proposals allowed per accepted path.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl WienerConfig {
    pub fn new(intervals: usize, n_samples: usize, seed: u64) -> Result<Self> {
        let cfg = WienerConfig { intervals, n_samples, seed, budget: DEFAULT_BUDGET };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals < 8 || !self.intervals.is_power_of_two() {
            return Err(Error::invalid(format!("T must be a power of two >= 8, got {}", self.intervals)));
        }
        if self.budget == 0 {
            return Err(Error::invalid("rejection budget must be positive"));
        }
        Ok(())
    }

    pub fn half(&self) -> usize {
        self.intervals / 2
    }

    fn step_sd(&self) -> f64 {
        (1.0 / self.intervals as f64).sqrt()
    }

    /// Window half-width in nodes, checking alignment.
    pub fn window_nodes(&self, m: usize) -> Result<usize> {
        if m < 2 || self.intervals % m != 0 {
            return Err(Error::MisalignedWindow { m, intervals: self.intervals });
        }
        Ok(self.intervals / m)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// One proposal of a free walk from 0; false as soon as it leaves `[-1, 1]`.
fn propose_ball(cfg: &WienerConfig, rng: &mut ChaCha8Rng, buf: &mut [f64]) -> bool {
    let sd = cfg.step_sd();
    buf[0] = 0.0;
    for k in 1..buf.len() {
        let v = buf[k - 1] + sd * normal(rng);
        if v.abs() > 1.0 {
            return false;
        }
        buf[k] = v;
    }
    true
}

/// Draws path `index` into `buf` (length `T + 1`); returns proposals used.
fn ball_path_into(cfg: &WienerConfig, index: u64, buf: &mut [f64]) -> Result<u64> {
    let mut rng = stream_rng(cfg.seed, streams::BALL_PATHS, index);
    for proposals in 1..=cfg.budget {
        if propose_ball(cfg, &mut rng, buf) {
            return Ok(proposals);
        }
    }
    Err(Error::SamplingBudget { budget: cfg.budget })
}

/// Path number `index` of the ball-conditioned Wiener measure: Gaussian
/// increments of variance `1/T`, rejected until the sup norm is at most 1.
pub fn sample_ball_path(cfg: &WienerConfig, index: u64) -> Result<GridPath> {
    cfg.validate()?;
    let mut buf = vec![0.0; cfg.intervals + 1];
    ball_path_into(cfg, index, &mut buf)?;
    GridPath::uniform(buf)
}

/// Path number `index` conditioned on `f(1/2) = y`: a Brownian bridge from 0
/// to `y` on `[0, 1/2]` followed by free motion from `y`. With `reject` set,
/// proposals leaving the unit ball are discarded.
pub fn sample_conditioned_path(y: f64, cfg: &WienerConfig, index: u64, reject: bool) -> Result<GridPath> {
    cfg.validate()?;
    if !(y.abs() <= 1.0) {
        return Err(Error::invalid("conditioning value must lie in [-1, 1]"));
    }
    let h = cfg.half();
    let sd = cfg.step_sd();
    let mut rng = stream_rng(cfg.seed, streams::CONDITIONED_PATHS, index);
    let mut buf = vec![0.0; cfg.intervals + 1];
    'proposal: for _ in 0..cfg.budget {
        buf[0] = 0.0;
        for k in 1..=h {
            buf[k] = buf[k - 1] + sd * normal(&mut rng);
        }
        let end = buf[h];
        for (k, v) in buf.iter_mut().enumerate().take(h + 1) {
            *v += (k as f64 / h as f64) * (y - end);
        }
        buf[h] = y;
        if reject && buf[..=h].iter().any(|v| v.abs() > 1.0) {
            continue;
        }
        for k in h + 1..=cfg.intervals {
            buf[k] = buf[k - 1] + sd * normal(&mut rng);
            if reject && buf[k].abs() > 1.0 {
                continue 'proposal;
            }
        }
        return GridPath::uniform(buf);
    }
    Err(Error::SamplingBudget { budget: cfg.budget })
}

/// Largest deviation from the value at 1/2 over window nodes `|k - T/2| <= w`.
fn window_deviation(values: &[f64], half: usize, w: usize) -> f64 {
    let c = values[half];
    values[half - w..=half + w].iter().fold(0.0f64, |acc, v| acc.max((v - c).abs()))
}

/// Membership in `F(m)`: `|f(t_k) - f(1/2)| < 1` on the nodes with
/// `|t_k - 1/2| <= 1/m`. The path must live on the uniform grid with `T`
/// divisible by `m`.
pub fn fm_membership(path: &GridPath, m: usize) -> Result<bool> {
    let intervals = path.len() - 1;
    let uniform = path.grid().iter().enumerate().all(|(k, t)| *t == k as f64 / intervals as f64);
    if !uniform || m < 2 || intervals % m != 0 {
        return Err(Error::MisalignedWindow { m, intervals });
    }
    Ok(window_deviation(path.values(), intervals / 2, intervals / m) < 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub m: usize,
    pub delta_hat: f64,
    pub ci: Interval,
    pub failures: u64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceEstimate {
    pub accepted: u64,
    pub proposals: u64,
    pub rate: f64,
    pub ci: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCurve {
    pub estimates: Vec<DeltaEstimate>,
    pub acceptance: AcceptanceEstimate,
}

const CHUNK: usize = 256;

/// `delta_m = mu(F_0 \ F(m))` for every `m`, all judged on one common set of
/// ball-conditioned paths so that the estimates are exactly monotone in `m`.
pub fn estimate_delta_curve(ms: &[usize], cfg: &WienerConfig) -> Result<DeltaCurve> {
    cfg.validate()?;
    if cfg.n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    let widths = ms.iter().map(|&m| cfg.window_nodes(m)).collect::<Result<Vec<_>>>()?;
    let n = cfg.n_samples;
    let chunks = n.div_ceil(CHUNK);
    let per_chunk = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = vec![0.0; cfg.intervals + 1];
            let mut fails = vec![0u64; widths.len()];
            let mut proposals = 0u64;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                proposals += ball_path_into(cfg, i as u64, &mut buf)?;
                for (f, &w) in fails.iter_mut().zip(&widths) {
                    if window_deviation(&buf, cfg.half(), w) >= 1.0 {
                        *f += 1;
                    }
                }
            }
            Ok((fails, proposals))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut fails = vec![0u64; widths.len()];
    let mut proposals = 0u64;
    for (f, p) in per_chunk {
        for (a, b) in fails.iter_mut().zip(f) {
            *a += b;
        }
        proposals += p;
    }
    let samples = n as u64;
    let estimates = ms
        .iter()
        .zip(fails)
        .map(|(&m, failures)| DeltaEstimate {
            m,
            delta_hat: failures as f64 / samples as f64,
            ci: wilson(failures, samples, Z95),
            failures,
            samples,
        })
        .collect();
    let acceptance = AcceptanceEstimate {
        accepted: samples,
        proposals,
        rate: samples as f64 / proposals as f64,
        ci: wilson(samples, proposals, Z95),
    };
    Ok(DeltaCurve { estimates, acceptance })
}

pub fn estimate_delta_m(m: usize, cfg: &WienerConfig) -> Result<DeltaEstimate> {
    Ok(estimate_delta_curve(&[m], cfg)?.estimates.remove(0))
}
