//! Batch experiments: a flat JSON config in, a JSON result document (and an
//! optional CSV table) out.
//!
//! A config is one JSON object with an `experiment` name, a `seed`, and the
//! experiment's own parameters; unknown keys are rejected. Every result is a
//! pure function of the config, so two runs differ only in `wall_time`.

use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};

use crate::chebyshev::{brute_radius_oracle, epsilon_center_diameter, radius_center, PointSet};
use crate::error::{Error, Result};
use crate::gallery::{
    atoms_construct, atoms_worst_radius, cost_model_eval, hilbert_slab_demo, measure_zero_removal_probe,
    uc_delta_convergence, AtomMeasureSpec, CostModel, SlabSpec,
};
use crate::information::{
    perturbation_probe, prob_radius_upper, worst_radius, Ball, BandFamily, ExcludedSetFamily, InformationOperator,
    ProbBudget, SlabFamily,
};
use crate::paverage::{p_sweep, UniformOn};
use crate::spaces::{modulus_of_convexity, NormedSpace, SpaceKind};
use crate::wiener::{estimate_delta_curve, worst_case_radius_wiener, DeltaCurve, WienerConfig};

pub const EXPERIMENTS: [&str; 10] = [
    "wiener-gap",
    "fm-measure",
    "chebyshev",
    "p-average",
    "atoms-demo",
    "hilbert-demo",
    "cost-model",
    "uc-convergence",
    "modulus",
    "perturbation",
];

/// A named claim with the computed value, what it is compared against, and
/// the tolerance used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassFlag {
    pub claim: String,
    pub computed: Value,
    pub expected: Value,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl PassFlag {
    pub fn close(claim: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Self {
        PassFlag {
            claim: claim.into(),
            computed: json!(computed),
            expected: json!(expected),
            tolerance: Some(tol),
            pass: (computed - expected).abs() <= tol,
        }
    }

    pub fn at_least(claim: impl Into<String>, computed: f64, bound: f64) -> Self {
        PassFlag {
            claim: claim.into(),
            computed: json!(computed),
            expected: json!({ "at_least": bound }),
            tolerance: None,
            pass: computed >= bound,
        }
    }

    pub fn holds(claim: impl Into<String>, ok: bool) -> Self {
        PassFlag { claim: claim.into(), computed: json!(ok), expected: json!(true), tolerance: None, pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config_echo: Value,
    pub results: Value,
    pub pass_flags: Vec<PassFlag>,
    pub wall_time: f64,
    /// Plot-ready table, written separately when requested.
    #[serde(skip)]
    pub csv: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.pass_flags.iter().all(|f| f.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The document with `wall_time` zeroed, for reproducibility checks.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time = 0.0;
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

/// Accepts `x` or `[x, ...]`, so a one-element list can be passed as a scalar flag.
fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::<T>::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WienerGapParams {
    #[serde(rename = "T")]
    pub intervals: usize,
    #[serde(alias = "samples")]
    pub n_samples: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub deltas: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub ms: Vec<usize>,
    pub y_count: usize,
    pub tol: f64,
    pub budget: u64,
}

impl Default for WienerGapParams {
    fn default() -> Self {
        WienerGapParams {
            intervals: 1024,
            n_samples: 100_000,
            deltas: vec![0.5, 0.2, 0.1],
            ms: vec![2, 4, 8, 16, 32, 64],
            y_count: 41,
            tol: 1e-9,
            budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FmMeasureParams {
    #[serde(rename = "T")]
    pub intervals: usize,
    #[serde(alias = "samples")]
    pub n_samples: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub ms: Vec<usize>,
    pub budget: u64,
}

impl Default for FmMeasureParams {
    fn default() -> Self {
        FmMeasureParams { intervals: 1024, n_samples: 100_000, ms: vec![2, 4, 8, 16, 32, 64], budget: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChebyshevParams {
    pub space: String,
    /// Inline points; ignored when `points_csv` is set.
    pub points: Vec<Vec<f64>>,
    pub points_csv: Option<String>,
    pub tol: f64,
    pub max_iters: usize,
    /// Grid step of the exhaustive oracle (dimension <= 3); 0 disables it.
    pub oracle_step: f64,
    pub oracle_tol: f64,
    pub expected_radius: Option<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub eps: Vec<f64>,
    pub center_samples: usize,
}

impl Default for ChebyshevParams {
    fn default() -> Self {
        let s3 = 3f64.sqrt();
        ChebyshevParams {
            space: "euclidean:dim=2".into(),
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, s3 / 2.0]],
            points_csv: None,
            tol: 1e-10,
            max_iters: 2000,
            oracle_step: 2e-3,
            oracle_tol: 1e-3,
            expected_radius: Some(1.0 / s3),
            eps: vec![],
            center_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PAverageParams {
    #[serde(alias = "samples")]
    pub n: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub ps: Vec<f64>,
    /// Append `p = inf` (the sample maximum) to the sweep.
    pub include_inf: bool,
    #[serde(deserialize_with = "one_or_many")]
    pub deltas: Vec<f64>,
    pub y_cells: usize,
    pub grid: usize,
    pub measure_samples: usize,
    pub n_points: usize,
}

impl Default for PAverageParams {
    fn default() -> Self {
        PAverageParams {
            n: 100_000,
            ps: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            include_inf: true,
            deltas: vec![0.2, 0.1, 0.05, 0.01],
            y_cells: 32,
            grid: 41,
            measure_samples: 200_000,
            n_points: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomsParams {
    pub atoms: Vec<(f64, f64)>,
    #[serde(deserialize_with = "one_or_many")]
    pub deltas: Vec<f64>,
    pub n_directions: usize,
    pub y_count: usize,
    pub slope: Option<f64>,
}

impl Default for AtomsParams {
    fn default() -> Self {
        AtomsParams {
            atoms: vec![(0.0, 0.5), (0.5, 0.3), (1.0 / 3.0, 0.2)],
            deltas: vec![0.05, 0.01],
            n_directions: 360,
            y_count: 21,
            slope: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HilbertParams {
    pub dim: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub gammas: Vec<f64>,
    #[serde(alias = "samples")]
    pub n: usize,
    pub delta: f64,
    pub min_measure: f64,
    pub ratio_tol: f64,
}

impl Default for HilbertParams {
    fn default() -> Self {
        HilbertParams { dim: 6, gammas: vec![0.1, 0.01, 0.001], n: 100_000, delta: 0.01, min_measure: 0.99, ratio_tol: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    pub c: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub epsilon: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams { c: 1.0, m: 0.1, big_m: 10.0, epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UcParams {
    #[serde(deserialize_with = "one_or_many")]
    pub deltas: Vec<f64>,
    pub grid: usize,
    pub measure_samples: usize,
    pub n_points: usize,
    pub bound_tol: f64,
    pub removal_grid: usize,
    pub control_width: f64,
    pub removal_tol: f64,
}

impl Default for UcParams {
    fn default() -> Self {
        UcParams {
            deltas: vec![0.1, 0.01, 0.0],
            grid: 41,
            measure_samples: 400_000,
            n_points: 3,
            bound_tol: 2e-3,
            removal_grid: 41,
            control_width: 0.1,
            removal_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulusParams {
    pub space: String,
    #[serde(deserialize_with = "one_or_many")]
    pub epsilons: Vec<f64>,
    pub tol: f64,
}

impl Default for ModulusParams {
    fn default() -> Self {
        ModulusParams { space: "lp:p=2,dim=2".into(), epsilons: vec![0.25, 0.5, 1.0, 1.5, 2.0], tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationParams {
    pub y: f64,
    #[serde(deserialize_with = "one_or_many")]
    pub scales: Vec<f64>,
    pub n_points: usize,
    /// Allowed `change / scale` in the interior of the observation range.
    pub lipschitz_bound: f64,
}

impl Default for PerturbationParams {
    fn default() -> Self {
        PerturbationParams { y: 0.5, scales: vec![0.0, 1e-4, 1e-3, 1e-2], n_points: 3, lipschitz_bound: 10.0 }
    }
}

/// Parsed, fully defaulted configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    WienerGap(WienerGapParams),
    FmMeasure(FmMeasureParams),
    Chebyshev(ChebyshevParams),
    PAverage(PAverageParams),
    Atoms(AtomsParams),
    Hilbert(HilbertParams),
    Cost(CostParams),
    Uc(UcParams),
    Modulus(ModulusParams),
    Perturbation(PerturbationParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub params: Params,
}

fn typed<T: DeserializeOwned>(rest: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(rest)).map_err(|e| Error::Config(e.to_string()))
}

impl ExperimentConfig {
    /// Parses a flat config object. Keys other than `experiment`, `seed` and
    /// the experiment's own parameters are errors.
    pub fn from_value(v: Value) -> Result<Self> {
        let Value::Object(mut map) = v else {
            return Err(Error::Config("config must be a JSON object".into()));
        };
        let experiment = match map.remove("experiment") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(Error::Config("experiment must be a string".into())),
            None => return Err(Error::Config("missing experiment".into())),
        };
        let seed = match map.remove("seed") {
            None => 0,
            Some(s) => s.as_u64().ok_or_else(|| Error::Config("seed must be a nonnegative integer".into()))?,
        };
        let params = match experiment.as_str() {
            "wiener-gap" => Params::WienerGap(typed(map)?),
            "fm-measure" => Params::FmMeasure(typed(map)?),
            "chebyshev" => Params::Chebyshev(typed(map)?),
            "p-average" => Params::PAverage(typed(map)?),
            "atoms-demo" => Params::Atoms(typed(map)?),
            "hilbert-demo" => Params::Hilbert(typed(map)?),
            "cost-model" => Params::Cost(typed(map)?),
            "uc-convergence" => Params::Uc(typed(map)?),
            "modulus" => Params::Modulus(typed(map)?),
            "perturbation" => Params::Perturbation(typed(map)?),
            other => {
                return Err(Error::Config(format!("unknown experiment '{other}'; expected one of {}", EXPERIMENTS.join(", "))))
            }
        };
        Ok(ExperimentConfig { experiment, seed, params })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?)
    }

    /// The full config with defaults filled in.
    pub fn echo(&self) -> Value {
        let p = match &self.params {
            Params::WienerGap(p) => serde_json::to_value(p),
            Params::FmMeasure(p) => serde_json::to_value(p),
            Params::Chebyshev(p) => serde_json::to_value(p),
            Params::PAverage(p) => serde_json::to_value(p),
            Params::Atoms(p) => serde_json::to_value(p),
            Params::Hilbert(p) => serde_json::to_value(p),
            Params::Cost(p) => serde_json::to_value(p),
            Params::Uc(p) => serde_json::to_value(p),
            Params::Modulus(p) => serde_json::to_value(p),
            Params::Perturbation(p) => serde_json::to_value(p),
        }
        .expect("params serialize");
        let mut map = Map::new();
        map.insert("experiment".into(), json!(self.experiment));
        map.insert("seed".into(), json!(self.seed));
        if let Value::Object(rest) = p {
            map.extend(rest);
        }
        Value::Object(map)
    }
}

/// Converts a command-line value: numbers, booleans, comma lists of those,
/// inline JSON arrays or objects, and `null`; anything else (including comma
/// separated text such as space labels) stays a string.
pub fn flag_value(raw: &str) -> Value {
    fn scalar(s: &str) -> Value {
        let s = s.trim();
        if let Ok(i) = s.parse::<u64>() {
            return json!(i);
        }
        if let Ok(i) = s.parse::<i64>() {
            return json!(i);
        }
        match s {
            "true" => return json!(true),
            "false" => return json!(false),
            "null" => return Value::Null,
            _ => {}
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => json!(x),
            _ => json!(s),
        }
    }
    if raw.contains(',') && !raw.trim_start().starts_with('[') {
        let parts: Vec<Value> = raw.split(',').map(scalar).collect();
        if parts.iter().any(Value::is_string) {
            json!(raw)
        } else {
            Value::Array(parts)
        }
    } else if raw.trim_start().starts_with('[') || raw.trim_start().starts_with('{') {
        serde_json::from_str(raw).unwrap_or_else(|_| json!(raw))
    } else {
        scalar(raw)
    }
}

pub fn run_json(config: &str) -> Result<Report> {
    run(&ExperimentConfig::from_json(config)?)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let seed = cfg.seed;
    let (results, pass_flags, csv) = match &cfg.params {
        Params::WienerGap(p) => wiener_gap(p, seed)?,
        Params::FmMeasure(p) => fm_measure(p, seed)?,
        Params::Chebyshev(p) => chebyshev(p, seed)?,
        Params::PAverage(p) => p_average(p, seed)?,
        Params::Atoms(p) => atoms(p)?,
        Params::Hilbert(p) => hilbert(p, seed)?,
        Params::Cost(p) => cost(p)?,
        Params::Uc(p) => uc(p, seed)?,
        Params::Modulus(p) => modulus(p)?,
        Params::Perturbation(p) => perturbation(p, seed)?,
    };
    Ok(Report {
        experiment: cfg.experiment.clone(),
        config_echo: cfg.echo(),
        results,
        pass_flags,
        wall_time: start.elapsed().as_secs_f64(),
        csv,
    })
}

type Outcome = Result<(Value, Vec<PassFlag>, Option<String>)>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

fn curve_csv(curve: &DeltaCurve) -> String {
    let mut s = String::from("m,delta_hat,ci_lo,ci_hi\n");
    for e in &curve.estimates {
        s.push_str(&format!("{},{},{},{}\n", e.m, e.delta_hat, e.ci.lo, e.ci.hi));
    }
    s
}

fn y_grid(count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::Config("y_count must be >= 2".into()));
    }
    Ok((0..count).map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64).collect())
}

fn wiener_gap(p: &WienerGapParams, seed: u64) -> Outcome {
    let cfg = WienerConfig { intervals: p.intervals, n_samples: p.n_samples, seed, budget: p.budget };
    cfg.validate()?;
    let ys = y_grid(p.y_count)?;
    let worst = worst_case_radius_wiener(&cfg, &ys, p.tol)?;
    let curve = estimate_delta_curve(&p.ms, &cfg)?;
    let mut flags = vec![PassFlag::close("worst-case radius equals 2", worst.value, 2.0, 1e-6)];
    let mut bounds = Vec::with_capacity(p.deltas.len());
    for &delta in &p.deltas {
        match crate::wiener::select_window(delta, &curve.estimates, &cfg, &ys, p.tol) {
            Ok(b) => {
                flags.push(PassFlag::holds(
                    format!("window m = {} certified for delta = {delta}", b.m),
                    b.delta_hat + 2.0 * b.ci.half_width() <= delta,
                ));
                flags.push(PassFlag::close(format!("probabilistic radius bound at delta = {delta} equals 1"), b.bound, 1.0, 1e-6));
                bounds.push(json!({
                    "delta": delta, "m": b.m, "bound": b.bound, "delta_hat": b.delta_hat,
                    "ci": b.ci, "per_y": b.per_y, "converged": b.converged,
                }));
            }
            Err(Error::Infeasible(msg)) => {
                flags.push(PassFlag::holds(format!("some window certified for delta = {delta}"), false));
                bounds.push(json!({ "delta": delta, "error": msg }));
            }
            Err(e) => return Err(e),
        }
    }
    let results = json!({
        "worst_radius": worst.value,
        "worst_converged": worst.converged,
        "prob_bounds": bounds,
        "per_y": worst.per_y,
        "delta_curve": curve.estimates,
        "acceptance": curve.acceptance,
    });
    let csv = curve_csv(&curve);
    Ok((results, flags, Some(csv)))
}

fn fm_measure(p: &FmMeasureParams, seed: u64) -> Outcome {
    let cfg = WienerConfig { intervals: p.intervals, n_samples: p.n_samples, seed, budget: p.budget };
    cfg.validate()?;
    let mut ms = p.ms.clone();
    ms.sort_unstable();
    let curve = estimate_delta_curve(&ms, &cfg)?;
    let est = &curve.estimates;
    let mut flags = Vec::new();
    flags.push(PassFlag::holds(
        "delta_hat nonincreasing in m on common paths",
        est.windows(2).all(|w| w[1].delta_hat <= w[0].delta_hat),
    ));
    for w in est.windows(2) {
        flags.push(PassFlag {
            claim: format!("delta_hat({}) > delta_hat({}) with disjoint 95% intervals", w[0].m, w[1].m),
            computed: json!([w[0].ci, w[1].ci]),
            expected: json!("upper interval entirely above lower"),
            tolerance: None,
            pass: w[0].delta_hat > w[1].delta_hat && w[0].ci.lo > w[1].ci.hi,
        });
    }
    let results = json!({ "delta_curve": est, "acceptance": curve.acceptance });
    Ok((results, flags, Some(curve_csv(&curve))))
}

fn read_points_csv(path: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match row {
            Ok(r) => points.push(r),
            // a non-numeric first row is a header
            Err(_) if points.is_empty() && i == 0 => continue,
            Err(e) => return Err(Error::Config(format!("{path}:{}: {e}", i + 1))),
        }
    }
    Ok(points)
}

fn chebyshev(p: &ChebyshevParams, seed: u64) -> Outcome {
    let space: NormedSpace = p.space.parse()?;
    let pts = match &p.points_csv {
        Some(path) => read_points_csv(path)?,
        None => p.points.clone(),
    };
    let set = PointSet::new(pts)?;
    let cert = radius_center(&set, &space, p.tol, p.max_iters)?;
    let mut flags = vec![PassFlag::holds("solver gap within tolerance", cert.converged)];
    let mut oracle = Value::Null;
    if p.oracle_step > 0.0 && set.dim() <= 3 {
        let bb = set.bounding_box();
        let value = brute_radius_oracle(&set, &space, &bb, p.oracle_step)?;
        flags.push(PassFlag::close("radius matches exhaustive grid oracle", cert.radius, value, p.oracle_tol));
        oracle = json!(value);
    }
    if let Some(r) = p.expected_radius {
        flags.push(PassFlag::close("radius matches expected value", cert.radius, r, 1e-6));
    }
    let probe = if p.eps.is_empty() {
        Value::Null
    } else {
        to_value(&epsilon_center_diameter(&set, &space, &p.eps, p.center_samples, seed)?)
    };
    let results = json!({ "certificate": cert, "oracle": oracle, "center_set": probe });
    Ok((results, flags, None))
}

fn p_label(p: f64) -> Value {
    if p.is_infinite() {
        json!("inf")
    } else {
        json!(p)
    }
}

fn p_average(p: &PAverageParams, seed: u64) -> Outcome {
    let n_op = InformationOperator::coordinate(2, 0);
    let space = NormedSpace::euclidean(2);
    let disk = Ball::unit(2);
    let band = BandFamily::new(p.grid);
    let budget = ProbBudget { measure_samples: p.measure_samples, n_points: p.n_points, bisection_steps: 50, seed };
    let worst = worst_radius(&n_op, &disk, &space, &band.y_grid(0.0), p.n_points, seed)?.value;
    let prob = p
        .deltas
        .iter()
        .map(|&d| prob_radius_upper(&n_op, &band, d, &space, &budget))
        .collect::<Result<Vec<_>>>()?;
    let mut ps = p.ps.clone();
    if p.include_inf {
        ps.push(f64::INFINITY);
    }
    let sweep = p_sweep(&n_op, &ps, &UniformOn(disk), &space, &prob, Some(worst), p.y_cells, p.n, seed)?;

    let mut flags = vec![PassFlag::holds("estimates nondecreasing in p on the common sample", sweep.monotone)];
    let mut csv = String::from("p,estimate,ci_lo,ci_hi,bound_checks_passed\n");
    let mut rows = Vec::new();
    for r in &sweep.rows {
        if r.p == 2.0 {
            flags.push(PassFlag::close("R_2 on the uniform disk equals 1/2", r.estimate, 0.5, 0.02));
        }
        if r.p == 64.0 {
            flags.push(PassFlag::at_least("R_64 approaches the worst-case radius", r.estimate, 0.9));
        }
        for c in &r.checks {
            flags.push(PassFlag::at_least(
                format!("R_{} >= bound(delta = {}) * delta^(1/p) - 2 CI", r.p, c.delta),
                r.estimate,
                c.lower,
            ));
        }
        if let Some(ok) = r.below_worst {
            flags.push(PassFlag::holds(format!("R_{} <= worst-case radius + 2 CI", r.p), ok));
        }
        let all = r.checks.iter().all(|c| c.pass);
        csv.push_str(&format!("{},{},{},{},{}\n", if r.p.is_infinite() { "inf".into() } else { r.p.to_string() }, r.estimate, r.ci95.lo, r.ci95.hi, all));
        rows.push(json!({
            "p": p_label(r.p), "estimate": r.estimate, "ci95": r.ci95,
            "checks": r.checks, "below_worst": r.below_worst,
        }));
    }
    let results = json!({ "worst_radius": worst, "prob_bounds": prob, "rows": rows, "monotone": sweep.monotone });
    Ok((results, flags, Some(csv)))
}

fn atoms(p: &AtomsParams) -> Outcome {
    let mut spec = AtomMeasureSpec::new(p.atoms.clone())?;
    spec.slope = p.slope;
    let mut flags = Vec::new();
    let mut constructions = Vec::new();
    for &delta in &p.deltas {
        match atoms_construct(&spec, delta) {
            Ok(c) => {
                flags.push(PassFlag {
                    claim: format!("zero-radius set of measure >= 1 - {delta}, every fiber meets it at most once"),
                    computed: json!({ "radius": c.certificate.radius, "collisions": c.collisions, "mass": c.mass }),
                    expected: json!({ "radius": 0.0, "collisions": 0, "mass_at_least": 1.0 - delta }),
                    tolerance: None,
                    pass: c.certificate.radius == 0.0 && c.collisions == 0 && c.mass >= 1.0 - delta,
                });
                constructions.push(to_value(&c));
            }
            Err(Error::Infeasible(msg)) => {
                flags.push(PassFlag::holds(format!("construction feasible at delta = {delta}"), false));
                constructions.push(json!({ "delta": delta, "error": msg }));
            }
            Err(e) => return Err(e),
        }
    }
    let worst = atoms_worst_radius(p.n_directions, &y_grid(p.y_count)?)?;
    flags.push(PassFlag::close("worst-case radius with one functional equals 1", worst, 1.0, 1e-9));
    Ok((json!({ "constructions": constructions, "worst_radius": worst }), flags, None))
}

fn hilbert(p: &HilbertParams, seed: u64) -> Outcome {
    let mut flags = Vec::new();
    let mut demos = Vec::new();
    let mut gammas = p.gammas.clone();
    gammas.sort_by(|a, b| b.total_cmp(a));
    for &g in &gammas {
        let mut spec = SlabSpec::standard(p.dim, g);
        spec.delta = p.delta;
        let d = hilbert_slab_demo(&spec, p.n, seed)?;
        flags.push(PassFlag::close(format!("e_wor = 2 at gamma = {g}"), d.e_wor, 2.0, 0.0));
        flags.push(PassFlag::close(format!("e_delta = sqrt(2 + 2 gamma) at gamma = {g}"), d.e_delta, (2.0 + 2.0 * g).sqrt(), 0.0));
        flags.push(PassFlag::close(format!("constrained search reaches e_delta at gamma = {g}"), d.e_delta_search, d.e_delta, 1e-6));
        flags.push(PassFlag::at_least(format!("slab measure at gamma = {g}"), d.slab_measure, p.min_measure));
        flags.push(PassFlag::holds(format!("slab measure certified at 1 - {} (gamma = {g})", p.delta), d.measure_certified));
        demos.push(to_value(&d));
    }
    let ratio = gammas.last().map(|&g| 2.0 / (2.0 + 2.0 * g).sqrt());
    if let Some(r) = ratio {
        flags.push(PassFlag::close("e_wor / e_delta near sqrt 2 at the smallest gamma", r, std::f64::consts::SQRT_2, p.ratio_tol * std::f64::consts::SQRT_2));
    }
    Ok((json!({ "demos": demos, "ratio_at_smallest_gamma": ratio }), flags, None))
}

fn cost(p: &CostParams) -> Outcome {
    let model = CostModel { c: p.c, m: p.m, big_m: p.big_m };
    let e = cost_model_eval(&model, p.epsilon)?;
    let flags = vec![
        PassFlag::close("comp_delta = min(c + m, 2c)", e.comp_delta, (p.c + p.m).min(2.0 * p.c), 0.0),
        PassFlag::close("comp_wor = min(c + M, 2c)", e.comp_wor, (p.c + p.big_m).min(2.0 * p.c), 0.0),
        PassFlag::holds("gap iff m < min(c, M)", e.gap == (p.m < p.c.min(p.big_m))),
    ];
    Ok((to_value(&e), flags, None))
}

/// Half-width of the central slab removing a fraction `delta` of the disk.
fn slab_tau(delta: f64) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if SlabFamily::excluded_fraction(mid) < delta {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

fn uc(p: &UcParams, seed: u64) -> Outcome {
    let budget = ProbBudget { measure_samples: p.measure_samples, n_points: p.n_points, bisection_steps: 50, seed };
    let table = uc_delta_convergence(&p.deltas, p.grid, &budget)?;
    let mut flags = vec![
        PassFlag::holds("bounds nondecreasing as delta decreases, capped by the worst radius", table.monotone),
        PassFlag::close("worst-case radius on the disk", table.worst, 1.0, 1e-12),
    ];
    for r in &table.rows {
        if r.delta == 0.0 {
            flags.push(PassFlag::close("bound at delta = 0 is the worst radius", r.prob_bound, 1.0, 0.0));
        } else {
            let exact = (1.0 - slab_tau(r.delta).powi(2)).sqrt();
            flags.push(PassFlag::close(format!("bound at delta = {} matches the slab area formula", r.delta), r.prob_bound, exact, p.bound_tol));
            if r.delta <= 0.01 {
                flags.push(PassFlag::at_least(format!("bound at delta = {}", r.delta), r.prob_bound, 0.9999));
            }
        }
    }
    let removal = measure_zero_removal_probe(p.removal_grid, p.control_width, p.removal_tol, seed)?;
    for row in &removal.rows {
        let claim = if row.null_set {
            format!("removing {} leaves radii unchanged", row.removed)
        } else {
            format!("removing {} lowers the worst radius", row.removed)
        };
        flags.push(PassFlag {
            claim,
            computed: json!(row.worst),
            expected: json!(removal.full_worst),
            tolerance: Some(removal.tolerance),
            pass: row.pass,
        });
    }
    let mut csv = String::from("delta,prob_bound,theta,worst\n");
    for r in &table.rows {
        csv.push_str(&format!("{},{},{},{}\n", r.delta, r.prob_bound, r.theta, table.worst));
    }
    Ok((json!({ "table": table, "removal": removal }), flags, Some(csv)))
}

fn modulus(p: &ModulusParams) -> Outcome {
    let space: NormedSpace = p.space.parse()?;
    let closed_form = |eps: f64| -> Option<f64> {
        match space.kind() {
            SpaceKind::Euclidean { .. } => Some(1.0 - (1.0 - eps * eps / 4.0).sqrt()),
            SpaceKind::Lp { p, .. } if p == 2.0 => Some(1.0 - (1.0 - eps * eps / 4.0).sqrt()),
            // flat faces: midpoints of far-apart unit vectors stay on the sphere
            SpaceKind::Lp { p, .. } if p == 1.0 || p.is_infinite() => Some(0.0),
            _ => None,
        }
    };
    let mut flags = Vec::new();
    let mut rows = Vec::new();
    let mut csv = String::from("epsilon,modulus\n");
    for &eps in &p.epsilons {
        let m = modulus_of_convexity(&space, eps, p.tol)?;
        if let Some(exact) = closed_form(eps) {
            flags.push(PassFlag::close(format!("modulus at epsilon = {eps}"), m.value, exact, 1e-6));
        }
        csv.push_str(&format!("{eps},{}\n", m.value));
        rows.push(m);
    }
    flags.push(PassFlag::holds("modulus nondecreasing in epsilon", {
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        sorted.windows(2).all(|w| w[0].value <= w[1].value + 1e-9)
    }));
    Ok((json!({ "space": space.label(), "rows": rows }), flags, Some(csv)))
}

fn perturbation(p: &PerturbationParams, seed: u64) -> Outcome {
    let n = InformationOperator::coordinate(2, 0);
    let space = NormedSpace::euclidean(2);
    let r = perturbation_probe(&n, &[p.y], &p.scales, &Ball::unit(2), &space, p.n_points, seed)?;
    let mut flags = Vec::new();
    for row in &r.rows {
        if row.scale == 0.0 {
            flags.push(PassFlag::close("zero perturbation reproduces the local radius", row.max_abs_change, 0.0, 0.0));
        } else if r.interior {
            flags.push(PassFlag {
                claim: format!("local radius change / scale bounded at scale {}", row.scale),
                computed: json!(row.max_ratio),
                expected: json!({ "at_most": p.lipschitz_bound }),
                tolerance: None,
                pass: row.max_ratio <= p.lipschitz_bound,
            });
        }
    }
    let mut csv = String::from("scale,max_abs_change,max_ratio\n");
    for row in &r.rows {
        csv.push_str(&format!("{},{},{}\n", row.scale, row.max_abs_change, row.max_ratio));
    }
    Ok((to_value(&r), flags, Some(csv)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        assert_eq!(flag_value("1024"), json!(1024));
        assert_eq!(flag_value("0.5,0.2"), json!([0.5, 0.2]));
        assert_eq!(flag_value("lp:p=2,dim=2"), json!("lp:p=2,dim=2"));
        assert_eq!(flag_value("true"), json!(true));
        assert_eq!(flag_value("[[0,1],[2,3]]"), json!([[0, 1], [2, 3]]));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ExperimentConfig::from_json(r#"{"experiment":"cost-model","c":1,"bogus":2}"#), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_json(r#"{"experiment":"nope"}"#), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_json("[1]"), Err(Error::Config(_))));
    }

    #[test]
    fn scalar_list_accepted() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"wiener-gap","deltas":0.1,"T":64}"#).unwrap();
        match c.params {
            Params::WienerGap(p) => {
                assert_eq!(p.deltas, vec![0.1]);
                assert_eq!(p.intervals, 64);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn cost_model_run() {
        let r = run_json(r#"{"experiment":"cost-model","c":1,"m":0.1,"M":10}"#).unwrap();
        assert!(r.passed());
        assert_eq!(r.results["comp_delta"], json!(1.1));
        assert_eq!(r.results["comp_wor"], json!(2.0));
        assert_eq!(r.config_echo["M"], json!(10.0));
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"p-average","seed":3,"n":500}"#).unwrap();
        let again = ExperimentConfig::from_value(c.echo()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn chebyshev_default_triangle() {
        let r = run_json(r#"{"experiment":"chebyshev","oracle_step":0.01,"oracle_tol":0.01}"#).unwrap();
        assert!(r.passed(), "{:?}", r.pass_flags);
    }
}
