//! Acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line before asserting. Run with
//! `cargo test -p radius-lab --test acceptance -- --nocapture --test-threads 1`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use radius_lab::chebyshev::{brute_radius_oracle, epsilon_center_diameter, radius_center, PointSet};
use radius_lab::experiment::{run, run_json, ExperimentConfig};
use radius_lab::gallery::{
    atoms_construct, atoms_worst_radius, cost_model_eval, hilbert_slab_demo, measure_zero_removal_probe,
    uc_delta_convergence, AtomMeasureSpec, CostModel, SlabSpec,
};
use radius_lab::information::{prob_radius_upper, worst_radius, Ball, BandFamily, ExcludedSetFamily, InformationOperator, ProbBudget};
use radius_lab::paverage::{p_sweep, UniformOn};
use radius_lab::spaces::NormedSpace;
use radius_lab::wiener::{
    adversary_f_eta, best_center_error, estimate_delta_curve, fiber_sup_error, functional_value, optimize_center,
    tent_center, Density, DiscreteFunctional, FiberSpec, WienerConfig,
};

fn verdict(n: u32, what: &str, ok: bool, detail: String) -> bool {
    println!("{} criterion {n} ({what}): {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

// ---------------------------------------------------------------- 1

const GAP_TOL: f64 = 1e-6;
const GAP_RUNTIME_S: f64 = 300.0;

#[test]
fn criterion_1_wiener_gap() {
    let start = Instant::now();
    let report = run_json(
        r#"{"experiment":"wiener-gap","seed":7,"T":1024,"n_samples":100000,"deltas":[0.5,0.2,0.1]}"#,
    )
    .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let r = &report.results;
    let worst = r["worst_radius"].as_f64().unwrap();
    let mut ok = (worst - 2.0).abs() <= GAP_TOL && secs <= GAP_RUNTIME_S;
    let mut parts = vec![format!("worst {worst:.9}")];
    for b in r["prob_bounds"].as_array().unwrap() {
        let delta = b["delta"].as_f64().unwrap();
        match (b["bound"].as_f64(), b["m"].as_u64()) {
            (Some(bound), Some(m)) => {
                let dh = b["delta_hat"].as_f64().unwrap();
                let hw = (b["ci"]["hi"].as_f64().unwrap() - b["ci"]["lo"].as_f64().unwrap()) / 2.0;
                ok &= (bound - 1.0).abs() <= GAP_TOL && dh + 2.0 * hw <= delta;
                parts.push(format!("delta {delta}: m {m}, bound {bound:.9}, delta_hat+2hw {:.5}", dh + 2.0 * hw));
            }
            _ => {
                ok = false;
                parts.push(format!("delta {delta}: no certified window"));
            }
        }
    }
    parts.push(format!("{secs:.1}s"));
    assert!(verdict(1, "wiener gap", ok, parts.join("; ")));
}

// ---------------------------------------------------------------- 2

const FULL_TOL: f64 = 1e-6;
const TENT_TOL: f64 = 1e-9;

#[test]
fn criterion_2_fiber_radius_law() {
    let cfg = WienerConfig::new(1024, 1, 0).unwrap();
    let mut ok = true;
    let mut worst_dev: f64 = 0.0;
    let mut tent_dev: f64 = 0.0;
    for y in [0.0, 0.5, -0.5, 1.0, -1.0] {
        // closed form for the full ball: 1 + |y|
        let c = optimize_center(&FiberSpec::full(y), &cfg, 1e-10, 10_000).unwrap();
        worst_dev = worst_dev.max((c.radius - (1.0 + f64::abs(y))).abs());
        let tent = tent_center(y, 8, &cfg).unwrap();
        let e = fiber_sup_error(&tent, &FiberSpec::window(y, 8)).unwrap();
        tent_dev = tent_dev.max((e - 1.0).abs());
    }
    ok &= worst_dev <= FULL_TOL && tent_dev <= TENT_TOL;
    assert!(verdict(
        2,
        "fiber radius law",
        ok,
        format!("max |R_full - (1+|y|)| = {worst_dev:.2e}, max |tent error - 1| = {tent_dev:.2e}")
    ));
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_3_fm_measure_strictly_decreasing() {
    let cfg = WienerConfig::new(1024, 100_000, 2024).unwrap();
    let ms = [2, 4, 8, 16, 32, 64];
    let curve = estimate_delta_curve(&ms, &cfg).unwrap();
    let est = &curve.estimates;
    let mut ok = true;
    let mut parts = Vec::new();
    for w in est.windows(2) {
        let separated = w[0].delta_hat > w[1].delta_hat && w[0].ci.lo > w[1].ci.hi;
        ok &= separated;
        parts.push(format!(
            "m {}->{}: [{:.2e},{:.2e}] vs [{:.2e},{:.2e}]{}",
            w[0].m,
            w[1].m,
            w[0].ci.lo,
            w[0].ci.hi,
            w[1].ci.lo,
            w[1].ci.hi,
            if separated { "" } else { " overlap" }
        ));
    }
    assert!(verdict(3, "F(m) measure", ok, parts.join("; ")));
}

// ---------------------------------------------------------------- 4

const ETA_SPREAD: f64 = 1e-9;
const ADVERSARY_FLOOR: f64 = 2.0 - 1e-3;
const FINE_INTERVALS: usize = 1 << 22;
const COARSE_INTERVALS: usize = 64;

#[test]
fn criterion_4_general_functionals() {
    let cfg = WienerConfig::new(FINE_INTERVALS, 1, 0).unwrap();
    let etas = [1.0 / 8.0, 1.0 / 64.0, 1.0 / 1024.0, 2.0 / FINE_INTERVALS as f64];
    let functionals = vec![
        ("0.3 delta_0.25", DiscreteFunctional { atoms: vec![(0.25, 0.3)], density: None }),
        (
            "0.2 delta_0.5 + 0.1 delta_0.8 + 1.2t dt",
            DiscreteFunctional {
                atoms: vec![(0.5, 0.2), (0.8, 0.1)],
                density: Some(Density { grid: vec![0.0, 1.0], values: vec![0.0, 1.2] }),
            },
        ),
        (
            "0.9 dt",
            DiscreteFunctional { atoms: vec![], density: Some(Density { grid: vec![0.0, 1.0], values: vec![0.9, 0.9] }) },
        ),
        ("0.5 delta_0.5 + 0.4 delta_0.1", DiscreteFunctional { atoms: vec![(0.5, 0.5), (0.1, 0.4)], density: None }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, fun) in &functionals {
        // the common value is the mass at 1/2 (the spike is 1 there and the rest is compensated)
        let expected: f64 = fun.atoms.iter().filter(|a| a.0 == 0.5).map(|a| a.1).sum();
        let paths: Vec<_> = etas.iter().map(|&eta| adversary_f_eta(fun, eta, &cfg).unwrap()).collect();
        let vals: Vec<f64> = paths.iter().map(|p| functional_value(fun, p)).collect();
        let spread = vals.iter().map(|v| (v - expected).abs()).fold(0.0, f64::max);
        let best = best_center_error(&paths, COARSE_INTERVALS).unwrap();
        let good = spread <= ETA_SPREAD && best.error >= ADVERSARY_FLOOR;
        ok &= good;
        parts.push(format!("{name}: spread {spread:.1e}, best-center error {:.6}", best.error));
    }
    ok &= functionals.len() >= 3;
    assert!(verdict(4, "general functionals", ok, parts.join("; ")));
}

// ---------------------------------------------------------------- 5

const ORACLE_TOL: f64 = 1e-3;
const ORACLE_STEP: f64 = 1e-3;
const GOLDEN_TOL: f64 = 1e-6;

#[test]
fn criterion_5_chebyshev_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spaces = [NormedSpace::euclidean(2), NormedSpace::lp(4.0, 2).unwrap()];
    let mut max_dev: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.gen_range(1..=8);
        let pts: Vec<Vec<f64>> = (0..k).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let set = PointSet::new(pts).unwrap();
        for s in &spaces {
            let r = radius_center(&set, s, 1e-10, 4000).unwrap().radius;
            let o = brute_radius_oracle(&set, s, &set.bounding_box(), ORACLE_STEP).unwrap();
            max_dev = max_dev.max((r - o).abs());
        }
    }
    let mut golden_dev: f64 = 0.0;
    for s in &spaces {
        let two = PointSet::new(vec![vec![0.3, -0.2], vec![1.1, 0.4]]).unwrap();
        let half = s.eval_vector(&[0.8, 0.6]).unwrap() / 2.0;
        golden_dev = golden_dev.max((radius_center(&two, s, 1e-12, 4000).unwrap().radius - half).abs());
    }
    let tri = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).unwrap();
    let circ = radius_center(&tri, &spaces[0], 1e-12, 4000).unwrap().radius;
    golden_dev = golden_dev.max((circ - 1.0 / 3f64.sqrt()).abs());

    let pair = PointSet::new(vec![vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let eps = [0.1, 0.01, 0.001];
    let euc = epsilon_center_diameter(&pair, &spaces[0], &eps, 5000, 1).unwrap();
    let max = epsilon_center_diameter(&pair, &NormedSpace::max_norm(2), &eps, 5000, 1).unwrap();
    let ed: Vec<f64> = euc.trend.iter().map(|t| t.diameter).collect();
    let md: Vec<f64> = max.trend.iter().map(|t| t.diameter).collect();
    let shrinking = ed.windows(2).all(|w| w[1] < w[0]) && ed[2] < 0.2;
    let fat = md.iter().all(|&d| d >= 1.0);

    let ok = max_dev <= ORACLE_TOL && golden_dev <= GOLDEN_TOL && shrinking && fat;
    assert!(verdict(
        5,
        "chebyshev solver",
        ok,
        format!(
            "oracle dev {max_dev:.2e}, golden dev {golden_dev:.2e}, euclidean eps-diam {ed:.4?}, max-norm eps-diam {md:.4?}"
        )
    ));
}

// ---------------------------------------------------------------- 6

const UC_TOL: f64 = 2e-3;
const REMOVAL_TOL: f64 = 1e-6;

/// Central slab half-width removing area fraction `delta` of the unit disk,
/// from `(2/pi)(t sqrt(1 - t^2) + asin t) = delta`.
fn slab_half_width(delta: f64) -> f64 {
    let area = |t: f64| (2.0 / std::f64::consts::PI) * (t * (1.0 - t * t).sqrt() + t.asin());
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if area(m) < delta {
            a = m
        } else {
            b = m
        }
    }
    0.5 * (a + b)
}

#[test]
fn criterion_6_uniformly_convex_convergence() {
    let budget = ProbBudget { measure_samples: 400_000, n_points: 3, bisection_steps: 50, seed: 6 };
    let table = uc_delta_convergence(&[0.1, 0.01, 0.0], 41, &budget).unwrap();
    let b: Vec<f64> = table.rows.iter().map(|r| r.prob_bound).collect();
    let exact_01 = (1.0 - slab_half_width(0.1).powi(2)).sqrt();
    let mut ok = (b[0] - exact_01).abs() <= UC_TOL && b[1] >= 0.9999 && b[2] == 1.0;
    ok &= table.monotone && table.worst == 1.0;
    let removal = measure_zero_removal_probe(41, 0.1, REMOVAL_TOL, 6).unwrap();
    ok &= removal.rows.iter().all(|r| r.pass);
    let rm: Vec<String> = removal.rows.iter().map(|r| format!("{} -> {:.9}", r.removed, r.worst)).collect();
    assert!(verdict(
        6,
        "uniformly convex convergence",
        ok,
        format!(
            "bounds {b:.7?} (closed form at 0.1: {exact_01:.7}), worst {}, removal: {}",
            table.worst,
            rm.join(", ")
        )
    ));
}

// ---------------------------------------------------------------- 7

const R2_TOL: f64 = 0.02;
const R64_FLOOR: f64 = 0.9;

#[test]
fn criterion_7_p_average() {
    let n = InformationOperator::coordinate(2, 0);
    let space = NormedSpace::euclidean(2);
    let band = BandFamily::new(41);
    let budget = ProbBudget { measure_samples: 200_000, n_points: 3, bisection_steps: 50, seed: 7 };
    let worst = worst_radius(&n, &Ball::unit(2), &space, &band.y_grid(0.0), 3, 7).unwrap().value;
    let prob: Vec<_> =
        [0.2, 0.1, 0.05, 0.01].iter().map(|&d| prob_radius_upper(&n, &band, d, &space, &budget).unwrap()).collect();
    let ps = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, f64::INFINITY];
    let sweep = p_sweep(&n, &ps, &UniformOn(Ball::unit(2)), &space, &prob, Some(worst), 32, 100_000, 7).unwrap();
    let est: Vec<f64> = sweep.rows.iter().map(|r| r.estimate).collect();
    // exact monotonicity on the common sample
    let monotone = est.windows(2).all(|w| w[0] <= w[1]);
    // E[x2^2] = 1/4 on the uniform disk
    let r2 = (est[0] - 0.5).abs() <= R2_TOL;
    let r64 = est[5] >= R64_FLOOR;
    let failed: Vec<String> = sweep
        .rows
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.pass).map(move |c| format!("p {} delta {}", r.p, c.delta)))
        .collect();
    let below = sweep.rows.iter().all(|r| r.below_worst == Some(true));
    let ok = monotone && r2 && r64 && failed.is_empty() && below;
    assert!(verdict(
        7,
        "p-average",
        ok,
        format!(
            "estimates {est:.5?}, chain failures {failed:?}, all <= worst + 2CI: {below}, probabilistic bounds {:.5?}",
            prob.iter().map(|p| p.bound).collect::<Vec<_>>()
        )
    ));
}

// ---------------------------------------------------------------- 8

const ATOM_WORST_TOL: f64 = 1e-9;
const RATIO_TOL: f64 = 0.01;

#[test]
fn criterion_8_gallery() {
    let spec = AtomMeasureSpec::new(vec![(0.0, 0.5), (0.5, 0.3), (1.0 / 3.0, 0.2)]).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for delta in [0.05, 0.01] {
        let c = atoms_construct(&spec, delta).unwrap();
        let good = c.certificate.radius == 0.0 && c.collisions == 0 && c.mass >= 1.0 - delta;
        ok &= good;
        parts.push(format!("atoms delta {delta}: M {}, radius {}, collisions {}", c.slope, c.certificate.radius, c.collisions));
    }
    let ys: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    let w = atoms_worst_radius(360, &ys).unwrap();
    ok &= (w - 1.0).abs() <= ATOM_WORST_TOL;
    parts.push(format!("atoms worst radius {w:.12}"));

    let mut ratio_small = f64::NAN;
    for gamma in [0.1, 0.01, 0.001] {
        let d = hilbert_slab_demo(&SlabSpec::standard(6, gamma), 100_000, 8).unwrap();
        let exact = (2.0 + 2.0 * gamma).sqrt();
        ok &= d.e_wor == 2.0 && d.e_delta == exact && (d.e_delta_search - exact).abs() <= 1e-6 && d.slab_measure >= 0.99;
        ratio_small = d.e_wor / d.e_delta;
        parts.push(format!("gamma {gamma}: e_delta {:.6}, search {:.9}, slab measure {:.4}", d.e_delta, d.e_delta_search, d.slab_measure));
    }
    ok &= (ratio_small - std::f64::consts::SQRT_2).abs() <= RATIO_TOL * std::f64::consts::SQRT_2;
    parts.push(format!("ratio at gamma 1e-3 {ratio_small:.5}"));

    for (c, m, big) in [(1.0, 0.1, 10.0), (1.0, 1.0, 10.0), (1.0, 0.1, 0.5), (2.0, 0.5, 3.0)] {
        let e = cost_model_eval(&CostModel { c, m, big_m: big }, 0.1).unwrap();
        ok &= e.comp_delta == f64::min(c + m, 2.0 * c) && e.comp_wor == f64::min(c + big, 2.0 * c);
    }
    let e = cost_model_eval(&CostModel { c: 1.0, m: 0.1, big_m: 10.0 }, 0.1).unwrap();
    ok &= e.comp_delta == 1.1 && e.comp_wor == 2.0 && e.gap;
    parts.push(format!("cost c=1 m=0.1 M=10: {} vs {}", e.comp_delta, e.comp_wor));
    assert!(verdict(8, "gallery", ok, parts.join("; ")));
}

// ---------------------------------------------------------------- 9

fn small_configs() -> Vec<Value> {
    vec![
        json!({"experiment":"wiener-gap","seed":3,"T":64,"n_samples":5000,"deltas":[0.5],"ms":[2,4,8],"y_count":5}),
        json!({"experiment":"fm-measure","seed":3,"T":64,"n_samples":5000}),
        json!({"experiment":"chebyshev","seed":3,"oracle_step":0.01,"oracle_tol":0.01,"eps":[0.1,0.01],"center_samples":2000}),
        json!({"experiment":"p-average","seed":3,"n":5000,"measure_samples":20000,"ps":[2,8],"deltas":[0.2]}),
        json!({"experiment":"atoms-demo","seed":3,"n_directions":12}),
        json!({"experiment":"hilbert-demo","seed":3,"n":5000}),
        json!({"experiment":"cost-model","seed":3}),
        json!({"experiment":"uc-convergence","seed":3,"measure_samples":50000,"deltas":[0.1,0.0]}),
        json!({"experiment":"modulus","seed":3,"epsilons":[0.5,1.0]}),
        json!({"experiment":"perturbation","seed":3}),
    ]
}

#[test]
fn criterion_9_determinism() {
    let mut ok = true;
    let mut parts = Vec::new();
    for cfg in small_configs() {
        let cfg = ExperimentConfig::from_value(cfg).unwrap();
        let docs: Vec<String> = [1usize, 2, 4]
            .iter()
            .map(|&t| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
                pool.install(|| run(&cfg).unwrap().canonical_json())
            })
            .collect();
        let again = run(&cfg).unwrap().canonical_json();
        let same = docs.iter().all(|d| *d == docs[0]) && again == docs[0];
        ok &= same;
        parts.push(format!("{} {}", cfg.experiment, if same { "identical" } else { "DIFFERS" }));
    }
    assert!(verdict(9, "determinism across 1/2/4 threads", ok, parts.join(", ")));
}
