use proptest::prelude::*;
use radius_lab::chebyshev::{radius_center, PointSet};
use radius_lab::gallery::{cost_model_eval, CostModel};
use radius_lab::information::{
    local_radius, prob_radius_upper, worst_radius, Ball, InformationOperator, ProbBudget, SlabFamily,
};
use radius_lab::spaces::{modulus_of_convexity, uniform_grid, GridPath, NormedSpace};
use radius_lab::wiener::{fiber_sup_error, sample_conditioned_path, FiberSpec, PiecewiseLinearCenter, WienerConfig};

const REL: f64 = 1e-12;

fn vector_spaces() -> Vec<NormedSpace> {
    ["euclidean:dim=3", "lp:p=1,dim=3", "lp:p=1.5,dim=3", "lp:p=4,dim=3", "lp:p=inf,dim=3", "sup"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn norms_are_homogeneous_and_subadditive(x in coords(), y in coords(), a in -5.0f64..5.0) {
        for s in vector_spaces() {
            let nx = s.eval_vector(&x).unwrap();
            let ny = s.eval_vector(&y).unwrap();
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let sum: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
            let nax = s.eval_vector(&ax).unwrap();
            prop_assert!((nax - a.abs() * nx).abs() <= REL * (1.0 + a.abs() * nx), "{} homogeneity", s);
            prop_assert!(s.eval_vector(&sum).unwrap() <= nx + ny + REL * (1.0 + nx + ny), "{} triangle", s);
        }
    }

    #[test]
    fn path_norm_is_homogeneous_and_subadditive(
        u in prop::collection::vec(-3.0f64..3.0, 16),
        v in prop::collection::vec(-3.0f64..3.0, 16),
        a in -4.0f64..4.0,
    ) {
        let space: NormedSpace = "sup_plus_point:t=0.5".parse().unwrap();
        let path = |w: &[f64]| {
            let mut vals = vec![0.0];
            vals.extend_from_slice(w);
            GridPath::new(uniform_grid(16), vals).unwrap()
        };
        let nu = space.eval_path(&path(&u)).unwrap();
        let nv = space.eval_path(&path(&v)).unwrap();
        let au: Vec<f64> = u.iter().map(|x| a * x).collect();
        let s: Vec<f64> = u.iter().zip(&v).map(|(x, y)| x + y).collect();
        prop_assert!((space.eval_path(&path(&au)).unwrap() - a.abs() * nu).abs() <= REL * (1.0 + a.abs() * nu));
        prop_assert!(space.eval_path(&path(&s)).unwrap() <= nu + nv + REL * (1.0 + nu + nv));
    }
}

#[test]
fn modulus_is_monotone_and_separates_uniform_convexity() {
    let eps: Vec<f64> = (1..=8).map(|k| k as f64 * 0.25).collect();
    for label in ["lp:p=1.5,dim=2", "lp:p=2,dim=2", "lp:p=3,dim=2", "lp:p=6,dim=2"] {
        let s: NormedSpace = label.parse().unwrap();
        let g: Vec<f64> = eps.iter().map(|&e| modulus_of_convexity(&s, e, 1e-9).unwrap().value).collect();
        assert!(g.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{label}: {g:?}");
        assert!(g[3] > 1e-3, "{label}: modulus at 1 is {}", g[3]);
    }
    for label in ["lp:p=1,dim=2", "lp:p=inf,dim=2"] {
        let s: NormedSpace = label.parse().unwrap();
        assert!(modulus_of_convexity(&s, 1.0, 1e-9).unwrap().value <= 1e-9, "{label}");
    }
}

fn point_sets() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=3).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), 1..=8))
}

fn diameter(s: &NormedSpace, pts: &[Vec<f64>]) -> f64 {
    let mut d = 0.0f64;
    for a in pts {
        for b in pts {
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            d = d.max(s.eval_vector(&diff).unwrap());
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn radius_sits_between_half_diameter_and_diameter(pts in point_sets()) {
        let d = pts[0].len();
        for label in [format!("euclidean:dim={d}"), format!("lp:p=4,dim={d}"), format!("lp:p=inf,dim={d}")] {
            let s: NormedSpace = label.parse().unwrap();
            let cert = radius_center(&PointSet::new(pts.clone()).unwrap(), &s, 1e-9, 4000).unwrap();
            let diam = diameter(&s, &pts);
            prop_assert!(cert.lower <= cert.radius + 1e-12);
            prop_assert!(cert.radius <= diam + 1e-9, "{label}: r {} diam {diam}", cert.radius);
            prop_assert!(diam <= 2.0 * cert.radius + 1e-9, "{label}: r {} diam {diam}", cert.radius);
        }
    }

    /// In the Euclidean plane two near-optimal centers are close: if both
    /// have max distance at most `R + g` with `R` the radius, their midpoint
    /// shows `|c1 - c2| <= 2 sqrt(2 R g + g^2)`.
    #[test]
    fn euclidean_centers_agree_across_point_orders(
        pts in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 2..=8),
        shift in 1usize..8,
    ) {
        let s = NormedSpace::euclidean(2);
        let mut rotated = pts.clone();
        rotated.rotate_left(shift % pts.len());
        rotated.reverse();
        let a = radius_center(&PointSet::new(pts).unwrap(), &s, 1e-10, 4000).unwrap();
        let b = radius_center(&PointSet::new(rotated).unwrap(), &s, 1e-10, 4000).unwrap();
        let r = a.lower.max(b.lower);
        let g = a.upper.max(b.upper) - r;
        let bound = 2.0 * (2.0 * r * g + g * g).max(0.0).sqrt() + 1e-9;
        let dist = ((a.center[0] - b.center[0]).powi(2) + (a.center[1] - b.center[1]).powi(2)).sqrt();
        prop_assert!(dist <= bound, "centers {:?} {:?} apart {dist} > {bound}", a.center, b.center);
    }

    #[test]
    fn wiener_fiber_error_is_at_least_one(
        vals in prop::collection::vec(-2.0f64..2.0, 33),
        y in -1.0f64..=1.0,
        mi in 0usize..4,
        full in any::<bool>(),
    ) {
        let c = PiecewiseLinearCenter { values: vals };
        let fiber = if full { FiberSpec::full(y) } else { FiberSpec::window(y, [2, 4, 8, 16][mi]) };
        prop_assert!(fiber_sup_error(&c, &fiber).unwrap() >= 1.0);
    }

    #[test]
    fn cost_gap_identity(c in 0.01f64..10.0, m in 0.0f64..20.0, big in 0.0f64..20.0) {
        let e = cost_model_eval(&CostModel { c, m, big_m: big }, 0.1).unwrap();
        // comp_delta < comp_wor exactly when m < min(c, M)
        prop_assert_eq!(e.gap, m < c.min(big));
        if big >= c {
            prop_assert_eq!(e.gap, m < c && 2.0 * c <= c + big);
        }
        prop_assert_eq!(e.comp_delta, (c + m).min(2.0 * c));
        prop_assert_eq!(e.comp_wor, (c + big).min(2.0 * c));
    }
}

#[test]
fn removing_a_point_from_a_dense_circle_barely_moves_the_radius() {
    let n = 200;
    let circle: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let s = NormedSpace::euclidean(2);
    let full = radius_center(&PointSet::new(circle.clone()).unwrap(), &s, 1e-10, 4000).unwrap();
    let spacing = 2.0 * (std::f64::consts::PI / n as f64).sin();
    for drop in [0, 37, 150] {
        let mut rest = circle.clone();
        rest.remove(drop);
        let r = radius_center(&PointSet::new(rest).unwrap(), &s, 1e-10, 4000).unwrap();
        assert!((r.radius - full.radius).abs() <= spacing + 1e-9, "drop {drop}: {} vs {}", r.radius, full.radius);
    }
}

#[test]
fn information_monotonicity() {
    let n = InformationOperator::coordinate(2, 0);
    let s = NormedSpace::euclidean(2);
    let disk = Ball::unit(2);
    let fam = SlabFamily::new(41);
    let budget = ProbBudget { measure_samples: 100_000, n_points: 3, bisection_steps: 40, seed: 9 };
    let deltas = [0.2, 0.1, 0.05, 0.01];
    let bounds: Vec<f64> = deltas.iter().map(|&d| prob_radius_upper(&n, &fam, d, &s, &budget).unwrap().bound).collect();
    // larger exclusions never raise the bound
    assert!(bounds.windows(2).all(|w| w[0] <= w[1]), "{bounds:?}");
    // the deficit to the worst radius shrinks at least linearly
    let c = deltas.iter().zip(&bounds).map(|(d, b)| (1.0 - b) / d).fold(0.0, f64::max);
    assert!(c < 0.1, "fitted constant {c}");

    let ys: Vec<Vec<f64>> = (-4..=4).map(|k| vec![k as f64 / 4.0]).collect();
    let worst = worst_radius(&n, &disk, &s, &ys, 3, 2).unwrap().value;
    for y in &ys {
        let r1 = local_radius(&n, y, &disk, &s, 1, 2).unwrap().radius;
        let r3 = local_radius(&n, y, &disk, &s, 3, 2).unwrap().radius;
        assert!(r1 <= r3 + 1e-9);
        assert!(r3 <= worst + 1e-9);
    }

    // multi-dimensional fibers: adding points never shrinks the sampled radius
    let n3 = InformationOperator::coordinate(3, 2);
    let ball3 = Ball::unit(3);
    let s3 = NormedSpace::euclidean(3);
    let mut prev = 0.0;
    for k in [1, 4, 16, 64] {
        let r = local_radius(&n3, &[0.3], &ball3, &s3, k, 5).unwrap().radius;
        assert!(r >= prev - 1e-8, "{k}: {r} < {prev}");
        prev = r;
    }
}

#[test]
fn conditioned_sampler_pins_the_midpoint_and_diffuses_after_it() {
    let cfg = WienerConfig::new(64, 1, 11).unwrap();
    let y = 0.4;
    let n = 20_000;
    let mut vals = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let p = sample_conditioned_path(y, &cfg, i, false).unwrap();
        assert_eq!(p.value_at_half(), y);
        vals.push(p.values()[48]);
    }
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // free motion for time 1/4: mean y, variance 1/4
    let se_var = 0.25 * (2.0 / (n - 1) as f64).sqrt();
    assert!((var - 0.25).abs() <= 3.0 * se_var, "var {var}");
    assert!((mean - y).abs() <= 3.0 * (0.25 / n as f64).sqrt(), "mean {mean}");
}
