use proptest::prelude::*;

use symineq::capacity::{cap1, weight_wq};
use symineq::inequalities::{verify_oscillation, verify_pro1};
use symineq::interpolation::{k_functional, optimal_decomposition, KFunctionalCurve};
use symineq::martingale::{random_martingale, stopped_square_check, StoppingTime, TOWER_TOL};
use symineq::measure_space::{gaussian_profile, sample_function, GaussianMode, ModelSpace, ProfileSpec, SampledFunction};
use symineq::rearrangement::{decreasing_rearrangement, distribution, interpolated_rearrangement, maximal_function};
use symineq::ri_spaces::{norm, SpaceSpec};
use symineq::{families, MonotoneStep};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random discrete functions with positive masses summing to one.
fn discrete() -> impl Strategy<Value = SampledFunction> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..40).prop_map(|raw| {
        let total: f64 = raw.iter().map(|p| p.1).sum();
        let pairs: Vec<(f64, f64)> = raw.iter().map(|&(v, w)| (v, w / total)).collect();
        SampledFunction::discrete(&pairs).unwrap()
    })
}

fn transplant(fstar: &MonotoneStep) -> SampledFunction {
    let pairs: Vec<(f64, f64)> =
        (0..fstar.len()).map(|k| (fstar.values()[k], fstar.breakpoints()[k] - fstar.segment_start(k))).collect();
    SampledFunction::discrete(&pairs).unwrap()
}

fn specs() -> Vec<SpaceSpec> {
    ["lp:1", "lp:2", "lp:3.5", "lp:inf", "lorentz:phi=sqrt", "lorentz:phi=tlog", "marcinkiewicz:phi=sqrt", "lorentzq:phi=tlog:1,q=2"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

fn profiles() -> Vec<ProfileSpec> {
    vec![
        ProfileSpec::gaussian(),
        ProfileSpec::gaussian_asymptotic(),
        ProfileSpec::unit_interval(),
        ProfileSpec::power(1.0, 0.5),
        ProfileSpec::euclidean(2).unwrap(),
        ProfileSpec::euclidean(3).unwrap(),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_is_equimeasurable(f in discrete()) {
        let fstar = decreasing_rearrangement(&f);
        let (a, b) = (distribution(&f), distribution(&transplant(&fstar)));
        for &u in fstar.values() {
            prop_assert_eq!(a.eval(u), b.eval(u));
        }
        let direct: f64 = f.atoms().iter().map(|a| a.value.abs() * a.weight).sum();
        prop_assert!(close(fstar.total_integral(), direct, 1e-12));
    }

    #[test]
    fn maximal_function_dominates_and_decreases(f in discrete(), ts in prop::collection::vec(1e-4f64..1.0, 2..20)) {
        let fstar = decreasing_rearrangement(&f);
        let mut ts = ts;
        ts.sort_by(f64::total_cmp);
        let avg: Vec<f64> = ts.iter().map(|&t| maximal_function(&fstar, t).unwrap()).collect();
        for (t, a) in ts.iter().zip(&avg) {
            prop_assert!(*a >= fstar.eval(*t) - 1e-12 * a.abs().max(1.0));
        }
        for w in avg.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn fubini_identity_on_linear_surrogate(f in discrete(), t in 1e-3f64..1.0) {
        let pl = decreasing_rearrangement(&f).linear_surrogate();
        let direct = pl.integral_to(t) / t - pl.eval(t);
        prop_assert!(close(pl.fubini_oscillation(t), direct, 1e-10));
    }

    #[test]
    fn norms_are_rearrangement_invariant(f in discrete()) {
        let g = transplant(&decreasing_rearrangement(&f));
        for spec in specs() {
            prop_assert!(close(norm(&spec, &f).unwrap(), norm(&spec, &g).unwrap(), 1e-10), "{spec:?}");
        }
    }

    #[test]
    fn marcinkiewicz_below_lorentz(f in discrete()) {
        for phi in ["sqrt", "tlog", "power:0.3", "id"] {
            let m: SpaceSpec = format!("marcinkiewicz:phi={phi}").parse().unwrap();
            let l: SpaceSpec = format!("lorentz:phi={phi}").parse().unwrap();
            let (m, l) = (norm(&m, &f).unwrap(), norm(&l, &f).unwrap());
            prop_assert!(m <= l * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn hardy_calderon_monotonicity(f in discrete(), delta in 1e-3f64..2.0) {
        let fstar = decreasing_rearrangement(&f);
        let g = transplant(&fstar.map_values(|v| v + delta));
        for spec in specs() {
            prop_assert!(norm(&spec, &g).unwrap() >= norm(&spec, &f).unwrap());
        }
    }

    #[test]
    fn convexification(f in discrete(), q in 1.0f64..4.0) {
        let pow = SampledFunction::discrete(&f.atoms().iter().map(|a| (a.value.abs().powf(q), a.weight)).collect::<Vec<_>>()).unwrap();
        for base in specs() {
            let one = SpaceSpec::convexified(base.clone(), 1.0);
            prop_assert_eq!(norm(&one, &f).unwrap(), norm(&base, &f).unwrap());
            let conv = norm(&SpaceSpec::convexified(base.clone(), q), &f).unwrap().powf(q);
            prop_assert!(close(conv, norm(&base, &pow).unwrap(), 1e-12), "{base:?}");
        }
    }

    #[test]
    fn weights_increase_with_q(t in 1e-4f64..0.99, q1 in 1.0f64..4.0, dq in 0.0f64..3.0) {
        for p in profiles() {
            let (a, b) = (weight_wq(&p, q1, t).unwrap(), weight_wq(&p, q1 + dq, t).unwrap());
            let w1 = weight_wq(&p, 1.0, t).unwrap();
            prop_assert!(w1 <= a + 1e-10 * a.max(1.0));
            prop_assert!(a <= b + 1e-10 * b.max(1.0), "{}: w_{q1}({t}) = {a} > {b}", p.name);
        }
    }

    #[test]
    fn capacity_symmetry_and_cheeger_bound(a in 1e-3f64..0.5, len in 1e-3f64..0.5) {
        let b = (a + len).min(0.999);
        for p in profiles().into_iter().filter(|p| p.flags.symmetric_about_half) {
            prop_assert!((cap1(&p, a, b).unwrap() - cap1(&p, 1.0 - b, 1.0 - a).unwrap()).abs() <= 1e-10);
        }
        let t = a.min(0.499);
        for p in profiles() {
            let ratio = cap1(&p, t, 0.5).unwrap() / t;
            prop_assert!(ratio <= weight_wq(&p, 1.0, t).unwrap() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn gaussian_profile_symmetric(e in 0.3f64..8.0) {
        let t = 10f64.powf(-e);
        let (a, b) = (gaussian_profile(t, GaussianMode::Exact).unwrap(), gaussian_profile(1.0 - t, GaussianMode::Exact).unwrap());
        // 1 - t itself is rounded, so compare through the profile's slope there
        prop_assert!((a - b).abs() <= 1e-10 + 1e-15 * a.abs().max(1.0) / t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn k_curve_is_concave_and_split_is_optimal(seed in 0u64..10_000, t in 0.01f64..0.99) {
        let f = &families::random_smooth(seed, 1)[0];
        let g = sample_function(&ModelSpace::UnitInterval, f, 512).unwrap();
        let grid: Vec<f64> = (1..64).map(|i| i as f64 / 64.0).collect();
        prop_assert!(KFunctionalCurve::new(&g, &grid).unwrap().check(1e-10).is_ok());
        let d = optimal_decomposition(&g, t).unwrap();
        let k = k_functional(&g, t).unwrap();
        let split = d.d0.l1_norm() + t * d.d1.sup_norm();
        prop_assert!(close(k, split, 1e-12));
        prop_assert!(k <= k_functional(&d.d0, t).unwrap() + t * d.d1.sup_norm() + 1e-12);
    }

    #[test]
    fn interpolated_rearrangement_keeps_the_integral(seed in 0u64..10_000) {
        let f = &families::random_smooth(seed, 1)[0];
        for space in [ModelSpace::UnitInterval, ModelSpace::Gaussian1d] {
            let g = sample_function(&space, f, 256).unwrap();
            let pl = interpolated_rearrangement(&g).unwrap();
            // trapezoid rule for |interpolant| on the mass coordinate, split at zeros
            let atoms = g.atoms();
            let mut direct = 0.5 * (atoms[0].value.abs() * atoms[0].weight + atoms[atoms.len() - 1].value.abs() * atoms[atoms.len() - 1].weight);
            for w in atoms.windows(2) {
                let (a, b, h) = (w[0].value, w[1].value, 0.5 * (w[0].weight + w[1].weight));
                direct += if a * b < 0.0 { 0.5 * h * (a * a + b * b) / (a.abs() + b.abs()) } else { 0.5 * h * (a.abs() + b.abs()) };
            }
            prop_assert!(close(pl.integral_to(1.0), direct, 1e-10));
            prop_assert!(pl.slopes().iter().all(|s| *s <= 1e-12));
        }
    }

    #[test]
    fn oscillation_at_q1_matches_pro1(seed in 0u64..10_000) {
        let f = &families::random_smooth(seed, 1)[0];
        let g = sample_function(&ModelSpace::UnitInterval, f, 512).unwrap();
        let grid: Vec<f64> = (1..32).map(|i| i as f64 / 32.0).collect();
        let p = ProfileSpec::unit_interval();
        let a = verify_oscillation(&g, &p, 1.0, &grid, 1e-2).unwrap();
        let b = verify_pro1(&g, &p, &grid, 1e-2).unwrap();
        for (x, y) in a.lhs.iter().zip(&b.lhs).chain(a.rhs.iter().zip(&b.rhs)) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn martingale_structure(seed in 0u64..10_000, depth in 1usize..9) {
        let m = random_martingale(seed, depth);
        prop_assert!(m.tower_defect() <= TOWER_TOL);
        let n = m.leaves() as f64;
        let energy: f64 = (0..=depth).map(|k| (0..m.leaves()).map(|i| m.difference(k, i).powi(2)).sum::<f64>() / n).sum();
        let total: f64 = (0..m.leaves()).map(|i| m.at(depth, i).powi(2)).sum::<f64>() / n;
        prop_assert!(close(energy, total, 1e-10));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nu = StoppingTime::random(depth, 0.3, &mut rng);
        let tau = StoppingTime::random(depth, 0.2, &mut rng);
        let r = stopped_square_check(&m, &nu, &tau).unwrap();
        prop_assert!(r.lhs.iter().zip(&r.rhs).all(|(l, r)| l <= r));
    }
}
