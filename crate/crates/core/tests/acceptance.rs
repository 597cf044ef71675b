//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed; exits
//! non-zero when any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symineq::capacity::{muckenhoupt_check, weight_wq, WeightCurve};
use symineq::families::{self, shipped_family};
use symineq::grid::LogGrid;
use symineq::inequalities::{
    gn_sharp_ratio, recover_isoperimetry, verify_aa, verify_fii, verify_ledoux, verify_oscillation_with, verify_poincare,
};
use symineq::interpolation::{k_functional, optimal_decomposition};
use symineq::martingale::{herz_grid, herz_ratio, random_martingale, stopped_square_check, verify_herz, StoppingTime, HERZ_THRESHOLD};
use symineq::measure_space::{sample_function, ModelSpace, ProfileSpec, SampledFunction};
use symineq::rearrangement::{decreasing_rearrangement, hardy_littlewood_sup, maximal_function};
use symineq::ri_spaces::{boyd_indices, SpaceSpec};
use symineq::Error;

/// Default verification tolerance.
const TOL: f64 = 1e-2;
/// Base resolution of the sampled families.
const RES: usize = 4096;

type Outcome = (bool, String);

fn timed(limit: Duration, run: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = run();
    let took = start.elapsed();
    let in_time = took <= limit;
    let verdict = ok && in_time;
    let time_note = if in_time { String::new() } else { format!(" [over time limit {limit:?}]") };
    (verdict, format!("{detail}; {:.2}s{time_note}", took.as_secs_f64()))
}

/// 1. Hardy-Littlewood supremum against exhaustive subset enumeration.
fn rearrangement_correctness() -> Outcome {
    timed(Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let n = rng.gen_range(1..=12usize);
            let w = 1.0 / n as f64;
            let pairs: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(-5.0..5.0), w)).collect();
            let f = SampledFunction::discrete(&pairs).unwrap();
            let mut best = vec![0.0f64; n + 1];
            for mask in 0u32..(1 << n) {
                let size = mask.count_ones() as usize;
                let sum: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i].0.abs() * w).sum();
                best[size] = best[size].max(sum);
            }
            // the supremum over sets of measure at most k/n
            for k in 1..=n {
                let exhaustive = best[..=k].iter().copied().fold(0.0, f64::max);
                let t = (k as f64 * w).min(1.0);
                worst = worst.max((hardy_littlewood_sup(&f, t).unwrap() - exhaustive).abs());
            }
        }
        (worst <= 1e-12, format!("max deviation {worst:.2e} over 200 trials"))
    })
}

/// 2. Decomposition norms, K = t f**, Fubini oscillation identity, stopped square functions.
fn exact_identities() -> Outcome {
    timed(Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut ai, mut kf, mut fub) = (0.0f64, 0.0f64, 0.0f64);
        for f in families::random_smooth(2, 100) {
            let g = sample_function(&ModelSpace::UnitInterval, &f, 1024).unwrap();
            let fstar = decreasing_rearrangement(&g);
            let pl = fstar.linear_surrogate();
            for _ in 0..3 {
                let t = fstar.snap(rng.gen_range(0.01..0.99));
                let d = optimal_decomposition(&g, t).unwrap();
                ai = ai.max((d.d0.l1_norm() - t * fstar.oscillation_at(t)).abs());
                ai = ai.max((d.d1.sup_norm() - fstar.eval(t)).abs());
                kf = kf.max((k_functional(&g, t).unwrap() - t * maximal_function(&fstar, t).unwrap()).abs());
                let direct = pl.integral_to(t) / t - pl.eval(t);
                fub = fub.max((pl.fubini_oscillation(t) - direct).abs());
            }
        }
        let mut stop_violations = 0;
        for seed in 0..100 {
            let m = random_martingale(seed, 8);
            let nu = StoppingTime::random(8, rng.gen_range(0.05..0.5), &mut rng);
            let tau = StoppingTime::random(8, rng.gen_range(0.05..0.5), &mut rng);
            let r = stopped_square_check(&m, &nu, &tau).unwrap();
            stop_violations += r.lhs.iter().zip(&r.rhs).filter(|(l, r)| l > r).count();
        }
        let ok = ai <= 1e-12 && kf <= 1e-12 && fub <= 1e-10 && stop_violations == 0;
        (ok, format!("ai1/ai2 {ai:.1e}, K {kf:.1e}, fubini {fub:.1e}, stopped-square violations {stop_violations}"))
    })
}

/// 3. Oscillation and derivative-profile inequalities across q and two spaces.
///
/// Degradation compares the minimum margins over grid points resolved at the
/// base resolution (at least eight cells), where both runs see the same rows.
fn oscillation_theorems() -> Outcome {
    timed(Duration::from_secs(300), || {
        let grid = LogGrid::default().points();
        let resolved: Vec<f64> = grid.iter().copied().filter(|&t| t >= 8.0 / RES as f64).collect();
        let family = shipped_family();
        let mut worst = f64::INFINITY;
        let mut drop = [0.0f64; 2];
        for (space, profile) in [(ModelSpace::Gaussian1d, ProfileSpec::gaussian()), (ModelSpace::UnitInterval, ProfileSpec::unit_interval())] {
            for q in [1.0, 2.0, 3.0] {
                let weights = WeightCurve::new(&profile, q).unwrap();
                let margins = symineq::par::map(&family, |f| {
                    // [osc, aa] on the full grid at the base resolution, then on the resolved rows at both
                    let mut out = [[0.0; 2]; 3];
                    for (j, res) in [RES, 2 * RES].into_iter().enumerate() {
                        let g = sample_function(&space, f, res).unwrap();
                        let run = |ts: &[f64]| {
                            [
                                verify_oscillation_with(&g, &weights, ts, TOL).unwrap().min_relative_margin,
                                verify_aa(&g, &profile, q, ts, TOL).unwrap().min_relative_margin,
                            ]
                        };
                        if j == 0 {
                            out[0] = run(&grid);
                        }
                        out[j + 1] = run(&resolved);
                    }
                    out
                });
                for m in margins {
                    for i in 0..2 {
                        worst = worst.min(m[0][i]);
                        drop[i] = drop[i].max(m[1][i] - m[2][i]);
                    }
                }
            }
        }
        let ok = worst >= -TOL && drop.iter().all(|d| *d <= 5e-3);
        (
            ok,
            format!(
                "min margin {worst:.3e}, largest degradation at 2x resolution: oscillation {:.2e}, derivative profile {:.2e} (50 functions x 2 spaces x q in 1,2,3)",
                drop[0], drop[1]
            ),
        )
    })
}

/// 4. Sharp Gagliardo-Nirenberg on mollified disc indicators.
fn sharp_gagliardo_nirenberg() -> Outcome {
    let space = ModelSpace::EuclideanBall { n: 2 };
    let ratios: Vec<f64> = (3..=7)
        .map(|k| {
            let f = sample_function(&space, &families::ball_ramp(0.5, 2f64.powi(-k)), 8192).unwrap();
            gn_sharp_ratio(&f).unwrap().2
        })
        .collect();
    let window = ratios.iter().all(|r| (0.90..=1.001).contains(r));
    let monotone = ratios.windows(2).all(|w| (1.0 - w[1]).abs() <= (1.0 - w[0]).abs());
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.6}")).collect();
    (window && monotone, format!("ratios k=3..7: [{}]", shown.join(", ")))
}

/// 5. Gaussian isoperimetric Lorentz inequality.
fn ledoux() -> Outcome {
    let mut worst = f64::INFINITY;
    for f in shipped_family() {
        let g = sample_function(&ModelSpace::Gaussian1d, &f, RES).unwrap();
        worst = worst.min(verify_ledoux(&g, TOL).unwrap().min_relative_margin);
    }
    let target = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut dev = 0.0f64;
    for k in 2..=6 {
        let g = sample_function(&ModelSpace::Gaussian1d, &families::half_line_ramp(0.0, 2f64.powi(-k)), RES).unwrap();
        let r = verify_ledoux(&g, TOL).unwrap();
        dev = dev.max((r.lhs[0] / target - 1.0).abs()).max((r.rhs[0] / target - 1.0).abs());
    }
    (worst >= -TOL && dev <= 0.05, format!("family min margin {worst:.3e}, half-line sides within {:.2}% of I(1/2)", 100.0 * dev))
}

/// 6. Recovering isoperimetry from the oscillation inequality.
fn isoperimetry_recovery() -> Outcome {
    let gauss = families::gaussian_half_line(16384, &[1, 2, 3, 4, 5]).unwrap();
    let g = recover_isoperimetry(&gauss, &ProfileSpec::gaussian(), TOL).unwrap();
    let mut unit_worst = 0.0f64;
    for a in [0.2, 0.3, 0.5, 0.7] {
        let set = families::unit_interval_boundary(a, 4096, &[2, 4, 6]).unwrap();
        let r = recover_isoperimetry(&set, &ProfileSpec::unit_interval(), TOL).unwrap();
        unit_worst = unit_worst.max(r.min_relative_margin.abs());
    }
    let ok = g.passed && g.min_relative_margin.abs() <= 1e-3 && unit_worst <= 1e-10;
    (ok, format!("gaussian half-line margin {:.2e}, unit-interval margins within {unit_worst:.1e}", g.min_relative_margin))
}

/// 7. Monotonicity of w_q in q and the concave and square-root examples.
fn weight_structure() -> Outcome {
    let profiles = vec![
        ProfileSpec::gaussian(),
        ProfileSpec::gaussian_asymptotic(),
        ProfileSpec::unit_interval(),
        ProfileSpec::power(1.0, 0.5),
        ProfileSpec::power(1.0, 1.0),
        ProfileSpec::euclidean(2).unwrap(),
        ProfileSpec::euclidean(3).unwrap(),
    ];
    let ts = LogGrid::new(1e-4, 0.9, 24).unwrap().points();
    let qs = [1.0, 1.5, 2.0, 3.0, 4.0];
    let mut monotone = true;
    let mut concave_dev = 0.0f64;
    for p in &profiles {
        for &t in &ts {
            let w: Vec<f64> = qs.iter().map(|&q| weight_wq(p, q, t).unwrap()).collect();
            monotone &= w.windows(2).all(|x| x[1] >= x[0] - 1e-10 * x[0].abs().max(1.0));
            if p.flags.concave {
                concave_dev = concave_dev.max((t * w[0] - p.eval(t)).abs());
            }
        }
    }
    let sqrt2 = weight_wq(&ProfileSpec::power(1.0, 0.5), 2.0, 0.5).unwrap();
    let ok = monotone && concave_dev <= 1e-6 && (sqrt2 - 2.0).abs() <= 1e-6;
    (ok, format!("monotone in q: {monotone}, max |t w1 - I| {concave_dev:.1e}, w2(0.5) for sqrt = {sqrt2:.9}"))
}

/// 8. Muckenhoupt limiting case and stability of the fitted (fii) constants.
fn muckenhoupt_limiting() -> Outcome {
    let m = muckenhoupt_check(&ProfileSpec::power(1.0, 0.5), 2.0, &LogGrid::default()).unwrap();
    let drift = (m.refined_constant / m.constant - 1.0).abs();
    let profile = ProfileSpec::gaussian();
    let gm = muckenhoupt_check(&profile, 2.0, &LogGrid::default()).unwrap();
    let grid = LogGrid::new(1e-3, 0.45, 24).unwrap().points();
    let reports: Vec<_> = symineq::par::map(&shipped_family(), |f| verify_fii(&ModelSpace::Gaussian1d, f, 2048, &profile, &gm, &grid, TOL));
    let mut all = true;
    let mut worst = 0.0f64;
    for r in reports {
        match r {
            Ok(r) => {
                all &= r.passed;
                let (a, b) = (r.constants["fitted_constant"], r.constants["fitted_constant_doubled"]);
                if a > 0.0 {
                    worst = worst.max(b / a);
                }
            }
            Err(_) => all = false,
        }
    }
    let ok = m.constant.is_finite() && drift <= 0.05 && all;
    (
        ok,
        format!(
            "sqrt profile q=2 constant {:.4} (refined {:.4}, drift {:.2}%), gaussian fii doubled/base constant ratio max {worst:.3}",
            m.constant,
            m.refined_constant,
            100.0 * drift
        ),
    )
}

/// 9. Poincare machinery: Boyd precondition and the chained ratios.
fn poincare() -> Outcome {
    let (_, upper) = boyd_indices(&SpaceSpec::Lp(2.0)).unwrap();
    let family = shipped_family();
    let y: SpaceSpec = "lorentzq:phi=tlog:1,q=2".parse().unwrap();
    let rejected = matches!(
        verify_poincare(&ModelSpace::Gaussian1d, &family[..2], 512, &SpaceSpec::Lp(1.0), &y, &ProfileSpec::gaussian(), 1.0, TOL),
        Err(Error::Precondition(_))
    );
    let r = verify_poincare(&ModelSpace::Gaussian1d, &family, 2048, &SpaceSpec::Lp(2.0), &y, &ProfileSpec::gaussian(), 1.0, TOL);
    match r {
        Ok(r) => {
            let c = &r.constants;
            let ok = (upper - 0.5).abs() <= 0.02 && rejected && r.passed;
            (
                ok,
                format!(
                    "boyd upper of L2 {upper:.4}, L1 rejected: {rejected}, chain sups {:.4} -> {:.4} and {:.4} -> {:.4}, Q bound >= {:.4}",
                    c["chain1_sup"], c["chain1_sup_doubled"], c["chain2_sup"], c["chain2_sup_doubled"], c["qw_bound_lower_estimate"]
                ),
            )
        }
        Err(e) => (false, format!("poincare failed: {e}")),
    }
}

/// 10. Herz endpoint with the frozen threshold.
fn herz() -> Outcome {
    timed(Duration::from_secs(120), || {
        let grid = herz_grid();
        let seeds: Vec<u64> = (0..1000).collect();
        let passed = symineq::par::map(&seeds, |&s| verify_herz(&random_martingale(s, 10), &grid, HERZ_THRESHOLD, 0.0).passed);
        let failures = passed.iter().filter(|p| !**p).count();
        let sup_at = |depth: usize| symineq::par::map(&seeds, |&s| herz_ratio(&random_martingale(s, depth), &grid)).into_iter().fold(0.0, f64::max);
        let (s10, s12) = (sup_at(10), sup_at(12));
        let drift = (s12 / s10 - 1.0).abs();
        (failures == 0 && drift <= 0.10, format!("{failures} failures of 1000, sup ratio depth 10 {s10:.4}, depth 12 {s12:.4} (threshold {HERZ_THRESHOLD:.4})"))
    })
}

fn main() {
    // `cargo test` passes harness flags such as --list; honour a list request quietly
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("rearrangement correctness", rearrangement_correctness),
        ("exact identities", exact_identities),
        ("oscillation theorems", oscillation_theorems),
        ("sharp gagliardo-nirenberg", sharp_gagliardo_nirenberg),
        ("ledoux gaussian inequality", ledoux),
        ("isoperimetry recovery", isoperimetry_recovery),
        ("weight structure", weight_structure),
        ("muckenhoupt limiting case", muckenhoupt_limiting),
        ("poincare machinery", poincare),
        ("herz endpoint", herz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run();
        println!("acceptance {:2} {:<28} {}  {detail}", i + 1, name, if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
