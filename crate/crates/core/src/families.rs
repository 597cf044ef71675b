//! Shipped test-function families: seeded random smooth functions and linear
//! ramps approximating indicators of half-lines, intervals and balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::measure_space::{normal, sample_function, BorelSetApprox, ModelSpace, SampledFunction, TestFunction};

/// `count` functions `Σ_j a_j sin(b_j x + c_j)` (three terms) with their exact
/// gradient moduli, drawn from a ChaCha stream seeded by `seed`.
///
/// Frequencies lie in `[0.5, 4]`; on the unit interval this gives between a
/// fraction of a period and two periods.
pub fn random_smooth(seed: u64, count: usize) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let terms: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..4.0), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let grad_terms = terms.clone();
            TestFunction::new(
                format!("smooth[{seed}:{i}]"),
                move |p| terms.iter().map(|(a, b, c)| a * (b * p.x + c).sin()).sum(),
                move |p| grad_terms.iter().map(|(a, b, c)| a * b * (b * p.x + c).cos()).sum::<f64>().abs(),
            )
        })
        .collect()
}

/// Seed of the shipped 50-function family.
pub const FAMILY_SEED: u64 = 20240611;

/// The shipped family: 50 random smooth functions from [`FAMILY_SEED`].
pub fn shipped_family() -> Vec<TestFunction> {
    random_smooth(FAMILY_SEED, 50)
}

fn ramp(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        (0.0, 0.0)
    } else if u >= 1.0 {
        (1.0, 0.0)
    } else {
        (u, 1.0)
    }
}

/// `clamp((x - x0)/h, 0, 1)`: a ramp approximating the half-line `{x > x0}`.
pub fn half_line_ramp(x0: f64, h: f64) -> TestFunction {
    TestFunction::new(
        format!("half_line_ramp({x0},{h})"),
        move |p| ramp((p.x - x0) / h).0,
        move |p| ramp((p.x - x0) / h).1 / h,
    )
}

/// `clamp((a - x)/h, 0, 1)`: equal to 1 left of `a - h`, vanishing right of `a`.
pub fn interval_ramp(a: f64, h: f64) -> TestFunction {
    TestFunction::new(
        format!("interval_ramp({a},{h})"),
        move |p| ramp((a - p.x) / h).0,
        move |p| ramp((a - p.x) / h).1 / h,
    )
}

/// Radial `clamp((rho - r)/h, 0, 1)`: equal to 1 on the ball of radius
/// `rho - h` and vanishing outside radius `rho`.
pub fn ball_ramp(rho: f64, h: f64) -> TestFunction {
    TestFunction::new(
        format!("ball_ramp({rho},{h})"),
        move |p| ramp((rho - p.r) / h).0,
        move |p| ramp((rho - p.r) / h).1 / h,
    )
}

/// Radial tent `(1 - r)_+`.
pub fn tent() -> TestFunction {
    TestFunction::new("tent", |p| (1.0 - p.r).max(0.0), |p| if p.r < 1.0 { 1.0 } else { 0.0 })
}

/// `clamp(x, 0, 1)`.
pub fn clamp_unit() -> TestFunction {
    half_line_ramp(0.0, 1.0)
}

fn indicator(space: &ModelSpace, resolution: usize, inside: impl Fn(f64) -> bool + Send + Sync + 'static) -> Result<SampledFunction> {
    let f = TestFunction::new("indicator", move |p| if inside(p.x) { 1.0 } else { 0.0 }, |_| 0.0);
    sample_function(space, &f, resolution)
}

/// The Gaussian half-line `{x > 0}` (measure 1/2, perimeter `φ(0)`) with ramps
/// of widths `2^{-k}`, `k` in `ks`.
pub fn gaussian_half_line(resolution: usize, ks: &[i32]) -> Result<BorelSetApprox> {
    let space = ModelSpace::Gaussian1d;
    let widths: Vec<f64> = ks.iter().map(|&k| 2f64.powi(-k)).collect();
    let moll = widths.iter().map(|&h| sample_function(&space, &half_line_ramp(0.0, h), resolution)).collect::<Result<Vec<_>>>()?;
    BorelSetApprox::new(0.5, normal::pdf(0.0), indicator(&space, resolution, |x| x > 0.0)?, moll, widths)
}

/// The interval `(0, a)` of the unit interval (perimeter 1, one boundary point)
/// with ramps of widths `2^{-k}`.
pub fn unit_interval_boundary(a: f64, resolution: usize, ks: &[i32]) -> Result<BorelSetApprox> {
    let space = ModelSpace::UnitInterval;
    let widths: Vec<f64> = ks.iter().map(|&k| 2f64.powi(-k)).collect();
    let moll = widths.iter().map(|&h| sample_function(&space, &interval_ramp(a, h), resolution)).collect::<Result<Vec<_>>>()?;
    BorelSetApprox::new(a, 1.0, indicator(&space, resolution, move |x| x < a)?, moll, widths)
}
