//! The (L¹, L∞) K-functional, optimal truncation splits, Lions-Peetre norms,
//! reiteration bounds and oscillation inequalities derived from
//! Gagliardo-Nirenberg norms.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::inequalities::{check_vanishing_trace, fitted_report, snap_grid, FittedRows, VerificationReport};
use crate::measure_space::{ball_volume, sample_function, Atom, ModelSpace, SampledFunction, TestFunction};
use crate::quadrature::integrate;
use crate::rearrangement::{decreasing_rearrangement, gradient_rearrangement, MonotoneStep};

/// `K(t, f; L¹, L∞)` from the rearrangement: `∫_0^t f*` for `t <= 1`, `‖f‖_1` beyond.
pub fn k_from_rearrangement(fstar: &MonotoneStep, t: f64) -> f64 {
    fstar.integral_to(t.min(1.0))
}

pub fn k_functional(f: &SampledFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("K-functional needs t > 0, got {t}"));
    }
    Ok(k_from_rearrangement(&decreasing_rearrangement(f), t))
}

/// Samples of `t -> K(t, f)` on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFunctionalCurve {
    pub ts: Vec<f64>,
    pub ks: Vec<f64>,
    /// `f*(t)`, the exact derivative of `K` away from jumps.
    pub slopes: Vec<f64>,
}

impl KFunctionalCurve {
    pub fn new(f: &SampledFunction, grid: &[f64]) -> Result<Self> {
        if grid.iter().any(|&t| !(t > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return domain("K-curve grid must be positive and increasing");
        }
        let fstar = decreasing_rearrangement(f);
        Ok(Self {
            ts: grid.to_vec(),
            ks: grid.iter().map(|&t| k_from_rearrangement(&fstar, t)).collect(),
            slopes: grid.iter().map(|&t| if t < 1.0 { fstar.eval(t) } else { 0.0 }).collect(),
        })
    }

    /// Monotonicity, concavity (three-point test) and decrease of `K(t)/t`,
    /// each up to `tol` relative to the scale of `K`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let scale = self.ks.iter().fold(1.0f64, |m, k| m.max(k.abs()));
        let slack = tol * scale;
        for i in 1..self.ts.len() {
            if self.ks[i] < self.ks[i - 1] - slack {
                return Err(Error::Invalid(format!("K decreases at t = {}", self.ts[i])));
            }
            if self.ks[i] / self.ts[i] > self.ks[i - 1] / self.ts[i - 1] + slack / self.ts[i - 1] {
                return Err(Error::Invalid(format!("K(t)/t increases at t = {}", self.ts[i])));
            }
        }
        for i in 1..self.ts.len().saturating_sub(1) {
            let (t0, t1, t2) = (self.ts[i - 1], self.ts[i], self.ts[i + 1]);
            let chord = self.ks[i - 1] + (self.ks[i + 1] - self.ks[i - 1]) * (t1 - t0) / (t2 - t0);
            if self.ks[i] < chord - slack {
                return Err(Error::Invalid(format!("K is not concave at t = {t1}")));
            }
        }
        Ok(())
    }

    /// Rows `(t, K, K/t, f*(t), one-sided difference quotient)`.
    pub fn rows(&self) -> Vec<[f64; 5]> {
        (0..self.ts.len())
            .map(|i| {
                let fd = if i + 1 < self.ts.len() {
                    (self.ks[i + 1] - self.ks[i]) / (self.ts[i + 1] - self.ts[i])
                } else {
                    f64::NAN
                };
                [self.ts[i], self.ks[i], self.ks[i] / self.ts[i], self.slopes[i], fd]
            })
            .collect()
    }
}

/// `f = D0 + D1` with `D0` the part of `f` above the level `f*(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub t: f64,
    pub level: f64,
    pub d0: SampledFunction,
    pub d1: SampledFunction,
}

/// Splits `f` at the level `f*(t)`: `D0 = sign(f) (|f| - f*(t))_+` and
/// `D1 = f - D0`. Gradients follow the truncation.
pub fn optimal_decomposition(f: &SampledFunction, t: f64) -> Result<Decomposition> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("decomposition needs t in (0,1), got {t}"));
    }
    let level = decreasing_rearrangement(f).eval(t);
    let (mut high, mut low) = (Vec::with_capacity(f.len()), Vec::with_capacity(f.len()));
    for a in f.atoms() {
        if a.value.abs() > level {
            let cap = level.copysign(a.value);
            high.push(Atom::new(a.value - cap, a.weight, a.grad));
            low.push(Atom::new(cap, a.weight, 0.0));
        } else {
            high.push(Atom::new(0.0, a.weight, 0.0));
            low.push(*a);
        }
    }
    Ok(Decomposition {
        t,
        level,
        d0: SampledFunction::new(high, f.space().clone())?,
        d1: SampledFunction::new(low, f.space().clone())?,
    })
}

/// Gradient mass of the truncation above `f*(t)` against `∫_0^t |∇f|*`.
pub fn truncation_gradient_bound(f: &SampledFunction, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t <= 1.0) {
        return domain(format!("truncation bound needs t in (0,1], got {t}"));
    }
    let level = decreasing_rearrangement(f).eval(t);
    let lhs = f.atoms().iter().filter(|a| a.value.abs() > level).map(|a| a.grad * a.weight).sum();
    Ok((lhs, gradient_rearrangement(f).integral_to(t)))
}

/// `sup_t t^{-θ} K(t)` from the rearrangement. On each step `K(t) = D + v t`
/// so `t^{-θ} K(t)` is convex in `t` and the supremum sits at a breakpoint.
fn theta_sup(fstar: &MonotoneStep, theta: f64) -> f64 {
    fstar
        .breakpoints()
        .iter()
        .filter(|&&b| b <= 1.0)
        .map(|&b| b.powf(-theta) * fstar.integral_to(b))
        .chain(std::iter::once(fstar.integral_to(1.0)))
        .fold(0.0, f64::max)
}

/// `(∫_0^∞ (t^{-θ} K(t))^q dt/t)^{1/q}`, or the supremum for `q = ∞`.
pub fn theta_q_norm(f: &SampledFunction, theta: f64, q: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("θ must lie in (0,1), got {theta}"));
    }
    if !(q >= 1.0) {
        return domain(format!("q must be at least 1, got {q}"));
    }
    let fstar = decreasing_rearrangement(f);
    if q.is_infinite() {
        return Ok(theta_sup(&fstar, theta));
    }
    let total = k_from_rearrangement(&fstar, 1.0);
    let end = fstar.support_end().min(1.0);
    let seg = |k: usize| -> Result<f64> {
        let (a, b) = (fstar.segment_start(k), fstar.breakpoints()[k].min(1.0));
        let v = fstar.values()[k];
        if b <= a {
            return Ok(0.0);
        }
        if k == 0 {
            // K(t) = v t on the first step
            let e = (1.0 - theta) * q;
            return Ok(v.powf(q) * b.powf(e) / e);
        }
        let d = fstar.integral_to(a) - v * a;
        integrate(|t: f64| (t.powf(-theta) * (d + v * t)).powf(q) / t, a, b, 1e-12, 0.0)
    };
    let parts = crate::par::map_range(fstar.len(), seg);
    let mut acc = 0.0;
    for p in parts {
        acc += p?;
    }
    // K is constant from the end of the support on
    if end < 1.0 {
        acc += total.powf(q) * (end.powf(-theta * q) - 1.0) / (theta * q);
    }
    acc += total.powf(q) / (theta * q);
    let norm = acc.powf(1.0 / q);
    if !norm.is_finite() {
        return Err(Error::Overflow(format!("θ,q norm diverges for θ = {theta}, q = {q}")));
    }
    Ok(norm)
}

/// Checks `s (f** - f*)(s) <= K(s, D0(t) f)` for grid points `s <= t`, and
/// `s^{1-θ} (f** - f*)(s) <= ‖D0(t) f‖_{θ,∞}`. Points are moved half a cell
/// away from the jumps of `f*`.
pub fn reiteration_check(f: &SampledFunction, t: f64, grid: &[f64], theta: f64, tol: f64) -> Result<VerificationReport> {
    let split = optimal_decomposition(f, t)?;
    let fstar = decreasing_rearrangement(f);
    let d0star = decreasing_rearrangement(&split.d0);
    let d0_theta = theta_sup(&d0star, theta);
    let ss: Vec<f64> = snap_grid(&fstar, grid).into_iter().filter(|&s| s <= t).collect();
    let mut rows = Vec::with_capacity(2 * ss.len());
    let mut lhs = Vec::with_capacity(2 * ss.len());
    let mut rhs = Vec::with_capacity(2 * ss.len());
    for &s in &ss {
        let gap = s * fstar.oscillation_at(s);
        rows.push(s);
        lhs.push(gap);
        rhs.push(k_from_rearrangement(&d0star, s));
    }
    for &s in &ss {
        rows.push(s);
        lhs.push(s.powf(-theta) * s * fstar.oscillation_at(s));
        rhs.push(d0_theta);
    }
    Ok(VerificationReport::new("bjc", rows, lhs, rhs, f.len(), tol)
        .param("t", t)
        .param("theta", theta)
        .note("first half of the rows: K(s, D0(t)f); second half: θ,∞ norm of D0(t)f"))
}

fn ball_dimension(f: &SampledFunction) -> Result<usize> {
    match f.space() {
        ModelSpace::EuclideanBall { n } => Ok(*n),
        other => Err(Error::Invalid(format!("expected a euclidean ball sample, got {}", other.name()))),
    }
}

/// Both sides of the oscillation inequality derived from the weak (or
/// strong) Gagliardo-Nirenberg inequality, in Lebesgue scaling on the ball:
/// weak `T^{1-1/n} (f** - f*)(T)` or strong `∫_0^T (f** - f*)(S) S^{-1/n} dS`,
/// against `∫_0^T |∇f|*`.
pub fn gn_oscillation_sides(f: &SampledFunction, strong: bool, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = ball_dimension(f)?;
    check_vanishing_trace(f)?;
    let nf = n as f64;
    let beta = ball_volume(n);
    let fstar = decreasing_rearrangement(f);
    let grad = gradient_rearrangement(f);
    let ts = snap_grid(&fstar, grid);
    // on a step starting at a, (f** - f*)(s) = D / s and ∫_a^b D s^{-1-1/n} = D n (a^{-1/n} - b^{-1/n})
    let piece = |k: usize, hi: f64| -> f64 {
        let a = fstar.segment_start(k);
        if k == 0 || hi <= a {
            return 0.0;
        }
        let d = fstar.integral_to(a) - fstar.values()[k] * a;
        d * nf * (a.powf(-1.0 / nf) - hi.powf(-1.0 / nf))
    };
    let mut prefix = vec![0.0];
    if strong {
        for k in 0..fstar.len() {
            let last = *prefix.last().unwrap();
            prefix.push(last + piece(k, fstar.breakpoints()[k]));
        }
    }
    let mut lhs = Vec::with_capacity(ts.len());
    for &t in &ts {
        let v = if strong {
            let k = fstar.segment(t).unwrap_or(fstar.len());
            let tail = if k < fstar.len() { piece(k, t) } else { 0.0 };
            beta.powf(1.0 - 1.0 / nf) * (prefix[k] + tail)
        } else {
            (beta * t).powf(1.0 - 1.0 / nf) * fstar.oscillation_at(t)
        };
        lhs.push(v);
    }
    let rhs = ts.iter().map(|&t| beta * grad.integral_to(t)).collect();
    Ok((ts, lhs, rhs))
}

/// The oscillation inequality derived from Gagliardo-Nirenberg on a ball, with
/// a constant fitted at `resolution` and checked at twice the resolution.
pub fn derive_oscillation_from_gn(
    n: usize,
    f: &TestFunction,
    resolution: usize,
    strong: bool,
    grid: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    let space = ModelSpace::EuclideanBall { n };
    let base = sample_function(&space, f, resolution)?;
    let fine = sample_function(&space, f, 2 * resolution)?;
    let (ts, l0, r0) = gn_oscillation_sides(&base, strong, grid)?;
    let (_, l1, r1) = gn_oscillation_sides(&fine, strong, &ts)?;
    let m = ts.len().min(l1.len());
    let rows = FittedRows { grid: ts[..m].to_vec(), base: (l0[..m].to_vec(), r0[..m].to_vec()), doubled: (l1[..m].to_vec(), r1[..m].to_vec()) };
    let id = if strong { "gn_strong" } else { "gn_weak" };
    Ok(fitted_report(id, rows, resolution, tol).param("n", n).param("function", f.label()))
}
