//! Verifiers: evaluate both sides of an inequality on a grid and report the
//! smallest relative margin.
//!
//! Every check has the form `lhs <= rhs`; the relative margin of a row is
//! `(rhs - lhs) / max(rhs, 1e-12)` and a report passes when the smallest margin
//! is at least `-tol`.
//!
//! Inequalities with unspecified constants are checked through fitted
//! constants: the constant `C` fitted at the base resolution is doubled (the
//! stability budget) and the rows compare the doubled-resolution left sides
//! against `2 C` times the right sides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::capacity::{weighted_oscillation_atoms, MuckenhouptCheck, WeightCurve};
use crate::error::{Error, Result};
use crate::measure_space::{ball_volume, euclidean_tau, median, normal, GaussianMode, ProfileKind, sample_function, ModelSpace, ProfileSpec, SampledFunction, TestFunction};
use crate::quadrature::gk15;
use crate::rearrangement::{decreasing_rearrangement, gradient_rearrangement, interpolated_rearrangement, MonotoneStep, PiecewiseLinear};
use crate::ri_spaces::{boyd_indices, norm, norm_of_rearrangement, Phi, SpaceSpec};

pub use crate::capacity::{cheeger_check, CheegerCheck};

/// Denominator floor of relative margins.
pub const MARGIN_FLOOR: f64 = 1e-12;

/// Stability budget of fitted constants under resolution doubling.
pub const FIT_BUDGET: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub inequality_id: String,
    pub params: BTreeMap<String, Value>,
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub min_relative_margin: f64,
    pub passed: bool,
    pub resolution: usize,
    pub tolerance: f64,
    /// Fitted constants and other scalar diagnostics.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub notes: String,
}

pub fn relative_margin(lhs: f64, rhs: f64) -> f64 {
    let m = (rhs - lhs) / rhs.max(MARGIN_FLOOR);
    if m.is_nan() {
        f64::NEG_INFINITY
    } else {
        m
    }
}

impl VerificationReport {
    pub fn new(id: &str, grid: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, resolution: usize, tol: f64) -> Self {
        debug_assert!(grid.len() == lhs.len() && lhs.len() == rhs.len());
        let min_relative_margin =
            lhs.iter().zip(&rhs).map(|(&l, &r)| relative_margin(l, r)).fold(f64::INFINITY, f64::min);
        // an empty report has nothing to violate
        let min_relative_margin = if min_relative_margin == f64::INFINITY { 0.0 } else { min_relative_margin };
        Self {
            inequality_id: id.to_string(),
            params: BTreeMap::new(),
            grid,
            lhs,
            rhs,
            min_relative_margin,
            passed: min_relative_margin >= -tol,
            resolution,
            tolerance: tol,
            constants: BTreeMap::new(),
            notes: String::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn constant(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(&text.into());
        self
    }

    /// Rows whose margin is below `-tol`.
    pub fn violations(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| relative_margin(self.lhs[i], self.rhs[i]) < -self.tolerance).collect()
    }
}

/// Largest ratio `lhs / rhs`; a positive left side over a vanishing right side is infinite.
pub fn fitted_constant(lhs: &[f64], rhs: &[f64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(&l, &r)| {
            if l <= MARGIN_FLOOR * r.abs().max(1.0) && l <= 0.0 {
                0.0
            } else if r <= 0.0 {
                if l > MARGIN_FLOOR {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                l / r
            }
        })
        .fold(0.0, f64::max)
}

/// Rows at base and doubled resolution for a check with a fitted constant.
pub(crate) struct FittedRows {
    pub grid: Vec<f64>,
    pub base: (Vec<f64>, Vec<f64>),
    pub doubled: (Vec<f64>, Vec<f64>),
}

pub(crate) fn fitted_report(id: &str, rows: FittedRows, resolution: usize, tol: f64) -> VerificationReport {
    let c_base = fitted_constant(&rows.base.0, &rows.base.1);
    let c_doubled = fitted_constant(&rows.doubled.0, &rows.doubled.1);
    let allowed = FIT_BUDGET * c_base;
    let rhs: Vec<f64> = rows.doubled.1.iter().map(|r| allowed * r).collect();
    let mut report = VerificationReport::new(id, rows.grid, rows.doubled.0, rhs, resolution, tol)
        .constant("fitted_constant", c_base)
        .constant("fitted_constant_doubled", c_doubled)
        .note(format!(
            "constant fitted at resolution {resolution}; rows are resolution {} against {FIT_BUDGET} x fitted constant",
            2 * resolution
        ));
    if !c_base.is_finite() {
        report.passed = false;
        report.min_relative_margin = f64::NEG_INFINITY;
    }
    report
}

/// Snaps grid points to midpoints of the steps of `fstar` (half a cell away
/// from every jump) and drops points outside `(0, 1)`. Points on the zero tail
/// stay put: there is no jump left to avoid.
pub fn snap_grid(fstar: &MonotoneStep, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .filter(|&&t| t > 0.0 && t < 1.0)
        .map(|&t| match fstar.segment(t) {
            Some(k) if fstar.values()[k] == 0.0 && k > 0 => t,
            _ => fstar.snap(t),
        })
        .collect()
}

/// `((1/t) ∫_0^t (|∇f|*)^q)^{1/q}`.
fn gradient_power_mean(grad_q: &MonotoneStep, q: f64, t: f64) -> f64 {
    let avg = grad_q.integral_to(t) / t;
    if q == 1.0 {
        avg
    } else {
        avg.powf(1.0 / q)
    }
}

/// Checks `(f** - f*)(t) w_q(t) <= ((1/t) ∫_0^t (|∇f|*)^q)^{1/q}` on the grid.
pub fn verify_oscillation(f: &SampledFunction, profile: &ProfileSpec, q: f64, grid: &[f64], tol: f64) -> Result<VerificationReport> {
    let weights = WeightCurve::new(profile, q)?;
    verify_oscillation_with(f, &weights, grid, tol)
}

/// [`verify_oscillation`] with a precomputed weight curve.
pub fn verify_oscillation_with(f: &SampledFunction, weights: &WeightCurve, grid: &[f64], tol: f64) -> Result<VerificationReport> {
    let q = weights.q;
    let fstar = decreasing_rearrangement(f);
    let grad_q = gradient_rearrangement(f).map_values(|v| v.powf(q));
    let ts = snap_grid(&fstar, grid);
    let mut lhs = Vec::with_capacity(ts.len());
    let mut rhs = Vec::with_capacity(ts.len());
    for &t in &ts {
        let osc = fstar.oscillation_at(t);
        lhs.push(if osc == 0.0 { 0.0 } else { osc * weights.eval(t)? });
        rhs.push(gradient_power_mean(&grad_q, q, t));
    }
    Ok(VerificationReport::new("reod00", ts, lhs, rhs, f.len(), tol)
        .param("q", q)
        .param("profile", weights.profile.name.clone()))
}

/// The concave `q = 1` form `(f** - f*)(t) <= t / I(t) |∇f|**(t)`, evaluated
/// independently of the weight machinery.
pub fn verify_pro1(f: &SampledFunction, profile: &ProfileSpec, grid: &[f64], tol: f64) -> Result<VerificationReport> {
    if !profile.flags.concave {
        return Err(Error::Precondition(format!("pro1 needs a concave profile, {} is not flagged concave", profile.name)));
    }
    let fstar = decreasing_rearrangement(f);
    let grad = gradient_rearrangement(f);
    let ts = snap_grid(&fstar, grid);
    let lhs = ts.iter().map(|&t| fstar.oscillation_at(t) * (profile.eval(t) / t)).collect();
    let rhs = ts.iter().map(|&t| grad.integral_to(t) / t).collect();
    Ok(VerificationReport::new("pro1", ts, lhs, rhs, f.len(), tol).param("profile", profile.name.clone()))
}

/// Piecewise-linear `f*` used where a density of `-f*` is needed: the exact
/// rearrangement of the spatial interpolant on ordered line models, otherwise
/// the interpolant of the step `f*` through its midpoints.
pub fn density_surrogate(f: &SampledFunction) -> PiecewiseLinear {
    interpolated_rearrangement(f).unwrap_or_else(|| decreasing_rearrangement(f).linear_surrogate())
}

/// Rearranged `(-f*)' I` for a piecewise-linear `f*`.
///
/// Each linear piece carries its drop divided by `∫ ds/I(s)` over the piece,
/// i.e. the slope times the harmonic mean of the profile there.
pub fn derivative_profile_rearrangement(fstar: &PiecewiseLinear, profile: &ProfileSpec) -> MonotoneStep {
    let nodes = fstar.nodes();
    let inverse = |a: f64, b: f64| -> f64 {
        match &profile.kind {
            // I = phi(Phi^-1), so ds/I integrates to a quantile difference
            ProfileKind::Gaussian(GaussianMode::Exact) => normal::quantile(b) - normal::quantile(a),
            ProfileKind::Constant(c) => (b - a) / *c,
            _ => gk15(&|s: f64| 1.0 / profile.eval(s), a, b).0,
        }
    };
    let atoms = crate::par::map_range(nodes.len().saturating_sub(1), |k| {
        let ((s0, u0), (s1, u1)) = (nodes[k], nodes[k + 1]);
        let drop = u0 - u1;
        let value = if drop > 0.0 { drop / inverse(s0, s1) } else { 0.0 };
        (if value.is_finite() { value } else { 0.0 }, s1 - s0)
    });
    MonotoneStep::rearrange(atoms)
}

/// Checks `∫_0^t [((-f*)' I)*]^q <= ∫_0^t (|∇f|*)^q` on the grid.
pub fn verify_aa(f: &SampledFunction, profile: &ProfileSpec, q: f64, grid: &[f64], tol: f64) -> Result<VerificationReport> {
    let fstar = decreasing_rearrangement(f);
    let g = derivative_profile_rearrangement(&density_surrogate(f), profile).map_values(|v| v.powf(q));
    if !g.total_integral().is_finite() {
        return Err(Error::Overflow("derivative surrogate is not integrable".into()));
    }
    let grad_q = gradient_rearrangement(f).map_values(|v| v.powf(q));
    let ts = snap_grid(&fstar, grid);
    let lhs = ts.iter().map(|&t| g.integral_to(t)).collect();
    let rhs = ts.iter().map(|&t| grad_q.integral_to(t)).collect();
    Ok(VerificationReport::new("aa", ts, lhs, rhs, f.len(), tol).param("q", q).param("profile", profile.name.clone()))
}

/// Both sides of the capacitary oscillation check `fii`, without the constant:
/// `∫_0^t [(f** - f*)(s) cap_1(s,1/2)/s]^q ds` and `∫_0^t (|∇f|*)^q`, for
/// snapped `t < 1/2`.
pub fn fii_sides(f: &SampledFunction, profile: &ProfileSpec, q: f64, grid: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let fstar = decreasing_rearrangement(f);
    let grad_q = gradient_rearrangement(f).map_values(|v| v.powf(q));
    let ts: Vec<f64> = snap_grid(&fstar, grid).into_iter().filter(|&t| t < 0.5).collect();
    let cap = |s: f64| crate::capacity::cap1(profile, s, 0.5).unwrap_or(0.0);
    // on a step starting at a with offset D, (f** - f*)(s) = D / s
    let piece = |k: usize, hi: f64| -> f64 {
        let a = fstar.segment_start(k);
        let d = fstar.oscillation_at(a.max(f64::MIN_POSITIVE)) * a;
        if d == 0.0 || hi <= a {
            return 0.0;
        }
        gk15(&|s: f64| (d * cap(s) / (s * s)).powf(q), a, hi).0
    };
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    let last = fstar.segment(t_max).unwrap_or(0);
    let full: Vec<f64> = crate::par::map_range(last, |k| piece(k, fstar.breakpoints()[k]));
    let mut prefix = vec![0.0; full.len() + 1];
    for (k, v) in full.iter().enumerate() {
        prefix[k + 1] = prefix[k] + v;
    }
    let lhs = ts
        .iter()
        .map(|&t| {
            let k = fstar.segment(t).unwrap_or(0);
            prefix[k] + piece(k, t)
        })
        .collect();
    let rhs = ts.iter().map(|&t| grad_q.integral_to(t)).collect();
    (ts, lhs, rhs)
}

/// The `fii` check with a fitted constant, stable under resolution doubling. The
/// Muckenhoupt precondition is enforced from `muck`.
pub fn verify_fii(
    space: &ModelSpace,
    f: &TestFunction,
    resolution: usize,
    profile: &ProfileSpec,
    muck: &MuckenhouptCheck,
    grid: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    let q = muck.q;
    if !muck.satisfied {
        return Err(Error::Precondition(format!(
            "muckenhoupt check failed for q = {q} (constant {} vs refined {})",
            muck.constant, muck.refined_constant
        )));
    }
    let base = sample_function(space, f, resolution)?;
    let fine = sample_function(space, f, 2 * resolution)?;
    let (ts, l0, r0) = fii_sides(&base, profile, q, grid);
    // evaluate the refined sampling on the same (base-snapped) points
    let (_, l1, r1) = fii_sides(&fine, profile, q, &ts);
    let n = ts.len().min(l1.len());
    let rows = FittedRows {
        grid: ts[..n].to_vec(),
        base: (l0[..n].to_vec(), r0[..n].to_vec()),
        doubled: (l1[..n].to_vec(), r1[..n].to_vec()),
    };
    Ok(fitted_report("fii", rows, resolution, tol)
        .param("q", q)
        .param("profile", profile.name.clone())
        .param("function", f.label())
        .constant("muckenhoupt_constant", muck.constant))
}

/// Estimate of `sup ‖Q_{w_q} g‖_{Ȳ^(q)} / ‖g‖_{X̄^(q)}` over indicators of
/// `(0, u)`, `u = 2^{-j-1}`: a lower bound for the operator norm.
pub fn qwq_bound_estimate(weights: &WeightCurve, x: &SpaceSpec, y: &SpaceSpec) -> Result<f64> {
    let q = weights.q;
    let (xq, yq) = (SpaceSpec::convexified(x.clone(), q), SpaceSpec::convexified(y.clone(), q));
    let us: Vec<f64> = (1..=12).map(|j| 2f64.powi(-j)).collect();
    let ratios = crate::par::map(&us, |&u| -> Result<f64> {
        // Q χ_(0,u)(t) = ∫_t^u ds / (s w_q(s)) is decreasing in t; tabulate it on
        // geometric cells, taking the value at each cell's right end
        let cells = 400usize;
        let ratio = 1e-12f64.powf(1.0 / cells as f64);
        let ends: Vec<f64> = (0..cells).map(|i| u * ratio.powi((cells - 1 - i) as i32)).collect();
        let kernel = |s: f64| weights.eval(s).map_or(f64::INFINITY, |w| 1.0 / (s * w));
        let mut vals = vec![0.0; cells];
        let mut acc = 0.0;
        for i in (0..cells).rev() {
            vals[i] = acc;
            let lo = if i == 0 { ends[0] * ratio } else { ends[i - 1] };
            acc += crate::quadrature::integrate(&kernel, lo, ends[i], 1e-10, 0.0)?;
        }
        let mut breaks = ends.clone();
        breaks.push(1.0);
        vals.push(0.0);
        let qg = MonotoneStep::new(breaks, vals)?;
        Ok(norm_of_rearrangement(&yq, &qg)? / norm_of_rearrangement(&xq, &MonotoneStep::indicator(u))?)
    });
    ratios.into_iter().try_fold(0.0, |m: f64, r| r.map(|r| m.max(r)))
}

/// The three quantities of the Poincaré chain for one function:
/// `‖g - ∫g‖_{Y^(q)}`, `‖g - ∫g‖_{LS_q(X^(q))}` and
/// `‖∇g‖_{X^(q)} + ‖g - ∫g‖_{L^1}`.
pub fn poincare_terms(g: &SampledFunction, x: &SpaceSpec, y: &SpaceSpec, weights: &WeightCurve) -> Result<[f64; 3]> {
    let q = weights.q;
    let mean = g.mean();
    let centered = g.map_values(|v| v - mean);
    let xq = SpaceSpec::convexified(x.clone(), q);
    let outer = norm(&SpaceSpec::convexified(y.clone(), q), &centered)?;
    let fstar = decreasing_rearrangement(&centered);
    let atoms = weighted_oscillation_atoms(&fstar, |t| weights.eval(t))?;
    let middle = norm_of_rearrangement(&xq, &MonotoneStep::rearrange(atoms))?;
    let inner = norm(&xq, &centered.gradient_modulus())? + centered.l1_norm();
    Ok([outer, middle, inner])
}

fn ratio(a: f64, b: f64) -> f64 {
    if a <= MARGIN_FLOOR && b <= MARGIN_FLOOR {
        0.0
    } else {
        a / b
    }
}

/// Both chained ratios of the Poincaré inequality over a function family, with
/// the Boyd precondition on `X` and an estimate of the `Q_{w_q}` bound.
#[allow(clippy::too_many_arguments)]
pub fn verify_poincare(
    space: &ModelSpace,
    family: &[TestFunction],
    resolution: usize,
    x: &SpaceSpec,
    y: &SpaceSpec,
    profile: &ProfileSpec,
    q: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let (_, upper) = boyd_indices(x)?;
    if !(upper < 1.0 - 1e-6) {
        return Err(Error::Precondition(format!("upper Boyd index of {x} is {upper:.4}, the averaging operator is unbounded")));
    }
    let weights = WeightCurve::new(profile, q)?;
    let qbound = qwq_bound_estimate(&weights, x, y)?;
    if !qbound.is_finite() {
        return Err(Error::Precondition(format!("Q_w bound estimate is not finite for X = {x}, Y = {y}")));
    }
    let terms = |res: usize| -> Result<Vec<[f64; 3]>> {
        crate::par::map(family, |f| sample_function(space, f, res).and_then(|g| poincare_terms(&g, x, y, &weights)))
            .into_iter()
            .collect()
    };
    let base = terms(resolution)?;
    let fine = terms(2 * resolution)?;
    let chain = |t: &[[f64; 3]], i: usize| -> (Vec<f64>, Vec<f64>) {
        (t.iter().map(|r| ratio(r[i], r[i + 1])).collect(), vec![1.0; t.len()])
    };
    let (b0, b1) = (chain(&base, 0), chain(&base, 1));
    let (f0, f1) = (chain(&fine, 0), chain(&fine, 1));
    let n = family.len();
    let c1 = (fitted_constant(&b0.0, &b0.1), fitted_constant(&f0.0, &f0.1));
    let c2 = (fitted_constant(&b1.0, &b1.1), fitted_constant(&f1.0, &f1.1));
    // rows: chain 1 then chain 2, each against twice its base-resolution sup
    let grid: Vec<f64> = (0..2 * n).map(|i| i as f64).collect();
    let lhs: Vec<f64> = f0.0.iter().chain(&f1.0).copied().collect();
    let rhs: Vec<f64> = std::iter::repeat_n(FIT_BUDGET * c1.0, n).chain(std::iter::repeat_n(FIT_BUDGET * c2.0, n)).collect();
    let mut report = VerificationReport::new("poincare", grid, lhs, rhs, resolution, tol)
        .param("x", x.to_string())
        .param("y", y.to_string())
        .param("q", q)
        .param("profile", profile.name.clone())
        .param("functions", n)
        .constant("boyd_upper_x", upper)
        .constant("qw_bound_lower_estimate", qbound)
        .constant("chain1_sup", c1.0)
        .constant("chain1_sup_doubled", c1.1)
        .constant("chain2_sup", c2.0)
        .constant("chain2_sup_doubled", c2.1)
        .note("rows 0..n: ‖g-∫g‖_Y / LS_q, rows n..2n: LS_q / (‖∇g‖_X + ‖g-∫g‖_1), at doubled resolution");
    if !(c1.0.is_finite() && c2.0.is_finite()) {
        report.passed = false;
        report.min_relative_margin = f64::NEG_INFINITY;
    }
    Ok(report)
}

fn ball_dimension(f: &SampledFunction) -> Result<usize> {
    match f.space() {
        ModelSpace::EuclideanBall { n } => Ok(*n),
        other => Err(Error::Invalid(format!("expected a euclidean ball sample, got {}", other.name()))),
    }
}

/// Checks that a radial ball sample can be extended by zero outside the unit
/// ball: the outermost value is reachable from 0 with its gradient modulus.
pub fn check_vanishing_trace(f: &SampledFunction) -> Result<()> {
    let resolution = f.len();
    let last = f.atoms().last().ok_or_else(|| Error::Invalid("empty sample".into()))?;
    let gap = 0.5 / resolution as f64;
    if last.value.abs() > last.grad * gap * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::Precondition(format!(
            "support touches the boundary: outermost value {} with gradient {}",
            last.value, last.grad
        )));
    }
    Ok(())
}

/// `‖f‖_{L(n',1)} τ_n / (n' ‖∇f‖_1)` in Lebesgue scaling; at most 1.
pub fn gn_sharp_ratio(f: &SampledFunction) -> Result<(f64, f64, f64)> {
    let n = ball_dimension(f)?;
    check_vanishing_trace(f)?;
    let nn = n as f64;
    let conj = nn / (nn - 1.0);
    let beta = ball_volume(n);
    // Λ(L^{n'}) with φ(t) = t^{1/n'}; L(n',1) = n' Λ(L^{n'})
    let lambda = norm(&SpaceSpec::Lorentz(Phi::Power(1.0 / conj)), f)? * beta.powf(1.0 / conj);
    let lhs = conj * lambda;
    let rhs = conj / euclidean_tau(n) * beta * f.gradient_l1();
    Ok((lhs, rhs, if rhs > 0.0 { lhs / rhs } else { 0.0 }))
}

/// Checks `‖f‖_{L(n',1)} <= n' τ_n^{-1} ‖∇f‖_1` for a radial sample on a ball.
pub fn verify_gn_sharp(f: &SampledFunction, tol: f64) -> Result<VerificationReport> {
    let (lhs, rhs, r) = gn_sharp_ratio(f)?;
    let n = ball_dimension(f)?;
    Ok(VerificationReport::new("gnlo", vec![1.0], vec![lhs], vec![rhs], f.len(), tol)
        .param("n", n)
        .constant("ratio", r)
        .note("Lebesgue scaling on the ball"))
}

/// `∫_0^∞ I(μ_f(t)) dt = Σ_k (v_k - v_{k+1}) I(W_k)` over the steps of `f*`.
pub fn isoperimetric_lorentz(f: &SampledFunction, profile: &ProfileSpec) -> f64 {
    let fstar = decreasing_rearrangement(f);
    let vals = fstar.values();
    fstar
        .rows()
        .enumerate()
        .map(|(k, (w, v))| {
            let i = if w >= 1.0 { 0.0 } else { profile.eval(w) };
            (v - vals.get(k + 1).copied().unwrap_or(0.0)) * i
        })
        .sum()
}

/// Checks `∫_0^∞ I(μ_f(t)) dt <= ‖∇f‖_1` with the exact Gaussian profile.
pub fn verify_ledoux(f: &SampledFunction, tol: f64) -> Result<VerificationReport> {
    if !matches!(f.space(), ModelSpace::Gaussian1d | ModelSpace::Gaussian2d) {
        return Err(Error::Invalid(format!("ledoux check needs a gaussian space, got {}", f.space().name())));
    }
    let lhs = isoperimetric_lorentz(f, &ProfileSpec::gaussian());
    let rhs = f.gradient_l1();
    Ok(VerificationReport::new("ledoux", vec![1.0], vec![lhs], vec![rhs], f.len(), tol))
}

/// Reproduces the limit argument recovering `I(μ(A)) <= μ⁺(A)` from the
/// oscillation inequality: rows `I(t_j) (f_j** - f_j*)(t_j)` against `μ⁺(A)`
/// along the mollifications with `t_j = μ(A) + 0.1 · 2^{-j}`, then the limit
/// row `I(μ(A))` against `μ⁺(A)`.
pub fn recover_isoperimetry(set: &crate::measure_space::BorelSetApprox, profile: &ProfileSpec, tol: f64) -> Result<VerificationReport> {
    let last = set.mollifications.last().expect("validated non-empty");
    let mass = last.gradient_l1();
    if mass > set.perimeter * (1.0 + tol) + MARGIN_FLOOR {
        return Err(Error::Precondition(format!(
            "gradient mass {mass} of the last mollification exceeds the perimeter {}",
            set.perimeter
        )));
    }
    let mut grid = Vec::new();
    let mut lhs = Vec::new();
    for (j, f) in set.mollifications.iter().enumerate() {
        let fstar = decreasing_rearrangement(f);
        let t = fstar.snap(set.measure + 0.1 * 2f64.powi(-(j as i32)));
        grid.push(t);
        lhs.push(profile.eval(t) * fstar.oscillation_at(t));
    }
    grid.push(set.measure);
    lhs.push(profile.eval(set.measure));
    let rhs = vec![set.perimeter; lhs.len()];
    Ok(VerificationReport::new("insertao", grid, lhs, rhs, set.indicator.len(), tol)
        .param("measure", set.measure)
        .param("perimeter", set.perimeter)
        .param("widths", json!(set.widths))
        .param("profile", profile.name.clone()))
}

/// Gaussian chain `‖f - m(f)‖_{Λ(t log(e/t)^{1/2})} ≼ ‖∇f‖_1` over a family,
/// with a fitted constant stable under resolution doubling.
pub fn verify_auto3(family: &[TestFunction], resolution: usize, tol: f64) -> Result<VerificationReport> {
    let space = ModelSpace::Gaussian1d;
    let spec = SpaceSpec::Lorentz(Phi::TLog(0.5));
    let sides = |res: usize| -> Result<Vec<(f64, f64)>> {
        crate::par::map(family, |f| -> Result<(f64, f64)> {
            let g = sample_function(&space, f, res)?;
            let m = median(&g);
            Ok((norm(&spec, &g.map_values(|v| v - m))?, g.gradient_l1()))
        })
        .into_iter()
        .collect()
    };
    let (b, d) = (sides(resolution)?, sides(2 * resolution)?);
    let rows = FittedRows {
        grid: (0..family.len()).map(|i| i as f64).collect(),
        base: (b.iter().map(|p| p.0).collect(), b.iter().map(|p| p.1).collect()),
        doubled: (d.iter().map(|p| p.0).collect(), d.iter().map(|p| p.1).collect()),
    };
    Ok(fitted_report("auto3", rows, resolution, tol).param("space", spec.to_string()).note("functions centered at their medians"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::muckenhoupt_check;
    use crate::families;
    use crate::grid::LogGrid;

    fn unit(expr: &str, grad: &str, n: usize) -> SampledFunction {
        sample_function(&ModelSpace::UnitInterval, &TestFunction::from_exprs(expr, grad).unwrap(), n).unwrap()
    }

    fn grid() -> Vec<f64> {
        LogGrid::default().points()
    }

    #[test]
    fn oscillation_on_identity() {
        let f = unit("x", "1", 4096);
        let r = verify_oscillation(&f, &ProfileSpec::unit_interval(), 2.0, &grid(), 1e-2).unwrap();
        assert!(r.passed);
        let top = r.lhs.iter().copied().fold(0.0, f64::max);
        assert!((top - 3f64.sqrt() / 2.0).abs() < 1e-3 && top <= 3f64.sqrt() / 2.0);
        assert!(r.rhs.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let r = verify_oscillation(&f, &ProfileSpec::unit_interval(), 1.0, &grid(), 1e-2).unwrap();
        // f* is flat on the first cell, so only points past it see the full oscillation
        for (t, v) in r.grid.iter().zip(&r.lhs) {
            assert!(*v <= 0.5 + 1e-12);
            if *t > 1e-2 {
                assert!(*v > 0.49, "{t} {v}");
            }
        }
    }

    #[test]
    fn constants_have_zero_margin() {
        let c = sample_function(&ModelSpace::Gaussian1d, &TestFunction::constant(1.5), 512).unwrap();
        for q in [1.0, 2.0] {
            let r = verify_oscillation(&c, &ProfileSpec::gaussian(), q, &grid(), 1e-2).unwrap();
            assert!(r.passed && r.min_relative_margin == 0.0);
            let r = verify_aa(&c, &ProfileSpec::gaussian(), q, &grid(), 1e-2).unwrap();
            assert!(r.passed && r.lhs.iter().all(|&v| v == 0.0));
        }
        assert!(verify_ledoux(&c, 1e-2).unwrap().passed);
    }

    #[test]
    fn pro1_matches_oscillation_path() {
        let profile = ProfileSpec::gaussian();
        for f in families::random_smooth(3, 4) {
            let g = sample_function(&ModelSpace::Gaussian1d, &f, 1024).unwrap();
            let a = verify_oscillation(&g, &profile, 1.0, &grid(), 1e-2).unwrap();
            let b = verify_pro1(&g, &profile, &grid(), 1e-2).unwrap();
            for (x, y) in a.lhs.iter().zip(&b.lhs) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
            for (x, y) in a.rhs.iter().zip(&b.rhs) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn aa_on_identity_is_tight() {
        let f = unit("x", "1", 4096);
        let r = verify_aa(&f, &ProfileSpec::unit_interval(), 1.0, &grid(), 1e-2).unwrap();
        assert!(r.passed);
        for (i, t) in r.grid.iter().enumerate() {
            assert!((r.rhs[i] - t).abs() < 1e-12);
            assert!((r.lhs[i] - t).abs() < 1e-3 * t.max(1e-3));
        }
    }

    #[test]
    fn aa_gaussian_identity_coordinate() {
        let f = sample_function(&ModelSpace::Gaussian1d, &TestFunction::from_exprs("x", "1").unwrap(), 4096).unwrap();
        let r = verify_aa(&f, &ProfileSpec::gaussian(), 2.0, &[0.3], 1e-2).unwrap();
        assert!(r.passed, "{:?}", r.min_relative_margin);
    }

    #[test]
    fn fii_unit_interval_identity() {
        let unit_profile = ProfileSpec::unit_interval();
        let muck = muckenhoupt_check(&unit_profile, 1.0, &LogGrid::default()).unwrap();
        let f = TestFunction::from_exprs("x", "1").unwrap();
        let r = verify_fii(&ModelSpace::UnitInterval, &f, 4096, &unit_profile, &muck, &[0.3], 1e-2).unwrap();
        // LHS = ∫_0^t (s/2)(1/s) ds = t/2 against ∫_0^t 1 = t
        assert!((r.constants["fitted_constant"] - 0.5).abs() < 1e-3);
        assert!(r.passed);
        let bad = muckenhoupt_check(&ProfileSpec::power(1.0, 1.0), 1.0, &LogGrid::default()).unwrap();
        assert!(matches!(
            verify_fii(&ModelSpace::UnitInterval, &f, 256, &unit_profile, &bad, &[0.3], 1e-2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn poincare_rejects_l1() {
        let fam = vec![TestFunction::from_exprs("x", "1").unwrap()];
        let err = verify_poincare(&ModelSpace::UnitInterval, &fam, 256, &SpaceSpec::Lp(1.0), &SpaceSpec::Lp(2.0), &ProfileSpec::unit_interval(), 1.0, 1e-2);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn poincare_constant_function() {
        let g = sample_function(&ModelSpace::Gaussian1d, &TestFunction::constant(3.0), 256).unwrap();
        let w = WeightCurve::new(&ProfileSpec::gaussian(), 1.0).unwrap();
        let t = poincare_terms(&g, &SpaceSpec::Lp(2.0), &"lorentzq:phi=tlog:1,q=2".parse().unwrap(), &w).unwrap();
        assert_eq!(t, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn gn_sharp_examples() {
        let space = ModelSpace::EuclideanBall { n: 2 };
        let tent = sample_function(&space, &families::tent(), 1024).unwrap();
        let r = verify_gn_sharp(&tent, 1e-2).unwrap();
        assert!(r.passed);
        let zero = sample_function(&space, &TestFunction::constant(0.0), 64).unwrap();
        assert!(verify_gn_sharp(&zero, 1e-2).unwrap().passed);
        let one = sample_function(&space, &TestFunction::constant(1.0), 64).unwrap();
        assert!(matches!(verify_gn_sharp(&one, 1e-2), Err(Error::Precondition(_))));
        let ball = sample_function(&space, &families::ball_ramp(0.5, 1.0 / 64.0), 1024).unwrap();
        let (_, _, ratio) = gn_sharp_ratio(&ball).unwrap();
        assert!((0.9..=1.001).contains(&ratio), "{ratio}");
    }

    #[test]
    fn ledoux_half_line_limit() {
        let i_half = ProfileSpec::gaussian().eval(0.5);
        let f = sample_function(&ModelSpace::Gaussian1d, &families::half_line_ramp(0.0, 1.0 / 64.0), 4096).unwrap();
        let r = verify_ledoux(&f, 1e-2).unwrap();
        assert!(r.passed);
        assert!((r.lhs[0] / i_half - 1.0).abs() < 0.05 && (r.rhs[0] / i_half - 1.0).abs() < 0.05);
        let c = sample_function(&ModelSpace::Gaussian1d, &families::clamp_unit(), 4096).unwrap();
        // monotone functions of one coordinate are extremal
        let r = verify_ledoux(&c, 1e-2).unwrap();
        assert!(r.passed && r.min_relative_margin.abs() < 1e-3, "{}", r.min_relative_margin);
    }

    #[test]
    fn isoperimetry_recovery() {
        let set = families::gaussian_half_line(16384, &[1, 2, 3, 4, 5]).unwrap();
        let r = recover_isoperimetry(&set, &ProfileSpec::gaussian(), 1e-2).unwrap();
        assert!(r.passed);
        assert!(r.min_relative_margin.abs() < 1e-3);
        let set = families::unit_interval_boundary(0.3, 4096, &[2, 4, 6]).unwrap();
        let r = recover_isoperimetry(&set, &ProfileSpec::unit_interval(), 1e-2).unwrap();
        assert!(r.passed && r.min_relative_margin.abs() < 1e-10);
    }

    #[test]
    fn report_json_roundtrip() {
        let r = VerificationReport::new("x", vec![0.1], vec![1.0], vec![2.0], 8, 1e-2).param("q", 2.0);
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.min_relative_margin, 0.5);
    }
}
