//! Capacity profiles derived from isoperimetric profiles (Maz'ya's formulas),
//! the weights `w_q`, capacitary Hardy operators, `LS_q(X)` functionals and
//! Muckenhoupt checks.

use serde::{Deserialize, Serialize};

use crate::error::{domain, overflow, Error, Result};
use crate::grid::LogGrid;
use crate::measure_space::{ProfileSpec, SampledFunction};
use crate::quadrature::{integrate, integrate_from_zero, integrate_log, FLOOR};
use crate::rearrangement::{decreasing_rearrangement, MonotoneStep};
use crate::ri_spaces::{norm_of_rearrangement, SpaceSpec};

const REL_TOL: f64 = 1e-11;
/// Interior points used for interval infima of non-concave profiles.
const INF_POINTS: usize = 256;

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b < 1.0) {
        return domain(format!("capacity needs 0 < a <= b < 1, got ({a}, {b})"));
    }
    if a > b {
        return domain(format!("capacity needs a <= b, got ({a}, {b})"));
    }
    Ok(())
}

/// `inf_{a <= t <= b} I(t)`, without argument checks.
fn interval_inf(profile: &ProfileSpec, a: f64, b: f64) -> f64 {
    let ends = profile.eval(a).min(profile.eval(b));
    if profile.flags.concave || a == b {
        // a concave function attains its minimum over an interval at an end
        return ends;
    }
    let h = (b - a) / (INF_POINTS as f64 + 1.0);
    (1..=INF_POINTS).map(|i| profile.eval(a + h * i as f64)).fold(ends, f64::min)
}

/// `cap_1(a, b) = inf_{a <= t <= b} I(t)`.
pub fn cap1(profile: &ProfileSpec, a: f64, b: f64) -> Result<f64> {
    check_interval(a, b)?;
    Ok(interval_inf(profile, a, b))
}

/// Maz'ya lower bound
/// `(∫_a^b ds / cap_1(s, b)^{q/(q-1)})^{-(q-1)/q}` for `cap_q(a, b)`, `q > 1`.
///
/// A degenerate interval `a = b` gives `+∞`.
pub fn capq_lower(profile: &ProfileSpec, q: f64, a: f64, b: f64) -> Result<f64> {
    if !(q > 1.0) {
        return domain(format!("capq_lower needs q > 1, got {q}"));
    }
    check_interval(a, b)?;
    if a == b {
        return Ok(f64::INFINITY);
    }
    let conj = q / (q - 1.0);
    let integrand = |s: f64| interval_inf(profile, s, b).powf(-conj);
    let integral = integrate(integrand, a, b, REL_TOL, 0.0)
        .map_err(|_| Error::Overflow(format!("Maz'ya integral diverges near a = {a}")))?;
    Ok(integral.powf(-1.0 / conj))
}

/// How a capacity value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactFromProfile,
    LowerBoundMazya,
}

/// `(a, b) -> cap_q(a, b)` for a fixed profile.
#[derive(Debug, Clone)]
pub struct CapacityProfile {
    pub profile: ProfileSpec,
    pub q: f64,
}

impl CapacityProfile {
    pub fn new(profile: ProfileSpec, q: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return domain(format!("capacity needs q >= 1, got {q}"));
        }
        Ok(Self { profile, q })
    }

    pub fn provenance(&self) -> Provenance {
        if self.q == 1.0 {
            Provenance::ExactFromProfile
        } else {
            Provenance::LowerBoundMazya
        }
    }

    /// For `q > 1` and a symmetric profile the Maz'ya bound is taken at both
    /// `(a, b)` and the reflected pair `(1 - b, 1 - a)`; capacities agree on the
    /// two, so the larger bound is still a lower bound.
    pub fn eval(&self, a: f64, b: f64) -> Result<f64> {
        if self.q == 1.0 {
            return cap1(&self.profile, a, b);
        }
        let direct = capq_lower(&self.profile, self.q, a, b)?;
        if self.profile.flags.symmetric_about_half {
            Ok(direct.max(capq_lower(&self.profile, self.q, 1.0 - b, 1.0 - a)?))
        } else {
            Ok(direct)
        }
    }

    /// Rows `((a, b), cap_q(a, b))` over all pairs `a <= b` of the grid.
    pub fn table(&self, grid: &[f64]) -> Result<Vec<((f64, f64), f64)>> {
        let pairs: Vec<(f64, f64)> =
            grid.iter().enumerate().flat_map(|(i, &a)| grid[i..].iter().map(move |&b| (a, b))).collect();
        crate::par::map(&pairs, |&(a, b)| self.eval(a, b).map(|v| ((a, b), v))).into_iter().collect()
    }
}

/// `w_1(t) = inf_{0 < s < t} I(s)/s`.
fn weight_w1(profile: &ProfileSpec, t: f64) -> f64 {
    let at_t = profile.eval(t) / t;
    if profile.flags.concave {
        // I(s)/s is non-increasing for concave I with I(0+) >= 0
        return at_t;
    }
    let lo = (FLOOR.max(t * 1e-10)).ln();
    let step = (t.ln() - lo) / INF_POINTS as f64;
    (0..INF_POINTS)
        .map(|i| (lo + step * i as f64).exp())
        .map(|s| profile.eval(s) / s)
        .fold(at_t, f64::min)
}

/// `w_q(t)`: for `q > 1`, `((1/t) ∫_0^t (s/I(s))^{q/(q-1)} ds)^{(1-q)/q}`; for
/// `q = 1`, `inf_{0<s<t} I(s)/s`.
pub fn weight_wq(profile: &ProfileSpec, q: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("w_q needs t in (0,1), got {t}"));
    }
    if !(q >= 1.0) {
        return domain(format!("w_q needs q >= 1, got {q}"));
    }
    if q == 1.0 {
        return Ok(weight_w1(profile, t));
    }
    let conj = q / (q - 1.0);
    let integral = integrate_from_zero(|s| (s / profile.eval(s)).powf(conj), t, REL_TOL)?;
    finite_weight((integral / t).powf(-1.0 / conj), t)
}

fn finite_weight(w: f64, t: f64) -> Result<f64> {
    if w.is_finite() && w > 0.0 {
        Ok(w)
    } else {
        overflow(format!("w_q is not finite and positive at t = {t}"))
    }
}

/// `w_q` tabulated through the cumulative integral `∫_0^t (s/I)^{q/(q-1)}` on
/// fixed nodes; evaluations integrate only from the nearest node.
#[derive(Debug, Clone)]
pub struct WeightCurve {
    pub profile: ProfileSpec,
    pub q: f64,
    nodes: Vec<f64>,
    cum: Vec<f64>,
}

impl WeightCurve {
    pub fn new(profile: &ProfileSpec, q: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return domain(format!("w_q needs q >= 1, got {q}"));
        }
        let mut curve = Self { profile: profile.clone(), q, nodes: Vec::new(), cum: Vec::new() };
        if q == 1.0 {
            return Ok(curve);
        }
        let mut nodes: Vec<f64> = (0..=160).map(|i| 1e-8 * (0.5e8f64).powf(i as f64 / 160.0)).collect();
        nodes.extend((1..=80).map(|i| 1.0 - 0.5 * 1e-8f64.powf(i as f64 / 80.0)));
        let conj = q / (q - 1.0);
        let integrand = |s: f64| (s / profile.eval(s)).powf(conj);
        let pieces = crate::par::map_range(nodes.len() - 1, |j| integrate(integrand, nodes[j], nodes[j + 1], REL_TOL, 0.0));
        let mut acc = integrate_from_zero(integrand, nodes[0], REL_TOL)?;
        let mut cum = vec![acc];
        for p in pieces {
            acc += p?;
            cum.push(acc);
        }
        curve.nodes = nodes;
        curve.cum = cum;
        Ok(curve)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return domain(format!("w_q needs t in (0,1), got {t}"));
        }
        if self.q == 1.0 {
            return Ok(weight_w1(&self.profile, t));
        }
        let j = self.nodes.partition_point(|&n| n <= t);
        if j == 0 {
            return weight_wq(&self.profile, self.q, t);
        }
        let conj = self.q / (self.q - 1.0);
        let tail = integrate(|s| (s / self.profile.eval(s)).powf(conj), self.nodes[j - 1], t, REL_TOL, 0.0)?;
        finite_weight(((self.cum[j - 1] + tail) / t).powf(-1.0 / conj), t)
    }

    /// Rows `(t, w_q(t))`.
    pub fn table(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter().map(|&t| self.eval(t).map(|w| (t, w))).collect()
    }
}

/// Integrates `kernel` against the step function `g` over `[t, end)`.
fn step_integral(g: &MonotoneStep, t: f64, end: f64, kernel: impl Fn(f64) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for (k, (b, v)) in g.rows().enumerate() {
        let lo = g.segment_start(k).max(t);
        let hi = b.min(end);
        if hi > lo && v != 0.0 {
            acc += v * integrate(&kernel, lo, hi, REL_TOL, 0.0)?;
        }
    }
    if !acc.is_finite() {
        return overflow(format!("capacitary Hardy integral diverges at t = {t}"));
    }
    Ok(acc)
}

/// `Q_{w_q} g(t) = ∫_t^1 g(s) ds / (s w_q(s))`.
pub fn capacitary_hardy_qwq(weights: &WeightCurve, g: &MonotoneStep, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("Q_w needs t in (0,1), got {t}"));
    }
    step_integral(g, t, 1.0, |s| weights.eval(s).map_or(f64::INFINITY, |w| 1.0 / (s * w)))
}

/// `Q_{cap_1} g(t) = ∫_t^{1/2} g(s) ds / cap_1(s, 1/2)`.
pub fn capacitary_hardy_qcap1(profile: &ProfileSpec, g: &MonotoneStep, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 0.5) {
        return domain(format!("Q_cap1 needs t in (0,1/2), got {t}"));
    }
    step_integral(g, t, 0.5, |s| 1.0 / interval_inf(profile, s, 0.5))
}

/// Samples `t -> (f**(t) - f*(t)) weight(t)` at the midpoint of every step of
/// `fstar`, as a function on `(0, 1)` with Lebesgue weights.
pub(crate) fn weighted_oscillation_atoms(
    fstar: &MonotoneStep,
    weight: impl Fn(f64) -> Result<f64> + Sync,
) -> Result<Vec<(f64, f64)>> {
    let idx: Vec<usize> = (0..fstar.len()).filter(|&k| fstar.breakpoints()[k] <= 1.0).collect();
    crate::par::map(&idx, |&k| {
        let m = fstar.segment_mid(k);
        let len = fstar.breakpoints()[k] - fstar.segment_start(k);
        let osc = fstar.oscillation_at(m);
        if osc == 0.0 || m >= 1.0 {
            return Ok((0.0, len));
        }
        Ok((osc * weight(m)?, len))
    })
    .into_iter()
    .collect()
}

/// `‖(f** - f*)(t) w_q(t)‖` in `X` on `(0, 1)`.
pub fn capacitary_norm_lsq(space: &SpaceSpec, weights: &WeightCurve, f: &SampledFunction) -> Result<f64> {
    let fstar = decreasing_rearrangement(f);
    let atoms = weighted_oscillation_atoms(&fstar, |t| weights.eval(t))?;
    norm_of_rearrangement(space, &MonotoneStep::rearrange(atoms))
}

/// Outcome of a Muckenhoupt check on a grid and its refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuckenhouptCheck {
    pub q: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub constant: f64,
    pub refined_constant: f64,
    pub satisfied: bool,
}

/// The Muckenhoupt quantity for `ν(s) = cap_1(s, 1/2)/s` at `t`; its supremum
/// over `t` is the Muckenhoupt constant.
pub fn muckenhoupt_value(profile: &ProfileSpec, q: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 0.5) {
        return domain(format!("Muckenhoupt check needs t in (0,1/2), got {t}"));
    }
    let nu = |s: f64| interval_inf(profile, s, 0.5) / s;
    if q == 1.0 {
        let tail = integrate_log(|s| nu(s) / s, t, 0.5, REL_TOL)?;
        return Ok(tail / nu(t));
    }
    let conj = q / (q - 1.0);
    let outer = integrate_log(|s| (nu(s) / s).powf(q), t, 0.5, REL_TOL)?;
    let inner = integrate_from_zero(|s| nu(s).powf(-conj), t, REL_TOL)?;
    let v = outer.powf(1.0 / q) * inner.powf(1.0 / conj);
    if !v.is_finite() {
        return overflow(format!("Muckenhoupt product is not finite at t = {t}"));
    }
    Ok(v)
}

fn muckenhoupt_sup(profile: &ProfileSpec, q: f64, grid: &LogGrid) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let pts: Vec<f64> = grid.points().into_iter().filter(|&t| t < 0.5).collect();
    let values = crate::par::map(&pts, |&t| muckenhoupt_value(profile, q, t)).into_iter().collect::<Result<Vec<_>>>()?;
    let sup = values.iter().copied().fold(0.0, f64::max);
    Ok((pts, values, sup))
}

/// Relative growth of the supremum under refinement still counted as bounded.
/// The refinement squares the grid floor, so a logarithmic divergence roughly
/// doubles the supremum while bounded cases move by a few percent.
pub const MUCKENHOUPT_GROWTH: f64 = 0.25;

/// Evaluates the Muckenhoupt condition on `grid` and on its refinement; it is
/// satisfied when the supremum is finite and grows by at most
/// [`MUCKENHOUPT_GROWTH`].
pub fn muckenhoupt_check(profile: &ProfileSpec, q: f64, grid: &LogGrid) -> Result<MuckenhouptCheck> {
    if !(q >= 1.0) {
        return domain(format!("Muckenhoupt check needs q >= 1, got {q}"));
    }
    let (pts, values, constant) = muckenhoupt_sup(profile, q, grid)?;
    let (_, _, refined_constant) = muckenhoupt_sup(profile, q, &grid.refined())?;
    let satisfied = constant.is_finite() && constant > 0.0 && refined_constant <= constant * (1.0 + MUCKENHOUPT_GROWTH);
    Ok(MuckenhouptCheck { q, grid: pts, values, constant, refined_constant, satisfied })
}

/// `inf_{t in grid ∪ {1/2}} cap_1(t, 1/2)/t` on a grid and its refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheegerCheck {
    pub constant: f64,
    pub refined_constant: f64,
    pub holds: bool,
}

pub fn cheeger_check(profile: &ProfileSpec, grid: &LogGrid) -> CheegerCheck {
    let inf_on = |g: &LogGrid| {
        g.points()
            .into_iter()
            .chain(std::iter::once(0.5))
            .filter(|&t| t <= 0.5)
            .map(|t| interval_inf(profile, t, 0.5) / t)
            .fold(f64::INFINITY, f64::min)
    };
    let constant = inf_on(grid);
    let refined_constant = inf_on(&grid.refined());
    let holds = constant > 0.0 && constant.is_finite() && refined_constant >= 0.95 * constant;
    CheegerCheck { constant, refined_constant, holds }
}
