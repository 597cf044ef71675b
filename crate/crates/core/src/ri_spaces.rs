//! Rearrangement-invariant norms evaluated through exact rearrangements:
//! `L^p`, Lorentz `Λ(φ)` and `Λ_q(φ)`, Marcinkiewicz `M(φ)`, q-convexifications,
//! Hardy operators, dilations and Boyd index estimates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, overflow, Error, Result};
use crate::measure_space::SampledFunction;
use crate::rearrangement::{decreasing_rearrangement, MonotoneStep};

/// A concave increasing function `φ` on `[0, 1]` with `φ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phi {
    /// `t^{1/2}`.
    Sqrt,
    /// `t`.
    Identity,
    /// `t^a`, `0 < a <= 1`.
    Power(f64),
    /// `t log(e/t)^b`, `0 <= b <= 1`.
    TLog(f64),
}

impl Phi {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Phi::Sqrt => t.sqrt(),
            Phi::Identity => t,
            Phi::Power(a) => t.powf(a),
            Phi::TLog(b) => t * (1.0 - t.ln()).powf(b),
        }
    }

    /// Exponent `a` when `φ(t) = t^a`.
    pub fn power_exponent(&self) -> Option<f64> {
        match *self {
            Phi::Sqrt => Some(0.5),
            Phi::Identity => Some(1.0),
            Phi::Power(a) => Some(a),
            Phi::TLog(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Phi::Power(a) if !(a > 0.0 && a <= 1.0) => {
                Err(Error::Invalid(format!("power fundamental function needs 0 < a <= 1, got {a}")))
            }
            Phi::TLog(b) if !(0.0..=1.0).contains(&b) => {
                Err(Error::Invalid(format!("tlog fundamental function needs 0 <= b <= 1, got {b}")))
            }
            _ => Ok(()),
        }
    }

    /// Quasi-concavity on a grid: `φ` non-decreasing and `φ(t)/t` non-increasing.
    pub fn check_on_grid(&self, grid: &[f64]) -> Result<()> {
        for w in grid.windows(2) {
            let (a, b) = (self.eval(w[0]), self.eval(w[1]));
            if b < a - 1e-12 || b / w[1] > a / w[0] * (1.0 + 1e-12) {
                return Err(Error::Invalid(format!("{self} is not quasi-concave near t = {}", w[0])));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Sqrt => write!(f, "sqrt"),
            Phi::Identity => write!(f, "id"),
            Phi::Power(a) => write!(f, "power:{a}"),
            Phi::TLog(b) if *b == 0.5 => write!(f, "tlog"),
            Phi::TLog(b) => write!(f, "tlog:{b}"),
        }
    }
}

impl FromStr for Phi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Invalid(format!("bad number in `{s}`")));
        let phi = match s.split_once(':') {
            None => match s {
                "sqrt" => Phi::Sqrt,
                "id" => Phi::Identity,
                "tlog" => Phi::TLog(0.5),
                _ => return Err(Error::Invalid(format!("unknown fundamental function `{s}`"))),
            },
            Some(("power", a)) => Phi::Power(num(a)?),
            Some(("tlog", b)) => Phi::TLog(num(b)?),
            _ => return Err(Error::Invalid(format!("unknown fundamental function `{s}`"))),
        };
        phi.validate()?;
        Ok(phi)
    }
}

/// Descriptor of a rearrangement-invariant norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SpaceSpec {
    /// `L^p`, `p` in `[1, ∞]`.
    Lp(f64),
    Lorentz(Phi),
    LorentzQ(Phi, f64),
    Marcinkiewicz(Phi),
    Convexified(Box<SpaceSpec>, f64),
}

impl SpaceSpec {
    pub fn convexified(base: SpaceSpec, q: f64) -> Self {
        SpaceSpec::Convexified(Box::new(base), q)
    }

    pub fn validate(&self) -> Result<()> {
        let exponent = |e: f64, what: &str| {
            if e >= 1.0 {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{what} must be >= 1, got {e}")))
            }
        };
        match self {
            SpaceSpec::Lp(p) => exponent(*p, "p"),
            SpaceSpec::Lorentz(phi) | SpaceSpec::Marcinkiewicz(phi) => phi.validate(),
            SpaceSpec::LorentzQ(phi, q) => {
                phi.validate()?;
                exponent(*q, "q")
            }
            SpaceSpec::Convexified(base, q) => {
                base.validate()?;
                exponent(*q, "q")
            }
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Lp(p) if p.is_infinite() => write!(f, "lp:inf"),
            SpaceSpec::Lp(p) => write!(f, "lp:{p}"),
            SpaceSpec::Lorentz(phi) => write!(f, "lorentz:phi={phi}"),
            SpaceSpec::LorentzQ(phi, q) => write!(f, "lorentzq:phi={phi},q={q}"),
            SpaceSpec::Marcinkiewicz(phi) => write!(f, "marcinkiewicz:phi={phi}"),
            SpaceSpec::Convexified(base, q) => write!(f, "convex:base={base},q={q}"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    /// Parses the canonical text form, e.g. `lp:2`, `lorentzq:phi=sqrt,q=2`,
    /// `convex:base=lp:1,q=2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Invalid(format!("bad space `{s}`: {why}"));
        let num = |v: &str| -> Result<f64> {
            match v {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => v.parse::<f64>().map_err(|_| bad("expected a number")),
            }
        };
        let (kind, args) = s.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let spec = match kind {
            "lp" => SpaceSpec::Lp(num(args)?),
            "lorentz" | "marcinkiewicz" => {
                let phi = args.strip_prefix("phi=").ok_or_else(|| bad("expected phi="))?.parse()?;
                if kind == "lorentz" {
                    SpaceSpec::Lorentz(phi)
                } else {
                    SpaceSpec::Marcinkiewicz(phi)
                }
            }
            "lorentzq" => {
                let (phi, q) = args.split_once(",q=").ok_or_else(|| bad("expected phi=..,q=.."))?;
                let phi = phi.strip_prefix("phi=").ok_or_else(|| bad("expected phi="))?.parse()?;
                SpaceSpec::LorentzQ(phi, num(q)?)
            }
            "convex" => {
                let (base, q) = args.rsplit_once(",q=").ok_or_else(|| bad("expected base=..,q=.."))?;
                let base = base.strip_prefix("base=").ok_or_else(|| bad("expected base="))?.parse()?;
                SpaceSpec::convexified(base, num(q)?)
            }
            _ => return Err(bad("unknown kind")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for SpaceSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SpaceSpec> for String {
    fn from(s: SpaceSpec) -> String {
        s.to_string()
    }
}

/// The norm of `f` in the space described by `spec`.
pub fn norm(spec: &SpaceSpec, f: &SampledFunction) -> Result<f64> {
    norm_of_rearrangement(spec, &decreasing_rearrangement(f))
}

/// The norm of any function whose decreasing rearrangement is `fstar`.
///
/// With `v_k` the step values (followed by 0) and `W_k` the breakpoints,
/// `Λ(φ) = Σ (v_k - v_{k+1}) φ(W_k)` and `Λ_q(φ)^q = Σ (v_k^q - v_{k+1}^q) φ(W_k)`,
/// both exact.
pub fn norm_of_rearrangement(spec: &SpaceSpec, fstar: &MonotoneStep) -> Result<f64> {
    let value = match spec {
        SpaceSpec::Lp(p) if p.is_infinite() => fstar.values().first().copied().unwrap_or(0.0),
        SpaceSpec::Lp(p) => {
            let p = *p;
            let s = fstar.integral_of(|v| v.powf(p));
            if p == 1.0 {
                s
            } else {
                s.powf(1.0 / p)
            }
        }
        SpaceSpec::Lorentz(phi) => level_sum(fstar, phi, 1.0),
        SpaceSpec::LorentzQ(phi, q) => level_sum(fstar, phi, *q).powf(1.0 / q),
        SpaceSpec::Marcinkiewicz(phi) => {
            fstar.rows().fold(0.0, |m: f64, (w, v)| m.max(v * phi.eval(w)))
        }
        SpaceSpec::Convexified(base, q) => {
            if *q == 1.0 {
                norm_of_rearrangement(base, fstar)?
            } else {
                let q = *q;
                norm_of_rearrangement(base, &fstar.map_values(|v| v.powf(q)))?.powf(1.0 / q)
            }
        }
    };
    if !value.is_finite() {
        return overflow(format!("{spec} norm is not finite"));
    }
    Ok(value)
}

fn level_sum(fstar: &MonotoneStep, phi: &Phi, q: f64) -> f64 {
    let vals = fstar.values();
    let pow = |v: f64| if q == 1.0 { v } else { v.powf(q) };
    fstar
        .rows()
        .enumerate()
        .map(|(k, (w, v))| {
            let next = vals.get(k + 1).map_or(0.0, |&n| pow(n));
            (pow(v) - next) * phi.eval(w)
        })
        .sum()
}

/// `sup_t t^a f**(t)` over `(0, 1]`, solved exactly on each step segment.
///
/// On a segment starting at `s` with value `v` one has
/// `t f**(t) = A + v t` with `A = ∫_0^s f* - v s >= 0`, so the supremum of
/// `t^{a-1}(A + v t)` is attained at an endpoint or at `t = (1-a)A/(a v)`.
pub fn sup_power_weighted_average(fstar: &MonotoneStep, a: f64) -> f64 {
    let g = |t: f64| t.powf(a - 1.0) * fstar.integral_to(t);
    let mut best: f64 = 0.0;
    let end = fstar.support_end().min(1.0);
    for (k, (b, v)) in fstar.rows().enumerate() {
        let start = fstar.segment_start(k);
        if start >= end {
            break;
        }
        let b = b.min(end);
        best = best.max(g(b));
        if start > 0.0 {
            best = best.max(g(start));
        }
        let offset = fstar.integral_to(start) - v * start;
        if a < 1.0 && v > 0.0 {
            let crit = (1.0 - a) * offset / (a * v);
            if crit > start && crit < b {
                best = best.max(g(crit));
            }
        }
    }
    if end < 1.0 {
        // past the support t f**(t) is constant
        best = best.max(g(1.0));
    }
    best
}

/// The Marcinkiewicz norm in its maximal form `sup_t φ(t) f**(t)` for power `φ`.
pub fn marcinkiewicz_maximal_norm(phi: &Phi, f: &SampledFunction) -> Result<f64> {
    let a = phi
        .power_exponent()
        .ok_or_else(|| Error::Invalid(format!("maximal Marcinkiewicz form needs a power φ, got {phi}")))?;
    Ok(sup_power_weighted_average(&decreasing_rearrangement(f), a))
}

/// `φ_X(t)`: the norm of an indicator of measure `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalFunction {
    spec: SpaceSpec,
}

impl FundamentalFunction {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        norm_of_rearrangement(&self.spec, &MonotoneStep::indicator(t.min(1.0))).unwrap_or(f64::INFINITY)
    }

    /// `φ(0) = 0` and monotonicity on the grid.
    pub fn check_on_grid(&self, grid: &[f64]) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::Invalid("fundamental function does not vanish at 0".into()));
        }
        for w in grid.windows(2) {
            if self.eval(w[1]) < self.eval(w[0]) - 1e-12 {
                return Err(Error::Invalid(format!("fundamental function decreases near {}", w[0])));
            }
        }
        Ok(())
    }
}

pub fn fundamental_function(spec: &SpaceSpec) -> FundamentalFunction {
    FundamentalFunction { spec: spec.clone() }
}

/// Averaging operator `P g(t) = (1/t) ∫_0^t g`.
pub fn hardy_p(g: &MonotoneStep, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("hardy operator needs t in (0,1), got {t}"));
    }
    Ok(g.integral_to(t) / t)
}

/// `Q_a g(t) = ∫_t^1 s^a g(s) ds / s`, exact on steps.
pub fn hardy_q(g: &MonotoneStep, t: f64, a: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("hardy operator needs t in (0,1), got {t}"));
    }
    if a < 0.0 {
        return domain(format!("Q_a needs a >= 0, got {a}"));
    }
    let kernel = |lo: f64, hi: f64| if a == 0.0 { (hi / lo).ln() } else { (hi.powf(a) - lo.powf(a)) / a };
    let mut acc = 0.0;
    for (k, (b, v)) in g.rows().enumerate() {
        let lo = g.segment_start(k).max(t);
        let hi = b.min(1.0);
        if hi > lo {
            acc += v * kernel(lo, hi);
        }
    }
    if !acc.is_finite() {
        return overflow(format!("Q_{a} integral diverges at t = {t}"));
    }
    Ok(acc)
}

/// Dilation factors for the Boyd index grid: `2^{k/2}` for `k = -12..=12`, `k != 0`.
pub fn dilation_grid() -> Vec<f64> {
    (-12..=12).filter(|&k| k != 0).map(|k| 2f64.powf(k as f64 / 2.0)).collect()
}

fn extremal_family() -> Vec<MonotoneStep> {
    let us: Vec<f64> = (0..64).map(|i| 1e-3 * 1e3f64.powf(i as f64 / 63.0)).collect();
    let mut family: Vec<MonotoneStep> = us.iter().map(|&u| MonotoneStep::indicator(u)).collect();
    for &theta in &[0.25, 0.5, 0.75] {
        for &u in us.iter().step_by(8) {
            // s^{-θ} on (0, u), on 48 geometric cells down to 1e-6 u
            let cells = 48;
            let ratio = 1e-6f64.powf(1.0 / cells as f64);
            let mut breaks: Vec<f64> = (0..=cells).rev().map(|j| u * ratio.powi(j)).collect();
            breaks.dedup();
            let mut values: Vec<f64> = breaks.iter().map(|b| b.powf(-theta)).collect();
            breaks.push(1.0);
            values.push(0.0);
            if u >= 1.0 {
                breaks.pop();
                values.pop();
            }
            if let Ok(step) = MonotoneStep::new(breaks, values) {
                family.push(step);
            }
        }
    }
    family
}

/// Lower estimate of `‖E_s‖` on the space, where `E_s f(t) = f(t/s)`, taken
/// over indicators and truncated powers.
pub fn dilation_norm(spec: &SpaceSpec, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return domain(format!("dilation needs s > 0, got {s}"));
    }
    if s == 1.0 {
        return Ok(1.0);
    }
    let mut best: f64 = 0.0;
    for g in extremal_family() {
        let base = norm_of_rearrangement(spec, &g)?;
        if base > 0.0 {
            best = best.max(norm_of_rearrangement(spec, &g.dilate(s))? / base);
        }
    }
    Ok(best)
}

/// Estimated Boyd indices `(lower, upper)` from the dilation grid.
pub fn boyd_indices(spec: &SpaceSpec) -> Result<(f64, f64)> {
    let grid = dilation_grid();
    let norms = crate::par::map(&grid, |&s| dilation_norm(spec, s));
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for (s, h) in grid.iter().zip(norms) {
        let index = h?.ln() / s.ln();
        if *s < 1.0 {
            lower = lower.max(index);
        } else {
            upper = upper.min(index);
        }
    }
    Ok((lower, upper))
}

/// Grid proxy for q-concavity: midpoint concavity of `φ^q`.
pub fn phi_power_concave(phi: &Phi, q: f64, grid: &[f64]) -> bool {
    grid.windows(2).all(|w| {
        let m = 0.5 * (w[0] + w[1]);
        phi.eval(m).powf(q) >= 0.5 * (phi.eval(w[0]).powf(q) + phi.eval(w[1]).powf(q)) - 1e-12
    })
}
