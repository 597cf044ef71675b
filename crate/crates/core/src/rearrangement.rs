//! Distribution functions, decreasing rearrangements, maximal functions and
//! oscillations of sampled functions.
//!
//! A rearrangement is kept as an exact step function over the atom partition,
//! so `f**`, Hardy-Littlewood suprema and every integral of `f*` are finite sums.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measure_space::SampledFunction;

/// Right-continuous non-increasing step function on `[0, last breakpoint)`,
/// zero afterwards.
///
/// On `[b[k-1], b[k])` (with `b[-1] = 0`) the function equals `values[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneStep {
    breaks: Vec<f64>,
    values: Vec<f64>,
    /// `cum[k] = integral over [0, b[k])`.
    #[serde(skip)]
    cum: Vec<f64>,
}

impl MonotoneStep {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() {
            return Err(Error::Invalid("breakpoints and values differ in length".into()));
        }
        if breaks.first().is_some_and(|&b| !(b > 0.0)) || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("breakpoints must be positive and strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("step values must be finite and non-increasing".into()));
        }
        Ok(Self::from_parts(breaks, values))
    }

    fn from_parts(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(breaks.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (b, v) in breaks.iter().zip(&values) {
            acc += v * (b - prev);
            cum.push(acc);
            prev = *b;
        }
        Self { breaks, values, cum }
    }

    /// Decreasing rearrangement of `(value, mass)` pairs on `(0, total mass)`.
    ///
    /// Values are taken in absolute value, equal values are merged. When the
    /// masses add up to 1 (within 1e-9) the last breakpoint is set to exactly 1.
    pub fn rearrange(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().map(|(v, w)| (v.abs(), w)).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut breaks: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for (v, w) in pairs {
            acc += w;
            if values.last() == Some(&v) {
                *breaks.last_mut().unwrap() = acc;
            } else {
                values.push(v);
                breaks.push(acc);
            }
        }
        if let Some(last) = breaks.last_mut() {
            if (*last - 1.0).abs() < 1e-9 {
                *last = 1.0;
            }
        }
        Self::from_parts(breaks, values)
    }

    /// Constant `c >= 0` on `(0, 1)`.
    pub fn constant(c: f64) -> Self {
        Self::from_parts(vec![1.0], vec![c.abs()])
    }

    /// Indicator of `(0, a)` for `0 < a <= 1`.
    pub fn indicator(a: f64) -> Self {
        if a >= 1.0 {
            Self::constant(1.0)
        } else {
            Self::from_parts(vec![a, 1.0], vec![1.0, 0.0])
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.breaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breaks.is_empty()
    }

    /// End of the support.
    pub fn support_end(&self) -> f64 {
        self.breaks.last().copied().unwrap_or(0.0)
    }

    /// Index of the segment `[b[k-1], b[k])` containing `t`, if any.
    pub fn segment(&self, t: f64) -> Option<usize> {
        let k = self.breaks.partition_point(|&b| b <= t);
        (k < self.breaks.len()).then_some(k)
    }

    /// Left end of segment `k`.
    pub fn segment_start(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.breaks[k - 1]
        }
    }

    pub fn segment_mid(&self, k: usize) -> f64 {
        0.5 * (self.segment_start(k) + self.breaks[k])
    }

    /// Value at `t >= 0` (right-continuous).
    pub fn eval(&self, t: f64) -> f64 {
        self.segment(t).map_or(0.0, |k| self.values[k])
    }

    /// `integral over [0, t]` of the step function.
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.segment(t) {
            Some(k) => {
                let before = if k == 0 { 0.0 } else { self.cum[k - 1] };
                before + self.values[k] * (t - self.segment_start(k))
            }
            None => self.cum.last().copied().unwrap_or(0.0),
        }
    }

    pub fn total_integral(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// `integral of g(value) over the support`, exact for step functions.
    pub fn integral_of(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (b, v) in self.breaks.iter().zip(&self.values) {
            acc += g(*v) * (b - prev);
            prev = *b;
        }
        acc
    }

    /// The running average `(1/t) integral_0^t`.
    pub fn average(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return domain(format!("maximal function needs t in (0,1], got {t}"));
        }
        Ok(self.integral_to(t) / t)
    }

    /// `f**(t) - f*(t)`, evaluated in the closed form `D_k / t` on the segment
    /// containing `t` (no cancellation between the two terms).
    pub fn oscillation_at(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(k) => {
                let start = self.segment_start(k);
                let before = if k == 0 { 0.0 } else { self.cum[k - 1] };
                ((before - self.values[k] * start) / t).max(0.0)
            }
            None => self.total_integral() / t,
        }
    }

    /// Moves `t` to the midpoint of the segment containing it, so that grid
    /// evaluations stay away from jump points.
    pub fn snap(&self, t: f64) -> f64 {
        self.segment(t).map_or(t, |k| self.segment_mid(k))
    }

    /// Piecewise-linear interpolant through the segment midpoints, constant
    /// before the first and after the last midpoint.
    pub fn linear_surrogate(&self) -> PiecewiseLinear {
        let xs: Vec<f64> = (0..self.len()).map(|k| self.segment_mid(k)).collect();
        let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(xs.len() + 2);
        nodes.push((0.0, self.values.first().copied().unwrap_or(0.0)));
        for (x, v) in xs.iter().zip(&self.values) {
            nodes.push((*x, *v));
        }
        nodes.push((self.support_end(), self.values.last().copied().unwrap_or(0.0)));
        nodes.dedup_by(|b, a| b.0 <= a.0);
        PiecewiseLinear { nodes }
    }

    /// Applies a non-decreasing map `g` with `g(0) >= 0` to the values.
    pub fn map_values(&self, g: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.breaks.clone(), self.values.iter().map(|&v| g(v)).collect())
    }

    /// Dilation `t -> self(t / s)`, cut at 1.
    pub fn dilate(&self, s: f64) -> Self {
        let mut breaks = Vec::with_capacity(self.len());
        let mut values = Vec::with_capacity(self.len());
        for (b, v) in self.rows() {
            let nb = (b * s).min(1.0);
            if breaks.last().is_some_and(|&l: &f64| nb <= l) {
                break;
            }
            breaks.push(nb);
            values.push(v);
        }
        Self::from_parts(breaks, values)
    }

    /// Rows `(breakpoint, value)` for CSV output.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breaks.iter().copied().zip(self.values.iter().copied())
    }
}

/// Continuous piecewise-linear function through increasing nodes, constant
/// outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    nodes: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(mut nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Invalid("piecewise-linear function needs a node".into()));
        }
        if nodes.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Invalid("nodes must be strictly increasing".into()));
        }
        nodes.shrink_to_fit();
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = &self.nodes;
        let k = n.partition_point(|p| p.0 <= x);
        if k == 0 {
            return n[0].1;
        }
        if k == n.len() {
            return n[k - 1].1;
        }
        let (x0, y0) = n[k - 1];
        let (x1, y1) = n[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Slopes of the linear pieces, one per pair of adjacent nodes.
    pub fn slopes(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect()
    }

    /// `integral over [0, t]`, nodes assumed to start at 0.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for w in self.nodes.windows(2) {
            let (x0, y0) = w[0];
            if x0 >= t {
                break;
            }
            let x1 = w[1].0.min(t);
            let y1 = self.eval(x1);
            acc += 0.5 * (y0 + y1) * (x1 - x0);
        }
        acc
    }

    /// `(1/t) integral_0^t s (-f')(s) ds`, exact for linear pieces.
    pub fn fubini_oscillation(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (w, slope) in self.nodes.windows(2).zip(self.slopes()) {
            let x0 = w[0].0;
            if x0 >= t {
                break;
            }
            let x1 = w[1].0.min(t);
            acc += -slope * 0.5 * (x1 * x1 - x0 * x0);
        }
        acc / t
    }
}

/// `t -> mu{|f| > t}` as a step function in the level variable.
pub fn distribution(f: &SampledFunction) -> MonotoneStep {
    // mu{|f| > u} is the partial mass of the strictly larger levels; summing from
    // the top keeps it bit-identical to the breakpoints of f*
    let fstar = decreasing_rearrangement(f);
    let mut breaks = Vec::with_capacity(fstar.len());
    let mut values = Vec::with_capacity(fstar.len());
    for k in (0..fstar.len()).rev() {
        let u = fstar.values[k];
        if u > 0.0 {
            breaks.push(u);
            values.push(fstar.breaks[k]);
        }
    }
    MonotoneStep::from_parts(breaks, values)
}

/// `f*`, exact on the atom partition.
pub fn decreasing_rearrangement(f: &SampledFunction) -> MonotoneStep {
    MonotoneStep::rearrange(f.atoms().iter().map(|a| (a.value, a.weight)))
}

/// Exact decreasing rearrangement of the piecewise-linear interpolant of `f`
/// along the mass coordinate, for models whose atoms are spatially ordered.
///
/// The atoms sit at the mass midpoints of their cells; between neighbours `f`
/// is linear (split at sign changes), and the end half-cells are flat. The
/// distribution function of that interpolant is piecewise linear in the level,
/// so `f*` comes out piecewise linear with a node at every sampled level.
/// Unlike the linear surrogate of the step `f*`, neighbouring pieces never come
/// from interleaved branches, which keeps the slopes smooth.
pub fn interpolated_rearrangement(f: &SampledFunction) -> Option<PiecewiseLinear> {
    if !f.space().is_ordered_line() || f.len() < 2 {
        return None;
    }
    let atoms = f.atoms();
    // sloped cells (lo, hi, mass) and flat cells (level, mass)
    let mut sloped: Vec<(f64, f64, f64)> = Vec::with_capacity(atoms.len() + 8);
    let mut flat: Vec<(f64, f64)> = Vec::new();
    let mut push = |a: f64, b: f64, mass: f64| {
        if mass <= 0.0 {
            return;
        }
        if a == b {
            flat.push((a, mass));
        } else {
            sloped.push((a.min(b), a.max(b), mass));
        }
    };
    let first = &atoms[0];
    push(first.value.abs(), first.value.abs(), 0.5 * first.weight);
    for w in atoms.windows(2) {
        let (a, b) = (w[0].value, w[1].value);
        let mass = 0.5 * (w[0].weight + w[1].weight);
        if a * b < 0.0 {
            let cut = a.abs() / (a.abs() + b.abs());
            push(a.abs(), 0.0, mass * cut);
            push(0.0, b.abs(), mass * (1.0 - cut));
        } else {
            push(a.abs(), b.abs(), mass);
        }
    }
    let last = atoms.last().unwrap();
    push(last.value.abs(), last.value.abs(), 0.5 * last.weight);

    let mut levels: Vec<f64> = sloped.iter().flat_map(|c| [c.0, c.1]).chain(flat.iter().map(|c| c.0)).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut by_top = sloped.clone();
    by_top.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut by_bottom = sloped;
    by_bottom.sort_by(|a, b| b.0.total_cmp(&a.0));
    flat.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (mut top, mut bottom, mut plateau) = (0, 0, 0);
    let mut density = 0.0;
    let mut s = 0.0;
    let mut nodes: Vec<(f64, f64)> = vec![(0.0, levels[0])];
    let node = |nodes: &mut Vec<(f64, f64)>, s: f64, u: f64| {
        if s > nodes.last().unwrap().0 {
            nodes.push((s, u));
        }
    };
    for (j, &u) in levels.iter().enumerate() {
        if j > 0 {
            s += density * (levels[j - 1] - u);
            node(&mut nodes, s, u);
        }
        while plateau < flat.len() && flat[plateau].0 >= u {
            s += flat[plateau].1;
            plateau += 1;
        }
        node(&mut nodes, s, u);
        while top < by_top.len() && by_top[top].1 >= u {
            let c = by_top[top];
            density += c.2 / (c.1 - c.0);
            top += 1;
        }
        while bottom < by_bottom.len() && by_bottom[bottom].0 >= u {
            let c = by_bottom[bottom];
            density -= c.2 / (c.1 - c.0);
            bottom += 1;
        }
    }
    // same clamp as the step rearrangement: the running sums land within rounding of 1
    if let Some(end) = nodes.last_mut() {
        if (end.0 - 1.0).abs() <= 1e-9 {
            end.0 = 1.0;
        }
    }
    PiecewiseLinear::new(nodes).ok()
}

/// `|grad f|*`.
pub fn gradient_rearrangement(f: &SampledFunction) -> MonotoneStep {
    MonotoneStep::rearrange(f.atoms().iter().map(|a| (a.grad, a.weight)))
}

/// `f**(t)` for `t` in `(0, 1]`.
pub fn maximal_function(fstar: &MonotoneStep, t: f64) -> Result<f64> {
    fstar.average(t)
}

/// `sup { integral_E |f| : mu(E) <= t }`, realized greedily by the largest atoms.
pub fn hardy_littlewood_sup(f: &SampledFunction, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return domain(format!("hardy-littlewood supremum needs t in (0,1], got {t}"));
    }
    Ok(decreasing_rearrangement(f).integral_to(t))
}

/// `f**(t) - f*(t)` for `t` in `(0, 1)`.
pub fn oscillation(f: &SampledFunction, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("oscillation needs t in (0,1), got {t}"));
    }
    Ok(decreasing_rearrangement(f).oscillation_at(t))
}
