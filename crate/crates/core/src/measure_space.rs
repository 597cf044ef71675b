//! Model metric probability spaces, their isoperimetric profiles, and sampled
//! Lipschitz test functions carrying analytic gradient moduli.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::expr::{Expr, Point};

/// Standard normal density, distribution function and quantile.
pub mod normal {
    use super::*;

    pub fn pdf(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    pub fn cdf(x: f64) -> f64 {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }

    /// Inverse of [`cdf`]; a Newton step against `erfc` brings the statrs
    /// inverse to about 1e-14 relative accuracy in the tails.
    pub fn quantile(p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p > 0.5 {
            return -quantile(1.0 - p);
        }
        let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
        let d = pdf(x);
        if d > 0.0 {
            x -= (cdf(x) - p) / d;
        }
        x
    }
}

/// Kind of a model space. Every model carries total mass 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpace {
    /// Standard Gaussian measure on the line.
    Gaussian1d,
    /// Standard Gaussian measure on the plane.
    Gaussian2d,
    /// Unit ball of `R^n` with normalized Lebesgue measure.
    EuclideanBall { n: usize },
    /// `(0, 1)` with Lebesgue measure.
    UnitInterval,
    /// Finitely many atoms; coordinates are the atom indices.
    DiscreteAtoms { weights: Vec<f64> },
}

impl ModelSpace {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpace::EuclideanBall { n } if *n < 2 => {
                Err(Error::Invalid(format!("euclidean ball needs n >= 2, got {n}")))
            }
            ModelSpace::DiscreteAtoms { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                    return Err(Error::Invalid("discrete atoms need >= 1 atom with positive weights".into()));
                }
                check_total_mass(weights.iter().copied(), weights.len())
            }
            _ => Ok(()),
        }
    }

    /// Models whose quadrature atoms are stored in spatial order along one
    /// coordinate (the line models and radial balls).
    pub fn is_ordered_line(&self) -> bool {
        matches!(self, ModelSpace::Gaussian1d | ModelSpace::UnitInterval | ModelSpace::EuclideanBall { .. })
    }

    pub fn name(&self) -> String {
        match self {
            ModelSpace::Gaussian1d => "gaussian1d".into(),
            ModelSpace::Gaussian2d => "gaussian2d".into(),
            ModelSpace::EuclideanBall { n } => format!("euclidean_ball({n})"),
            ModelSpace::UnitInterval => "unit_interval".into(),
            ModelSpace::DiscreteAtoms { weights } => format!("discrete_atoms({})", weights.len()),
        }
    }
}

fn check_total_mass(weights: impl Iterator<Item = f64>, n: usize) -> Result<()> {
    let total: f64 = weights.sum();
    // 1e-12 plus the rounding allowance of an n-term sum
    let tol = 1e-12 + n as f64 * f64::EPSILON;
    if (total - 1.0).abs() > tol {
        return Err(Error::Invalid(format!("total mass {total} differs from 1")));
    }
    Ok(())
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    (h * std::f64::consts::PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// Isoperimetric constant `tau_n = n * beta_n^{1/n}` of `R^n`.
pub fn euclidean_tau(n: usize) -> f64 {
    n as f64 * ball_volume(n).powf(1.0 / n as f64)
}

/// Evaluation mode of the Gaussian isoperimetric profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianMode {
    Exact,
    Asymptotic,
}

/// Gaussian isoperimetric profile `phi(Phi^{-1}(t))`, or its small-set
/// asymptotic `t sqrt(2 ln(1/t))` mirrored about 1/2.
pub fn gaussian_profile(t: f64, mode: GaussianMode) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("gaussian profile needs t in (0,1), got {t}"));
    }
    let s = t.min(1.0 - t);
    Ok(match mode {
        GaussianMode::Exact => normal::pdf(normal::quantile(s)),
        GaussianMode::Asymptotic => s * (2.0 * (1.0 / s).ln()).sqrt(),
    })
}

/// Euclidean isoperimetric profile `tau_n t^{1/n'}`.
pub fn euclidean_profile(n: usize, t: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("euclidean profile needs n >= 2, got {n}"));
    }
    if !(t >= 0.0) {
        return domain(format!("euclidean profile needs t >= 0, got {t}"));
    }
    let conj = n as f64 / (n as f64 - 1.0);
    Ok(euclidean_tau(n) * t.powf(1.0 / conj))
}

/// Structural flags of an isoperimetric profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ProfileFlags {
    pub concave: bool,
    pub symmetric_about_half: bool,
    pub vanishes_at_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Gaussian(GaussianMode),
    /// `I(t) = c`; the unit interval uses `c = 1`.
    Constant(f64),
    /// `I(t) = scale * t^exponent`.
    Power { scale: f64, exponent: f64 },
    Euclidean { n: usize },
    /// Profile given by an expression in `x` (standing for `t`).
    Expression(Expr),
}

/// A named isoperimetric profile `I` with evaluator and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub name: String,
    pub kind: ProfileKind,
    pub flags: ProfileFlags,
}

impl ProfileSpec {
    pub fn gaussian() -> Self {
        Self {
            name: "gaussian".into(),
            kind: ProfileKind::Gaussian(GaussianMode::Exact),
            flags: ProfileFlags { concave: true, symmetric_about_half: true, vanishes_at_zero: true },
        }
    }

    pub fn gaussian_asymptotic() -> Self {
        Self {
            name: "gaussian_asymptotic".into(),
            kind: ProfileKind::Gaussian(GaussianMode::Asymptotic),
            flags: ProfileFlags { concave: false, symmetric_about_half: true, vanishes_at_zero: true },
        }
    }

    /// `I = 1`, the profile used for the unit interval.
    pub fn unit_interval() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            name: if c == 1.0 { "unit".into() } else { format!("constant:{c}") },
            kind: ProfileKind::Constant(c),
            flags: ProfileFlags { concave: true, symmetric_about_half: true, vanishes_at_zero: false },
        }
    }

    pub fn power(scale: f64, exponent: f64) -> Self {
        let name = match (scale, exponent) {
            (s, e) if s == 1.0 && e == 0.5 => "sqrt".to_string(),
            (s, e) if s == 1.0 && e == 1.0 => "linear".to_string(),
            (s, e) if s == 1.0 => format!("power:{e}"),
            (s, e) => format!("power:{e}:{s}"),
        };
        Self {
            name,
            kind: ProfileKind::Power { scale, exponent },
            flags: ProfileFlags {
                concave: (0.0..=1.0).contains(&exponent),
                symmetric_about_half: exponent == 0.0,
                vanishes_at_zero: exponent > 0.0,
            },
        }
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("euclidean profile needs n >= 2, got {n}"));
        }
        Ok(Self {
            name: format!("euclidean:{n}"),
            kind: ProfileKind::Euclidean { n },
            flags: ProfileFlags { concave: true, symmetric_about_half: false, vanishes_at_zero: true },
        })
    }

    pub fn expression(expr: Expr, flags: ProfileFlags) -> Self {
        Self { name: format!("expr:{}", expr.source()), kind: ProfileKind::Expression(expr), flags }
    }

    /// `I(t)` for `t` in `(0, 1)`.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Gaussian(mode) => gaussian_profile(t, *mode).unwrap_or(0.0),
            ProfileKind::Constant(c) => *c,
            ProfileKind::Power { scale, exponent } => scale * t.powf(*exponent),
            ProfileKind::Euclidean { n } => euclidean_profile(*n, t).unwrap_or(f64::NAN),
            ProfileKind::Expression(e) => e.eval(&Point::line(t)),
        }
    }

    /// Checks the profile contract on interior grid points: positivity, and
    /// symmetry / midpoint concavity when flagged (1e-10).
    pub fn check_on_grid(&self, grid: &[f64]) -> Result<()> {
        for &t in grid {
            let v = self.eval(t);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("profile {} is not positive at t = {t}: {v}", self.name)));
            }
            if self.flags.symmetric_about_half && (v - self.eval(1.0 - t)).abs() > 1e-10 {
                return Err(Error::Invalid(format!("profile {} is not symmetric at t = {t}", self.name)));
            }
        }
        if self.flags.concave {
            for w in grid.windows(2) {
                let m = 0.5 * (w[0] + w[1]);
                let chord = 0.5 * (self.eval(w[0]) + self.eval(w[1]));
                if self.eval(m) < chord - 1e-10 {
                    return Err(Error::Invalid(format!("profile {} fails midpoint concavity near {m}", self.name)));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for ProfileSpec {
    type Err = Error;

    /// Accepts `gaussian`, `gaussian_asymptotic`, `unit`, `constant:c`, `sqrt`,
    /// `linear`, `power:a[:scale]`, `euclidean:n` and `expr:<expression in x>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("unknown profile `{s}`"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let (head, rest) = s.split_once(':').map_or((s, None), |(h, r)| (h, Some(r)));
        Ok(match (head, rest) {
            ("gaussian", None) => Self::gaussian(),
            ("gaussian_asymptotic", None) => Self::gaussian_asymptotic(),
            ("unit", None) => Self::unit_interval(),
            ("constant", Some(c)) => Self::constant(num(c)?),
            ("sqrt", None) => Self::power(1.0, 0.5),
            ("linear", None) => Self::power(1.0, 1.0),
            ("power", Some(r)) => match r.split_once(':') {
                Some((e, c)) => Self::power(num(c)?, num(e)?),
                None => Self::power(1.0, num(r)?),
            },
            ("euclidean", Some(n)) => Self::euclidean(n.parse().map_err(|_| bad())?)?,
            ("expr", Some(e)) => Self::expression(
                Expr::parse(e)?,
                ProfileFlags { concave: false, symmetric_about_half: false, vanishes_at_zero: true },
            ),
            _ => return Err(bad()),
        })
    }
}

/// One weighted sample of a function: value, mass and gradient modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub weight: f64,
    pub grad: f64,
}

impl Atom {
    pub fn new(value: f64, weight: f64, grad: f64) -> Self {
        Self { value, weight, grad }
    }
}

/// A function on a model space represented by weighted atoms of total mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    atoms: Vec<Atom>,
    space: ModelSpace,
}

impl SampledFunction {
    pub fn new(atoms: Vec<Atom>, space: ModelSpace) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Invalid("sampled function has no atoms".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::Invalid(format!("atom {i} has non-positive weight {}", a.weight)));
            }
            if !(a.grad >= 0.0) || !a.grad.is_finite() {
                return Err(Error::Invalid(format!("atom {i} has invalid gradient modulus {}", a.grad)));
            }
            if !a.value.is_finite() {
                return Err(Error::Invalid(format!("atom {i} has non-finite value")));
            }
        }
        check_total_mass(atoms.iter().map(|a| a.weight), atoms.len())?;
        Ok(Self { atoms, space })
    }

    /// A function on a discrete atom space from `(value, weight)` pairs (zero gradients).
    pub fn discrete(pairs: &[(f64, f64)]) -> Result<Self> {
        let atoms: Vec<Atom> = pairs.iter().map(|&(v, w)| Atom::new(v, w, 0.0)).collect();
        let space = ModelSpace::DiscreteAtoms { weights: pairs.iter().map(|p| p.1).collect() };
        Self::new(atoms, space)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Same atoms with values mapped by `f` (gradients kept).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let atoms = self.atoms.iter().map(|a| Atom { value: f(a.value), ..*a }).collect();
        Self { atoms, space: self.space.clone() }
    }

    /// `|f|^p` with the gradient modulus of `|f|^p` by the chain rule.
    pub fn abs_pow(&self, p: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let v = a.value.abs();
                let g = if p == 1.0 { a.grad } else if v > 0.0 { p * v.powf(p - 1.0) * a.grad } else { 0.0 };
                Atom { value: v.powf(p), weight: a.weight, grad: g }
            })
            .collect();
        Self { atoms, space: self.space.clone() }
    }

    /// The gradient modulus viewed as a function (its own gradient is not tracked).
    pub fn gradient_modulus(&self) -> Self {
        let atoms = self.atoms.iter().map(|a| Atom { value: a.grad, weight: a.weight, grad: 0.0 }).collect();
        Self { atoms, space: self.space.clone() }
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.weight).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.value.abs() * a.weight).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.atoms.iter().fold(0.0, |m, a| m.max(a.value.abs()))
    }

    /// `|| |grad f| ||_{L^1}`.
    pub fn gradient_l1(&self) -> f64 {
        self.atoms.iter().map(|a| a.grad * a.weight).sum()
    }

    /// Weighted L^1 distance to another function sampled on the same atoms.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.atoms.len() != other.atoms.len() {
            return Err(Error::Invalid("functions are sampled on different atoms".into()));
        }
        Ok(self.atoms.iter().zip(&other.atoms).map(|(a, b)| (a.value - b.value).abs() * a.weight).sum())
    }
}

type ScalarFn = dyn Fn(&Point) -> f64 + Send + Sync;

/// An analytic test function paired with its analytic gradient modulus.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    value: Arc<ScalarFn>,
    grad: Arc<ScalarFn>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("label", &self.label).finish()
    }
}

impl TestFunction {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), value: Arc::new(value), grad: Arc::new(grad) }
    }

    pub fn from_exprs(value: &str, grad: &str) -> Result<Self> {
        let (f, g) = (Expr::parse(value)?, Expr::parse(grad)?);
        Ok(Self::new(format!("{value} | {grad}"), move |p| f.eval(p), move |p| g.eval(p)))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c, |_| 0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, p: &Point) -> f64 {
        (self.value)(p)
    }

    pub fn grad(&self, p: &Point) -> f64 {
        (self.grad)(p)
    }
}

/// Quadrature nodes and masses of a model space at a given resolution.
///
/// 1D models use the midpoint rule on equal-mass cells, balls use radial annuli
/// (functions are evaluated as radial), the Gaussian plane uses the product of
/// 1D equal-mass cells.
pub fn quadrature_nodes(space: &ModelSpace, resolution: usize) -> Result<Vec<(Point, f64)>> {
    space.validate()?;
    if resolution < 2 && !matches!(space, ModelSpace::DiscreteAtoms { .. }) {
        return Err(Error::Invalid(format!("resolution must be >= 2, got {resolution}")));
    }
    let n = resolution;
    let cell = |i: usize| (i as f64 + 0.5) / n as f64;
    Ok(match space {
        ModelSpace::UnitInterval => (0..n).map(|i| (Point::line(cell(i)), 1.0 / n as f64)).collect(),
        ModelSpace::Gaussian1d => {
            (0..n).map(|i| (Point::line(normal::quantile(cell(i))), 1.0 / n as f64)).collect()
        }
        ModelSpace::Gaussian2d => {
            let xs: Vec<f64> = (0..n).map(|i| normal::quantile(cell(i))).collect();
            let w = 1.0 / (n * n) as f64;
            xs.iter().flat_map(|&x| xs.iter().map(move |&y| (Point::plane(x, y), w))).collect()
        }
        ModelSpace::EuclideanBall { n: dim } => {
            let d = *dim as i32;
            (0..n)
                .map(|i| {
                    let (r0, r1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                    (Point::radial(cell(i)), r1.powi(d) - r0.powi(d))
                })
                .collect()
        }
        ModelSpace::DiscreteAtoms { weights } => {
            weights.iter().enumerate().map(|(i, &w)| (Point::line(i as f64), w)).collect()
        }
    })
}

/// Samples `(f, |grad f|)` at the quadrature nodes of `space`.
pub fn sample_function(space: &ModelSpace, f: &TestFunction, resolution: usize) -> Result<SampledFunction> {
    let nodes = quadrature_nodes(space, resolution)?;
    let mut atoms = Vec::with_capacity(nodes.len());
    for (i, (p, w)) in nodes.into_iter().enumerate() {
        let value = f.value(&p);
        let grad = f.grad(&p);
        if !value.is_finite() || !grad.is_finite() {
            return Err(Error::Sampling { node: i, x: p.x, reason: format!("non-finite evaluation ({value}, {grad})") });
        }
        if grad < 0.0 {
            return Err(Error::Sampling { node: i, x: p.x, reason: format!("negative gradient modulus {grad}") });
        }
        atoms.push(Atom::new(value, w, grad));
    }
    SampledFunction::new(atoms, space.clone())
}

/// Smallest `m` with `mu{f >= m} >= 1/2` and `mu{f <= m} >= 1/2`.
pub fn median(f: &SampledFunction) -> f64 {
    let mut pairs: Vec<(f64, f64)> = f.atoms().iter().map(|a| (a.value, a.weight)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    const SLACK: f64 = 1e-12;
    let mut below = 0.0;
    for &(v, w) in &pairs {
        below += w;
        // mu{f <= v} >= 1/2 first happens here; mu{f >= v} >= 1/2 then holds automatically
        if below >= 0.5 - SLACK {
            return v;
        }
    }
    pairs.last().map_or(0.0, |p| p.0)
}

/// A Borel set known through its measure, perimeter and a sequence of Lipschitz
/// approximations of its indicator (ramps of shrinking width).
#[derive(Debug, Clone)]
pub struct BorelSetApprox {
    pub measure: f64,
    pub perimeter: f64,
    pub indicator: SampledFunction,
    pub mollifications: Vec<SampledFunction>,
    pub widths: Vec<f64>,
}

impl BorelSetApprox {
    pub fn new(
        measure: f64,
        perimeter: f64,
        indicator: SampledFunction,
        mollifications: Vec<SampledFunction>,
        widths: Vec<f64>,
    ) -> Result<Self> {
        if !(measure > 0.0 && measure < 1.0) || !(perimeter >= 0.0) {
            return Err(Error::Invalid(format!("set needs measure in (0,1) and perimeter >= 0, got ({measure}, {perimeter})")));
        }
        if mollifications.is_empty() || mollifications.len() != widths.len() {
            return Err(Error::Invalid("need one width per mollification".into()));
        }
        let dists = mollifications.iter().map(|m| m.l1_distance(&indicator)).collect::<Result<Vec<_>>>()?;
        if dists.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Convergence(format!("L1 distances to the indicator do not decrease: {dists:?}")));
        }
        Ok(Self { measure, perimeter, indicator, mollifications, widths })
    }

    pub fn l1_distances(&self) -> Vec<f64> {
        self.mollifications.iter().map(|m| m.l1_distance(&self.indicator).unwrap_or(f64::NAN)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_profile_at_half() {
        // mpmath: 0.398942280401432677939946059934
        let v = gaussian_profile(0.5, GaussianMode::Exact).unwrap();
        assert!((v - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn gaussian_profile_small_sets() {
        // mpmath: I(1e-6) = 4.94833271656202397e-6, asymptotic 5.25652176975693198e-6
        let e = gaussian_profile(1e-6, GaussianMode::Exact).unwrap();
        let a = gaussian_profile(1e-6, GaussianMode::Asymptotic).unwrap();
        assert!((e / 4.948_332_716_562_024e-6 - 1.0).abs() < 1e-10);
        assert!((a / 5.256_521_769_756_932e-6 - 1.0).abs() < 1e-12);
        let ratio = e / a;
        assert!((0.8..=1.1).contains(&ratio), "{ratio}");
        // mpmath: I(0.3) = 0.347692614200073763
        let v = gaussian_profile(0.3, GaussianMode::Exact).unwrap();
        assert!((v - 0.347_692_614_200_073_8).abs() < 1e-12);
    }

    #[test]
    fn gaussian_profile_domain_and_symmetry() {
        assert!(gaussian_profile(0.0, GaussianMode::Exact).is_err());
        assert!(gaussian_profile(1.0, GaussianMode::Asymptotic).is_err());
        for k in 0..80 {
            let t = 1e-8 * (0.5f64 / 1e-8).powf(k as f64 / 79.0) * 0.999_999;
            let a = gaussian_profile(t, GaussianMode::Exact).unwrap();
            let b = gaussian_profile(1.0 - t, GaussianMode::Exact).unwrap();
            assert!((a - b).abs() <= 1e-10, "t = {t}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-8, 1e-3, 0.1, 0.37, 0.5, 0.9, 0.999] {
            let x = normal::quantile(p);
            assert!((normal::cdf(x) / p - 1.0).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn euclidean_profile_values() {
        assert!((euclidean_profile(2, 1.0).unwrap() - 3.544_907_701_811_032).abs() < 1e-12);
        // mpmath: 3 (4 pi / 3)^{1/3} = 4.83597586204940892
        assert!((euclidean_profile(3, 1.0).unwrap() - 4.835_975_862_049_409).abs() < 1e-12);
        assert_eq!(euclidean_profile(5, 0.0).unwrap(), 0.0);
        assert!(euclidean_profile(1, 0.5).is_err());
    }

    #[test]
    fn uniform_sampling_on_unit_interval() {
        let f = TestFunction::from_exprs("x", "1").unwrap();
        let s = sample_function(&ModelSpace::UnitInterval, &f, 4).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.atoms().iter().all(|a| a.weight == 0.25 && a.grad == 1.0));
    }

    #[test]
    fn constant_on_gaussian_line() {
        let s = sample_function(&ModelSpace::Gaussian1d, &TestFunction::constant(2.5), 64).unwrap();
        assert!(s.atoms().iter().all(|a| a.value == 2.5 && a.grad == 0.0));
    }

    #[test]
    fn ball_weights_are_annulus_areas() {
        let f = TestFunction::from_exprs("1 - r", "1").unwrap();
        let s = sample_function(&ModelSpace::EuclideanBall { n: 2 }, &f, 8).unwrap();
        let total: f64 = s.atoms().iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() < 1e-15);
        for (i, a) in s.atoms().iter().enumerate() {
            let area = std::f64::consts::PI * (((i + 1) as f64 / 8.0).powi(2) - (i as f64 / 8.0).powi(2));
            assert!((a.weight - area / std::f64::consts::PI).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_reports_bad_nodes() {
        let f = TestFunction::from_exprs("log(x - 0.5)", "1").unwrap();
        match sample_function(&ModelSpace::UnitInterval, &f, 4) {
            Err(Error::Sampling { node, .. }) => assert_eq!(node, 0),
            other => panic!("{other:?}"),
        }
        assert!(sample_function(&ModelSpace::UnitInterval, &f, 1).is_err());
    }

    #[test]
    fn medians() {
        let f = TestFunction::from_exprs("x", "1").unwrap();
        let s = sample_function(&ModelSpace::UnitInterval, &f, 5).unwrap();
        assert!((median(&s) - 0.5).abs() < 1e-15);
        let s = sample_function(&ModelSpace::UnitInterval, &f, 1024).unwrap();
        assert!((median(&s) - 0.5).abs() <= 0.5 / 1024.0 + 1e-15);
        let c = sample_function(&ModelSpace::Gaussian1d, &TestFunction::constant(-3.0), 16).unwrap();
        assert_eq!(median(&c), -3.0);
        let d = SampledFunction::discrete(&[(1.0, 0.3), (2.0, 0.3), (3.0, 0.4)]).unwrap();
        assert_eq!(median(&d), 2.0);
    }

    #[test]
    fn invalid_atoms_rejected() {
        assert!(SampledFunction::discrete(&[(1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(SampledFunction::discrete(&[(1.0, 1.5), (2.0, -0.5)]).is_err());
        assert!(ModelSpace::EuclideanBall { n: 1 }.validate().is_err());
    }

    #[test]
    fn profile_contracts() {
        let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
        ProfileSpec::gaussian().check_on_grid(&grid).unwrap();
        ProfileSpec::unit_interval().check_on_grid(&grid).unwrap();
        let half: Vec<f64> = grid.iter().copied().filter(|&t| t < 0.5).collect();
        ProfileSpec::power(1.0, 0.5).check_on_grid(&half).unwrap();
        let convex = ProfileSpec { flags: ProfileFlags { concave: true, ..Default::default() }, ..ProfileSpec::power(1.0, 2.0) };
        assert!(convex.check_on_grid(&half).is_err());
        assert_eq!("power:0.5".parse::<ProfileSpec>().unwrap().eval(0.25), 0.5);
        assert!("nope".parse::<ProfileSpec>().is_err());
    }
}
