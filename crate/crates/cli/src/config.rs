//! Scenario configuration (JSON).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use symineq::families;
use symineq::grid::LogGrid;
use symineq::{ModelSpace, ProfileSpec, SpaceSpec, TestFunction};

pub const DEFAULT_RESOLUTION: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-2;

/// Inequalities the runner knows how to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    Reod00,
    Pro1,
    Aa,
    Fii,
    Poincare,
    Ledoux,
    Gnlo,
    GnWeak,
    GnStrong,
    Bjc,
    Auto3,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Reod00 => "reod00",
            Self::Pro1 => "pro1",
            Self::Aa => "aa",
            Self::Fii => "fii",
            Self::Poincare => "poincare",
            Self::Ledoux => "ledoux",
            Self::Gnlo => "gnlo",
            Self::GnWeak => "gn_weak",
            Self::GnStrong => "gn_strong",
            Self::Bjc => "bjc",
            Self::Auto3 => "auto3",
        }
    }

    /// Verifiers that take the whole family and produce one report.
    pub fn is_family_level(self) -> bool {
        matches!(self, Self::Poincare | Self::Auto3)
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A t-grid: log-spaced `{lo, hi, n}` or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Log(LogGrid),
    Points(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Log(LogGrid::default())
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Log(g) => g.points(),
            GridSpec::Points(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FunctionSpec {
    Expr { expr: String, grad: String },
    Family { family: FamilyKind, count: Option<usize>, seed: Option<u64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Seeded random smooth functions.
    RandomSmooth,
    /// `clamp(x, 0, 1)`.
    ClampUnit,
    /// `1 - |x|` clipped at 0.
    Tent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySpec {
    pub id: InequalityId,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Per-inequality resolution, e.g. to keep the doubled runs of fitted checks cheap.
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Poincare source and target spaces.
    #[serde(default)]
    pub x: Option<SpaceSpec>,
    #[serde(default)]
    pub y: Option<SpaceSpec>,
    /// Reiteration point and exponent (`bjc`).
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleSpec {
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_depth() -> usize {
    10
}

fn default_count() -> usize {
    1000
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_profile() -> String {
    "gaussian".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_space")]
    pub space: ModelSpace,
    /// Profile name or `expr:<expression in x>`.
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub inequalities: Vec<InequalitySpec>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub martingale: Option<MartingaleSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_space() -> ModelSpace {
    ModelSpace::Gaussian1d
}

/// Config problems; all map to exit code 2.
#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse { line: usize, column: usize, message: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse { line, column, message } => write!(f, "config parse error at line {line}, column {column}: {message}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_owned(), e))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(r) = o.resolution {
            self.resolution = r;
        }
        if let Some(t) = o.tol {
            self.tol = t;
        }
        if let Some(s) = o.seed {
            for f in &mut self.functions {
                if let FunctionSpec::Family { seed, .. } = f {
                    *seed = Some(s);
                }
            }
            if let Some(m) = &mut self.martingale {
                m.seed = s;
            }
        }
        if let Some(out) = &o.out {
            self.output = out.clone();
        }
    }

    pub fn profile_spec(&self) -> Result<ProfileSpec, ConfigError> {
        self.profile.parse().map_err(|e| ConfigError::Invalid(format!("profile `{}`: {e}", self.profile)))
    }

    /// Checks the references the runner relies on, before anything is computed.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.space.validate().map_err(|e| ConfigError::Invalid(format!("space: {e}")))?;
        self.profile_spec()?;
        if self.resolution < 2 {
            return bad(format!("resolution must be >= 2, got {}", self.resolution));
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be >= 0, got {}", self.tol));
        }
        self.functions()?;
        let ball = matches!(self.space, ModelSpace::EuclideanBall { .. });
        for spec in &self.inequalities {
            let id = spec.id;
            if let Some(q) = spec.q {
                if !(q >= 1.0 && q.is_finite()) {
                    return bad(format!("{id}: q must be a finite number >= 1, got {q}"));
                }
            }
            if let Some(GridSpec::Log(g)) = &spec.grid {
                LogGrid::new(g.lo, g.hi, g.n).map_err(|e| ConfigError::Invalid(format!("{id}: {e}")))?;
            }
            match id {
                InequalityId::Gnlo | InequalityId::GnWeak | InequalityId::GnStrong if !ball => {
                    return bad(format!("{id} needs an euclidean_ball space"));
                }
                InequalityId::Ledoux | InequalityId::Auto3 if self.space != ModelSpace::Gaussian1d => {
                    return bad(format!("{id} needs the gaussian1d space"));
                }
                InequalityId::Fii | InequalityId::Poincare if !self.space.is_ordered_line() || ball => {
                    return bad(format!("{id} needs a one-dimensional space"));
                }
                _ => {}
            }
        }
        if let GridSpec::Log(g) = &self.grid {
            LogGrid::new(g.lo, g.hi, g.n).map_err(|e| ConfigError::Invalid(format!("grid: {e}")))?;
        }
        Ok(())
    }

    /// Expands the function list into test functions, in config order.
    pub fn functions(&self) -> Result<Vec<TestFunction>, ConfigError> {
        let mut out = Vec::new();
        for spec in &self.functions {
            match spec {
                FunctionSpec::Expr { expr, grad } => out.push(
                    TestFunction::from_exprs(expr, grad).map_err(|e| ConfigError::Invalid(format!("function `{expr}`: {e}")))?,
                ),
                FunctionSpec::Family { family: FamilyKind::RandomSmooth, count, seed } => {
                    out.extend(families::random_smooth(seed.unwrap_or(families::FAMILY_SEED), count.unwrap_or(50)))
                }
                FunctionSpec::Family { family: FamilyKind::ClampUnit, .. } => out.push(families::clamp_unit()),
                FunctionSpec::Family { family: FamilyKind::Tent, .. } => out.push(families::tent()),
            }
        }
        Ok(out)
    }
}
